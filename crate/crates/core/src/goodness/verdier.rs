//! Verdier goodness: `φ_i = ν_{2i} μ_{1i}` through the shared row `S` of two octahedra.
//!
//! The first octahedron has top `A`, link `φ_2`, middle `S` (first map
//! `φ_2 α_1`) and bottom `T`; its morphism `A → S` is `μ_1`. The second has
//! top `R` (first map `φ_1`), link `β_1`, the same middle `S` and bottom `B`;
//! its morphism `S → B` is `ν_2`.

use crate::error::Result;
use crate::matrix::Matrix;
use crate::sequence::SequenceMorphism;
use crate::solve::Term;

use super::fillin::{fill_in_space, fill_in_system, FillInSpace};
use super::octahedron::{complete_octahedron, verify_octahedron, OctahedronWitness};
use super::{complete_base, require_angle_morphism};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerdierWitness {
    pub first: OctahedronWitness,
    pub second: OctahedronWitness,
}

impl VerdierWitness {
    pub fn mu(&self) -> &SequenceMorphism {
        &self.first.down
    }

    pub fn nu(&self) -> &SequenceMorphism {
        &self.second.across
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "first": self.first.to_json(), "second": self.second.to_json() })
    }
}

pub fn verify_verdier(phi: &SequenceMorphism, w: &VerdierWitness) -> bool {
    let (a, b) = (phi.source(), phi.target());
    let shared = w.first.top == *a
        && w.second.bottom == *b
        && w.first.middle == w.second.middle
        && w.first.down.component(1) == phi.component(1)
        && w.second.top.map(0) == phi.component(0);
    if !shared || !verify_octahedron(&w.first) || !verify_octahedron(&w.second) {
        return false;
    }
    let (mu, nu) = (w.mu(), w.nu());
    (2..phi.n()).all(|i| nu.component(i) * mu.component(i) == *phi.component(i))
}

/// Searches witnesses whose rows `S`, `T`, `R` are the standard completions
/// of `φ_2 α_1`, `φ_2` and `φ_1`. At most `budget` candidates are tried at
/// each enumeration stage.
pub fn search_verdier(phi: &SequenceMorphism, budget: u64) -> Result<Option<VerdierWitness>> {
    require_angle_morphism(phi)?;
    let (a, b) = (phi.source(), phi.target());
    let n = a.n();
    let ring = a.ring();
    let phi1 = phi.component(0);
    let phi2 = phi.component(1);
    let s = complete_base(&(phi2 * a.map(0)), n)?;
    let t = complete_base(phi2, n)?;
    let r = complete_base(phi1, n)?;
    let cap = usize::try_from(budget).unwrap_or(usize::MAX);
    let mus = fill_in_space(a, &s, &Matrix::identity(ring, a.rank(0)), phi2)?;
    for mu in mus.iter().take(cap) {
        // ν_2: S → B through (φ_1, 1) with ν_{2i} μ_{1i} = φ_i for i ≥ 3.
        let (mut sys, vars) = fill_in_system(&s, b, phi1, &Matrix::identity(ring, b.rank(1)))?;
        for i in 2..n {
            sys.add_equation(&[Term::new(vars[i - 2], None, Some(mu.component(i)))], phi.component(i))?;
        }
        let nus = FillInSpace::from_system(&s, b, phi1, &Matrix::identity(ring, b.rank(1)), sys)?;
        if nus.count() == 0 {
            continue;
        }
        let Some(first) = complete_octahedron(a, &s, &t, Some(&mu), None, budget)? else { continue };
        for nu in nus.iter().take(cap) {
            let Some(second) = complete_octahedron(&r, &s, b, None, Some(&nu), budget)? else { continue };
            let w = VerdierWitness { first: first.clone(), second };
            if verify_verdier(phi, &w) {
                return Ok(Some(w));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;
    use crate::sequence::NSigmaSequence;

    #[test]
    fn identity_morphism_round_trip() {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let f = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
        let id = SequenceMorphism::identity(&f);
        let w = search_verdier(&id, 10_000).unwrap().expect("identity is Verdier good");
        assert!(verify_verdier(&id, &w));
        let mut bad = w.clone();
        let mut comps = bad.first.down.components().to_vec();
        let e = comps[2].get(0, 0);
        comps[2].set(0, 0, r.add(e, r.uniformizer()));
        bad.first.down = SequenceMorphism::new(bad.first.top.clone(), bad.first.middle.clone(), comps).unwrap();
        assert!(!verify_verdier(&id, &bad));
    }
}
