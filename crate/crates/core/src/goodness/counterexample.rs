//! The morphism `F(p) → F(p)` that is zero except for `p` at the last object.

use serde::Serialize;

use crate::angulation::{monodromy, strip_units};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::{validate_parity, RingSpec};
use crate::sequence::{NSigmaSequence, SequenceMorphism};

use super::middling::{search_middling_extension, MiddlingOutcome, SearchStats};
use super::{complete_base, is_good, Verdict};

pub fn counterexample_morphism(n: usize, ring: RingSpec) -> Result<SequenceMorphism> {
    if n < 4 {
        return Err(Error::InvalidN(n));
    }
    if !validate_parity(n, ring)? {
        return Err(Error::Parity { n, ring });
    }
    let f = NSigmaSequence::f_p_sequence(ring, n, 1)?;
    let mut components = vec![Matrix::zeros(ring, 1, 1); n];
    components[n - 1] = Matrix::scalar(ring, 1, ring.uniformizer());
    SequenceMorphism::new(f.clone(), f, components)
}

/// One column of the grid, in the coordinates of the canonical completion of its base.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    /// 1-based column.
    pub column: usize,
    /// `"0"` or `"p"`.
    pub base: String,
    /// Summand split off by the base: `"R(p)"` or `"ΓR[1] ⊕ ΓR[-1]"`.
    pub summand: String,
    /// First column of the map from the second to the third row.
    pub vertical: Vec<i64>,
    /// What commutation forces the third-row map to send `vertical` to:
    /// `p` times the next column's `vertical`.
    pub forced_image: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub ring: RingSpec,
    pub rank_bound: usize,
    pub budget: u64,
    pub is_morphism: bool,
    pub is_weak_isomorphism: bool,
    pub is_good: bool,
    /// Residue monodromy of the reduced part of the cone, when it is not the identity.
    pub cone_monodromy: Option<Vec<Vec<u8>>>,
    pub verdict: Verdict,
    pub stats: SearchStats,
    pub trace: Vec<TraceStep>,
    /// Every `x` with `x·p = p` is a unit.
    pub wrap_coefficient_is_unit: bool,
    /// Every `x` with `x·p = 0` lies in `(p)`.
    pub wrap_remainder_in_ideal: bool,
}

pub fn run_counterexample(n: usize, ring: RingSpec, rank_bound: usize, budget: u64) -> Result<(CounterexampleReport, MiddlingOutcome)> {
    let phi = counterexample_morphism(n, ring)?;
    let cone = phi.mapping_cone()?;
    let decomposition = strip_units(&cone)?;
    let cone_monodromy = match &decomposition.residual {
        Some(r) => monodromy(r)?.map(|m| m.to_rows()),
        None => None,
    };
    let (outcome, stats) = search_middling_extension(&phi, rank_bound, budget)?;
    let p = ring.uniformizer();
    let report = CounterexampleReport {
        n,
        ring,
        rank_bound,
        budget,
        is_morphism: phi.is_morphism(),
        is_weak_isomorphism: phi.is_weak_isomorphism(),
        is_good: is_good(&phi)?,
        cone_monodromy,
        verdict: outcome.verdict(),
        stats,
        trace: trace(&phi)?,
        wrap_coefficient_is_unit: ring.elements().filter(|&x| ring.mul(x, p) == p).all(|x| ring.is_unit(x)),
        wrap_remainder_in_ideal: ring.elements().filter(|&x| ring.mul(x, p) == ring.zero()).all(|x| ring.in_maximal_ideal(x)),
    };
    Ok((report, outcome))
}

fn trace(phi: &SequenceMorphism) -> Result<Vec<TraceStep>> {
    let n = phi.n();
    let ring = phi.source().ring();
    let p = ring.uniformizer();
    let ints = |m: &Matrix| -> Vec<i64> {
        (0..m.rows()).map(|i| if m.cols() == 0 { 0 } else { ring.to_json(m.get(i, 0)).as_i64().unwrap_or(0) }).collect()
    };
    let completions: Vec<NSigmaSequence> = (0..n).map(|j| complete_base(phi.component(j), n)).collect::<Result<_>>()?;
    Ok((0..n)
        .map(|j| {
            let base_is_p = !phi.component(j).is_zero();
            let vertical = completions[j].map(1);
            let next = completions[(j + 1) % n].map(1).scale(p);
            TraceStep {
                column: j + 1,
                base: if base_is_p { "p" } else { "0" }.into(),
                summand: if base_is_p { "R(p)" } else { "ΓR[1] ⊕ ΓR[-1]" }.into(),
                vertical: ints(vertical),
                forced_image: ints(&next),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_matches_description() {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let phi = counterexample_morphism(4, r).unwrap();
        assert!(phi.is_morphism());
        assert!(!phi.is_weak_isomorphism());
        assert!(!is_good(&phi).unwrap());
        assert!(phi.components()[..3].iter().all(Matrix::is_zero));
        assert_eq!(phi.component(3).get(0, 0), r.uniformizer());
    }

    #[test]
    fn odd_n_needs_two_p_zero() {
        let z9 = RingSpec::z_mod_p2(3).unwrap();
        assert!(matches!(counterexample_morphism(5, z9), Err(Error::Parity { .. })));
        assert!(counterexample_morphism(5, RingSpec::z_mod_p2(2).unwrap()).is_ok());
        assert!(matches!(counterexample_morphism(3, z9), Err(Error::InvalidN(3))));
    }

    #[test]
    fn trace_shapes() {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let steps = trace(&counterexample_morphism(4, r).unwrap()).unwrap();
        let bases: Vec<&str> = steps.iter().map(|s| s.base.as_str()).collect();
        assert_eq!(bases, ["0", "0", "0", "p"]);
        assert_eq!(steps[0].vertical, [1]);
        assert_eq!(steps[3].vertical, [2]);
        assert_eq!(steps[0].forced_image, [2]);
        assert_eq!(steps[2].forced_image, [0]);
        assert_eq!(steps[3].forced_image, [2]);
    }
}
