//! Octahedra and their associated n-angles.
//!
//! Rows: `A` (top) with maps `α`, `B` (middle) with `B_1 = A_1` and first
//! map `β_1 α_1`, and `C` (bottom) with `C_1 = A_2`, `C_2 = B_2` and first
//! map `β_1`, where `β_1: A_2 → B_2` is the link. The morphism `A → B` starts
//! `(1, β_1, φ_3, …)`, the morphism `B → C` starts `(α_1, 1, ψ_3, …)`, and
//! `λ_i: A_i → C_{i−1}` for `4 ≤ i ≤ n` only enter the associated sequence.
//! In this module `β_i` names the maps of the middle row and `γ_i` those of
//! the bottom row.

use crate::angulation::is_n_angle;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sequence::{NSigmaSequence, SequenceMorphism};
use crate::solve::{MatrixSystem, Term};

use super::fillin::fill_in_space;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OctahedronWitness {
    pub top: NSigmaSequence,
    pub middle: NSigmaSequence,
    pub bottom: NSigmaSequence,
    pub down: SequenceMorphism,
    pub across: SequenceMorphism,
    /// `λ_4, …, λ_n`.
    pub lambdas: Vec<Matrix>,
}

impl OctahedronWitness {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "top": self.top.to_json(),
            "middle": self.middle.to_json(),
            "bottom": self.bottom.to_json(),
            "down": self.down.to_json(),
            "across": self.across.to_json(),
            "lambdas": self.lambdas.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Row {
    A,
    B,
    C,
}

/// Summands `(row, 1-based index)` at 1-based position `k` of the associated sequence.
fn summands(n: usize, k: usize) -> Vec<(Row, usize)> {
    let mut out = Vec::with_capacity(3);
    if k + 2 <= n {
        out.push((Row::A, k + 2));
    }
    if (2..n).contains(&k) {
        out.push((Row::B, k + 1));
    }
    if k >= 3 {
        out.push((Row::C, k));
    }
    out
}

struct Parts<'a> {
    n: usize,
    top: &'a NSigmaSequence,
    middle: &'a NSigmaSequence,
    bottom: &'a NSigmaSequence,
    down: &'a SequenceMorphism,
    across: &'a SequenceMorphism,
}

impl Parts<'_> {
    fn rank(&self, row: Row, j: usize) -> usize {
        match row {
            Row::A => self.top.rank(j - 1),
            Row::B => self.middle.rank(j - 1),
            Row::C => self.bottom.rank(j - 1),
        }
    }

    fn offsets(&self, k: usize) -> (Vec<(Row, usize, usize)>, usize) {
        let mut off = 0;
        let mut out = Vec::new();
        for (row, j) in summands(self.n, k) {
            out.push((row, j, off));
            off += self.rank(row, j);
        }
        (out, off)
    }

    /// Block `(target summand, source summand)` of map `k`, with every `λ` set to zero.
    fn block(&self, k: usize, to: (Row, usize), from: (Row, usize)) -> Option<Matrix> {
        let ring = self.top.ring();
        let alpha = |j: usize| self.top.map(j - 1);
        let phi = |j: usize| self.down.component(j - 1);
        let beta = |j: usize| self.middle.map(j - 1);
        let psi = |j: usize| self.across.component(j - 1);
        let gamma = |j: usize| self.bottom.map(j - 1);
        if k == 1 {
            return match (to.0, from.0) {
                (Row::A, Row::A) => Some(alpha(3).clone()),
                (Row::B, Row::A) => Some(phi(3).clone()),
                _ => None,
            };
        }
        match (to.0, from.0) {
            (Row::A, Row::A) => Some(-alpha(k + 2)),
            (Row::B, Row::A) => Some(phi(k + 2).scale(ring.sign(k))),
            (Row::B, Row::B) => Some(-beta(k + 1)),
            (Row::C, Row::B) => Some(psi(k + 1).clone()),
            (Row::C, Row::C) => Some(gamma(k).clone()),
            _ => None,
        }
    }

    /// Map `k` (1-based) with every `λ` zero.
    fn constant_map(&self, k: usize) -> Matrix {
        let ring = self.top.ring();
        let n = self.n;
        let (src, cols) = self.offsets(k);
        if k == n {
            let (dst, rows) = self.offsets(1);
            debug_assert_eq!((dst.len(), src.len()), (1, 1));
            let m = self.top.map(1) * self.bottom.map(n - 1);
            debug_assert_eq!(m.shape(), (rows, cols));
            return m;
        }
        let (dst, rows) = self.offsets(k + 1);
        let mut m = Matrix::zeros(ring, rows, cols);
        for &(tr, tj, to) in &dst {
            for &(sr, sj, so) in &src {
                if let Some(b) = self.block(k, (tr, tj), (sr, sj)) {
                    m.paste(to, so, &b);
                }
            }
        }
        m
    }

    /// Where `λ_{k+2}` sits in map `k`: `(row offset, column offset)`.
    fn lambda_slot(&self, k: usize) -> Option<(usize, usize)> {
        if !(2..=self.n.saturating_sub(2)).contains(&k) {
            return None;
        }
        let (src, _) = self.offsets(k);
        let (dst, _) = self.offsets(k + 1);
        let col = src.iter().find(|s| s.0 == Row::A)?.2;
        let row = dst.iter().find(|s| s.0 == Row::C)?.2;
        Some((row, col))
    }

    fn assemble(&self, lambdas: &[Matrix]) -> NSigmaSequence {
        let n = self.n;
        let maps: Vec<Matrix> = (1..=n)
            .map(|k| {
                let mut m = self.constant_map(k);
                if let Some((r, c)) = self.lambda_slot(k) {
                    m.paste(r, c, &lambdas[k - 2]);
                }
                m
            })
            .collect();
        let ranks = (1..=n).map(|k| self.offsets(k).1).collect();
        NSigmaSequence::new(self.top.ring(), ranks, maps).expect("associated sequence is well formed")
    }

    /// Candidacy of the associated sequence as a linear system in the `λ`s.
    fn lambda_system(&self) -> Result<(MatrixSystem, Vec<crate::solve::Var>)> {
        let ring = self.top.ring();
        let n = self.n;
        let mut sys = MatrixSystem::new(ring);
        // vars[j] is λ_{j+4}: A_{j+4} → C_{j+3}.
        let vars: Vec<_> = (4..=n).map(|i| sys.add_var(self.bottom.rank(i - 2), self.top.rank(i - 1))).collect();
        let constants: Vec<Matrix> = (1..=n).map(|k| self.constant_map(k)).collect();
        let dims: Vec<usize> = (1..=n).map(|k| self.offsets(k).1).collect();
        let embed = |rows: usize, cols: usize, at: usize, size: usize, as_rows: bool| {
            // Inclusion (rows×size) or projection (size×cols) at an offset.
            if as_rows {
                Matrix::from_fn(ring, rows, size, |i, j| if i == at + j { ring.one() } else { ring.zero() })
            } else {
                Matrix::from_fn(ring, size, cols, |i, j| if j == at + i { ring.one() } else { ring.zero() })
            }
        };
        let minus = ring.neg(ring.one());
        for k in 1..=n {
            let next = k % n + 1;
            let (c0, c1) = (&constants[k - 1], &constants[next - 1]);
            let (d_in, d_mid, d_out) = (dims[k - 1], dims[next - 1], dims[next % n]);
            let mut lefts = Vec::new();
            let mut terms = Vec::new();
            if let Some((r, c)) = self.lambda_slot(k) {
                let v = vars[k - 2];
                let lam_rows = self.bottom.rank(k);
                let lam_cols = self.top.rank(k + 1);
                let inc = embed(d_mid, 0, r, lam_rows, true);
                let proj = embed(0, d_in, c, lam_cols, false);
                lefts.push((v, c1 * &inc, proj));
            }
            if let Some((r, c)) = self.lambda_slot(next) {
                let v = vars[next - 2];
                let lam_rows = self.bottom.rank(next);
                let lam_cols = self.top.rank(next + 1);
                let inc = embed(d_out, 0, r, lam_rows, true);
                let proj = embed(0, d_mid, c, lam_cols, false);
                lefts.push((v, inc, &proj * c0));
            }
            for (v, l, r) in &lefts {
                terms.push(Term::new(*v, Some(l), Some(r)));
            }
            sys.add_equation(&terms, &(c1 * c0).scale(minus))?;
        }
        Ok((sys, vars))
    }
}

fn structure_ok(w: &OctahedronWitness) -> bool {
    let (a, b, c) = (&w.top, &w.middle, &w.bottom);
    let n = a.n();
    if b.n() != n || c.n() != n || b.ring() != a.ring() || c.ring() != a.ring() || n < 3 {
        return false;
    }
    if w.down.source() != a || w.down.target() != b || w.across.source() != b || w.across.target() != c {
        return false;
    }
    if b.rank(0) != a.rank(0) || c.rank(0) != a.rank(1) || c.rank(1) != b.rank(1) {
        return false;
    }
    let link = w.down.component(1);
    let lambdas_ok = w.lambdas.len() == n - 3
        && w.lambdas.iter().enumerate().all(|(j, l)| l.shape() == (c.rank(j + 2), a.rank(j + 3)));
    lambdas_ok
        && w.down.component(0).is_identity()
        && w.across.component(1).is_identity()
        && w.across.component(0) == a.map(0)
        && c.map(0) == link
        && b.map(0) == &(link * a.map(0))
}

fn parts(w: &OctahedronWitness) -> Parts<'_> {
    Parts { n: w.top.n(), top: &w.top, middle: &w.middle, bottom: &w.bottom, down: &w.down, across: &w.across }
}

/// The sequence on `A_3, A_4 ⊕ B_3, A_5 ⊕ B_4 ⊕ C_3, …, B_n ⊕ C_{n−1}, C_n`.
pub fn associated_n_angle(w: &OctahedronWitness) -> Result<NSigmaSequence> {
    if !structure_ok(w) || !w.down.is_morphism() || !w.across.is_morphism() {
        return Err(Error::Precondition("octahedron does not commute".into()));
    }
    Ok(parts(w).assemble(&w.lambdas))
}

/// Rows are n-angles, both morphisms commute, and the associated sequence is an n-angle.
pub fn verify_octahedron(w: &OctahedronWitness) -> bool {
    let Ok(assoc) = associated_n_angle(w) else { return false };
    is_n_angle(&w.top) && is_n_angle(&w.middle) && is_n_angle(&w.bottom) && is_n_angle(&assoc)
}

/// Fills in whatever is missing of an octahedron on the given rows: the
/// morphisms (unless fixed) and the `λ`s. At most `budget` candidates for
/// the associated sequence are tested.
pub fn complete_octahedron(
    top: &NSigmaSequence,
    middle: &NSigmaSequence,
    bottom: &NSigmaSequence,
    down: Option<&SequenceMorphism>,
    across: Option<&SequenceMorphism>,
    budget: u64,
) -> Result<Option<OctahedronWitness>> {
    let ring = top.ring();
    let link = bottom.map(0).clone();
    let downs: Vec<SequenceMorphism> = match down {
        Some(d) => vec![d.clone()],
        None => fill_in_space(top, middle, &Matrix::identity(ring, top.rank(0)), &link)?
            .iter()
            .take(budget as usize)
            .collect(),
    };
    let acrosses: Vec<SequenceMorphism> = match across {
        Some(x) => vec![x.clone()],
        None => fill_in_space(middle, bottom, top.map(0), &Matrix::identity(ring, middle.rank(1)))?
            .iter()
            .take(budget as usize)
            .collect(),
    };
    let mut left = budget;
    for d in &downs {
        for x in &acrosses {
            let mut w = OctahedronWitness {
                top: top.clone(),
                middle: middle.clone(),
                bottom: bottom.clone(),
                down: d.clone(),
                across: x.clone(),
                lambdas: Vec::new(),
            };
            if !structure_ok(&OctahedronWitness { lambdas: placeholder_lambdas(top, bottom), ..w.clone() }) {
                return Err(Error::Precondition("rows and morphisms do not form an octahedron".into()));
            }
            let p = parts(&w);
            let (sys, _) = p.lambda_system()?;
            let space = sys.solve()?;
            for sol in space.iter() {
                if left == 0 {
                    return Ok(None);
                }
                left -= 1;
                let lambdas = sys.decode(&sol);
                if is_n_angle(&p.assemble(&lambdas)) {
                    w.lambdas = lambdas;
                    return Ok(Some(w));
                }
            }
        }
    }
    Ok(None)
}

fn placeholder_lambdas(top: &NSigmaSequence, bottom: &NSigmaSequence) -> Vec<Matrix> {
    (4..=top.n()).map(|i| Matrix::zeros(top.ring(), bottom.rank(i - 2), top.rank(i - 1))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goodness::complete_base;
    use crate::ring::RingSpec;

    fn z4() -> RingSpec {
        RingSpec::z_mod_p2(2).unwrap()
    }

    #[test]
    fn layout_for_n4() {
        let names = |k| summands(4, k).iter().map(|&(r, j)| format!("{r:?}{j}")).collect::<Vec<_>>().join("+");
        assert_eq!((1..=4).map(names).collect::<Vec<_>>(), vec!["A3", "A4+B3", "B4+C3", "C4"]);
        let names6 = |k| summands(6, k).iter().map(|&(r, j)| format!("{r:?}{j}")).collect::<Vec<_>>().join("+");
        assert_eq!(names6(3), "A5+B4+C3");
        assert_eq!(names6(5), "B6+C5");
    }

    #[test]
    fn completed_octahedra_verify_and_perturbations_fail() {
        let r = z4();
        let a = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
        let link = Matrix::identity(r, 1);
        let b = complete_base(&(&link * a.map(0)), 4).unwrap();
        let c = complete_base(&link, 4).unwrap();
        let w = complete_octahedron(&a, &b, &c, None, None, 10_000).unwrap().expect("octahedron exists");
        assert!(verify_octahedron(&w));
        // Perturb the first non-empty filled component so a square breaks.
        let k = (2..4).find(|&i| w.down.component(i).rows() > 0 && w.down.component(i).cols() > 0).unwrap();
        let mut comps = w.down.components().to_vec();
        let e = comps[k].get(0, 0);
        comps[k].set(0, 0, r.add(e, r.one()));
        let mut bad = w.clone();
        bad.down = SequenceMorphism::new(a.clone(), b.clone(), comps).unwrap();
        assert!(!bad.down.is_morphism());
        assert!(!verify_octahedron(&bad));
    }
}
