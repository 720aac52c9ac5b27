//! Complete solution sets of linear systems over `R`.
//!
//! With `U·M·V = D` in Smith form, `M·x = b` becomes `D·y = U·b` for
//! `y = V⁻¹·x`. A unit pivot forces its coordinate, a `p` pivot is solvable
//! iff the right-hand side lies in `(p)` and leaves the coordinate free in a
//! coset of `ann(p) = (p)`, a zero pivot (or a missing one) is solvable iff
//! the right-hand side vanishes and leaves the coordinate free.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::{Elem, RingSpec};
use crate::smith::smith_normal_form;

/// A free direction of the solution set: `c·vector` for `c` in `0..order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub vector: Vec<Elem>,
    pub order: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionSpace {
    ring: RingSpec,
    particular: Option<Vec<Elem>>,
    generators: Vec<Generator>,
}

impl SolutionSpace {
    pub fn particular(&self) -> Option<&[Elem]> {
        self.particular.as_deref()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.particular.is_none()
    }

    /// Number of solutions, saturating at `u128::MAX`.
    pub fn count(&self) -> u128 {
        if self.particular.is_none() {
            return 0;
        }
        self.generators.iter().fold(1u128, |acc, g| acc.saturating_mul(g.order as u128))
    }

    /// All solutions, or [`Error::BudgetExceeded`] when there are more than `budget`.
    pub fn enumerate(&self, budget: u64) -> Result<Vec<Vec<Elem>>> {
        let count = self.count();
        if count > budget as u128 {
            return Err(Error::BudgetExceeded { needed: count, budget });
        }
        Ok(self.iter().collect())
    }

    /// Lazy enumeration, ordered lexicographically by the coefficient tuple
    /// (first generator varies slowest).
    pub fn iter(&self) -> SolutionIter<'_> {
        SolutionIter {
            space: self,
            coeffs: vec![0; self.generators.len()],
            done: self.particular.is_none(),
        }
    }

    fn combine(&self, coeffs: &[usize]) -> Vec<Elem> {
        let r = self.ring;
        let mut x = self.particular.clone().expect("non-empty solution space");
        for (g, &c) in self.generators.iter().zip(coeffs) {
            if c == 0 {
                continue;
            }
            let c = Elem(c as u8);
            for (xi, &gi) in x.iter_mut().zip(&g.vector) {
                *xi = r.add(*xi, r.mul(c, gi));
            }
        }
        x
    }
}

pub struct SolutionIter<'a> {
    space: &'a SolutionSpace,
    coeffs: Vec<usize>,
    done: bool,
}

impl Iterator for SolutionIter<'_> {
    type Item = Vec<Elem>;

    fn next(&mut self) -> Option<Vec<Elem>> {
        if self.done {
            return None;
        }
        let out = self.space.combine(&self.coeffs);
        let mut k = self.coeffs.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.coeffs[k] += 1;
            if self.coeffs[k] < self.space.generators[k].order {
                break;
            }
            self.coeffs[k] = 0;
        }
        Some(out)
    }
}

/// Solves `M·x = b`.
pub fn solve(m: &Matrix, b: &[Elem]) -> Result<SolutionSpace> {
    if b.len() != m.rows() {
        return Err(Error::Shape(format!("right-hand side of length {} for {} equations", b.len(), m.rows())));
    }
    let ring = m.ring();
    let (rows, cols) = m.shape();
    let snf = smith_normal_form(m);
    let c: Vec<Elem> = (0..rows)
        .map(|i| (0..rows).fold(Elem::ZERO, |acc, k| ring.add(acc, ring.mul(snf.left.get(i, k), b[k]))))
        .collect();
    let mut y = vec![Elem::ZERO; cols];
    let mut free: Vec<(usize, usize)> = Vec::new();
    let mut consistent = true;
    for (i, &ci) in c.iter().enumerate() {
        match snf.diag.get(i) {
            Some(&d) if ring.is_unit(d) => y[i] = ci,
            Some(&d) if d != Elem::ZERO => match ring.divide_by_p(ci) {
                Ok(t) => {
                    y[i] = ring.lift(t);
                    free.push((i, ring.p() as usize));
                }
                Err(_) => consistent = false,
            },
            _ => {
                if ci != Elem::ZERO {
                    consistent = false;
                }
                if i < snf.diag.len() {
                    free.push((i, ring.order()));
                }
            }
        }
    }
    free.extend((snf.diag.len()..cols).map(|i| (i, ring.order())));
    if !consistent {
        return Ok(SolutionSpace { ring, particular: None, generators: Vec::new() });
    }
    let v = &snf.right;
    let apply_v = |yv: &[Elem]| -> Vec<Elem> {
        (0..cols)
            .map(|i| (0..cols).fold(Elem::ZERO, |acc, k| ring.add(acc, ring.mul(v.get(i, k), yv[k]))))
            .collect()
    };
    let particular = apply_v(&y);
    let generators = free
        .into_iter()
        .map(|(i, order)| {
            let mut e = vec![Elem::ZERO; cols];
            e[i] = if order == ring.order() { ring.one() } else { ring.uniformizer() };
            Generator { vector: apply_v(&e), order }
        })
        .collect();
    Ok(SolutionSpace { ring, particular: Some(particular), generators })
}

/// Handle for a matrix-valued unknown in a [`MatrixSystem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

/// One summand `coeff · left · X · right` of a matrix equation; `None`
/// stands for an identity factor.
pub struct Term<'a> {
    pub var: Var,
    pub left: Option<&'a Matrix>,
    pub right: Option<&'a Matrix>,
    pub coeff: Elem,
}

impl<'a> Term<'a> {
    pub fn new(var: Var, left: Option<&'a Matrix>, right: Option<&'a Matrix>) -> Self {
        Term { var, left, right, coeff: Elem::ONE }
    }

    pub fn scaled(mut self, c: Elem) -> Self {
        self.coeff = c;
        self
    }
}

/// Linear system whose unknowns are the entries of several matrices,
/// with equations of the form `Σ coeff·L·X·R = C`.
pub struct MatrixSystem {
    ring: RingSpec,
    shapes: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    width: usize,
    equations: Vec<Vec<Elem>>,
    rhs: Vec<Elem>,
}

impl MatrixSystem {
    pub fn new(ring: RingSpec) -> Self {
        MatrixSystem { ring, shapes: Vec::new(), offsets: Vec::new(), width: 0, equations: Vec::new(), rhs: Vec::new() }
    }

    pub fn add_var(&mut self, rows: usize, cols: usize) -> Var {
        self.shapes.push((rows, cols));
        self.offsets.push(self.width);
        self.width += rows * cols;
        Var(self.shapes.len() - 1)
    }

    pub fn unknowns(&self) -> usize {
        self.width
    }

    pub fn add_equation(&mut self, terms: &[Term<'_>], rhs: &Matrix) -> Result<()> {
        let r = self.ring;
        let (out_rows, out_cols) = rhs.shape();
        let base = self.equations.len();
        for a in 0..out_rows {
            for b in 0..out_cols {
                self.equations.push(vec![Elem::ZERO; self.width]);
                self.rhs.push(rhs.get(a, b));
            }
        }
        for t in terms {
            let (xr, xc) = self.shapes[t.var.0];
            let lrows = t.left.map_or(xr, Matrix::rows);
            let rcols = t.right.map_or(xc, Matrix::cols);
            if t.left.is_some_and(|l| l.cols() != xr) || t.right.is_some_and(|m| m.rows() != xc) || (lrows, rcols) != (out_rows, out_cols) {
                return Err(Error::Shape("term does not match the equation shape".into()));
            }
            let lget = |a: usize, c: usize| t.left.map_or(if a == c { Elem::ONE } else { Elem::ZERO }, |l| l.get(a, c));
            let rget = |d: usize, b: usize| t.right.map_or(if d == b { Elem::ONE } else { Elem::ZERO }, |m| m.get(d, b));
            let off = self.offsets[t.var.0];
            for a in 0..out_rows {
                for c in 0..xr {
                    let l = lget(a, c);
                    if l == Elem::ZERO {
                        continue;
                    }
                    let l = r.mul(l, t.coeff);
                    for d in 0..xc {
                        for b in 0..out_cols {
                            let rv = rget(d, b);
                            if rv == Elem::ZERO {
                                continue;
                            }
                            let row = &mut self.equations[base + a * out_cols + b];
                            let idx = off + c * xc + d;
                            row[idx] = r.add(row[idx], r.mul(l, rv));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self) -> Result<SolutionSpace> {
        let data: Vec<Elem> = self.equations.iter().flatten().copied().collect();
        let m = Matrix::from_entries(self.ring, self.equations.len(), self.width, data)?;
        solve(&m, &self.rhs)
    }

    /// Splits a solution vector into the matrices of the declared unknowns.
    pub fn decode(&self, x: &[Elem]) -> Vec<Matrix> {
        self.shapes
            .iter()
            .zip(&self.offsets)
            .map(|(&(r, c), &off)| Matrix::from_entries(self.ring, r, c, x[off..off + r * c].to_vec()).expect("declared shape"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(m: &Matrix, b: &[Elem]) -> Vec<Vec<Elem>> {
        let ring = m.ring();
        let cols = m.cols();
        let mut out = Vec::new();
        let total = ring.order().pow(cols as u32);
        for code in 0..total {
            let mut x = Vec::with_capacity(cols);
            let mut c = code;
            for _ in 0..cols {
                x.push(Elem((c % ring.order()) as u8));
                c /= ring.order();
            }
            let mx: Vec<Elem> = (0..m.rows())
                .map(|i| (0..cols).fold(Elem::ZERO, |acc, k| ring.add(acc, ring.mul(m.get(i, k), x[k]))))
                .collect();
            if mx == b {
                out.push(x);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn scalar_examples() {
        let z4 = RingSpec::z_mod_p2(2).unwrap();
        let two = Matrix::from_ints(z4, 1, 1, &[2]).unwrap();
        let mut sols = solve(&two, &[Elem(2)]).unwrap().enumerate(100).unwrap();
        sols.sort();
        assert_eq!(sols, vec![vec![Elem(1)], vec![Elem(3)]]);
        assert!(solve(&two, &[Elem(1)]).unwrap().is_empty());
        let id = Matrix::identity(z4, 2);
        assert_eq!(solve(&id, &[Elem(3), Elem(2)]).unwrap().enumerate(10).unwrap(), vec![vec![Elem(3), Elem(2)]]);
    }

    #[test]
    fn budget_is_a_distinct_signal() {
        let z9 = RingSpec::z_mod_p2(3).unwrap();
        let zero = Matrix::zeros(z9, 1, 3);
        let space = solve(&zero, &[Elem(0)]).unwrap();
        assert_eq!(space.count(), 729);
        assert!(matches!(space.enumerate(100), Err(Error::BudgetExceeded { needed: 729, budget: 100 })));
    }

    #[test]
    fn agrees_with_brute_force_on_small_systems() {
        for ring in [RingSpec::z_mod_p2(2).unwrap(), RingSpec::dual_numbers(3).unwrap()] {
            let els: Vec<Elem> = ring.elements().collect();
            for &a in &els {
                for &b in &els {
                    let m = Matrix::from_entries(ring, 1, 2, vec![a, b]).unwrap();
                    for &rhs in &els {
                        let mut got = solve(&m, &[rhs]).unwrap().enumerate(1 << 20).unwrap();
                        got.sort();
                        assert_eq!(got, brute_force(&m, &[rhs]));
                    }
                }
            }
        }
    }

    #[test]
    fn matrix_unknowns() {
        // X·[2] = [2] over Z/4 for a 1x1 unknown X, plus Y = X.
        let z4 = RingSpec::z_mod_p2(2).unwrap();
        let two = Matrix::from_ints(z4, 1, 1, &[2]).unwrap();
        let mut sys = MatrixSystem::new(z4);
        let x = sys.add_var(1, 1);
        let y = sys.add_var(1, 1);
        sys.add_equation(&[Term::new(x, None, Some(&two))], &two).unwrap();
        sys.add_equation(&[Term::new(x, None, None), Term::new(y, None, None).scaled(z4.neg(z4.one()))], &Matrix::zeros(z4, 1, 1))
            .unwrap();
        let sols: Vec<Vec<Matrix>> = sys.solve().unwrap().iter().map(|s| sys.decode(&s)).collect();
        assert_eq!(sols.len(), 2);
        for s in sols {
            assert_eq!(s[0], s[1]);
            assert!(z4.is_unit(s[0].get(0, 0)));
        }
    }
}
