//! Smith normal form over the chain rings `Z/p²` and `F_p[ε]/(ε²)`.
//!
//! Every ideal is `R`, `(p)` or `0`, so the diagonal of `U·M·V` consists of
//! ones, then copies of `p`, then zeros.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::Elem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// Invertible `U` (row operations).
    pub left: Matrix,
    /// Invertible `V` (column operations).
    pub right: Matrix,
    /// The `min(rows, cols)` diagonal entries of `U·M·V`.
    pub diag: Vec<Elem>,
    pub units: usize,
    pub p_pivots: usize,
    pub zeros: usize,
}

impl SmithForm {
    /// The diagonal matrix `U·M·V`, padded with zeros to the shape of `M`.
    pub fn diagonal_matrix(&self) -> Matrix {
        let mut d = Matrix::zeros(self.left.ring(), self.left.rows(), self.right.rows());
        for (i, &e) in self.diag.iter().enumerate() {
            d.set(i, i, e);
        }
        d
    }

    /// `log_p |im M|`.
    pub fn log_image(&self) -> u32 {
        (2 * self.units + self.p_pivots) as u32
    }

    /// `log_p |ker M|` for `M` acting on column vectors.
    pub fn log_kernel(&self) -> u32 {
        let cols = self.right.rows();
        let free = self.zeros + cols - self.diag.len();
        (self.p_pivots + 2 * free) as u32
    }
}

pub fn smith_normal_form(m: &Matrix) -> SmithForm {
    let ring = m.ring();
    let (rows, cols) = m.shape();
    let mut d = m.clone();
    let mut u = Matrix::identity(ring, rows);
    let mut v = Matrix::identity(ring, cols);
    let bound = rows.min(cols);
    let mut t = 0;
    while t < bound {
        let scan = || (t..rows).flat_map(|i| (t..cols).map(move |j| (i, j)));
        let pivot = scan()
            .find(|&(i, j)| ring.is_unit(d.get(i, j)))
            .or_else(|| scan().find(|&(i, j)| d.get(i, j) != Elem::ZERO));
        let Some((pi, pj)) = pivot else { break };
        swap_rows(&mut d, t, pi);
        swap_rows(&mut u, t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);
        let piv = d.get(t, t);
        for i in t + 1..rows {
            let x = d.get(i, t);
            if x != Elem::ZERO {
                let c = ring.div_exact(x, piv).expect("pivot of minimal valuation divides its column");
                add_row_multiple(&mut d, i, t, ring.neg(c));
                add_row_multiple(&mut u, i, t, ring.neg(c));
            }
        }
        for j in t + 1..cols {
            let x = d.get(t, j);
            if x != Elem::ZERO {
                let c = ring.div_exact(x, piv).expect("pivot of minimal valuation divides its row");
                add_col_multiple(&mut d, j, t, ring.neg(c));
                add_col_multiple(&mut v, j, t, ring.neg(c));
            }
        }
        let normaliser = if ring.is_unit(piv) {
            ring.invert(piv)
        } else {
            ring.invert(ring.lift(ring.divide_by_p(piv).expect("non-unit pivot")))
        }
        .expect("unit normaliser");
        scale_row(&mut d, t, normaliser);
        scale_row(&mut u, t, normaliser);
        t += 1;
    }
    let diag: Vec<Elem> = (0..bound).map(|i| d.get(i, i)).collect();
    let units = diag.iter().filter(|&&e| ring.is_unit(e)).count();
    let zeros = diag.iter().filter(|&&e| e == Elem::ZERO).count();
    SmithForm { left: u, right: v, p_pivots: bound - units - zeros, units, zeros, diag }
}

pub fn is_invertible(m: &Matrix) -> bool {
    m.is_square() && smith_normal_form(m).units == m.rows()
}

/// Inverse via `M⁻¹ = V·U` when `U·M·V = I`.
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::Shape(format!("inverse of a {}x{} matrix", m.rows(), m.cols())));
    }
    let snf = smith_normal_form(m);
    if snf.units != m.rows() {
        return Err(Error::NotInvertible);
    }
    Ok(&snf.right * &snf.left)
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    if a != b {
        for j in 0..m.cols() {
            let (x, y) = (m.get(a, j), m.get(b, j));
            m.set(a, j, y);
            m.set(b, j, x);
        }
    }
}

fn swap_cols(m: &mut Matrix, a: usize, b: usize) {
    if a != b {
        for i in 0..m.rows() {
            let (x, y) = (m.get(i, a), m.get(i, b));
            m.set(i, a, y);
            m.set(i, b, x);
        }
    }
}

fn add_row_multiple(m: &mut Matrix, target: usize, source: usize, c: Elem) {
    let r = m.ring();
    for j in 0..m.cols() {
        let v = r.add(m.get(target, j), r.mul(c, m.get(source, j)));
        m.set(target, j, v);
    }
}

fn add_col_multiple(m: &mut Matrix, target: usize, source: usize, c: Elem) {
    let r = m.ring();
    for i in 0..m.rows() {
        let v = r.add(m.get(i, target), r.mul(c, m.get(i, source)));
        m.set(i, target, v);
    }
}

fn scale_row(m: &mut Matrix, row: usize, c: Elem) {
    let r = m.ring();
    for j in 0..m.cols() {
        let v = r.mul(c, m.get(row, j));
        m.set(row, j, v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;

    fn z4() -> RingSpec {
        RingSpec::z_mod_p2(2).unwrap()
    }

    fn check(m: &Matrix) -> SmithForm {
        let s = smith_normal_form(m);
        assert_eq!(&(&s.left * m) * &s.right, s.diagonal_matrix());
        assert!(is_invertible(&s.left) && is_invertible(&s.right));
        s
    }

    #[test]
    fn mixed_pivots() {
        // |im| = 4 and |ker| = 4 by enumerating all 16 vectors of (Z/4)^2.
        let m = Matrix::from_ints(z4(), 2, 2, &[2, 1, 0, 2]).unwrap();
        let s = check(&m);
        assert_eq!(s.diag, vec![Elem(1), Elem(0)]);
        assert_eq!((s.log_image(), s.log_kernel()), (2, 2));
    }

    #[test]
    fn already_diagonal() {
        let r = z4();
        assert_eq!(check(&Matrix::identity(r, 2)).diag, vec![Elem(1), Elem(1)]);
        let m = Matrix::from_ints(r, 2, 2, &[2, 0, 0, 2]).unwrap();
        assert_eq!(check(&m).diag, vec![Elem(2), Elem(2)]);
    }

    #[test]
    fn invertibility() {
        let r = z4();
        let m = Matrix::from_ints(r, 2, 2, &[1, 2, 0, 3]).unwrap();
        assert!(is_invertible(&m));
        assert!((&m * &inverse(&m).unwrap()).is_identity());
        assert!(!is_invertible(&Matrix::from_ints(r, 1, 1, &[2]).unwrap()));
        assert_eq!(inverse(&Matrix::from_ints(r, 1, 1, &[2]).unwrap()), Err(Error::NotInvertible));
        assert!(is_invertible(&Matrix::identity(r, 0)));
        assert!(inverse(&Matrix::identity(r, 0)).unwrap().is_identity());
    }

    #[test]
    fn empty_shapes() {
        let r = z4();
        let s = check(&Matrix::zeros(r, 0, 3));
        assert_eq!(s.log_kernel(), 6);
        let s = check(&Matrix::zeros(r, 2, 0));
        assert_eq!((s.log_image(), s.log_kernel()), (0, 0));
    }
}
