//! Dense matrices over `R` and over the residue field `k`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::ring::{Elem, ResidueElement, RingSpec};

/// Row-major matrix over a ring from [`crate::ring`]. Zero-row and
/// zero-column matrices are legal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matrix {
    ring: RingSpec,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(ring: RingSpec, rows: usize, cols: usize) -> Self {
        Matrix { ring, rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    pub fn identity(ring: RingSpec, n: usize) -> Self {
        Self::scalar(ring, n, ring.one())
    }

    pub fn scalar(ring: RingSpec, n: usize, c: Elem) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.set(i, i, c);
        }
        m
    }

    pub fn from_fn(ring: RingSpec, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { ring, rows, cols, data }
    }

    pub fn from_entries(ring: RingSpec, rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|e| e.0 as usize >= ring.order()) {
            return Err(Error::Input("entry outside the ring".into()));
        }
        Ok(Matrix { ring, rows, cols, data })
    }

    /// Builds a matrix from small integers (reduced into the ring).
    pub fn from_ints(ring: RingSpec, rows: usize, cols: usize, ints: &[i64]) -> Result<Self> {
        if ints.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} matrix", ints.len())));
        }
        Ok(Matrix { ring, rows, cols, data: ints.iter().map(|&v| ring.from_int(v)).collect() })
    }

    pub fn column(ring: RingSpec, entries: &[Elem]) -> Self {
        Matrix { ring, rows: entries.len(), cols: 1, data: entries.to_vec() }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Elem] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == Elem::ZERO)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == if i == j { Elem::ONE } else { Elem::ZERO }))
    }

    /// All entries lie in the maximal ideal `(p)`.
    pub fn in_maximal_ideal(&self) -> bool {
        self.data.iter().all(|&e| self.ring.in_maximal_ideal(e))
    }

    pub fn try_mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.ring != rhs.ring {
            return Err(Error::RingMismatch(self.ring, rhs.ring));
        }
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let r = self.ring;
        let mut out = Matrix::zeros(r, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Elem::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] = r.add(out.data[idx], r.mul(a, rhs.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.ring != rhs.ring {
            return Err(Error::RingMismatch(self.ring, rhs.ring));
        }
        if self.shape() != rhs.shape() {
            return Err(Error::Shape(format!("cannot add {:?} and {:?}", self.shape(), rhs.shape())));
        }
        let r = self.ring;
        Ok(Matrix {
            ring: r,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| r.add(a, b)).collect(),
        })
    }

    pub fn scale(&self, c: Elem) -> Matrix {
        let r = self.ring;
        Matrix { data: self.data.iter().map(|&a| r.mul(c, a)).collect(), ..self.clone() }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.ring, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Assembles a block matrix. Every block in a grid row must share its row
    /// count and every block in a grid column its column count.
    pub fn block(grid: &[Vec<&Matrix>]) -> Result<Matrix> {
        let ring = grid
            .iter()
            .flatten()
            .map(|m| m.ring)
            .next()
            .ok_or_else(|| Error::Shape("empty block grid".into()))?;
        let width = grid[0].len();
        if grid.iter().any(|row| row.len() != width) {
            return Err(Error::Shape("ragged block grid".into()));
        }
        let row_heights: Vec<usize> = grid.iter().map(|row| row[0].rows).collect();
        let col_widths: Vec<usize> = (0..width).map(|j| grid[0][j].cols).collect();
        for (bi, row) in grid.iter().enumerate() {
            for (bj, m) in row.iter().enumerate() {
                if m.ring != ring {
                    return Err(Error::RingMismatch(ring, m.ring));
                }
                if m.rows != row_heights[bi] || m.cols != col_widths[bj] {
                    return Err(Error::Shape(format!("block ({bi},{bj}) has shape {:?}", m.shape())));
                }
            }
        }
        let rows = row_heights.iter().sum();
        let cols = col_widths.iter().sum();
        let mut out = Matrix::zeros(ring, rows, cols);
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, m) in row.iter().enumerate() {
                for i in 0..m.rows {
                    for j in 0..m.cols {
                        out.set(r0 + i, c0 + j, m.get(i, j));
                    }
                }
                c0 += col_widths[bj];
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.ring, self.rows + other.rows, self.cols + other.cols);
        out.paste(0, 0, self);
        out.paste(self.rows, self.cols, other);
        out
    }

    pub fn paste(&mut self, r0: usize, c0: usize, m: &Matrix) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self.set(r0 + i, c0 + j, m.get(i, j));
            }
        }
    }

    /// Writes `m` into the principal submatrix on the given indices.
    pub fn paste_submatrix(&mut self, idx: &[usize], m: &Matrix) {
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                self.set(i, j, m.get(a, b));
            }
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(self.ring, rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    pub fn residue_matrix(&self) -> ResidueMatrix {
        ResidueMatrix {
            p: self.ring.p(),
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&e| self.ring.residue(e).0).collect(),
        }
    }

    /// For a matrix with entries in `(p)`, the residue matrix `B̄` with `M = p·B`.
    pub fn divide_by_p(&self) -> Result<ResidueMatrix> {
        let data = self
            .data
            .iter()
            .map(|&e| self.ring.divide_by_p(e).map(|r| r.0))
            .collect::<Result<Vec<u8>>>()?;
        Ok(ResidueMatrix { p: self.ring.p(), rows: self.rows, cols: self.cols, data })
    }

    /// Canonical lift of a residue matrix to `R`.
    pub fn lift(ring: RingSpec, m: &ResidueMatrix) -> Matrix {
        Matrix::from_fn(ring, m.rows, m.cols, |i, j| ring.lift(ResidueElement(m.get(i, j))))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rows": self.rows,
            "cols": self.cols,
            "entries": self.data.iter().map(|&e| self.ring.to_json(e)).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ring: RingSpec, v: &serde_json::Value) -> Result<Matrix> {
        let field = |k: &str| v.get(k).ok_or_else(|| Error::Input(format!("matrix is missing `{k}`")));
        let rows = field("rows")?.as_u64().ok_or_else(|| Error::Input("`rows` must be a non-negative integer".into()))? as usize;
        let cols = field("cols")?.as_u64().ok_or_else(|| Error::Input("`cols` must be a non-negative integer".into()))? as usize;
        let entries = field("entries")?.as_array().ok_or_else(|| Error::Input("`entries` must be an array".into()))?;
        let data = entries.iter().map(|e| ring.from_json(e)).collect::<Result<Vec<_>>>()?;
        Matrix::from_entries(ring, rows, cols, data)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.ring.format(self.get(i, j)))?;
            }
        }
        write!(f, "]_{}x{}", self.rows, self.cols)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    /// Panics on shape or ring mismatch; use [`Matrix::try_mul`] for a checked product.
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.try_mul(rhs).expect("matrix product")
    }
}

impl Add for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        self.try_add(rhs).expect("matrix sum")
    }
}

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        let r = self.ring;
        Matrix { data: self.data.iter().map(|&a| r.neg(a)).collect(), ..self.clone() }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        self + &(-rhs)
    }
}

/// Matrix over the residue field `F_p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ResidueMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl ResidueMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        ResidueMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(p: u32, rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let data = rows.iter().flat_map(|r| r.iter().map(|&v| (v as u32 % p) as u8)).collect();
        ResidueMatrix { p, rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i * self.cols + j] = (v as u32 % self.p) as u8;
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j) == u8::from(i == j)))
    }

    pub fn mul(&self, rhs: &ResidueMatrix) -> Result<ResidueMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!("cannot multiply {}x{} by {}x{} over k", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        let p = self.p;
        let mut out = Self::zeros(p, self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let s: u32 = (0..self.cols).map(|k| self.get(i, k) as u32 * rhs.get(k, j) as u32).sum();
                out.set(i, j, (s % p) as u8);
            }
        }
        Ok(out)
    }

    /// Row echelon form by Gaussian elimination; returns the rank.
    pub fn rank(&self) -> usize {
        self.reduce(None).0
    }

    pub fn inverse(&self) -> Result<ResidueMatrix> {
        if self.rows != self.cols {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        let mut inv = Self::identity(self.p, self.rows);
        let (rank, _) = self.reduce(Some(&mut inv));
        if rank < self.rows {
            return Err(Error::NotInvertible);
        }
        Ok(inv)
    }

    /// Gauss-Jordan elimination, replaying every row operation on `companion`.
    fn reduce(&self, mut companion: Option<&mut ResidueMatrix>) -> (usize, ResidueMatrix) {
        let p = self.p;
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(piv) = (rank..m.rows).find(|&r| m.get(r, col) != 0) else { continue };
            m.swap_rows(rank, piv);
            if let Some(c) = companion.as_deref_mut() {
                c.swap_rows(rank, piv);
            }
            let inv = inverse_mod(m.get(rank, col) as u32, p);
            m.scale_row(rank, inv);
            if let Some(c) = companion.as_deref_mut() {
                c.scale_row(rank, inv);
            }
            for r in 0..m.rows {
                if r != rank && m.get(r, col) != 0 {
                    let f = p - m.get(r, col) as u32;
                    m.add_row_multiple(r, rank, f);
                    if let Some(c) = companion.as_deref_mut() {
                        c.add_row_multiple(r, rank, f);
                    }
                }
            }
            rank += 1;
        }
        (rank, m)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn scale_row(&mut self, r: usize, f: u32) {
        for j in 0..self.cols {
            let v = self.get(r, j) as u32 * f % self.p;
            self.set(r, j, v as u8);
        }
    }

    fn add_row_multiple(&mut self, target: usize, source: usize, f: u32) {
        for j in 0..self.cols {
            let v = (self.get(target, j) as u32 + f * self.get(source, j) as u32) % self.p;
            self.set(target, j, v as u8);
        }
    }
}

fn inverse_mod(a: u32, p: u32) -> u32 {
    (1..p).find(|&x| a * x % p == 1).unwrap_or(0)
}

impl fmt::Debug for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} over F_{}", self.to_rows(), self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4() -> RingSpec {
        RingSpec::z_mod_p2(2).unwrap()
    }

    #[test]
    fn product_of_uniformizers_vanishes() {
        let a = Matrix::from_ints(z4(), 1, 1, &[2]).unwrap();
        assert!((&a * &a).is_zero());
    }

    #[test]
    fn residue_reduction() {
        let m = Matrix::from_ints(z4(), 2, 2, &[2, 1, 0, 2]).unwrap();
        assert_eq!(m.residue_matrix(), ResidueMatrix::from_rows(2, &[vec![0, 1], vec![0, 0]]));
    }

    #[test]
    fn cone_block_layout() {
        let r = z4();
        let alpha = Matrix::from_ints(r, 1, 1, &[2]).unwrap();
        let phi = Matrix::from_ints(r, 1, 1, &[1]).unwrap();
        let beta = Matrix::from_ints(r, 1, 1, &[2]).unwrap();
        let zero = Matrix::zeros(r, 1, 1);
        let neg = -&alpha;
        let b = Matrix::block(&[vec![&neg, &zero], vec![&phi, &beta]]).unwrap();
        assert_eq!(b, Matrix::from_ints(r, 2, 2, &[2, 0, 1, 2]).unwrap());
    }

    #[test]
    fn shape_errors() {
        let a = Matrix::zeros(z4(), 2, 3);
        assert!(matches!(a.try_mul(&a), Err(Error::Shape(_))));
        let b = Matrix::zeros(z4(), 3, 3);
        assert!(matches!(a.try_add(&b), Err(Error::Shape(_))));
        let c = Matrix::zeros(z4(), 1, 1);
        assert!(matches!(Matrix::block(&[vec![&a, &c]]), Err(Error::Shape(_))));
    }

    #[test]
    fn residue_inverse() {
        let m = ResidueMatrix::from_rows(3, &[vec![1, 2], vec![0, 2]]);
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).unwrap().is_identity());
        let sing = ResidueMatrix::from_rows(3, &[vec![1, 2], vec![2, 1]]);
        assert_eq!(sing.rank(), 1);
        assert_eq!(sing.inverse(), Err(Error::NotInvertible));
    }
}
