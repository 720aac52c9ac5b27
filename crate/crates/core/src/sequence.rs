//! n-Σ-sequences over `R` with `Σ` the identity, and morphisms between them.
//!
//! Positions are 0-based in code: `maps[i]` goes from `R^{ranks[i]}` to
//! `R^{ranks[(i + 1) % n]}`. Public operations that take a slot number
//! (`trivial_gamma`) use the 1-based numbering of the mathematics.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::ring::{validate_parity, RingSpec};
use crate::smith::{is_invertible, smith_normal_form};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NSigmaSequence {
    ring: RingSpec,
    ranks: Vec<usize>,
    maps: Vec<Matrix>,
}

/// Checks `n ≥ 3` and the parity restriction.
pub fn check_n(n: usize, ring: RingSpec) -> Result<()> {
    if validate_parity(n, ring)? {
        Ok(())
    } else {
        Err(Error::Parity { n, ring })
    }
}

impl NSigmaSequence {
    pub fn new(ring: RingSpec, ranks: Vec<usize>, maps: Vec<Matrix>) -> Result<Self> {
        let n = ranks.len();
        check_n(n, ring)?;
        if maps.len() != n {
            return Err(Error::Shape(format!("{} maps for n = {n}", maps.len())));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.ring() != ring {
                return Err(Error::RingMismatch(ring, m.ring()));
            }
            if m.shape() != (ranks[(i + 1) % n], ranks[i]) {
                return Err(Error::Shape(format!(
                    "map {} is {}x{}, expected {}x{}",
                    i + 1,
                    m.rows(),
                    m.cols(),
                    ranks[(i + 1) % n],
                    ranks[i]
                )));
            }
        }
        Ok(NSigmaSequence { ring, ranks, maps })
    }

    /// Constructor for maps already known to have the right shapes.
    pub(crate) fn from_maps(ring: RingSpec, ranks: Vec<usize>, maps: Vec<Matrix>) -> Self {
        debug_assert!(maps.iter().enumerate().all(|(i, m)| m.shape() == (ranks[(i + 1) % ranks.len()], ranks[i])));
        NSigmaSequence { ring, ranks, maps }
    }

    pub fn zero(ring: RingSpec, n: usize) -> Result<Self> {
        check_n(n, ring)?;
        Ok(Self::with_ranks(ring, vec![0; n]))
    }

    /// All maps zero on the given ranks.
    pub fn with_ranks(ring: RingSpec, ranks: Vec<usize>) -> Self {
        let n = ranks.len();
        let maps = (0..n).map(|i| Matrix::zeros(ring, ranks[(i + 1) % n], ranks[i])).collect();
        NSigmaSequence { ring, ranks, maps }
    }

    /// The trivial sequence with `1: R^rank → R^rank` as map number `slot` (1-based).
    pub fn trivial_gamma(ring: RingSpec, n: usize, rank: usize, slot: usize) -> Result<Self> {
        check_n(n, ring)?;
        if slot == 0 || slot > n {
            return Err(Error::SlotOutOfRange { slot, n });
        }
        let i = slot - 1;
        let mut ranks = vec![0; n];
        ranks[i] += rank;
        ranks[(i + 1) % n] += rank;
        let mut s = Self::with_ranks(ring, ranks);
        s.maps[i] = Matrix::identity(ring, rank);
        Ok(s)
    }

    /// `F(p)^rank`: every object `R^rank`, every map `p·1`.
    pub fn f_p_sequence(ring: RingSpec, n: usize, rank: usize) -> Result<Self> {
        check_n(n, ring)?;
        let p = Matrix::scalar(ring, rank, ring.uniformizer());
        Ok(NSigmaSequence { ring, ranks: vec![rank; n], maps: vec![p; n] })
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn rank(&self, i: usize) -> usize {
        self.ranks[i % self.n()]
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    /// Map at 0-based position `i`, taken cyclically.
    pub fn map(&self, i: usize) -> &Matrix {
        &self.maps[i % self.n()]
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn into_maps(self) -> Vec<Matrix> {
        self.maps
    }

    /// `(α_2, …, α_n, (−1)^n α_1)` on `(r_2, …, r_n, r_1)`.
    pub fn rotate_left(&self) -> Self {
        let n = self.n();
        let mut ranks = self.ranks.clone();
        ranks.rotate_left(1);
        let mut maps = self.maps.clone();
        maps.rotate_left(1);
        maps[n - 1] = maps[n - 1].scale(self.ring.sign(n));
        NSigmaSequence { ring: self.ring, ranks, maps }
    }

    /// `((−1)^n α_n, α_1, …, α_{n−1})` on `(r_n, r_1, …, r_{n−1})`.
    pub fn rotate_right(&self) -> Self {
        let n = self.n();
        let mut ranks = self.ranks.clone();
        ranks.rotate_right(1);
        let mut maps = self.maps.clone();
        maps.rotate_right(1);
        maps[0] = maps[0].scale(self.ring.sign(n));
        NSigmaSequence { ring: self.ring, ranks, maps }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.same_frame(other)?;
        let ranks = self.ranks.iter().zip(&other.ranks).map(|(a, b)| a + b).collect();
        let maps = self.maps.iter().zip(&other.maps).map(|(a, b)| a.direct_sum(b)).collect();
        Ok(NSigmaSequence { ring: self.ring, ranks, maps })
    }

    /// Direct sum of a list of sequences on a common frame.
    pub fn sum_all(ring: RingSpec, n: usize, parts: &[NSigmaSequence]) -> Result<Self> {
        parts.iter().try_fold(Self::zero(ring, n)?, |acc, s| acc.direct_sum(s))
    }

    fn same_frame(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring, other.ring));
        }
        if self.n() != other.n() {
            return Err(Error::Shape(format!("n = {} vs n = {}", self.n(), other.n())));
        }
        Ok(())
    }

    /// `α_i ↦ U_{i+1}·α_i·U_i⁻¹`.
    pub fn conjugate(&self, us: &[Matrix]) -> Result<Self> {
        let n = self.n();
        if us.len() != n {
            return Err(Error::Shape(format!("{} conjugating matrices for n = {n}", us.len())));
        }
        let mut inverses = Vec::with_capacity(n);
        for (u, &r) in us.iter().zip(&self.ranks) {
            if u.shape() != (r, r) {
                return Err(Error::Shape(format!("conjugating matrix {}x{} at rank {r}", u.rows(), u.cols())));
            }
            inverses.push(crate::smith::inverse(u)?);
        }
        let maps = (0..n).map(|i| &(&us[(i + 1) % n] * &self.maps[i]) * &inverses[i]).collect();
        Ok(NSigmaSequence { ring: self.ring, ranks: self.ranks.clone(), maps })
    }

    /// All cyclic composites `α_{i+1}·α_i` vanish, including `α_1·α_n`.
    pub fn is_candidate(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (self.map(i + 1) * &self.maps[i]).is_zero())
    }

    /// `|im α_i| = |ker α_{i+1}|` at every position.
    pub fn is_exact(&self) -> Result<bool> {
        if !self.is_candidate() {
            return Err(Error::NotCandidate);
        }
        let snfs: Vec<_> = self.maps.iter().map(smith_normal_form).collect();
        let n = self.n();
        Ok((0..n).all(|i| snfs[i].log_image() == snfs[(i + 1) % n].log_kernel()))
    }

    /// Every map has all entries in `(p)`.
    pub fn is_reduced(&self) -> bool {
        self.maps.iter().all(Matrix::in_maximal_ideal)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ring": self.ring,
            "n": self.n(),
            "ranks": self.ranks,
            "maps": self.maps.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let ring: RingSpec = serde_json::from_value(v.get("ring").cloned().ok_or_else(|| Error::Input("sequence is missing `ring`".into()))?)
            .map_err(|e| Error::Input(format!("bad ring: {e}")))?;
        let ranks: Vec<usize> = serde_json::from_value(v.get("ranks").cloned().ok_or_else(|| Error::Input("sequence is missing `ranks`".into()))?)
            .map_err(|e| Error::Input(format!("bad ranks: {e}")))?;
        if let Some(n) = v.get("n") {
            if n.as_u64() != Some(ranks.len() as u64) {
                return Err(Error::Input(format!("`n` = {n} does not match {} ranks", ranks.len())));
            }
        }
        let maps = v
            .get("maps")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Input("sequence is missing `maps`".into()))?
            .iter()
            .map(|m| Matrix::from_json(ring, m))
            .collect::<Result<Vec<_>>>()?;
        NSigmaSequence::new(ring, ranks, maps)
    }
}

/// `φ_1, …, φ_n` with `φ_i: A_i → B_i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SequenceMorphism {
    source: NSigmaSequence,
    target: NSigmaSequence,
    components: Vec<Matrix>,
}

impl SequenceMorphism {
    /// Checks shapes only; see [`SequenceMorphism::is_morphism`] for the squares.
    pub fn new(source: NSigmaSequence, target: NSigmaSequence, components: Vec<Matrix>) -> Result<Self> {
        source.same_frame(&target)?;
        if components.len() != source.n() {
            return Err(Error::Shape(format!("{} components for n = {}", components.len(), source.n())));
        }
        for (i, c) in components.iter().enumerate() {
            if c.ring() != source.ring {
                return Err(Error::RingMismatch(source.ring, c.ring()));
            }
            if c.shape() != (target.ranks[i], source.ranks[i]) {
                return Err(Error::Shape(format!(
                    "component {} is {}x{}, expected {}x{}",
                    i + 1,
                    c.rows(),
                    c.cols(),
                    target.ranks[i],
                    source.ranks[i]
                )));
            }
        }
        Ok(SequenceMorphism { source, target, components })
    }

    pub fn identity(a: &NSigmaSequence) -> Self {
        let components = a.ranks.iter().map(|&r| Matrix::identity(a.ring, r)).collect();
        SequenceMorphism { source: a.clone(), target: a.clone(), components }
    }

    pub fn zero(a: &NSigmaSequence, b: &NSigmaSequence) -> Result<Self> {
        let components = a.ranks.iter().zip(&b.ranks).map(|(&r, &s)| Matrix::zeros(a.ring, s, r)).collect();
        Self::new(a.clone(), b.clone(), components)
    }

    pub fn source(&self) -> &NSigmaSequence {
        &self.source
    }

    pub fn target(&self) -> &NSigmaSequence {
        &self.target
    }

    pub fn components(&self) -> &[Matrix] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Matrix {
        &self.components[i % self.components.len()]
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    /// `φ_{i+1}·α_i = β_i·φ_i` for every `i`, with `φ_{n+1} = φ_1`.
    pub fn is_morphism(&self) -> bool {
        (0..self.n()).all(|i| self.square_commutes(i))
    }

    /// The square at 0-based position `i`.
    pub fn square_commutes(&self, i: usize) -> bool {
        self.component(i + 1) * self.source.map(i) == self.target.map(i) * &self.components[i]
    }

    pub fn is_isomorphism(&self) -> bool {
        self.is_morphism() && self.components.iter().all(is_invertible)
    }

    /// Some two consecutive components (cyclically) are invertible.
    pub fn is_weak_isomorphism(&self) -> bool {
        let inv: Vec<bool> = self.components.iter().map(is_invertible).collect();
        self.is_morphism() && (0..self.n()).any(|i| inv[i] && inv[(i + 1) % self.n()])
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &SequenceMorphism) -> Result<Self> {
        if first.target != self.source {
            return Err(Error::Shape("composable morphisms must share the middle sequence".into()));
        }
        let components = self.components.iter().zip(&first.components).map(|(g, f)| g * f).collect::<Vec<_>>();
        Ok(SequenceMorphism { source: first.source.clone(), target: self.target.clone(), components })
    }

    /// Objects `A_{i+1} ⊕ B_i`, maps `[[−α_{i+1}, 0], [φ_{i+1}, β_i]]`.
    pub fn mapping_cone(&self) -> Result<NSigmaSequence> {
        if !self.is_morphism() {
            return Err(Error::NotMorphism);
        }
        Ok(self.cone_unchecked())
    }

    pub(crate) fn cone_unchecked(&self) -> NSigmaSequence {
        let (a, b) = (&self.source, &self.target);
        let n = a.n();
        let ring = a.ring;
        let ranks = (0..n).map(|i| a.rank(i + 1) + b.ranks[i]).collect();
        let maps = (0..n)
            .map(|i| {
                let alpha = -a.map(i + 1);
                let zero = Matrix::zeros(ring, a.rank(i + 2), b.ranks[i]);
                Matrix::block(&[vec![&alpha, &zero], vec![self.component(i + 1), b.map(i)]]).expect("cone blocks are conformable")
            })
            .collect();
        NSigmaSequence { ring, ranks, maps }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "components": self.components.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let part = |k: &str| v.get(k).ok_or_else(|| Error::Input(format!("morphism is missing `{k}`")));
        let source = NSigmaSequence::from_json(part("source")?)?;
        let target = NSigmaSequence::from_json(part("target")?)?;
        let components = part("components")?
            .as_array()
            .ok_or_else(|| Error::Input("`components` must be an array".into()))?
            .iter()
            .map(|m| Matrix::from_json(source.ring, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(source, target, components)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Elem;

    fn z4() -> RingSpec {
        RingSpec::z_mod_p2(2).unwrap()
    }

    #[test]
    fn trivial_and_fp_shapes() {
        let g = NSigmaSequence::trivial_gamma(z4(), 4, 1, 1).unwrap();
        assert_eq!(g.ranks(), &[1, 1, 0, 0]);
        assert!(g.map(0).is_identity());
        let g = NSigmaSequence::trivial_gamma(z4(), 4, 2, 4).unwrap();
        assert_eq!(g.ranks(), &[2, 0, 0, 2]);
        assert!(g.map(3).is_identity());
        assert_eq!(NSigmaSequence::trivial_gamma(z4(), 4, 0, 2).unwrap().total_rank(), 0);
        assert_eq!(NSigmaSequence::trivial_gamma(z4(), 4, 1, 5), Err(Error::SlotOutOfRange { slot: 5, n: 4 }));
        let z9 = RingSpec::z_mod_p2(3).unwrap();
        let f = NSigmaSequence::f_p_sequence(z9, 4, 2).unwrap();
        assert!(f.maps().iter().all(|m| *m == Matrix::scalar(z9, 2, Elem(3))));
    }

    #[test]
    fn rotations() {
        let f = NSigmaSequence::f_p_sequence(z4(), 4, 1).unwrap();
        assert_eq!(f.rotate_left(), f);
        let f5 = NSigmaSequence::f_p_sequence(z4(), 5, 1).unwrap();
        assert_eq!(f5.rotate_left(), f5);
        let z9 = RingSpec::z_mod_p2(3).unwrap();
        assert_eq!(NSigmaSequence::f_p_sequence(z9, 5, 1), Err(Error::Parity { n: 5, ring: z9 }));
        let s = NSigmaSequence::new(
            z9,
            vec![1, 1, 1],
            vec![Matrix::from_ints(z9, 1, 1, &[3]).unwrap(), Matrix::from_ints(z9, 1, 1, &[6]).unwrap(), Matrix::from_ints(z9, 1, 1, &[0]).unwrap()],
        );
        assert!(matches!(s, Err(Error::Parity { .. })));
    }

    #[test]
    fn candidacy_and_exactness() {
        let r = z4();
        let f = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
        assert!(f.is_candidate() && f.is_exact().unwrap());
        let one = Matrix::identity(r, 1);
        let zero = Matrix::zeros(r, 1, 1);
        let bad = NSigmaSequence::new(r, vec![1; 4], vec![one.clone(), one, zero.clone(), zero]).unwrap();
        assert!(!bad.is_candidate());
        assert_eq!(bad.is_exact(), Err(Error::NotCandidate));
        assert!(!NSigmaSequence::with_ranks(r, vec![1; 4]).is_exact().unwrap());
    }

    #[test]
    fn identity_cone_layout() {
        let r = z4();
        let f = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
        let cone = SequenceMorphism::identity(&f).mapping_cone().unwrap();
        let expected = Matrix::from_ints(r, 2, 2, &[-2, 0, 1, 2]).unwrap();
        assert!(cone.maps().iter().all(|m| *m == expected));
        assert!(cone.is_candidate());
    }

    #[test]
    fn weak_isomorphisms() {
        let r = z4();
        let f = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
        let zero = Matrix::zeros(r, 1, 1);
        let phi = SequenceMorphism::new(f.clone(), f.clone(), vec![zero.clone(), zero.clone(), zero, Matrix::scalar(r, 1, Elem(2))]).unwrap();
        assert!(phi.is_morphism());
        assert!(!phi.is_weak_isomorphism());
        assert!(SequenceMorphism::identity(&f).is_isomorphism());
    }

    #[test]
    fn json_round_trip() {
        let d = RingSpec::dual_numbers(3).unwrap();
        let g = NSigmaSequence::trivial_gamma(d, 4, 1, 2).unwrap().direct_sum(&NSigmaSequence::f_p_sequence(d, 4, 1).unwrap()).unwrap();
        assert_eq!(NSigmaSequence::from_json(&g.to_json()).unwrap(), g);
        let phi = SequenceMorphism::identity(&g);
        assert_eq!(SequenceMorphism::from_json(&phi.to_json()).unwrap(), phi);
    }
}
