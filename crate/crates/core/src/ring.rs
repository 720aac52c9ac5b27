//! Arithmetic in the finite local rings `Z/p²` and `F_p[ε]/(ε²)`.
//!
//! Both families share one encoding: an element is stored as the index
//! `a + p·b` where `a` is its residue in `k = R/(p)` and `b` is the
//! coefficient of the uniformizer. For `Z/p²` this index is the least
//! non-negative representative itself; for the dual numbers it encodes
//! `a + bε`. Only addition and multiplication differ between the two
//! (carrying versus not carrying into the uniformizer digit).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported residue characteristic.
pub const MAX_PRIME: u32 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RingKind {
    #[serde(rename = "z-mod-p2")]
    ZModPSquared,
    #[serde(rename = "dual-numbers")]
    DualNumbers,
}

/// One of the admitted rings, identified by family and residue characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RingSpecRepr")]
pub struct RingSpec {
    kind: RingKind,
    p: u32,
}

#[derive(Deserialize)]
struct RingSpecRepr {
    kind: RingKind,
    p: u32,
}

impl TryFrom<RingSpecRepr> for RingSpec {
    type Error = Error;

    fn try_from(repr: RingSpecRepr) -> Result<Self> {
        RingSpec::new(repr.kind, repr.p)
    }
}

/// Raw element of some ring; meaningful only together with its [`RingSpec`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Elem(pub(crate) u8);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    /// Canonical index in `[0, p²)`.
    pub fn index(self) -> u8 {
        self.0
    }
}

/// Element of the residue field `k = R/(p)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueElement(pub u8);

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..p).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl RingSpec {
    pub fn new(kind: RingKind, p: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > MAX_PRIME {
            return Err(Error::PrimeTooLarge(p));
        }
        Ok(RingSpec { kind, p })
    }

    pub fn z_mod_p2(p: u32) -> Result<Self> {
        Self::new(RingKind::ZModPSquared, p)
    }

    pub fn dual_numbers(p: u32) -> Result<Self> {
        Self::new(RingKind::DualNumbers, p)
    }

    /// Parses the short names used on the command line: `z4`, `z9`, `z25`,
    /// `z49`, `f2eps`, `f3eps`, `f5eps`, `f7eps`.
    pub fn parse_short(name: &str) -> Result<Self> {
        let bad = || Error::Input(format!("unknown ring `{name}`"));
        if let Some(rest) = name.strip_prefix('z') {
            let order: u32 = rest.parse().map_err(|_| bad())?;
            let p = (2..=MAX_PRIME).find(|p| p * p == order).ok_or_else(bad)?;
            return Self::z_mod_p2(p);
        }
        if let Some(rest) = name.strip_prefix('f').and_then(|r| r.strip_suffix("eps")) {
            let p: u32 = rest.parse().map_err(|_| bad())?;
            return Self::dual_numbers(p);
        }
        Err(bad())
    }

    pub fn short_name(&self) -> String {
        match self.kind {
            RingKind::ZModPSquared => format!("z{}", self.p * self.p),
            RingKind::DualNumbers => format!("f{}eps", self.p),
        }
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Number of elements, always `p²`.
    pub fn order(&self) -> usize {
        (self.p * self.p) as usize
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.order() as u8).map(Elem)
    }

    pub fn units(&self) -> impl Iterator<Item = Elem> + Clone + '_ {
        self.elements().filter(move |&e| self.is_unit(e))
    }

    pub fn zero(&self) -> Elem {
        Elem::ZERO
    }

    pub fn one(&self) -> Elem {
        Elem::ONE
    }

    /// The generator of the maximal ideal: `p` in `Z/p²`, `ε` for dual numbers.
    pub fn uniformizer(&self) -> Elem {
        Elem(self.p as u8)
    }

    /// `(-1)^k`.
    pub fn sign(&self, k: usize) -> Elem {
        if k.is_multiple_of(2) {
            self.one()
        } else {
            self.neg(self.one())
        }
    }

    pub fn from_parts(&self, residue: u8, digit: u8) -> Elem {
        let p = self.p as u8;
        Elem(residue % p + p * (digit % p))
    }

    /// Reduces an arbitrary integer into `Z/p²`, or into the residue part
    /// of the dual numbers.
    pub fn from_int(&self, v: i64) -> Elem {
        match self.kind {
            RingKind::ZModPSquared => Elem(v.rem_euclid(self.order() as i64) as u8),
            RingKind::DualNumbers => Elem(v.rem_euclid(self.p as i64) as u8),
        }
    }

    fn parts(&self, e: Elem) -> (u8, u8) {
        let p = self.p as u8;
        (e.0 % p, e.0 / p)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match self.kind {
            RingKind::ZModPSquared => Elem(((a.0 as u16 + b.0 as u16) % self.order() as u16) as u8),
            RingKind::DualNumbers => {
                let (a0, a1) = self.parts(a);
                let (b0, b1) = self.parts(b);
                self.from_parts(a0 + b0, a1 + b1)
            }
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        match self.kind {
            RingKind::ZModPSquared => Elem(((self.order() as u16 - a.0 as u16) % self.order() as u16) as u8),
            RingKind::DualNumbers => {
                let p = self.p as u8;
                let (a0, a1) = self.parts(a);
                self.from_parts(p - a0, p - a1)
            }
        }
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match self.kind {
            RingKind::ZModPSquared => Elem(((a.0 as u16 * b.0 as u16) % self.order() as u16) as u8),
            RingKind::DualNumbers => {
                let p = self.p as u16;
                let (a0, a1) = self.parts(a);
                let (b0, b1) = self.parts(b);
                let (a0, a1, b0, b1) = (a0 as u16, a1 as u16, b0 as u16, b1 as u16);
                self.from_parts(((a0 * b0) % p) as u8, ((a0 * b1 + a1 * b0) % p) as u8)
            }
        }
    }

    pub fn is_unit(&self, a: Elem) -> bool {
        self.residue(a).0 != 0
    }

    pub fn in_maximal_ideal(&self, a: Elem) -> bool {
        !self.is_unit(a)
    }

    pub fn invert(&self, a: Elem) -> Result<Elem> {
        if !self.is_unit(a) {
            return Err(Error::NotAUnit);
        }
        match self.kind {
            RingKind::ZModPSquared => {
                // |units| = p(p-1), so a^(p(p-1)-1) is the inverse.
                let exp = self.p * (self.p - 1) - 1;
                let mut acc = self.one();
                for _ in 0..exp {
                    acc = self.mul(acc, a);
                }
                Ok(acc)
            }
            RingKind::DualNumbers => {
                let (a0, a1) = self.parts(a);
                let inv0 = self.residue_inverse(ResidueElement(a0));
                // (a0 + a1 ε)^{-1} = a0^{-1} - a1 a0^{-2} ε
                let p = self.p as u16;
                let d = (a1 as u16 * inv0.0 as u16 % p) * inv0.0 as u16 % p;
                Ok(self.from_parts(inv0.0, ((p - d) % p) as u8))
            }
        }
    }

    pub fn residue(&self, a: Elem) -> ResidueElement {
        ResidueElement(self.parts(a).0)
    }

    /// Canonical lift of a residue: the representative in `[0, p)`.
    pub fn lift(&self, r: ResidueElement) -> Elem {
        Elem(r.0 % self.p as u8)
    }

    /// For `a ∈ (p)`, the residue `t` with `p·lift(t) = a`.
    pub fn divide_by_p(&self, a: Elem) -> Result<ResidueElement> {
        if self.is_unit(a) {
            return Err(Error::NotInMaximalIdeal);
        }
        Ok(ResidueElement(self.parts(a).1))
    }

    /// `p·a`, which depends only on the residue of `a`.
    pub fn times_p(&self, a: Elem) -> Elem {
        self.from_parts(0, self.residue(a).0)
    }

    /// Exact quotient `a / d` for `d ≠ 0` dividing `a`; `None` when `d ∤ a`.
    /// The quotient is unique only modulo `ann(d)`; the canonical choice
    /// has residue-digit representative in `[0, p)` when `d ∈ (p)`.
    pub fn div_exact(&self, a: Elem, d: Elem) -> Option<Elem> {
        if self.is_unit(d) {
            return Some(self.mul(a, self.invert(d).ok()?));
        }
        if d == Elem::ZERO {
            return (a == Elem::ZERO).then_some(Elem::ZERO);
        }
        if self.is_unit(a) {
            return None;
        }
        // d = p·t with t a unit, a = p·s: a/d = s·t^{-1} (mod p).
        let t = self.lift(self.divide_by_p(d).ok()?);
        let s = self.lift(self.divide_by_p(a).ok()?);
        Some(self.mul(s, self.invert(t).ok()?))
    }

    pub fn residue_add(&self, a: ResidueElement, b: ResidueElement) -> ResidueElement {
        ResidueElement(((a.0 as u32 + b.0 as u32) % self.p) as u8)
    }

    pub fn residue_mul(&self, a: ResidueElement, b: ResidueElement) -> ResidueElement {
        ResidueElement(((a.0 as u32 * b.0 as u32) % self.p) as u8)
    }

    pub fn residue_neg(&self, a: ResidueElement) -> ResidueElement {
        ResidueElement(((self.p - a.0 as u32) % self.p) as u8)
    }

    /// Inverse in `F_p`; zero maps to zero.
    pub fn residue_inverse(&self, a: ResidueElement) -> ResidueElement {
        let p = self.p;
        let mut acc = 1u32;
        for _ in 0..p - 2 {
            acc = acc * a.0 as u32 % p;
        }
        ResidueElement(if a.0 == 0 { 0 } else { acc as u8 })
    }

    /// `2·p = 0` in `R`.
    pub fn two_p_vanishes(&self) -> bool {
        self.p == 2
    }

    pub fn format(&self, e: Elem) -> String {
        match self.kind {
            RingKind::ZModPSquared => e.0.to_string(),
            RingKind::DualNumbers => {
                let (a, b) = self.parts(e);
                match (a, b) {
                    (a, 0) => a.to_string(),
                    (0, 1) => "ε".to_string(),
                    (0, b) => format!("{b}ε"),
                    (a, 1) => format!("{a}+ε"),
                    (a, b) => format!("{a}+{b}ε"),
                }
            }
        }
    }

    /// Wire encoding of an entry: an integer for `Z/p²`, `[a, b]` for `a + bε`.
    pub fn to_json(&self, e: Elem) -> serde_json::Value {
        match self.kind {
            RingKind::ZModPSquared => serde_json::Value::from(e.0),
            RingKind::DualNumbers => {
                let (a, b) = self.parts(e);
                serde_json::json!([a, b])
            }
        }
    }

    pub fn from_json(&self, v: &serde_json::Value) -> Result<Elem> {
        let bad = || Error::Input(format!("bad ring entry {v} for {self}"));
        match (self.kind, v) {
            (RingKind::ZModPSquared, serde_json::Value::Number(n)) => Ok(self.from_int(n.as_i64().ok_or_else(bad)?)),
            (RingKind::DualNumbers, serde_json::Value::Array(pair)) if pair.len() == 2 => {
                let a = pair[0].as_i64().ok_or_else(bad)?;
                let b = pair[1].as_i64().ok_or_else(bad)?;
                let p = self.p as i64;
                Ok(self.from_parts(a.rem_euclid(p) as u8, b.rem_euclid(p) as u8))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::ZModPSquared => write!(f, "Z/{}", self.p * self.p),
            RingKind::DualNumbers => write!(f, "F_{}[ε]/(ε²)", self.p),
        }
    }
}

/// True iff `R` carries an exotic `n`-angulation: `n` even, or `n` odd and `2p = 0`.
pub fn validate_parity(n: usize, ring: RingSpec) -> Result<bool> {
    if n < 3 {
        return Err(Error::InvalidN(n));
    }
    Ok(n.is_multiple_of(2) || ring.two_p_vanishes())
}

/// A ring element bundled with its ring, for checked arithmetic across
/// API boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingElement {
    ring: RingSpec,
    value: Elem,
}

impl RingElement {
    pub fn new(ring: RingSpec, value: Elem) -> Self {
        RingElement { ring, value }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn value(&self) -> Elem {
        self.value
    }

    fn same_ring(&self, other: &Self) -> Result<RingSpec> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring, other.ring));
        }
        Ok(self.ring)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let r = self.same_ring(other)?;
        Ok(Self::new(r, r.add(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let r = self.same_ring(other)?;
        Ok(Self::new(r, r.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> Self {
        Self::new(self.ring, self.ring.neg(self.value))
    }

    pub fn is_unit(&self) -> bool {
        self.ring.is_unit(self.value)
    }

    pub fn invert(&self) -> Result<Self> {
        Ok(Self::new(self.ring, self.ring.invert(self.value)?))
    }

    pub fn residue(&self) -> ResidueElement {
        self.ring.residue(self.value)
    }

    pub fn divide_by_p(&self) -> Result<ResidueElement> {
        self.ring.divide_by_p(self.value)
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ring.format(self.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_rings() -> Vec<RingSpec> {
        let mut out = Vec::new();
        for p in [2, 3, 5, 7] {
            out.push(RingSpec::z_mod_p2(p).unwrap());
            out.push(RingSpec::dual_numbers(p).unwrap());
        }
        out
    }

    #[test]
    fn sample_products_and_sums() {
        let z4 = RingSpec::z_mod_p2(2).unwrap();
        let z9 = RingSpec::z_mod_p2(3).unwrap();
        let f3 = RingSpec::dual_numbers(3).unwrap();
        let f2 = RingSpec::dual_numbers(2).unwrap();
        assert_eq!(z4.mul(Elem(2), Elem(2)), Elem(0));
        assert_eq!(z4.add(Elem(3), Elem(1)), Elem(0));
        let eps = f3.from_parts(0, 1);
        assert_eq!(f3.mul(eps, eps), f3.zero());
        assert_eq!(z4.uniformizer(), Elem(2));
        assert_eq!(z9.uniformizer(), Elem(3));
        assert_eq!(f2.uniformizer(), f2.from_parts(0, 1));
        assert!(z4.is_unit(Elem(3)));
        assert_eq!(z4.invert(Elem(3)).unwrap(), Elem(3));
        assert!(!z4.is_unit(Elem(2)));
        assert_eq!(z9.invert(Elem(2)).unwrap(), Elem(5));
        assert_eq!(z4.residue(Elem(3)), ResidueElement(1));
        assert_eq!(z4.divide_by_p(Elem(2)).unwrap(), ResidueElement(1));
        assert_eq!(z9.divide_by_p(Elem(6)).unwrap(), ResidueElement(2));
        assert_eq!(z9.divide_by_p(Elem(1)), Err(Error::NotInMaximalIdeal));
        assert_eq!(z4.invert(Elem(2)), Err(Error::NotAUnit));
    }

    #[test]
    fn parity_rule() {
        let z4 = RingSpec::z_mod_p2(2).unwrap();
        let z9 = RingSpec::z_mod_p2(3).unwrap();
        assert!(validate_parity(4, z9).unwrap());
        assert!(validate_parity(5, z4).unwrap());
        assert!(!validate_parity(5, z9).unwrap());
        assert_eq!(validate_parity(2, z4), Err(Error::InvalidN(2)));
    }

    #[test]
    fn construction_caps() {
        assert_eq!(RingSpec::z_mod_p2(4), Err(Error::NotPrime(4)));
        assert_eq!(RingSpec::z_mod_p2(11), Err(Error::PrimeTooLarge(11)));
        assert_eq!(RingSpec::parse_short("z9").unwrap(), RingSpec::z_mod_p2(3).unwrap());
        assert_eq!(RingSpec::parse_short("f2eps").unwrap(), RingSpec::dual_numbers(2).unwrap());
        assert!(RingSpec::parse_short("z8").is_err());
    }

    #[test]
    fn mismatched_rings_are_rejected() {
        let a = RingElement::new(RingSpec::z_mod_p2(2).unwrap(), Elem(1));
        let b = RingElement::new(RingSpec::dual_numbers(2).unwrap(), Elem(1));
        assert!(matches!(a.add(&b), Err(Error::RingMismatch(..))));
        assert!(matches!(a.mul(&b), Err(Error::RingMismatch(..))));
    }

    #[test]
    fn ring_laws_exhaustively() {
        for r in all_rings() {
            for a in r.elements() {
                assert_eq!(r.add(a, r.neg(a)), r.zero());
                for b in r.elements() {
                    assert_eq!(r.add(a, b), r.add(b, a));
                    assert_eq!(r.mul(a, b), r.mul(b, a));
                    for c in r.elements() {
                        assert_eq!(r.mul(a, r.mul(b, c)), r.mul(r.mul(a, b), c), "{r}");
                        assert_eq!(r.add(a, r.add(b, c)), r.add(r.add(a, b), c));
                        assert_eq!(r.mul(a, r.add(b, c)), r.add(r.mul(a, b), r.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn units_and_maximal_ideal() {
        for r in all_rings() {
            let p = r.uniformizer();
            for a in r.elements() {
                let in_m = r.elements().any(|x| r.mul(p, x) == a);
                assert!(r.is_unit(a) ^ in_m);
                if r.is_unit(a) {
                    assert_eq!(r.mul(r.invert(a).unwrap(), a), r.one());
                } else {
                    let t = r.divide_by_p(a).unwrap();
                    assert_eq!(r.mul(p, r.lift(t)), a);
                }
                for b in r.elements() {
                    assert_eq!(r.mul(r.mul(p, a), r.mul(p, b)), r.zero());
                }
            }
            for t in 0..r.p() as u8 {
                assert_eq!(r.residue(r.lift(ResidueElement(t))), ResidueElement(t));
            }
        }
    }

    #[test]
    fn exact_division() {
        for r in all_rings() {
            for a in r.elements() {
                for d in r.elements().filter(|&d| d != Elem::ZERO) {
                    let divisible = r.elements().any(|q| r.mul(q, d) == a);
                    match r.div_exact(a, d) {
                        Some(q) => assert_eq!(r.mul(q, d), a),
                        None => assert!(!divisible),
                    }
                }
            }
        }
    }
}
