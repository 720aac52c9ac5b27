//! Membership in the exotic angulation, contractibility, and decompositions.
//!
//! The angulation consists of the sequences isomorphic to `C ⊕ F(p)^f` with
//! `C` contractible. Membership is decided in two stages.
//!
//! 1. Stripping. While some map has a unit entry, conjugate so that it
//!    becomes a lone `1` in its row and column. Candidacy then forces the
//!    adjacent row of the previous map and column of the next map to vanish,
//!    so a copy of `ΓR` at that slot splits off. What remains is reduced:
//!    every entry lies in `(p)`.
//! 2. Monodromy. Write the reduced maps as `p·B_i`. Only the residues `B̄_i`
//!    matter since `p·(p) = 0`. Conjugation by `V_i` replaces `B̄_i` by
//!    `V̄_{i+1} B̄_i V̄_i⁻¹`, so a reduced sequence is isomorphic to `F(p)^f`
//!    exactly when all ranks equal `f`, every `B̄_i` is invertible over `k`,
//!    and `B̄_n ⋯ B̄_1 = 1`.
//!
//! Why this decides membership: a contractible candidate is a sum of copies
//! of `ΓR` (stripping a contractible sequence leaves a contractible reduced
//! one, and `1 = Θα + αΘ` has no solution when every `α` lies in `(p)`
//! unless all ranks vanish). A reduced sequence has no `ΓR` summand, since
//! the rank of a residue map is an isomorphism invariant. By Krull–Schmidt
//! the reduced remainder of a member is therefore isomorphic to `F(p)^f`.
//! The brute-force [`oracle_is_n_angle`] cross-checks all of this.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::matrix::{Matrix, ResidueMatrix};
use crate::ring::{Elem, RingSpec};
use crate::sequence::{NSigmaSequence, SequenceMorphism};
use crate::smith::inverse;
use crate::solve::{MatrixSystem, Term};

/// `Θ_i: A_{i+1} → A_i` with `1 = Θ_i α_i + α_{i−1} Θ_{i−1}` at every position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractingHomotopy {
    pub thetas: Vec<Matrix>,
}

impl ContractingHomotopy {
    pub fn verify(&self, a: &NSigmaSequence) -> bool {
        let n = a.n();
        self.thetas.len() == n
            && (0..n).all(|i| {
                let prev = (i + n - 1) % n;
                let (Ok(x), Ok(y)) = (self.thetas[i].try_mul(a.map(i)), a.map(prev).try_mul(&self.thetas[prev])) else {
                    return false;
                };
                x.try_add(&y).is_ok_and(|s| s.is_identity())
            })
    }
}

/// Solves the homotopy identities as one linear system in the entries of all `Θ_i`.
pub fn decide_contractible_homotopy(a: &NSigmaSequence) -> Option<ContractingHomotopy> {
    let n = a.n();
    let ring = a.ring();
    let mut sys = MatrixSystem::new(ring);
    let vars: Vec<_> = (0..n).map(|i| sys.add_var(a.rank(i), a.rank(i + 1))).collect();
    for i in 0..n {
        let prev = (i + n - 1) % n;
        sys.add_equation(
            &[Term::new(vars[i], None, Some(a.map(i))), Term::new(vars[prev], Some(a.map(prev)), None)],
            &Matrix::identity(ring, a.rank(i)),
        )
        .expect("homotopy equations are conformable");
    }
    let space = sys.solve().expect("system built from conformable blocks");
    let x = space.particular()?;
    Some(ContractingHomotopy { thetas: sys.decode(x) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct TrivialSummand {
    /// 1-based slot of the identity map.
    pub slot: usize,
    pub multiplicity: usize,
}

/// Why a reduced remainder is not isomorphic to a power of `F(p)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Obstruction {
    UnequalRanks(Vec<usize>),
    /// The residue of the given 1-based map is singular.
    SingularResidue(usize),
    Monodromy(ResidueMatrix),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub trivial: Vec<TrivialSummand>,
    pub fp_rank: usize,
    /// `input = conjugate(block(), witness)`.
    pub witness: Vec<Matrix>,
    /// Reduced remainder when it is not a power of `F(p)`.
    pub residual: Option<NSigmaSequence>,
    pub obstruction: Option<Obstruction>,
}

impl Decomposition {
    pub fn is_member(&self) -> bool {
        self.residual.is_none()
    }

    pub fn is_contractible(&self) -> bool {
        self.residual.is_none() && self.fp_rank == 0
    }

    /// The sorted direct sum the witness conjugates onto the input.
    pub fn block(&self, ring: RingSpec, n: usize) -> NSigmaSequence {
        let mut parts: Vec<NSigmaSequence> = self
            .trivial
            .iter()
            .map(|t| NSigmaSequence::trivial_gamma(ring, n, t.multiplicity, t.slot).expect("valid frame"))
            .collect();
        match &self.residual {
            Some(r) => parts.push(r.clone()),
            None => parts.push(NSigmaSequence::f_p_sequence(ring, n, self.fp_rank).expect("valid frame")),
        }
        NSigmaSequence::sum_all(ring, n, &parts).expect("valid frame")
    }

    pub fn reassemble(&self, ring: RingSpec, n: usize) -> Result<NSigmaSequence> {
        self.block(ring, n).conjugate(&self.witness)
    }

    /// Multiplicity of `ΓR` at the 1-based slot.
    pub fn trivial_at(&self, slot: usize) -> usize {
        self.trivial.iter().filter(|t| t.slot == slot).map(|t| t.multiplicity).sum()
    }
}

struct Stripper {
    ring: RingSpec,
    n: usize,
    maps: Vec<Matrix>,
    /// Running conjugator `U` with `maps = conjugate(input, U)`.
    us: Option<Vec<Matrix>>,
    active: Vec<Vec<bool>>,
    /// (0-based slot, index at the source position, index at the target position).
    pieces: Vec<(usize, usize, usize)>,
}

impl Stripper {
    fn new(a: &NSigmaSequence, track: bool) -> Self {
        Stripper {
            ring: a.ring(),
            n: a.n(),
            maps: a.maps().to_vec(),
            us: track.then(|| a.ranks().iter().map(|&r| Matrix::identity(a.ring(), r)).collect()),
            active: a.ranks().iter().map(|&r| vec![true; r]).collect(),
            pieces: Vec::new(),
        }
    }

    /// Base change `e ↦ e + x·E_{kr}` at a position.
    fn row_add(&mut self, pos: usize, k: usize, r: usize, x: Elem) {
        let ring = self.ring;
        let prev = (pos + self.n - 1) % self.n;
        let into = &mut self.maps[prev];
        for j in 0..into.cols() {
            let v = ring.add(into.get(k, j), ring.mul(x, into.get(r, j)));
            into.set(k, j, v);
        }
        let out = &mut self.maps[pos];
        for i in 0..out.rows() {
            let v = ring.sub(out.get(i, r), ring.mul(x, out.get(i, k)));
            out.set(i, r, v);
        }
        if let Some(us) = &mut self.us {
            let u = &mut us[pos];
            for j in 0..u.cols() {
                let v = ring.add(u.get(k, j), ring.mul(x, u.get(r, j)));
                u.set(k, j, v);
            }
        }
    }

    /// Base change scaling coordinate `k` of a position by the unit `u`.
    fn scale(&mut self, pos: usize, k: usize, u: Elem) {
        let ring = self.ring;
        let inv = ring.invert(u).expect("scaling by a unit");
        let prev = (pos + self.n - 1) % self.n;
        let into = &mut self.maps[prev];
        for j in 0..into.cols() {
            into.set(k, j, ring.mul(u, into.get(k, j)));
        }
        let out = &mut self.maps[pos];
        for i in 0..out.rows() {
            out.set(i, k, ring.mul(inv, out.get(i, k)));
        }
        if let Some(us) = &mut self.us {
            let m = &mut us[pos];
            for j in 0..m.cols() {
                m.set(k, j, ring.mul(u, m.get(k, j)));
            }
        }
    }

    fn find_unit(&self) -> Option<(usize, usize, usize)> {
        (0..self.n).find_map(|i| {
            let m = &self.maps[i];
            let (src, dst) = (&self.active[i], &self.active[(i + 1) % self.n]);
            (0..m.rows())
                .filter(|&k| dst[k])
                .flat_map(|k| (0..m.cols()).filter(|&c| src[c]).map(move |c| (k, c)))
                .find(|&(k, c)| self.ring.is_unit(m.get(k, c)))
                .map(|(k, c)| (i, k, c))
        })
    }

    fn run(&mut self) {
        let ring = self.ring;
        while let Some((i, k, c)) = self.find_unit() {
            let next = (i + 1) % self.n;
            let u = self.maps[i].get(k, c);
            self.scale(next, k, ring.invert(u).expect("unit pivot"));
            for k2 in 0..self.maps[i].rows() {
                let x = self.maps[i].get(k2, c);
                if k2 != k && self.active[next][k2] && x != Elem::ZERO {
                    self.row_add(next, k2, k, ring.neg(x));
                }
            }
            for c2 in 0..self.maps[i].cols() {
                let x = self.maps[i].get(k, c2);
                if c2 != c && self.active[i][c2] && x != Elem::ZERO {
                    self.row_add(i, c, c2, x);
                }
            }
            self.active[i][c] = false;
            self.active[next][k] = false;
            self.pieces.push((i, c, k));
        }
    }

    fn active_indices(&self, pos: usize) -> Vec<usize> {
        (0..self.active[pos].len()).filter(|&j| self.active[pos][j]).collect()
    }

    fn residual(&self) -> NSigmaSequence {
        let idx: Vec<Vec<usize>> = (0..self.n).map(|j| self.active_indices(j)).collect();
        let maps = (0..self.n).map(|i| self.maps[i].submatrix(&idx[(i + 1) % self.n], &idx[i])).collect();
        NSigmaSequence::from_maps(self.ring, idx.iter().map(Vec::len).collect(), maps)
    }
}

/// Residues `B̄_i` of a reduced sequence, or the first obstruction to it
/// being a power of `F(p)`.
fn residue_blocks(reduced: &NSigmaSequence) -> std::result::Result<Vec<ResidueMatrix>, Obstruction> {
    let f = reduced.rank(0);
    if reduced.ranks().iter().any(|&r| r != f) {
        return Err(Obstruction::UnequalRanks(reduced.ranks().to_vec()));
    }
    let blocks: Vec<ResidueMatrix> = reduced.maps().iter().map(|m| m.divide_by_p().expect("reduced map")).collect();
    if let Some(i) = blocks.iter().position(|b| b.rank() != f) {
        return Err(Obstruction::SingularResidue(i + 1));
    }
    let mono = product(&blocks);
    if !mono.is_identity() {
        return Err(Obstruction::Monodromy(mono));
    }
    Ok(blocks)
}

fn product(blocks: &[ResidueMatrix]) -> ResidueMatrix {
    blocks[1..].iter().fold(blocks[0].clone(), |acc, b| b.mul(&acc).expect("square blocks"))
}

/// `B̄_n ⋯ B̄_1` for a reduced candidate, or `None` when the ranks differ.
pub fn monodromy(reduced: &NSigmaSequence) -> Result<Option<ResidueMatrix>> {
    if !reduced.is_reduced() {
        return Err(Error::Precondition("monodromy needs every entry in (p)".into()));
    }
    let f = reduced.rank(0);
    if reduced.ranks().iter().any(|&r| r != f) {
        return Ok(None);
    }
    let blocks: Vec<ResidueMatrix> = reduced.maps().iter().map(|m| m.divide_by_p().expect("reduced map")).collect();
    Ok(Some(product(&blocks)))
}

pub fn is_n_angle(a: &NSigmaSequence) -> bool {
    if !a.is_candidate() {
        return false;
    }
    let mut s = Stripper::new(a, false);
    s.run();
    residue_blocks(&s.residual()).is_ok()
}

/// Stripping followed by the monodromy stage, with an isomorphism witness.
pub fn strip_units(a: &NSigmaSequence) -> Result<Decomposition> {
    if !a.is_candidate() {
        return Err(Error::NotCandidate);
    }
    let (ring, n) = (a.ring(), a.n());
    let mut s = Stripper::new(a, true);
    s.run();
    let residual = s.residual();
    let verdict = residue_blocks(&residual);

    // Normalize the reduced part to `p·1` everywhere: V_1 = 1, V_{i+1} = V_i B̄_i⁻¹.
    let active: Vec<Vec<usize>> = (0..n).map(|j| s.active_indices(j)).collect();
    let mut us = s.us.take().expect("tracked");
    if let Ok(blocks) = &verdict {
        let f = residual.rank(0);
        let mut v = ResidueMatrix::identity(ring.p(), f);
        for j in 1..n {
            v = v.mul(&blocks[j - 1].inverse().expect("invertible residue")).expect("square");
            let mut full = Matrix::identity(ring, a.rank(j));
            full.paste_submatrix(&active[j], &Matrix::lift(ring, &v));
            us[j] = &full * &us[j];
        }
    }

    let mut counts = vec![0usize; n];
    for &(slot, _, _) in &s.pieces {
        counts[slot] += 1;
    }
    let mut witness = Vec::with_capacity(n);
    for j in 0..n {
        let mut order = Vec::with_capacity(a.rank(j));
        for slot in 0..n {
            for &(sl, c, k) in &s.pieces {
                if sl != slot {
                    continue;
                }
                if slot == j {
                    order.push(c);
                }
                if (slot + 1) % n == j {
                    order.push(k);
                }
            }
        }
        order.extend(&active[j]);
        let perm = Matrix::from_fn(ring, order.len(), order.len(), |t, u| if order[t] == u { ring.one() } else { ring.zero() });
        witness.push(inverse(&(&perm * &us[j])).expect("permuted product of invertibles"));
    }
    let trivial = (0..n).filter(|&s| counts[s] > 0).map(|s| TrivialSummand { slot: s + 1, multiplicity: counts[s] }).collect();
    Ok(match verdict {
        Ok(_) => Decomposition { trivial, fp_rank: residual.rank(0), witness, residual: None, obstruction: None },
        Err(ob) => Decomposition { trivial, fp_rank: 0, witness, residual: Some(residual), obstruction: Some(ob) },
    })
}

/// Multiplicities of a block form: `gamma[s]` copies of `ΓR` at 0-based
/// slot `s`, and `F(p)^f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockShape {
    pub gamma: Vec<usize>,
    pub f: usize,
}

impl BlockShape {
    /// The direct sum in canonical order: `ΓR` summands by slot, then `F(p)^f`.
    pub fn build(&self, ring: RingSpec) -> Result<NSigmaSequence> {
        let n = self.gamma.len();
        let mut parts: Vec<NSigmaSequence> =
            (0..n).map(|s| NSigmaSequence::trivial_gamma(ring, n, self.gamma[s], s + 1)).collect::<Result<_>>()?;
        parts.push(NSigmaSequence::f_p_sequence(ring, n, self.f)?);
        NSigmaSequence::sum_all(ring, n, &parts)
    }
}

/// Every block shape with the given ranks: `r_j = m_j + m_{j−1} + f`.
pub fn block_shapes(ranks: &[usize]) -> Vec<BlockShape> {
    let n = ranks.len();
    let min = *ranks.iter().min().unwrap_or(&0);
    let mut out = Vec::new();
    for f in 0..=min {
        for m_last in 0..=ranks[0] - f {
            let mut m = vec![0usize; n];
            m[n - 1] = m_last;
            let mut ok = true;
            for j in 0..n - 1 {
                let prev = if j == 0 { m_last } else { m[j - 1] };
                match ranks[j].checked_sub(f + prev) {
                    Some(v) => m[j] = v,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && ranks[n - 1] == m[n - 1] + m[n - 2] + f {
                out.push(BlockShape { gamma: m, f });
            }
        }
    }
    out
}

/// Every `Γ ⊕ F(p)^f` block form with the given ranks.
pub fn block_forms(ring: RingSpec, ranks: &[usize]) -> Result<Vec<NSigmaSequence>> {
    crate::sequence::check_n(ranks.len(), ring)?;
    block_shapes(ranks).iter().map(|b| b.build(ring)).collect()
}

/// `|GL_r(R)| = p^{r²}·|GL_r(k)|`, saturating.
pub fn general_linear_order(ring: RingSpec, r: usize) -> u128 {
    let p = ring.p() as u128;
    let q = p.saturating_pow(r as u32);
    let field: u128 = (0..r as u32).fold(1u128, |acc, i| acc.saturating_mul(q - p.pow(i)));
    p.saturating_pow((r * r) as u32).saturating_mul(field)
}

/// All invertible `r×r` matrices, listed by scanning every matrix.
pub fn general_linear(ring: RingSpec, r: usize) -> Vec<Matrix> {
    let q = ring.order();
    let total = q.pow((r * r) as u32);
    (0..total)
        .filter_map(|mut code| {
            let m = Matrix::from_fn(ring, r, r, |_, _| {
                let e = Elem((code % q) as u8);
                code /= q;
                e
            });
            (m.residue_matrix().rank() == r).then_some(m)
        })
        .collect()
}

/// Brute-force membership: is some block form conjugate to `a`?
///
/// Scans every tuple of invertible matrices, pruning a partial tuple as
/// soon as one of its squares `G_{i+1} B_i = A_i G_i` fails.
pub fn oracle_is_n_angle(a: &NSigmaSequence, budget: u64) -> Result<bool> {
    let ring = a.ring();
    let needed = a.ranks().iter().fold(1u128, |acc, &r| acc.saturating_mul(general_linear_order(ring, r)));
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let groups: Vec<Vec<Matrix>> = a.ranks().iter().map(|&r| general_linear(ring, r)).collect();
    let forms = block_forms(ring, a.ranks())?;
    Ok(forms.iter().any(|b| exec::any(&groups[0], |g0| extend_conjugator(a, b, &groups, vec![g0.clone()]))))
}

fn extend_conjugator(a: &NSigmaSequence, b: &NSigmaSequence, groups: &[Vec<Matrix>], chosen: Vec<Matrix>) -> bool {
    let n = a.n();
    let i = chosen.len();
    if i == n {
        return &chosen[0] * b.map(n - 1) == a.map(n - 1) * &chosen[n - 1];
    }
    groups[i].iter().any(|g| {
        if g * b.map(i - 1) != a.map(i - 1) * &chosen[i - 1] {
            return false;
        }
        let mut next = chosen.clone();
        next.push(g.clone());
        extend_conjugator(a, b, groups, next)
    })
}

/// A summand located inside a sequence, with its split inclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocatedSummand {
    pub summand: NSigmaSequence,
    /// Morphism `summand → A`.
    pub inclusion: SequenceMorphism,
    /// Morphism `A → summand` with `retraction ∘ inclusion = 1`.
    pub retraction: SequenceMorphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SummandReport {
    pub base_is_p: bool,
    pub decomposition: Decomposition,
    pub located: Vec<LocatedSummand>,
    pub holds: bool,
}

/// Checks that a member with base `(p)` contains `F(p)`, and one with base
/// `(0)` contains `(ΓR)[1]` (slot `n`) and `(ΓR)[−1]` (slot 2).
pub fn verify_summand_lemma(a: &NSigmaSequence) -> Result<SummandReport> {
    let (ring, n) = (a.ring(), a.n());
    let base = a.map(0);
    if base.shape() != (1, 1) {
        return Err(Error::Precondition("base map must be 1x1".into()));
    }
    let base_is_p = match base.get(0, 0) {
        e if e == ring.uniformizer() => true,
        e if e == Elem::ZERO => false,
        _ => return Err(Error::Precondition("base map must be p or 0".into())),
    };
    let d = strip_units(a)?;
    if !d.is_member() {
        return Err(Error::Precondition("sequence is not an n-angle".into()));
    }
    let block = d.block(ring, n);
    let winv: Vec<Matrix> = d.witness.iter().map(|w| inverse(w).expect("witness is invertible")).collect();
    // Offsets of each summand inside the block, position by position.
    let mut offsets = vec![0usize; n];
    let mut located = Vec::new();
    let mut take = |summand: NSigmaSequence, wanted: bool| {
        let idx: Vec<Vec<usize>> = (0..n).map(|j| (offsets[j]..offsets[j] + summand.rank(j)).collect()).collect();
        for (j, o) in offsets.iter_mut().enumerate() {
            *o += summand.rank(j);
        }
        if !wanted {
            return;
        }
        let all: Vec<Vec<usize>> = (0..n).map(|j| (0..block.rank(j)).collect()).collect();
        let inc = (0..n).map(|j| d.witness[j].submatrix(&all[j], &idx[j])).collect();
        let ret = (0..n).map(|j| winv[j].submatrix(&idx[j], &all[j])).collect();
        let inclusion = SequenceMorphism::new(summand.clone(), a.clone(), inc).expect("shapes");
        let retraction = SequenceMorphism::new(a.clone(), summand.clone(), ret).expect("shapes");
        located.push(LocatedSummand { summand, inclusion, retraction });
    };
    let mut found_n = false;
    let mut found_2 = false;
    for t in &d.trivial {
        for _ in 0..t.multiplicity {
            let g = NSigmaSequence::trivial_gamma(ring, n, 1, t.slot)?;
            let wanted = !base_is_p && ((t.slot == n && !found_n) || (t.slot == 2 && !found_2));
            found_n |= wanted && t.slot == n;
            found_2 |= wanted && t.slot == 2;
            take(g, wanted);
        }
    }
    if d.fp_rank > 0 {
        take(NSigmaSequence::f_p_sequence(ring, n, 1)?, base_is_p);
    }
    let split = located.iter().all(|l| {
        l.inclusion.is_morphism()
            && l.retraction.is_morphism()
            && l.retraction.compose(&l.inclusion).is_ok_and(|c| c.components().iter().all(Matrix::is_identity))
    });
    let holds = split && if base_is_p { d.fp_rank >= 1 && located.len() == 1 } else { found_n && found_2 };
    Ok(SummandReport { base_is_p, decomposition: d, located, holds })
}
