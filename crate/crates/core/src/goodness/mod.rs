//! Goodness of morphisms of n-angles: checkers, witnesses and bounded searches.

mod counterexample;
mod fillin;
mod middling;
mod octahedron;
mod verdier;

pub use counterexample::{counterexample_morphism, run_counterexample, CounterexampleReport, TraceStep};
pub use fillin::{enumerate_fill_ins, fill_in_space, find_good_fill_in, FillInSpace};
pub use middling::{search_middling_extension, verify_middling, MiddlingDiagram, MiddlingOutcome, SearchStats};
pub use octahedron::{associated_n_angle, complete_octahedron, verify_octahedron, OctahedronWitness};
pub use verdier::{search_verdier, verify_verdier, VerdierWitness};

use serde::Serialize;

use crate::angulation::is_n_angle;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sequence::{NSigmaSequence, SequenceMorphism};
use crate::smith::{inverse, smith_normal_form};

/// Outcome of a bounded search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Found,
    NoneExhaustive,
    NoneWithinBudget,
}

/// A morphism between n-angles, as required by every goodness notion.
pub(crate) fn require_angle_morphism(phi: &SequenceMorphism) -> Result<()> {
    if !phi.is_morphism() {
        return Err(Error::NotMorphism);
    }
    if !is_n_angle(phi.source()) || !is_n_angle(phi.target()) {
        return Err(Error::Precondition("source and target must be n-angles".into()));
    }
    Ok(())
}

/// Whether the mapping cone is an n-angle.
pub fn is_good(phi: &SequenceMorphism) -> Result<bool> {
    require_angle_morphism(phi)?;
    Ok(is_n_angle(&phi.cone_unchecked()))
}

/// An n-angle whose first map is `f`.
///
/// With `k₁` unit and `k₂` non-zero non-unit invariant factors of the
/// `b×a` matrix `f`, the block form is
/// `Γ₁^{k₁} ⊕ Γ₂^{b−k₁−k₂} ⊕ Γₙ^{a−k₁−k₂} ⊕ F(p)^{k₂}`, moved onto `f` by
/// matching Smith forms at the first two positions.
pub fn complete_base(f: &Matrix, n: usize) -> Result<NSigmaSequence> {
    let ring = f.ring();
    let (b, a) = f.shape();
    let snf = smith_normal_form(f);
    let (k1, k2) = (snf.units, snf.p_pivots);
    let parts = [
        NSigmaSequence::trivial_gamma(ring, n, k1, 1)?,
        NSigmaSequence::trivial_gamma(ring, n, b - k1 - k2, 2)?,
        NSigmaSequence::trivial_gamma(ring, n, a - k1 - k2, n)?,
        NSigmaSequence::f_p_sequence(ring, n, k2)?,
    ];
    let block = NSigmaSequence::sum_all(ring, n, &parts)?;
    let bs = smith_normal_form(block.map(0));
    debug_assert_eq!(bs.diag, snf.diag);
    let mut w: Vec<Matrix> = block.ranks().iter().map(|&r| Matrix::identity(ring, r)).collect();
    w[0] = &snf.right * &inverse(&bs.right)?;
    w[1] = &inverse(&snf.left)? * &bs.left;
    let out = block.conjugate(&w)?;
    debug_assert_eq!(out.map(0), f);
    Ok(out)
}
