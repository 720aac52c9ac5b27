use thiserror::Error;

use crate::ring::RingSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("prime {0} exceeds the supported cap of 7")]
    PrimeTooLarge(u32),
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(RingSpec, RingSpec),
    #[error("element is not a unit")]
    NotAUnit,
    #[error("element is not in the maximal ideal")]
    NotInMaximalIdeal,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("n must be at least 3, got {0}")]
    InvalidN(usize),
    #[error("n = {n} is odd and 2p != 0 in {ring}: no exotic angulation exists")]
    Parity { n: usize, ring: RingSpec },
    #[error("slot {slot} out of range 1..={n}")]
    SlotOutOfRange { slot: usize, n: usize },
    #[error("sequence is not a candidate n-angle")]
    NotCandidate,
    #[error("tuple of maps is not a morphism of n-sigma-sequences")]
    NotMorphism,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("budget of {budget} exceeded (needed at least {needed})")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("malformed input: {0}")]
    Input(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
