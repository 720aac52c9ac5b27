pub mod angulation;
pub mod error;
pub mod exec;
pub mod goodness;
pub mod matrix;
pub mod props;
pub mod random;
pub mod report;
pub mod ring;
pub mod sequence;
pub mod smith;
pub mod solve;

pub use error::{Error, Result};
pub use matrix::{Matrix, ResidueMatrix};
pub use ring::{Elem, RingElement, RingKind, RingSpec};
pub use sequence::{NSigmaSequence, SequenceMorphism};
