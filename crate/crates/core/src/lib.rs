//! Complementarity measures for multipath quantons: visibility, predictability,
//! distinguishability and entanglement, their pairwise decompositions, and the
//! interferometric protocols that measure them.

pub mod error;
pub mod interferometer;
pub mod measures;
pub mod oracles;
pub mod qmath;
pub mod states;

pub use error::{Error, ErrorClass, Result};
pub use qmath::ComplexMatrix;
pub use states::{DetectorGram, Ensemble, PathMask, PhaseVector, PureQuanton, QuantonState};

/// Shortest decimal text that parses back to exactly `x` (at most 17
/// significant digits, exponent notation for very large or small values).
pub fn csv_float(x: f64) -> String {
    format!("{x:?}")
}
