//! Numerics for entanglement-based spoof detection in quantum illumination.
//!
//! The crate builds the joint idler/received states seen by a radar operator
//! under the null hypothesis (true echo) and the alternate hypothesis
//! (measure-and-prepare spoof), with and without a round-trip noise-loss
//! channel, and evaluates the discrimination figures of merit: Uhlmann
//! fidelity, Helstrom error probability, error-probability bounds, and
//! sample-complexity bounds.

extern crate blas_src;

pub mod channel;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod metrics;
pub mod quad;
pub mod spoof;
pub mod states;

pub use error::{Error, Result};
pub use fock::{FockCutoff, Mode, SingleModeOperator, TwoModeDensityOperator, DEFAULT_CUTOFF};
pub use states::ModePairParams;
