//! Exact martingales, scanning functions and the constructions built from
//! them: delayed and weighted martingales, savings accounts, averaging
//! martingales of non-monotonic strategies, block rearrangements, and the
//! bin and predictor martingales of a synthetic randomized procedure.
//!
//! All capital values are exact rationals. Brute-force operations take an
//! explicit enumeration budget and fail with [`Error::Budget`] rather than
//! approximate.

pub mod bits;
pub mod closure;
pub mod constructions;
pub mod document;
pub mod error;
pub mod martingale;
pub mod poly;
pub mod rational;
pub mod sample;
pub mod scan;
pub mod sequence;

pub use bits::{BitString, Run};
pub use closure::{averaging_value, BettingStrategy};
pub use error::{Error, Result, DEFAULT_BUDGET};
pub use martingale::{fairness_check, Martingale};
pub use poly::PolynomialNat;
pub use rational::Rational;
pub use scan::{Filling, Permutation, ScanningFunction};
pub use sequence::{SequenceOracle, TargetSet};
