//! Finite-temperature Slepian–Wolf decoding under random binning.
//!
//! The decoder knows the side information `y` and the bin index of `x`, and
//! samples a candidate from the bin with probability proportional to
//! `P^β(x, y)`. This crate computes the quantities that govern it:
//!
//! * entropy spectra `s(ε)` and the free energy after random dilution
//!   ([`spectrum`]),
//! * the ferromagnetic / paramagnetic / glassy phase diagram ([`phase`]),
//! * the exact random-binning bit-error exponent `E(R, β)` ([`exponent`]),
//! * a small-`n` simulator of the binning ensemble ([`sim`]).
//!
//! All logarithms are natural; rates are in nats per symbol.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod exponent;
pub mod logmath;
pub mod phase;
pub mod report;
pub mod sim;
pub mod source;
pub mod spectrum;
pub mod tilt;

pub use error::{Error, Result};
pub use source::{JointSource, Matrix, MismatchModel};
