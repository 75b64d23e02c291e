//! Truncated Fock-space simulation of the `n`-photon quantum-scissor heralded
//! amplifier, specialised to `n = 2`.
//!
//! Modules, bottom-up:
//!
//! - [`fock`]: occupation labels, sparse pure and mixed states, projections.
//! - [`circuit`]: beam splitters, QFT/tritter, permanent-based evolution,
//!   loss channels and the SPDC source.
//! - [`scissor`]: gain setting, full heralded simulation, the ideal transform
//!   and the closed-form gain/purification results.
//! - [`analysis`]: coherence fringes, logarithmic negativity and HOM curves.
//! - [`sensitivity`]: the 14-location loss model and Saltelli/Sobol
//!   first-order sensitivity indices.

pub mod analysis;
pub mod circuit;
pub mod error;
pub mod fock;
pub mod scissor;
pub mod sensitivity;

pub use circuit::{CircuitElement, ModeUnitary};
pub use error::{Error, Result};
pub use fock::{MixedState, OccupationVector, PureState};
pub use num_complex::Complex64;
pub use scissor::{GainSetting, HeraldPattern, ScissorOutcome};
