//! Mean-field perturbation theory for one-dimensional anharmonic oscillators.
//!
//! Perturbation is developed about a harmonic Hamiltonian whose frequency and
//! energy shift depend on the coupling and the level, so the first-order
//! correction vanishes identically and the resulting divergent series can be
//! summed by optimal truncation or by Borel summation with a conformal map.
//!
//! * [`model`]: oscillator systems and the leading-order mean-field solution.
//! * [`series`]: exact corrections to arbitrary order from the hypervirial and
//!   Feynman–Hellmann recursions.
//! * [`resum`]: optimal truncation and conformal-map Borel summation.
//! * [`oracle`]: exact diagonalization and sum-over-states checks.
//! * [`table`]: reference benchmark rows and their recomputation.

pub mod error;
pub mod exec;
pub mod model;
pub mod oracle;
pub mod resum;
pub mod scalar;
pub mod series;
pub mod table;

pub use error::{Error, ErrorCategory, Result};
pub use exec::Execution;
pub use model::{MeanField, OscillatorKind, OscillatorSpec, Phase};
pub use rug::{Float, Rational};
pub use scalar::{ArithMode, Precision, Scalar};
