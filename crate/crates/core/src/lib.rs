//! Continuous-state branching processes, spectrally positive Lévy processes
//! and the Lamperti time change that maps one onto the other.
//!
//! The exact path algebra is generic over [`Scalar`] (floats or rationals);
//! numerical parts are generic over [`Real`]. The aliases below fix the
//! common choices.

pub mod error;
pub mod lamperti;
pub mod mechanism;
pub mod ode;
pub mod paths;
pub mod scalar;
pub mod simulate;
pub mod skorohod;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use paths::{CadlagPath, ExtReal, Horizon, Jump, JumpSize, PathKind, Terminal, Violation};
pub use scalar::{Real, Scalar};

/// Exact rational scalar for event-path algebra.
pub type Rational = num_rational::Ratio<i128>;

pub type Path = CadlagPath<f64>;
pub type Path32 = CadlagPath<f32>;
pub type ExactPath = CadlagPath<Rational>;

pub type Value = ExtReal<f64>;
pub type Mechanism = mechanism::Mechanism<f64>;
pub type LevyTriplet = mechanism::LevyTriplet<f64>;
pub type PathEnsemble = simulate::PathEnsemble<f64>;
