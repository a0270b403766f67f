//! Single-mode phase-space densities and a numerical model of triple-coupler
//! homodyne detection.
//!
//! The numerical core is generic over the real scalar ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix the double-precision types used
//! by the command-line tool and the acceptance suite.

pub mod detection;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod phasespace;
pub mod scalar;
pub mod tritter;

pub use error::{Error, Result};
pub use scalar::Real;

pub type FockVector64 = fock::FockVector<f64>;
pub type FockOperator64 = fock::FockOperator<f64>;
pub type FockVector32 = fock::FockVector<f32>;
pub type FockOperator32 = fock::FockOperator<f32>;
pub type RealGrid64 = phasespace::RealGrid<f64>;
pub type CouplerMatrix64 = tritter::CouplerMatrix<f64>;
pub type ThreeModeState64 = tritter::ThreeModeState<f64>;
pub type CountDistribution64 = detection::CountDistribution<f64>;
