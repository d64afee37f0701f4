//! Spectral geometry of Euclidean Dirac operators on the half-space `ℝ³ × ℝ₊` with chiral bag
//! boundary conditions: exact heat kernel, Dyson corrections, anomaly coefficients and fiber
//! spectra.

pub mod clifford;
pub mod coeffs;
pub mod config;
pub mod dyson;
pub mod error;
pub mod faddeeva;
pub mod fields;
pub mod halfspace_kernel;
pub mod jet;
pub mod multivector;
pub mod quadrature;
pub mod spectral_fiber;

pub use error::{Error, Result};
