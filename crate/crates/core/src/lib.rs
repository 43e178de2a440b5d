//! Numerics for polynomial cubic differentials: spectral-curve periods, WKB
//! spectral networks, BPS spectra, the integral iteration for the spectral
//! coordinates `X_γ`, their large-R asymptotics, and polygon-side invariants.

pub mod asymptotics;
pub mod bps;
pub mod curve;
pub mod error;
pub mod model;
pub mod network;
pub mod polygon;
pub mod quadrature;
pub mod tba;

pub use error::{Error, Result};
pub use num_complex::Complex64;
