//! Polynomial, spectral curve, sheet continuation, charge lattice and periods.

mod lattice;
mod polynomial;
mod sheets;

pub use lattice::{default_forms, integrate_path, period, Charge, ChargeLattice, Form, Periods};
pub use polynomial::{Polynomial, DEFAULT_ROOT_EPS};
pub use sheets::{
    continue_sheet, cube_roots, omega, LiftedPath, SpectralCurve, Tolerances, DEFAULT_RAM_EPS,
};
pub(crate) use sheets::{nearest_root, segment_distance};
