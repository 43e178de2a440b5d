use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polynomial roots {0} and {1} are closer than {2:e}")]
    NonSimpleRoots(Complex64, Complex64, f64),

    #[error("point {0} lies within {1:e} of a ramification point")]
    AtRamificationPoint(Complex64, f64),

    #[error("sheet tracking became ambiguous near z = {0}")]
    SheetAmbiguity(Complex64),

    #[error("contour {0} does not close on the spectral curve (mismatch {1:e})")]
    OpenContour(usize, f64),

    #[error("spectral network did not close within {0} generations")]
    GenerationCapExceeded(usize),

    #[error("trajectory labels do not alternate at infinity: {0}")]
    PatternViolation(String),

    #[error("could not identify a lattice charge for period {0} (residual {1:e})")]
    ChargeIdentificationFailed(Complex64, f64),

    #[error("unsupported finite web topology: {0}")]
    UnsupportedWebTopology(String),

    #[error("rays of non-commuting charges {0} and {1} coincide")]
    RayCollision(String, String),

    #[error("exponent overflow during iteration {0} (real part {1:e})")]
    NumericOverflow(usize, f64),

    #[error("iteration did not converge after {0} steps (last delta {1:e})")]
    NoConvergence(usize, f64),

    #[error("zeta = {0} lies on the active ray of {1}; offset theta by a small epsilon")]
    OnRayEvaluation(Complex64, String),

    #[error("theta = {0} lies on the ray of contributing charge {1}")]
    OnRayTheta(f64, String),

    #[error("polygon configuration is degenerate: {0}")]
    DegenerateConfiguration(String),

    #[error("expression is not balanced at vertex {0} (weight {1})")]
    UnbalancedExpression(usize, i64),
}

impl Error {
    /// Failures caused by the numerics rather than by the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SheetAmbiguity(_)
                | Error::GenerationCapExceeded(_)
                | Error::ChargeIdentificationFailed(..)
                | Error::RayCollision(..)
                | Error::NumericOverflow(..)
                | Error::NoConvergence(..)
        )
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "InvalidInput",
            Error::NonSimpleRoots(..) => "NonSimpleRoots",
            Error::AtRamificationPoint(..) => "AtRamificationPoint",
            Error::SheetAmbiguity(_) => "SheetAmbiguity",
            Error::OpenContour(..) => "OpenContour",
            Error::GenerationCapExceeded(_) => "GenerationCapExceeded",
            Error::PatternViolation(_) => "PatternViolation",
            Error::ChargeIdentificationFailed(..) => "ChargeIdentificationFailed",
            Error::UnsupportedWebTopology(_) => "UnsupportedWebTopology",
            Error::RayCollision(..) => "RayCollision",
            Error::NumericOverflow(..) => "NumericOverflow",
            Error::NoConvergence(..) => "NoConvergence",
            Error::OnRayEvaluation(..) => "OnRayEvaluation",
            Error::OnRayTheta(..) => "OnRayTheta",
            Error::DegenerateConfiguration(_) => "DegenerateConfiguration",
            Error::UnbalancedExpression(..) => "UnbalancedExpression",
        }
    }
}
