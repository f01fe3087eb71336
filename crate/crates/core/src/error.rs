use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure the numerical core can report.
///
/// Variants carry plain data so that the CLI can print the variant name as
/// the module error and map it onto an exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate grid: {0}")]
    DegenerateGrid(&'static str),
    #[error("safety factor q = {q} is not positive at (R, Z) = ({r}, {z})")]
    NonPositiveSafetyFactor { q: f64, r: f64, z: f64 },
    #[error("operation not supported for this field kind: {0}")]
    Unsupported(&'static str),
    #[error("sample array has {got} values, expected {expected}")]
    SampleCountMismatch { expected: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("point ({r}, {z}) is outside the interpolation domain")]
    OutOfDomain { r: f64, z: f64 },
    #[error("adjacent pieces are not one grid spacing apart")]
    MismatchedSpacing,
    #[error("adjacent pieces carry different numbers of Taylor coefficients")]
    MismatchedDegree,
    #[error("finite-difference stencil for derivative order {order} needs {needed} points, only {available} available")]
    StencilDoesNotFit {
        order: usize,
        needed: usize,
        available: usize,
    },
    #[error("unsupported derivative order {0} (expected 1..=4)")]
    UnsupportedOrder(usize),
    #[error("fine ratio {ratio} does not divide the sample grid ({nr} x {nz} intervals)")]
    IncompatibleFineRatio { ratio: usize, nr: usize, nz: usize },
    #[error("interpolants do not share grid and orders")]
    IncompatibleInterpolants,
    #[error("integration center ({r}, {z}) is outside the domain")]
    CenterOutOfDomain { r: f64, z: f64 },
    #[error("curvature terms need m_R > 1 and m_Z > 1, got ({m_r}, {m_z})")]
    InsufficientSmoothness { m_r: usize, m_z: usize },
    #[error("vanishing field magnitude")]
    VanishingField,
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("step size fell to the minimum {dt} at t = {t} without meeting the tolerance")]
    MinStepReached { t: f64, dt: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("invalid integrator setting: {0}")]
    InvalidSettings(&'static str),
    #[error("parallel component of B* vanishes at R = {r}, Z = {z}")]
    VanishingBstarPar { r: f64, z: f64 },
    #[error("toroidal field vanishes at R = {r}, Z = {z}")]
    VanishingBphi { r: f64, z: f64 },
}

impl Error {
    /// Short variant name used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateGrid(_) => "DegenerateGrid",
            Error::NonPositiveSafetyFactor { .. } => "NonPositiveSafetyFactor",
            Error::Unsupported(_) => "Unsupported",
            Error::SampleCountMismatch { .. } => "SampleCountMismatch",
            Error::NonFiniteSample(_) => "NonFiniteSample",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::MismatchedSpacing => "MismatchedSpacing",
            Error::MismatchedDegree => "MismatchedDegree",
            Error::StencilDoesNotFit { .. } => "StencilDoesNotFit",
            Error::UnsupportedOrder(_) => "UnsupportedOrder",
            Error::IncompatibleFineRatio { .. } => "IncompatibleFineRatio",
            Error::IncompatibleInterpolants => "IncompatibleInterpolants",
            Error::CenterOutOfDomain { .. } => "CenterOutOfDomain",
            Error::InsufficientSmoothness { .. } => "InsufficientSmoothness",
            Error::VanishingField => "VanishingField",
            Error::NonFiniteRhs { .. } => "NonFiniteRHS",
            Error::MinStepReached { .. } => "MinStepReached",
            Error::TooManySteps(_) => "TooManySteps",
            Error::InvalidSettings(_) => "InvalidSettings",
            Error::VanishingBstarPar { .. } => "VanishingBstarPar",
            Error::VanishingBphi { .. } => "VanishingBphi",
        }
    }
}
