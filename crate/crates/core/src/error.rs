use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use crate::eigensolve::Spectrum;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone)]
pub enum Error {
    /// A model space or weight violated its invariants.
    InvalidSpace(String),
    /// An argument was outside the operation's domain.
    InvalidArgument(String),
    /// A ball `B_r(p)` leaves the domain.
    RadiusOutOfDomain { radius: f64, limit: f64 },
    /// The density ladder did not settle below the residual threshold.
    NonconvergentDensity { residual: f64 },
    /// Mesh width too large for the requested domain.
    ResolutionTooCoarse { h: f64, limit: f64 },
    /// An element with zero (or negative) measure.
    SingularElement { element: usize },
    /// Eigen-iteration budget exhausted; carries whatever converged.
    NoConvergence { requested: usize, partial: Box<Spectrum> },
    /// A zero pivot in the symmetric factorization at the given shift.
    FactorizationBreakdown { shift: f64, pivot: usize },
    /// No analytic oracle exists for this space.
    UnsupportedSpace(String),
    /// No closed form or mesh exists for this domain.
    UnsupportedDomain(String),
    /// A heat trace needs a tail model to meet its truncation tolerance.
    TailModelMissing { relative_truncation: f64 },
    /// Kernel expansion truncation error too large at this time.
    TimeTooSmall { time: f64, relative_truncation: f64 },
    /// The host mesh is too small for the requested radii.
    DomainTooSmall { radius: f64, host_radius: f64 },
    /// Fewer grid points than a fit needs.
    WindowTooNarrow { points: usize, required: usize },
    /// Extrapolation residual dominated by truncation noise.
    UnresolvedLimit { residual: f64, noise: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidSpace(msg) => write!(f, "invalid space: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::RadiusOutOfDomain { radius, limit } => {
                write!(f, "radius {radius} exceeds admissible radius {limit}")
            }
            Error::NonconvergentDensity { residual } => {
                write!(f, "density extrapolation did not converge (residual {residual:e})")
            }
            Error::ResolutionTooCoarse { h, limit } => {
                write!(f, "mesh width {h} must be below {limit}")
            }
            Error::SingularElement { element } => write!(f, "element {element} has zero measure"),
            Error::NoConvergence { requested, partial } => write!(
                f,
                "eigensolver converged {} of {requested} eigenpairs",
                partial.eigenvalues.len()
            ),
            Error::FactorizationBreakdown { shift, pivot } => {
                write!(f, "zero pivot {pivot} factoring A - {shift} M")
            }
            Error::UnsupportedSpace(msg) => write!(f, "unsupported space: {msg}"),
            Error::UnsupportedDomain(msg) => write!(f, "unsupported domain: {msg}"),
            Error::TailModelMissing { relative_truncation } => write!(
                f,
                "heat trace truncation {relative_truncation:e} needs a tail model"
            ),
            Error::TimeTooSmall { time, relative_truncation } => write!(
                f,
                "time {time} too small: kernel truncation bound {relative_truncation:e}"
            ),
            Error::DomainTooSmall { radius, host_radius } => {
                write!(f, "radius {radius} reaches the host boundary at {host_radius}")
            }
            Error::WindowTooNarrow { points, required } => {
                write!(f, "fit window holds {points} grid points, need {required}")
            }
            Error::UnresolvedLimit { residual, noise } => write!(
                f,
                "limit unresolved: rung difference {residual:e} below truncation noise {noise:e}"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
