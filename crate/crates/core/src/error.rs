use thiserror::Error;

/// Errors surfaced by the library. Divergence of a norm, weight or balayage
/// integral is a first-class outcome and is reported through dedicated
/// variants rather than being conflated with quadrature breakdown.
#[derive(Debug, Error)]
pub enum Error {
    #[error("negative radius {0} rejected (precondition r >= 0)")]
    NegativeRadius(f64),
    #[error("cdf vanishes on part of the probe grid, doubling ratio undefined")]
    ZeroMassNearOrigin,
    #[error("quadrature failed to converge: estimate {estimate}, error {error}")]
    QuadratureFailure { estimate: f64, error: f64 },
    #[error("integral diverges")]
    DivergentIntegral,
    #[error("weight integral diverges at t = {0}")]
    DivergentWeight(f64),
    #[error("norm diverges")]
    DivergentNorm,
    #[error("one side of the isometry diverges while the other converges")]
    InconsistentDivergence,
    #[error("empty square family")]
    EmptyFamily,
    #[error("doubling ratio {0} exceeds the configured cap; measure treated as non-doubling")]
    NotDoubling(f64),
    #[error("empty index window")]
    EmptyWindow,
    #[error("inverse doubling condition fails on the probe grid")]
    InverseDoublingFails,
    #[error(
        "Carleson domination violated on family square (center {center}, side {side}): \
         mu mass {mu} > nu mass {nu}"
    )]
    CarlesonViolation {
        center: f64,
        side: f64,
        mu: f64,
        nu: f64,
    },
    #[error("measure is not supported in the required sector")]
    NotSectorial,
    #[error("measure is not supported in the required strip")]
    NotInStrip,
    #[error("exponent window violated: p = {p}, q = {q}")]
    ExponentWindow { p: f64, q: f64 },
    #[error("balayage condition requires p' < q (got p = {p}, q = {q})")]
    BalayageNotApplicable { p: f64, q: f64 },
    #[error("sampling grid too coarse: spectral tail holds {0:.3}% of the energy")]
    GridTooCoarse(f64),
    #[error("eigenvalue {0} lies in the closed right half-plane")]
    EigenvalueInRightHalfPlane(num_complex::Complex64),
    #[error("unsupported measure for this operation: {0}")]
    UnsupportedMeasure(&'static str),
    #[error("unsupported test function for this operation: {0}")]
    UnsupportedTestFunction(&'static str),
    #[error("spec file error at line {line}: {msg}")]
    Schema { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
