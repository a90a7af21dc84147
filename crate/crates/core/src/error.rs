use alloc::string::String;

/// Failure modes of the analytic and Monte Carlo routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("kernel derivative probes disagree (order {order}, discrepancy {discrepancy:e})")]
    NonSmoothKernel { order: usize, discrepancy: f64 },
    #[error("Taylor coefficient g{index} = {value:e} is negative")]
    NegativeCoefficient { index: usize, value: f64 },
    #[error("g2 = 0: the field is almost surely constant")]
    DegenerateField,
    #[error("inadmissible coefficients: (5/2)g6 - g4^2 = {slack:e} < 0")]
    InadmissibleCoefficients { slack: f64 },
    #[error("kernel is not normalized (g2 = {g2})")]
    NotNormalized { g2: f64 },
    #[error("radius {r:e} is below the supported minimum {r_min:e}")]
    RadiusTooSmall { r: f64, r_min: f64 },
    #[error("covariance at radius {r} is not positive semidefinite")]
    RadiusTooLarge { r: f64 },
    #[error("gradient pair covariance is degenerate (det = {det:e})")]
    DegenerateGradientPair { det: f64 },
    #[error("non-positive eigenvalue {value:e} at index {index}")]
    NonPositiveEigenvalue { index: usize, value: f64 },
    #[error("{quantity} = {value:e} is negative; the closed form leaves the real branch")]
    ComplexBranch { quantity: &'static str, value: f64 },
    #[error("280 g4 g8 - 153 g6^2 = {value:e} is negative")]
    G8BranchNegative { value: f64 },
    #[error("relative standard error {rel_error:e} exceeds tolerance {tolerance:e} at r = {r}")]
    QuadratureUnderResolved { r: f64, rel_error: f64, tolerance: f64 },
    #[error("non-positive value {value:e} at r = {r} in exponent fit")]
    NonPositiveValue { r: f64, value: f64 },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("mode budget leaves truncated spectral mass {mass:e} (> {limit:e})")]
    ModeBudgetTooSmall { mass: f64, limit: f64 },
    #[error("model {0} has no spectral measure to sample from")]
    NoSpectralMeasure(String),
    #[error("degenerate Hessian (det = {det:e})")]
    DegenerateHessian { det: f64 },
    #[error("invalid model specification: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
