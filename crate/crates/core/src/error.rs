use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid root system: {0}")]
    InvalidRootSystem(String),
    #[error("invalid q parameters: {0}")]
    InvalidQ(String),
    #[error("Weyl group of order {order} exceeds the enumeration cap {cap}")]
    WeylGroupTooLarge { order: u64, cap: usize },
    #[error("evaluation point lies on a wall ({0}); use limit mode")]
    Singular(String),
    #[error("limit evaluation did not stabilise (residual {residual:.3e})")]
    LimitFailure { residual: f64 },
    #[error("grid of {got} points per axis is too coarse, need at least {needed}")]
    GridTooCoarse { needed: usize, got: usize },
    #[error("quadrature did not converge: relative change {change:.3e} exceeds {tol:.1e}")]
    QuadratureNonConvergence { change: f64, tol: f64 },
    #[error("imaginary residue {residue:.3e} exceeds tolerance {tol:.1e}")]
    ImaginaryResidue { residue: f64, tol: f64 },
    #[error("invalid walk: {0}")]
    InvalidWalk(String),
    #[error("walk is not irreducible: {0}")]
    Reducible(String),
    #[error("kernel coefficient at {at} is {value:.3e}; all coefficients must be positive")]
    NonPositiveCoefficient { at: String, value: f64 },
    #[error("convex hull is degenerate: {0}")]
    DegenerateHull(String),
    #[error("point outside the domain: {0}")]
    OutsideDomain(String),
    #[error("iteration did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("support guard exceeded: {0}")]
    SupportGuard(String),
    #[error("elimination pivot {pivot:.3e} below tolerance at {at}")]
    PivotTooSmall { pivot: f64, at: String },
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("property check failed: {0}")]
    PropertyFailure(String),
    #[error("operation needs a {expected} kernel")]
    FlavorMismatch { expected: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
