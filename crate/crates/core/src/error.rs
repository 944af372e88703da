use thiserror::Error;

/// Errors produced by the model, phase-space, spectral and simulation layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-positive input: {0} must be > 0")]
    NonPositiveInput(&'static str),

    #[error("zero nonlinear coupling: scaled coordinates are undefined, use the unscaled paths")]
    ZeroCoupling,

    #[error("negative intensity {0}")]
    NegativeIntensity(f64),

    #[error("the two orderings must differ (s = s' = {0})")]
    EqualOrderings(f64),

    #[error("diffusion matrix is not positive semidefinite (d_minus = {d_minus:.3e})")]
    NonPositiveDiffusion { d_minus: f64 },

    #[error("both pivots of the diffusion matrix are below threshold with a nonzero off-diagonal")]
    SingularPivot,

    #[error("resolvent is singular at omega = {omega} (marginal state)")]
    SingularResolvent { omega: f64 },

    #[error("steady state is unstable; the stationary spectrum does not exist")]
    UnstableState,

    #[error("quadrature-variance integral diverges near a turning point (discriminant = {discriminant:.3e})")]
    DivergentIntegral { discriminant: f64 },

    #[error("trajectory escaped the linearization basin at step {step}")]
    TrajectoryDiverged { step: usize },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
