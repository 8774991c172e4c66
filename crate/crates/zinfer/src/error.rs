use thiserror::Error;

/// Errors produced by distribution evaluation, simulation and fitting.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("binomial requires at least one trial")]
    ZeroTrials,

    #[error("count {y} is outside the support of the base distribution")]
    OutsideSupport { y: u64 },

    #[error("zero probability pi0 = {pi0} must lie strictly inside (0, 1)")]
    InvalidPiZero { pi0: f64 },

    #[error("inflation overflow: zero probability of the inflated distribution reached 1 (omega = {omega})")]
    InflationOverflow { omega: f64 },

    #[error("truncated sampler cannot terminate: pi0 = {pi0} leaves expected rejection count above {cap}")]
    TruncationUnreachable { pi0: f64, cap: u64 },

    #[error("data contains no zero counts; inflation degree is unidentified")]
    NoZeros,

    #[error("data contains only zero counts; location parameter is unidentified")]
    AllZeros,

    #[error(
        "non-monotone ZI type: tau coefficients (tau1 = {tau1}, tau2 = {tau2}) make the \
         inflated zero probability a decreasing function of pi0 somewhere in (0, 1), so \
         zero-observation weights psi can be negative; fitting refuses such types"
    )]
    NonMonotoneType { tau1: f64, tau2: f64 },

    #[error(
        "mixture type cannot represent zero deflation (kappa = {kappa} <= 0); \
         use a tau-family type (multiplicative, additive, custom) instead"
    )]
    MixtureUnderInflation { kappa: f64 },

    #[error("the mixture type is fitted by EM; use fit_mixture_alpha")]
    MixtureNeedsEm,

    #[error("ZI type is not identifiable: sd of logit(pi0) over observations is {sd}, below 0.05")]
    TypeNotIdentifiable { sd: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: String, iterations: usize },

    #[error("step-halving failed to find an ascent step after {halvings} halvings")]
    StepHalvingFailed { halvings: usize },

    #[error("dimension mismatch: {what}")]
    DimensionMismatch { what: String },

    #[error("design matrix contains a non-finite entry at row {row}, column {col}")]
    NonFiniteDesign { row: usize, col: usize },

    #[error("need at least p + q = {needed} observations, got {n}")]
    TooFewObservations { n: usize, needed: usize },

    #[error("comparison requires fits of the same data: {what}")]
    MixedData { what: String },

    #[error("fit has not converged; {what} requires a converged fit")]
    NotConverged { what: String },
}

pub type Result<T> = std::result::Result<T, Error>;
