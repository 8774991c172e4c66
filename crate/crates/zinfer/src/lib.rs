//! Zero-inflated count models on an exponential-family base.
//!
//! The inflation is parameterised on the log-odds scale,
//! `logit(pi~0) = omega(gamma, pi0) + logit(pi0)`, which nests the classic
//! mixture and hurdle models alongside the simpler multiplicative and
//! additive types and an open tau-family `omega = gamma + tau1 ln(pi0) +
//! tau2 ln(1 - pi0)`. The crate provides exact pmfs and moments, simulation,
//! score and information matrices, maximum-likelihood fitting (iid and
//! regression, including estimation of the type itself), and AIC/BIC model
//! comparison with per-observation diagnostics.

pub mod dataset;
pub mod error;
pub mod expfam;
pub mod fit;
pub mod modelsel;
pub mod num;
pub mod score;
pub mod zicore;
pub mod zitype;

mod glm;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use expfam::{BaseCount, Moments};
pub use fit::{FitOptions, FitResult, PerObs, ZiSpec};
pub use score::{InfoMatrix, ScorePair};
pub use zicore::{LatentM, ZiDerived, ZiModel};
pub use zitype::ZiType;
