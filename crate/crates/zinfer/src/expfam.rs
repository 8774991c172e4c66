//! Exponential-family base count distributions.
//!
//! A base distribution has log-pmf `theta * y - A(theta) + c(y)` with natural
//! parameter `theta` and cumulant `A`. Mean and variance are the first two
//! derivatives of `A`; the zero probability is `exp(-A(theta))` for both
//! supported families, so it is always computed in log space.

use crate::error::{Error, Result};
use rand::Rng;
use statrs::function::gamma::ln_gamma;

/// Cap on rejection attempts in [`BaseCount::sample_truncated_positive`].
pub const TRUNCATION_ATTEMPT_CAP: u64 = 1_000_000;

/// An exponential-family count distribution with natural parameter `theta`.
///
/// Poisson uses `theta = ln(lambda)`; Binomial uses `theta = logit(p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseCount {
    Poisson,
    Binomial { trials: u64 },
}

/// Mean, variance and zero probability at a given `theta`.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    pub pi0: f64,
}

impl std::fmt::Display for BaseCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BaseCount::Poisson => write!(f, "poisson"),
            BaseCount::Binomial { trials } => write!(f, "binomial:{trials}"),
        }
    }
}

impl BaseCount {
    /// Binomial with `trials >= 1`.
    pub fn binomial(trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::ZeroTrials);
        }
        Ok(BaseCount::Binomial { trials })
    }

    /// Cumulant A(theta).
    pub fn cumulant(&self, theta: f64) -> f64 {
        match self {
            BaseCount::Poisson => theta.exp(),
            BaseCount::Binomial { trials } => *trials as f64 * crate::num::log1p_exp(theta),
        }
    }

    /// Mean A'(theta).
    pub fn mean(&self, theta: f64) -> f64 {
        match self {
            BaseCount::Poisson => theta.exp(),
            BaseCount::Binomial { trials } => *trials as f64 * crate::num::expit(theta),
        }
    }

    /// Variance A''(theta).
    pub fn variance(&self, theta: f64) -> f64 {
        match self {
            BaseCount::Poisson => theta.exp(),
            BaseCount::Binomial { trials } => {
                let p = crate::num::expit(theta);
                *trials as f64 * p * (1.0 - p)
            }
        }
    }

    /// log pi0(theta) = -A(theta); exact at both tails.
    pub fn log_pi0(&self, theta: f64) -> f64 {
        -self.cumulant(theta)
    }

    /// Zero probability pi0(theta).
    pub fn pi0(&self, theta: f64) -> f64 {
        self.log_pi0(theta).exp()
    }

    /// Mean, variance and zero probability in one call.
    pub fn moments(&self, theta: f64) -> Moments {
        Moments {
            mean: self.mean(theta),
            var: self.variance(theta),
            pi0: self.pi0(theta),
        }
    }

    /// Natural parameter producing a given mean.
    pub fn theta_from_mean(&self, mean: f64) -> f64 {
        match self {
            BaseCount::Poisson => mean.ln(),
            BaseCount::Binomial { trials } => crate::num::logit(mean / *trials as f64),
        }
    }

    pub fn in_support(&self, y: u64) -> bool {
        match self {
            BaseCount::Poisson => true,
            BaseCount::Binomial { trials } => y <= *trials,
        }
    }

    /// Upper end of the support, if bounded.
    pub fn support_upper(&self) -> Option<u64> {
        match self {
            BaseCount::Poisson => None,
            BaseCount::Binomial { trials } => Some(*trials),
        }
    }

    /// Full log pmf including the base measure, so `sum_y exp(log_pmf) = 1`.
    pub fn log_pmf(&self, theta: f64, y: u64) -> Result<f64> {
        if !self.in_support(y) {
            return Err(Error::OutsideSupport { y });
        }
        let yf = y as f64;
        let base_measure = match self {
            BaseCount::Poisson => -ln_gamma(yf + 1.0),
            BaseCount::Binomial { trials } => {
                let n = *trials as f64;
                ln_gamma(n + 1.0) - ln_gamma(yf + 1.0) - ln_gamma(n - yf + 1.0)
            }
        };
        Ok(theta * yf - self.cumulant(theta) + base_measure)
    }

    /// Draw one count; deterministic for a fixed rng stream.
    pub fn sample<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> u64 {
        match self {
            BaseCount::Poisson => {
                let lambda = theta.exp();
                if lambda <= 30.0 {
                    poisson_inversion(lambda, rng)
                } else {
                    poisson_ptrs(lambda, rng)
                }
            }
            BaseCount::Binomial { trials } => binomial_inversion(*trials, theta, rng),
        }
    }

    /// Draw one count conditional on being positive, by rejection.
    pub fn sample_truncated_positive<R: Rng + ?Sized>(
        &self,
        theta: f64,
        rng: &mut R,
    ) -> Result<u64> {
        let pi0 = self.pi0(theta);
        // Expected attempts are 1/(1 - pi0); refuse upfront when that exceeds the cap.
        if 1.0 - pi0 <= 1.0 / TRUNCATION_ATTEMPT_CAP as f64 {
            return Err(Error::TruncationUnreachable {
                pi0,
                cap: TRUNCATION_ATTEMPT_CAP,
            });
        }
        for _ in 0..TRUNCATION_ATTEMPT_CAP {
            let y = self.sample(theta, rng);
            if y > 0 {
                return Ok(y);
            }
        }
        Err(Error::TruncationUnreachable {
            pi0,
            cap: TRUNCATION_ATTEMPT_CAP,
        })
    }
}

/// Inversion by sequential search; valid for small lambda.
fn poisson_inversion<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-lambda).exp();
    let mut acc = p;
    // The loop terminates long before this bound for lambda <= 30.
    while u > acc && k < 10_000 {
        k += 1;
        p *= lambda / k as f64;
        acc += p;
        if p <= 0.0 {
            break;
        }
    }
    k
}

/// Transformed rejection with squeeze (Hormann's PTRS); valid for lambda >= 10.
fn poisson_ptrs<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    let slam = lambda.sqrt();
    let loglam = lambda.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        let v: f64 = rng.random();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + lambda + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln()
            <= k * loglam - lambda - ln_gamma(k + 1.0)
        {
            return k as u64;
        }
    }
}

/// CDF inversion by sequential search over the binomial pmf.
fn binomial_inversion<R: Rng + ?Sized>(trials: u64, theta: f64, rng: &mut R) -> u64 {
    let p = crate::num::expit(theta);
    let log_p0 = trials as f64 * (-p).ln_1p();
    if log_p0 < -700.0 {
        // pmf at 0 underflows; fall back to counting Bernoulli successes.
        let mut count = 0u64;
        for _ in 0..trials {
            if rng.random::<f64>() < p {
                count += 1;
            }
        }
        return count;
    }
    let u: f64 = rng.random();
    let odds = p / (1.0 - p);
    let mut k = 0u64;
    let mut pk = log_p0.exp();
    let mut acc = pk;
    while u > acc && k < trials {
        pk *= odds * (trials - k) as f64 / (k + 1) as f64;
        k += 1;
        acc += pk;
    }
    k
}
