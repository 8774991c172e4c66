//! The zero-inflation layer over a base count distribution.
//!
//! For a base pmf `pi_y(theta)` the inflated pmf is
//! `pi~_y = (1 + kappa)^{I(y=0)} * rho * pi_y`, equivalently
//! `ln pi~_y = omega * I(y=0) + ln(rho) + ln(pi_y)` with
//! `logit(pi~0) = omega + logit(pi0)` and `rho = 1 / (1 + kappa * pi0)`.

use crate::error::{Error, Result};
use crate::expfam::BaseCount;
use crate::num::{expit, log_add_exp, logit};
use crate::zitype::ZiType;
use rand::Rng;

/// A fully specified zero-inflated count model at scalar `(theta, gamma)`.
#[derive(Debug, Clone, Copy)]
pub struct ZiModel {
    pub base: BaseCount,
    pub zi_type: ZiType,
    pub theta: f64,
    pub gamma: f64,
}

/// Every per-(theta, gamma) derived quantity used by pmf, scores and weights.
#[derive(Debug, Clone, Copy)]
pub struct ZiDerived {
    pub pi0: f64,
    pub omega: f64,
    pub kappa: f64,
    pub rho: f64,
    pub pi0_tilde: f64,
    pub u: f64,
    pub v: f64,
    /// Score rescaling weight `phi = rho - u * pi~0`.
    pub phi: f64,
    /// Zero-observation weight `psi = 1 + u / phi`.
    pub psi: f64,
    /// ln(rho), kept alongside to avoid re-deriving it from kappa.
    pub ln_rho: f64,
}

/// Distribution of the latent count M of base zeros behind one observed zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatentM {
    /// kappa = 0: exactly one base zero.
    PointMass,
    /// kappa > 0: M is binary with P(M = 1) = 1/(1 + kappa).
    Binary { p_one: f64 },
    /// kappa < 0: M is geometric on m >= 1 with success 1 + kappa.
    Geometric { success: f64 },
}

impl LatentM {
    pub fn pmf(&self, m: u64) -> f64 {
        match *self {
            LatentM::PointMass => {
                if m == 1 {
                    1.0
                } else {
                    0.0
                }
            }
            LatentM::Binary { p_one } => match m {
                0 => 1.0 - p_one,
                1 => p_one,
                _ => 0.0,
            },
            LatentM::Geometric { success } => {
                if m == 0 {
                    0.0
                } else {
                    success * (1.0 - success).powi(m as i32 - 1)
                }
            }
        }
    }

    /// E[M] = 1/(1 + kappa) in every regime.
    pub fn mean(&self) -> f64 {
        match *self {
            LatentM::PointMass => 1.0,
            LatentM::Binary { p_one } => p_one,
            LatentM::Geometric { success } => 1.0 / success,
        }
    }
}

/// Compute all derived quantities for a `(base, type, theta, gamma)` point.
pub fn derive(base: BaseCount, zi_type: ZiType, theta: f64, gamma: f64) -> Result<ZiDerived> {
    let log_pi0 = base.log_pi0(theta);
    let pi0 = log_pi0.exp();
    if !(pi0 > 0.0 && pi0 < 1.0) {
        return Err(Error::InvalidPiZero { pi0 });
    }
    let d = zi_type.omega_and_derivs(gamma, pi0)?;

    // logit(pi~0) = omega + logit(pi0), combined algebraically so that the
    // hurdle's exact cancellation of the log(pi0) terms survives in floats.
    let log1m_pi0 = (-pi0).ln_1p();
    let logit_tilde = match zi_type {
        ZiType::TauFamily { tau1, tau2 } => {
            gamma + (tau1 + 1.0) * log_pi0 + (tau2 - 1.0) * log1m_pi0
        }
        ZiType::Mixture => d.omega + log_pi0 - log1m_pi0,
    };
    let pi0_tilde = expit(logit_tilde);
    if pi0_tilde >= 1.0 - 1e-12 {
        return Err(Error::InflationOverflow { omega: d.omega });
    }

    // rho^-1 = (1 - pi0) + e^omega * pi0, evaluated in log space.
    let ln_rho = -log_add_exp(log1m_pi0, d.omega + log_pi0);
    let rho = ln_rho.exp();
    let kappa = d.omega.exp_m1();

    let phi = rho - d.u * pi0_tilde;
    let mut psi = 1.0 + d.u / phi;
    // The hurdle sits exactly on the psi = 0 boundary; snap rounding noise so
    // monotone types never report a negative weight.
    if psi < 0.0 && psi > -1e-10 {
        psi = 0.0;
    }

    Ok(ZiDerived {
        pi0,
        omega: d.omega,
        kappa,
        rho,
        pi0_tilde,
        u: d.u,
        v: d.v,
        phi,
        psi,
        ln_rho,
    })
}

impl ZiModel {
    pub fn new(base: BaseCount, zi_type: ZiType, theta: f64, gamma: f64) -> Result<Self> {
        derive(base, zi_type, theta, gamma)?;
        Ok(ZiModel {
            base,
            zi_type,
            theta,
            gamma,
        })
    }

    pub fn derived(&self) -> Result<ZiDerived> {
        derive(self.base, self.zi_type, self.theta, self.gamma)
    }

    /// ln pi~_y = omega * I(y=0) + ln(rho) + ln(pi_y).
    pub fn log_pmf(&self, y: u64) -> Result<f64> {
        let d = self.derived()?;
        let base = self.base.log_pmf(self.theta, y)?;
        let indicator = if y == 0 { d.omega } else { 0.0 };
        Ok(indicator + d.ln_rho + base)
    }

    /// Mean and variance of the inflated distribution:
    /// `E = rho * mu`, `Var = rho * Var[Y] + rho * (1 - rho) * mu^2`.
    pub fn moments(&self) -> Result<(f64, f64)> {
        let d = self.derived()?;
        let m = self.base.moments(self.theta);
        let mean = d.rho * m.mean;
        let var = d.rho * m.var + d.rho * (1.0 - d.rho) * m.mean * m.mean;
        Ok((mean, var))
    }

    /// One draw via the generic two-step mechanism: a uniform below pi~0
    /// yields zero, otherwise a zero-truncated base draw. No latent variables
    /// are materialised.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<u64> {
        let d = self.derived()?;
        let un: f64 = rng.random();
        if un <= d.pi0_tilde {
            Ok(0)
        } else {
            self.base.sample_truncated_positive(self.theta, rng)
        }
    }

    /// n iid draws; deterministic per rng stream.
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<u64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.sample_one(rng)?);
        }
        Ok(out)
    }

    /// Distribution of the latent zero count M, conditional on observing zero.
    pub fn latent_m(&self) -> Result<LatentM> {
        let d = self.derived()?;
        Ok(latent_m_from_kappa(d.kappa))
    }
}

/// Latent-M distribution for a given odds inflation kappa.
pub fn latent_m_from_kappa(kappa: f64) -> LatentM {
    if kappa.abs() < 1e-14 {
        LatentM::PointMass
    } else if kappa > 0.0 {
        LatentM::Binary {
            p_one: 1.0 / (1.0 + kappa),
        }
    } else {
        LatentM::Geometric {
            success: 1.0 + kappa,
        }
    }
}

/// Convenience: logit(pi~0) for diagnostics tables.
pub fn logit_pair(d: &ZiDerived) -> (f64, f64) {
    (logit(d.pi0), logit(d.pi0_tilde))
}
