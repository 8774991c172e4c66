//! ZI types: the functional form of the log-odds gap omega(gamma, pi0).
//!
//! Tau-family types set `omega = gamma + tau1 * ln(pi0) + tau2 * ln(1 - pi0)`;
//! the mixture type sets `omega = ln(pi0 + e^-gamma) - ln(pi0)`. The presets
//! are pinned by their defining properties:
//! multiplicative `omega = gamma`, additive `logit(pi~0) = gamma - ln(1 - pi0)`,
//! hurdle `logit(pi~0) = gamma`.

use crate::error::{Error, Result};

/// The functional form of zero inflation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZiType {
    TauFamily { tau1: f64, tau2: f64 },
    Mixture,
}

/// omega together with the derivatives that drive the score equations:
/// `u = pi0 * d omega / d pi0` and `v = d omega / d gamma`.
#[derive(Debug, Clone, Copy)]
pub struct OmegaDerivs {
    pub omega: f64,
    pub u: f64,
    pub v: f64,
}

impl ZiType {
    pub const fn multiplicative() -> Self {
        ZiType::TauFamily {
            tau1: 0.0,
            tau2: 0.0,
        }
    }

    pub const fn additive() -> Self {
        ZiType::TauFamily {
            tau1: -1.0,
            tau2: 0.0,
        }
    }

    pub const fn hurdle() -> Self {
        ZiType::TauFamily {
            tau1: -1.0,
            tau2: 1.0,
        }
    }

    pub const fn custom(tau1: f64, tau2: f64) -> Self {
        ZiType::TauFamily { tau1, tau2 }
    }

    /// Preset name, or `custom(tau1,tau2)` / `mixture`.
    pub fn name(&self) -> String {
        match *self {
            ZiType::Mixture => "mixture".to_string(),
            ZiType::TauFamily { tau1, tau2 } => {
                if tau1 == 0.0 && tau2 == 0.0 {
                    "multiplicative".to_string()
                } else if tau1 == -1.0 && tau2 == 0.0 {
                    "additive".to_string()
                } else if tau1 == -1.0 && tau2 == 1.0 {
                    "hurdle".to_string()
                } else {
                    format!("custom({tau1},{tau2})")
                }
            }
        }
    }

    /// Tau coefficients, if this is a tau-family type.
    pub fn tau(&self) -> Option<(f64, f64)> {
        match *self {
            ZiType::TauFamily { tau1, tau2 } => Some((tau1, tau2)),
            ZiType::Mixture => None,
        }
    }

    /// omega(gamma, pi0) alone.
    pub fn omega(&self, gamma: f64, pi0: f64) -> Result<f64> {
        Ok(self.omega_and_derivs(gamma, pi0)?.omega)
    }

    /// omega plus the analytic derivatives u and v.
    pub fn omega_and_derivs(&self, gamma: f64, pi0: f64) -> Result<OmegaDerivs> {
        if !(pi0 > 0.0 && pi0 < 1.0) {
            return Err(Error::InvalidPiZero { pi0 });
        }
        match *self {
            ZiType::TauFamily { tau1, tau2 } => Ok(OmegaDerivs {
                omega: gamma + tau1 * pi0.ln() + tau2 * (-pi0).ln_1p(),
                u: tau1 - tau2 * pi0 / (1.0 - pi0),
                v: 1.0,
            }),
            ZiType::Mixture => {
                // omega = ln(pi0 + e^-gamma) - ln(pi0), computed in log space
                let log_pi0 = pi0.ln();
                let omega = crate::num::log_add_exp(log_pi0, -gamma) - log_pi0;
                // u = v = -e^-gamma / (pi0 + e^-gamma) = -expit(-(gamma + ln pi0))
                let u = -crate::num::expit(-(gamma + log_pi0));
                Ok(OmegaDerivs { omega, u, v: u })
            }
        }
    }

    /// Invert omega back to gamma at a given pi0 (used by the iid fit).
    pub fn gamma_from_omega(&self, omega: f64, pi0: f64) -> Result<f64> {
        if !(pi0 > 0.0 && pi0 < 1.0) {
            return Err(Error::InvalidPiZero { pi0 });
        }
        match *self {
            ZiType::TauFamily { tau1, tau2 } => Ok(omega - tau1 * pi0.ln() - tau2 * (-pi0).ln_1p()),
            ZiType::Mixture => {
                let kappa = omega.exp_m1();
                if kappa <= 0.0 {
                    return Err(Error::MixtureUnderInflation { kappa });
                }
                Ok(-(kappa * pi0).ln())
            }
        }
    }

    /// Monotonicity certificate: true when `d logit(pi~0) / d logit(pi0) >= 0`
    /// across the admissible pi0 range, checked on a dense grid. The slope is
    /// `1 + (1 - pi0) * u`; tau-family types fail exactly when `tau1 < -1`
    /// or `tau2 > 1`, which makes the zero-observation weight psi negative.
    pub fn is_monotone(&self) -> bool {
        let gammas: &[f64] = match self {
            // u depends on gamma for the mixture (it is in (-1, 0) everywhere),
            // while for tau families it does not.
            ZiType::Mixture => &[-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0],
            ZiType::TauFamily { .. } => &[0.0],
        };
        let grid = 2048;
        (0..=grid).all(|i| {
            // stretch the grid into both tails of (0, 1)
            let t = (i as f64 + 0.5) / (grid as f64 + 1.0);
            let pi0 = crate::num::expit(crate::num::logit(t) * 3.0);
            gammas.iter().all(|&gamma| {
                let d = self.omega_and_derivs(gamma, pi0).expect("pi0 in (0,1)");
                1.0 + (1.0 - pi0) * d.u >= -1e-9
            })
        })
    }
}
