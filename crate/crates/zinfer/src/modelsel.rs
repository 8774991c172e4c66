//! Log-likelihood evaluation, information criteria and diagnostics tables.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::num::logit;
use crate::score::obs_states;
use nalgebra::DVector;

/// One row of a ZI-type comparison table, ranked by AIC.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub name: String,
    pub tau: Option<(f64, f64)>,
    pub loglik: f64,
    /// Parameter count p + q (+2 when tau was estimated).
    pub k: usize,
    pub aic: f64,
    pub bic: f64,
    /// 1-based rank after sorting.
    pub rank: usize,
}

/// One row of the (pi0, pi~0) diagnostics table.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub pi0: f64,
    pub pi0_tilde: f64,
    pub logit_pi0: f64,
    pub logit_pi0_tilde: f64,
    pub omega: f64,
    /// Index of the originating observation (rows are sorted by pi0).
    pub obs_index: usize,
}

fn check_same_data(fit: &FitResult, data: &Dataset) -> Result<()> {
    if fit.n != data.n() || fit.n0 != data.n_zero() || fit.sum_y != data.sum_y() {
        return Err(Error::MixedData {
            what: format!(
                "fit was made on n={}, n0={}, sum_y={} but data has n={}, n0={}, sum_y={}",
                fit.n,
                fit.n0,
                fit.sum_y,
                data.n(),
                data.n_zero(),
                data.sum_y()
            ),
        });
    }
    Ok(())
}

/// Re-evaluate the total log-likelihood of a fitted model on its data.
pub fn log_likelihood(fit: &FitResult, data: &Dataset) -> Result<f64> {
    check_same_data(fit, data)?;
    if fit.omega_unidentified || data.q() == 0 {
        // omega pinned at zero: plain base likelihood
        let beta = DVector::from_vec(fit.beta.clone());
        let theta = data.x_beta() * &beta;
        let mut ll = 0.0;
        for (i, &y) in data.y().iter().enumerate() {
            ll += fit.base.log_pmf(theta[i], y)?;
        }
        return Ok(ll);
    }
    let beta = DVector::from_vec(fit.beta.clone());
    let alpha = DVector::from_vec(fit.alpha.clone());
    let states = obs_states(fit.base, fit.zi_type, data, &beta, &alpha)?;
    crate::fit::loglik_from_states(fit.base, data, &states)
}

pub fn aic(loglik: f64, k: usize) -> f64 {
    -2.0 * loglik + 2.0 * k as f64
}

pub fn bic(loglik: f64, k: usize, n: usize) -> f64 {
    -2.0 * loglik + k as f64 * (n as f64).ln()
}

/// Rank converged fits of the same data by AIC (ascending); ties break by
/// fewer parameters, then type name.
pub fn compare(fits: &[&FitResult], data: &Dataset) -> Result<Vec<ComparisonRow>> {
    for fit in fits {
        check_same_data(fit, data)?;
        if !fit.converged {
            return Err(Error::NotConverged {
                what: format!("comparison of type {}", fit.zi_type.name()),
            });
        }
    }
    let n = data.n();
    let mut rows: Vec<ComparisonRow> = fits
        .iter()
        .map(|fit| {
            let k = fit.k();
            let name = if fit.tau_estimated {
                "estimated-tau".to_string()
            } else {
                fit.zi_type.name()
            };
            ComparisonRow {
                name,
                tau: fit.tau,
                loglik: fit.loglik,
                k,
                aic: aic(fit.loglik, k),
                bic: bic(fit.loglik, k, n),
                rank: 0,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.aic
            .partial_cmp(&b.aic)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.k.cmp(&b.k))
            .then(a.name.cmp(&b.name))
    });
    for (i, row) in rows.iter_mut().enumerate() {
        row.rank = i + 1;
    }
    Ok(rows)
}

/// Per-observation (pi0, pi~0) pairs in both metrics, sorted by pi0; the raw
/// material for the type-diagnostic plots.
pub fn diagnostics_pairs(fit: &FitResult, data: &Dataset) -> Result<Vec<DiagnosticsRow>> {
    check_same_data(fit, data)?;
    if !fit.converged {
        return Err(Error::NotConverged {
            what: "diagnostics_pairs".to_string(),
        });
    }
    let mut rows: Vec<DiagnosticsRow> = fit
        .per_obs
        .iter()
        .enumerate()
        .map(|(i, po)| DiagnosticsRow {
            pi0: po.pi0,
            pi0_tilde: po.pi0_tilde,
            logit_pi0: logit(po.pi0),
            logit_pi0_tilde: logit(po.pi0_tilde),
            omega: po.omega,
            obs_index: i,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.pi0
            .partial_cmp(&b.pi0)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn aic_bic_arithmetic() {
        assert_relative_eq!(aic(-100.0, 2), 204.0, max_relative = 1e-14);
        assert_relative_eq!(
            bic(-100.0, 2, 50),
            200.0 + 2.0 * 50.0f64.ln(),
            max_relative = 1e-14
        );
    }
}
