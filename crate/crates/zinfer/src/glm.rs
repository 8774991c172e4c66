//! Internal IRLS solvers: the canonical-link GLM used for initialisation and
//! null models, and weighted logistic regression with an offset, which is the
//! workhorse of the inflation-side updates.

use crate::error::{Error, Result};
use crate::expfam::BaseCount;
use crate::num::{expit, log1p_exp};
use nalgebra::{DMatrix, DVector};

pub(crate) const MAX_HALVINGS: usize = 100;

/// Solve `H d = g` for a symmetric positive (semi)definite `H`.
pub(crate) fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(chol) = h.clone().cholesky() {
        return Some(chol.solve(g));
    }
    h.clone().lu().solve(g).or_else(|| {
        // ridge as a last resort so a single degenerate step cannot abort a fit
        let mut hr = h.clone();
        for i in 0..hr.nrows() {
            hr[(i, i)] += 1e-10 * (1.0 + hr[(i, i)].abs());
        }
        hr.lu().solve(g)
    })
}

/// Plain canonical-link GLM fit (no inflation): `theta_i = x_i beta`.
pub(crate) struct GlmFit {
    pub coef: DVector<f64>,
    pub info: DMatrix<f64>,
    pub loglik: f64,
}

pub(crate) fn fit_base_glm(
    base: BaseCount,
    y: &[u64],
    x: &DMatrix<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<GlmFit> {
    let n = y.len();
    let p = x.ncols();
    let mut beta = DVector::zeros(p);
    // start the intercept at the mean when the first column is constant one
    if n > 0 && (0..n).all(|i| x[(i, 0)] == 1.0) {
        let ybar = (y.iter().sum::<u64>() as f64 / n as f64).max(1e-4);
        let upper = base.support_upper().map(|t| t as f64);
        let ybar = match upper {
            Some(t) => ybar.min(t - 1e-4),
            None => ybar,
        };
        beta[0] = base.theta_from_mean(ybar);
    }

    let loglik = |b: &DVector<f64>| -> f64 {
        let theta = x * b;
        let mut ll = 0.0;
        for i in 0..n {
            match base.log_pmf(theta[i], y[i]) {
                Ok(v) => ll += v,
                Err(_) => return f64::NEG_INFINITY,
            }
        }
        ll
    };

    let mut ll = loglik(&beta);
    let mut info = DMatrix::zeros(p, p);
    for _ in 0..max_iter {
        let theta = x * &beta;
        let mut grad = DVector::zeros(p);
        info.fill(0.0);
        for i in 0..n {
            let mu = base.mean(theta[i]);
            let var = base.variance(theta[i]);
            let r = y[i] as f64 - mu;
            for a in 0..p {
                grad[a] += r * x[(i, a)];
                for b in 0..p {
                    info[(a, b)] += var * x[(i, a)] * x[(i, b)];
                }
            }
        }
        if grad.amax() <= tol {
            return Ok(GlmFit {
                coef: beta,
                info,
                loglik: ll,
            });
        }
        let step = solve_spd(&info, &grad).ok_or(Error::NonConvergence {
            what: "GLM normal equations".to_string(),
            iterations: max_iter,
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &beta + t * &step;
            let cand_ll = loglik(&cand);
            if cand_ll >= ll - 1e-11 * (1.0 + ll.abs()) {
                beta = cand;
                ll = cand_ll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::StepHalvingFailed {
                halvings: MAX_HALVINGS,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "GLM IRLS".to_string(),
        iterations: max_iter,
    })
}

/// Weighted logistic regression of binary responses on `x` with a fixed
/// offset: `logit(p_i) = x_i coef + offset_i`.
pub(crate) struct LogisticFit {
    pub coef: DVector<f64>,
    pub info: DMatrix<f64>,
    /// Set when the coefficient norm ran past the separation monitor.
    pub separation: bool,
}

/// Threshold on `max |coef|` used to flag complete separation.
pub(crate) const SEPARATION_NORM: f64 = 30.0;

pub(crate) fn logistic_irls(
    z: &[f64],
    x: &DMatrix<f64>,
    offset: &[f64],
    weights: Option<&[f64]>,
    start: &DVector<f64>,
    max_iter: usize,
    tol: f64,
) -> Result<LogisticFit> {
    let n = z.len();
    let p = x.ncols();
    let mut coef = start.clone();
    let w_of = |i: usize| weights.map_or(1.0, |w| w[i]);

    let loglik = |c: &DVector<f64>| -> f64 {
        let eta = x * c;
        (0..n)
            .map(|i| {
                let e = eta[i] + offset[i];
                w_of(i) * (z[i] * e - log1p_exp(e))
            })
            .sum()
    };

    let mut ll = loglik(&coef);
    let mut info = DMatrix::zeros(p, p);
    let mut separation = false;
    for _ in 0..max_iter {
        let eta = x * &coef;
        let mut grad = DVector::zeros(p);
        info.fill(0.0);
        for i in 0..n {
            let pi = expit(eta[i] + offset[i]);
            let w = w_of(i);
            let r = w * (z[i] - pi);
            let wv = w * pi * (1.0 - pi);
            for a in 0..p {
                grad[a] += r * x[(i, a)];
                for b in 0..p {
                    info[(a, b)] += wv * x[(i, a)] * x[(i, b)];
                }
            }
        }
        if grad.amax() <= tol {
            return Ok(LogisticFit {
                coef,
                info,
                separation,
            });
        }
        if coef.amax() > SEPARATION_NORM {
            // complete separation: the likelihood has no interior maximum in
            // this direction; stop with the flag set rather than looping
            separation = true;
            return Ok(LogisticFit {
                coef,
                info,
                separation,
            });
        }
        let step = solve_spd(&info, &grad).ok_or(Error::NonConvergence {
            what: "logistic normal equations".to_string(),
            iterations: max_iter,
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &coef + t * &step;
            let cand_ll = loglik(&cand);
            if cand_ll >= ll - 1e-11 * (1.0 + ll.abs()) {
                coef = cand;
                ll = cand_ll;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::StepHalvingFailed {
                halvings: MAX_HALVINGS,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "logistic IRLS".to_string(),
        iterations: max_iter,
    })
}
