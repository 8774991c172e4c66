//! Maximum-likelihood fitting.
//!
//! The iid fit uses iterative re-scaling: hold `pi~0 = n0/n`, rescale the
//! sample mean by `rho` and re-solve for theta until stable. Regression fits
//! alternate a weighted quasi-likelihood IRLS update of beta with an
//! offset-logistic update of alpha (EM for the mixture type), then polish
//! with joint Fisher scoring so the full analytic gradient vanishes.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::expfam::BaseCount;
use crate::glm::{fit_base_glm, logistic_irls, solve_spd, MAX_HALVINGS};
use crate::num::{expit, logit};
use crate::score::{
    expected_info_parts, obs_states, regression_expected_info_from_states,
    regression_score_from_states, InfoMatrix, ObsState,
};
use crate::zicore::derive;
use crate::zitype::ZiType;
use nalgebra::{DMatrix, DVector};

/// Iteration caps and tolerances.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    /// Cap on outer alternation iterations (overridable via ZINFER_MAX_ITER
    /// in the CLI).
    pub max_outer: usize,
    /// Cap on inner IRLS iterations per block update.
    pub max_inner: usize,
    /// Convergence threshold on the max-norm of the joint score.
    pub score_tol: f64,
    /// Convergence threshold on the max-norm of parameter changes.
    pub param_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_outer: 500,
            max_inner: 100,
            score_tol: 1e-8,
            param_tol: 1e-10,
        }
    }
}

/// How the ZI type is treated by `fit_joint`.
#[derive(Debug, Clone, Copy)]
pub enum ZiSpec {
    /// Fit with a known type.
    Fixed(ZiType),
    /// Estimate (tau1, tau2) alongside alpha from the data.
    EstimateTau,
}

/// Per-observation diagnostics retained in the fit.
#[derive(Debug, Clone, Copy)]
pub struct PerObs {
    pub pi0: f64,
    pub pi0_tilde: f64,
    pub phi: f64,
    pub psi: f64,
    pub omega: f64,
}

/// A fitted model with coefficient estimates, covariance and diagnostics.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub base: BaseCount,
    /// Effective type: the fixed type, or `TauFamily(tau-hat)` when estimated.
    pub zi_type: ZiType,
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Tau coefficients when the type is in the tau family.
    pub tau: Option<(f64, f64)>,
    pub tau_estimated: bool,
    pub loglik: f64,
    /// Covariance of (beta, alpha[, tau]) from the inverse joint expected
    /// information; zero alpha block when omega was unidentified.
    pub cov: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub per_obs: Vec<PerObs>,
    /// Effective sample size `n* = sum psi^{I(y=0)}`.
    pub ess: f64,
    /// Log-likelihood after each outer iteration.
    pub trace: Vec<f64>,
    pub near_singular: bool,
    pub pseudo_inverse_used: bool,
    pub separation: bool,
    /// Set when the data had no zeros so the inflation degree was dropped.
    pub omega_unidentified: bool,
    pub beta_names: Vec<String>,
    pub alpha_names: Vec<String>,
    pub n: usize,
    pub n0: usize,
    pub sum_y: u64,
}

impl FitResult {
    /// Standard error for joint-parameter index `i` (beta first, then alpha,
    /// then tau when estimated).
    pub fn se(&self, i: usize) -> f64 {
        self.cov[(i, i)].max(0.0).sqrt()
    }

    /// Number of estimated parameters (p + q, plus 2 when tau was estimated).
    pub fn k(&self) -> usize {
        self.beta.len() + self.alpha.len() + if self.tau_estimated { 2 } else { 0 }
    }
}

pub(crate) fn loglik_from_states(
    base: BaseCount,
    data: &Dataset,
    states: &[ObsState],
) -> Result<f64> {
    let mut ll = 0.0;
    for (i, st) in states.iter().enumerate() {
        let y = data.y()[i];
        let lp = base.log_pmf(st.theta, y)?;
        let infl = if y == 0 { st.derived.omega } else { 0.0 };
        ll += infl + st.derived.ln_rho + lp;
    }
    Ok(ll)
}

fn per_obs_from_states(states: &[ObsState]) -> Vec<PerObs> {
    states
        .iter()
        .map(|st| PerObs {
            pi0: st.derived.pi0,
            pi0_tilde: st.derived.pi0_tilde,
            phi: st.derived.phi,
            psi: st.derived.psi,
            omega: st.derived.omega,
        })
        .collect()
}

fn ess_from_states(data: &Dataset, states: &[ObsState]) -> f64 {
    states
        .iter()
        .zip(data.y())
        .map(|(st, &y)| if y == 0 { st.derived.psi } else { 1.0 })
        .sum()
}

/// Fit iid data: `pi~0-hat = n0/n` exactly, theta-hat by iterative
/// re-scaling, gamma-hat recovered from omega-hat through the type. Every ZI
/// type yields the same `(theta-hat, pi~0-hat)`.
pub fn fit_iid(base: BaseCount, zi_type: ZiType, y: &[u64]) -> Result<FitResult> {
    let data = Dataset::iid(y.to_vec())?;
    data.check_support(base)?;
    let n = data.n();
    let n0 = data.n_zero();
    if n0 == 0 {
        return Err(Error::NoZeros);
    }
    if n0 == n {
        return Err(Error::AllZeros);
    }

    let pt_hat = n0 as f64 / n as f64;
    let ybar = data.sum_y() as f64 / n as f64;
    let mean_cap = base.support_upper().map(|t| t as f64 - 1e-9);
    let clamp_mean = |m: f64| -> f64 {
        let m = m.max(1e-12);
        match mean_cap {
            Some(cap) => m.min(cap),
            None => m,
        }
    };

    let max_iter = 200;
    let mut theta = base.theta_from_mean(clamp_mean(ybar));
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let pi0 = base.pi0(theta);
        let rho = (1.0 - pt_hat) / (1.0 - pi0);
        let theta_new = base.theta_from_mean(clamp_mean(ybar / rho));
        let delta = (theta_new - theta).abs();
        theta = theta_new;
        if delta <= 1e-14 * theta.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            what: "iid re-scaling".to_string(),
            iterations: max_iter,
        });
    }

    let pi0_hat = base.pi0(theta);
    let omega_hat = logit(pt_hat) - logit(pi0_hat);
    let gamma_hat = zi_type.gamma_from_omega(omega_hat, pi0_hat)?;

    let d = derive(base, zi_type, theta, gamma_hat)?;
    debug_assert!((d.pi0_tilde - pt_hat).abs() <= 1e-10);

    let states = obs_states(
        base,
        zi_type,
        &data,
        &DVector::from_element(1, theta),
        &DVector::from_element(1, gamma_hat),
    )?;
    let loglik = loglik_from_states(base, &data, &states)?;
    let m = base.moments(theta);
    let info = InfoMatrix(expected_info_parts(&d, m.mean, m.var) * n as f64);
    let near_singular = info.is_near_singular();
    let (cov, pseudo) = invert_info(&info);
    let ll_trace = vec![loglik];

    Ok(FitResult {
        base,
        zi_type,
        beta: vec![theta],
        alpha: vec![gamma_hat],
        tau: zi_type.tau(),
        tau_estimated: false,
        loglik,
        cov,
        converged: true,
        iterations,
        per_obs: per_obs_from_states(&states),
        ess: ess_from_states(&data, &states),
        trace: ll_trace,
        near_singular,
        pseudo_inverse_used: pseudo,
        separation: false,
        omega_unidentified: false,
        beta_names: vec!["intercept".to_string()],
        alpha_names: vec!["intercept".to_string()],
        n,
        n0,
        sum_y: data.sum_y(),
    })
}

fn invert_info(info: &InfoMatrix) -> (DMatrix<f64>, bool) {
    match info.inverse() {
        Some(inv) => (inv, false),
        None => (info.pseudo_inverse(), true),
    }
}

/// Solve the beta block given alpha: the weighted quasi-likelihood equations
/// `sum_i psi_i^{I} (y_i - phi_i mu_i) x_i = 0`, by Fisher scoring with
/// step-halving on the exact log-likelihood. Non-monotone tau families are
/// refused because they produce negative zero-observation weights.
pub fn fit_beta_given_alpha(
    data: &Dataset,
    base: BaseCount,
    zi_type: ZiType,
    alpha: &DVector<f64>,
    beta0: &DVector<f64>,
    opts: &FitOptions,
) -> Result<DVector<f64>> {
    if !zi_type.is_monotone() {
        let (tau1, tau2) = zi_type.tau().unwrap_or((f64::NAN, f64::NAN));
        return Err(Error::NonMonotoneType { tau1, tau2 });
    }
    fit_beta_inner(data, base, zi_type, alpha, beta0, opts)
}

fn fit_beta_inner(
    data: &Dataset,
    base: BaseCount,
    zi_type: ZiType,
    alpha: &DVector<f64>,
    beta0: &DVector<f64>,
    opts: &FitOptions,
) -> Result<DVector<f64>> {
    let p = data.p();
    let mut beta = beta0.clone();

    let eval = |b: &DVector<f64>| -> Option<(Vec<ObsState>, f64)> {
        let states = obs_states(base, zi_type, data, b, alpha).ok()?;
        let ll = loglik_from_states(base, data, &states).ok()?;
        Some((states, ll))
    };

    let (mut states, mut ll) = match eval(&beta) {
        Some(v) => v,
        None => {
            // initial point invalid; surface the underlying error
            obs_states(base, zi_type, data, &beta, alpha)?;
            unreachable!("obs_states succeeded after failing");
        }
    };

    for _ in 0..opts.max_inner {
        let mut grad = DVector::zeros(p);
        let mut hess = DMatrix::zeros(p, p);
        for (i, st) in states.iter().enumerate() {
            let y = data.y()[i];
            let w = if y == 0 { st.derived.psi } else { 1.0 };
            let r = w * (y as f64 - st.derived.phi * st.mu);
            let f00 = expected_info_parts(&st.derived, st.mu, st.var)[(0, 0)];
            for a in 0..p {
                grad[a] += r * data.x_beta()[(i, a)];
                for b in 0..p {
                    hess[(a, b)] += f00 * data.x_beta()[(i, a)] * data.x_beta()[(i, b)];
                }
            }
        }
        if grad.amax() <= opts.score_tol {
            return Ok(beta);
        }
        let step = solve_spd(&hess, &grad).ok_or(Error::NonConvergence {
            what: "beta normal equations".to_string(),
            iterations: opts.max_inner,
        })?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &beta + t * &step;
            if let Some((cand_states, cand_ll)) = eval(&cand) {
                if cand_ll >= ll - 1e-11 * (1.0 + ll.abs()) {
                    beta = cand;
                    states = cand_states;
                    ll = cand_ll;
                    accepted = true;
                    break;
                }
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
        what: "beta IRLS".to_string(),
        iterations: opts.max_inner,
    })
}

/// Solve the alpha block given beta for a tau-family type: logistic IRLS of
/// the zero indicators on the alpha design with the fixed offset
/// `logit(pi0) + tau1 ln(pi0) + tau2 ln(1 - pi0)`.
/// Returns the estimate and a complete-separation flag.
pub fn fit_alpha_given_beta(
    data: &Dataset,
    base: BaseCount,
    zi_type: ZiType,
    beta: &DVector<f64>,
    alpha0: &DVector<f64>,
    opts: &FitOptions,
) -> Result<(DVector<f64>, bool)> {
    let (tau1, tau2) = match zi_type {
        ZiType::TauFamily { tau1, tau2 } => (tau1, tau2),
        ZiType::Mixture => return Err(Error::MixtureNeedsEm),
    };
    let theta = data.x_beta() * beta;
    let mut offset = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let log_pi0 = base.log_pi0(theta[i]);
        let pi0 = log_pi0.exp();
        if !(pi0 > 0.0 && pi0 < 1.0) {
            return Err(Error::InvalidPiZero { pi0 });
        }
        // logit(pi~0) = x alpha + (tau1 + 1) ln(pi0) + (tau2 - 1) ln(1 - pi0)
        offset.push((tau1 + 1.0) * log_pi0 + (tau2 - 1.0) * (-pi0).ln_1p());
    }
    let z: Vec<f64> = data.y().iter().map(|&y| (y == 0) as u64 as f64).collect();
    let fit = logistic_irls(
        &z,
        data.x_alpha(),
        &offset,
        None,
        alpha0,
        opts.max_inner.max(200),
        opts.score_tol,
    )?;
    Ok((fit.coef, fit.separation))
}

/// Solve the alpha block for the mixture type by EM: regress the augmented
/// indicator set (one weighted `J = 1` case per positive count; a
/// `J = 1`/`J = 0` pair per zero, weighted `e^-omega` and `1 - e^-omega`)
/// on the alpha design, refreshing weights until alpha stabilises.
pub fn fit_mixture_alpha(
    data: &Dataset,
    base: BaseCount,
    beta: &DVector<f64>,
    alpha0: &DVector<f64>,
    opts: &FitOptions,
) -> Result<(DVector<f64>, bool)> {
    let n = data.n();
    let q = data.q();
    let theta = data.x_beta() * beta;
    let log_pi0: Vec<f64> = (0..n).map(|i| base.log_pi0(theta[i])).collect();

    // augmented design: one row per positive, two per zero
    let n0 = data.n_zero();
    let rows = n + n0;
    let mut x_plus = DMatrix::zeros(rows, q);
    let mut z_plus = Vec::with_capacity(rows);
    let mut src = Vec::with_capacity(rows); // source observation of each row
    let mut r = 0;
    for i in 0..n {
        for c in 0..q {
            x_plus[(r, c)] = data.x_alpha()[(i, c)];
        }
        z_plus.push(1.0);
        src.push(i);
        r += 1;
        if data.y()[i] == 0 {
            for c in 0..q {
                x_plus[(r, c)] = data.x_alpha()[(i, c)];
            }
            z_plus.push(0.0);
            src.push(i);
            r += 1;
        }
    }
    let offset = vec![0.0; rows];

    let mut alpha = alpha0.clone();
    let mut separation = false;
    for _ in 0..opts.max_outer {
        let gamma = data.x_alpha() * &alpha;
        // defensive: kappa = e^-gamma / pi0 must stay positive
        for i in 0..n {
            let kappa = (-gamma[i] - log_pi0[i]).exp();
            if kappa <= 0.0 || kappa.is_nan() {
                return Err(Error::MixtureUnderInflation { kappa });
            }
        }
        // P(J = 1 | y = 0) = e^-omega = expit(gamma + ln pi0)
        let weights: Vec<f64> = (0..rows)
            .map(|rr| {
                let i = src[rr];
                if data.y()[i] != 0 {
                    1.0
                } else {
                    let w1 = expit(gamma[i] + log_pi0[i]);
                    if z_plus[rr] == 1.0 {
                        w1
                    } else {
                        1.0 - w1
                    }
                }
            })
            .collect();
        let fit = logistic_irls(
            &z_plus,
            &x_plus,
            &offset,
            Some(&weights),
            &alpha,
            opts.max_inner.max(200),
            opts.score_tol,
        )?;
        separation |= fit.separation;
        let delta = (&fit.coef - &alpha).amax();
        alpha = fit.coef;
        if delta <= opts.score_tol {
            return Ok((alpha, separation));
        }
    }
    Err(Error::NonConvergence {
        what: "mixture EM".to_string(),
        iterations: opts.max_outer,
    })
}

/// Result of the tau-estimation logistic regression.
#[derive(Debug, Clone)]
pub struct TauFit {
    pub alpha: DVector<f64>,
    pub tau1: f64,
    pub tau2: f64,
    /// Covariance of (alpha, tau1, tau2) conditional on beta.
    pub cov: DMatrix<f64>,
    pub near_singular: bool,
    pub separation: bool,
}

/// Estimate (alpha, tau1, tau2) given beta: logistic IRLS of the zero
/// indicators on `[x_alpha | ln(pi0) | ln(1 - pi0)]` with offset
/// `logit(pi0)`. Requires genuine variation in pi0 across observations.
pub fn estimate_tau(
    data: &Dataset,
    base: BaseCount,
    beta: &DVector<f64>,
    alpha0: &DVector<f64>,
    tau0: (f64, f64),
    opts: &FitOptions,
) -> Result<TauFit> {
    let n = data.n();
    let q = data.q();
    let theta = data.x_beta() * beta;
    let mut logit_pi0 = Vec::with_capacity(n);
    let mut f1 = Vec::with_capacity(n);
    let mut f2 = Vec::with_capacity(n);
    for i in 0..n {
        let log_pi0 = base.log_pi0(theta[i]);
        let pi0 = log_pi0.exp();
        if !(pi0 > 0.0 && pi0 < 1.0) {
            return Err(Error::InvalidPiZero { pi0 });
        }
        f1.push(log_pi0);
        f2.push((-pi0).ln_1p());
        logit_pi0.push(log_pi0 - (-pi0).ln_1p());
    }
    let mean = logit_pi0.iter().sum::<f64>() / n as f64;
    let sd = (logit_pi0.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    if sd < 0.05 {
        return Err(Error::TypeNotIdentifiable { sd });
    }

    let x_ext = DMatrix::from_fn(n, q + 2, |i, j| {
        if j < q {
            data.x_alpha()[(i, j)]
        } else if j == q {
            f1[i]
        } else {
            f2[i]
        }
    });
    let z: Vec<f64> = data.y().iter().map(|&y| (y == 0) as u64 as f64).collect();
    let mut start = DVector::zeros(q + 2);
    for j in 0..q {
        start[j] = alpha0[j];
    }
    start[q] = tau0.0;
    start[q + 1] = tau0.1;
    let fit = logistic_irls(
        &z,
        &x_ext,
        &logit_pi0,
        None,
        &start,
        opts.max_inner.max(200),
        opts.score_tol,
    )?;
    let info = InfoMatrix(fit.info.clone());
    let near_singular = info.is_near_singular();
    let (cov, _) = invert_info(&info);
    Ok(TauFit {
        alpha: DVector::from_fn(q, |j, _| fit.coef[j]),
        tau1: fit.coef[q],
        tau2: fit.coef[q + 1],
        cov,
        near_singular,
        separation: fit.separation,
    })
}

/// Extended alpha design `[x_alpha | ln(pi0) | ln(1 - pi0)]` for joint
/// score/information over (beta, alpha, tau).
fn extended_dataset(data: &Dataset, base: BaseCount, beta: &DVector<f64>) -> Dataset {
    let n = data.n();
    let q = data.q();
    let theta = data.x_beta() * beta;
    let x_ext = DMatrix::from_fn(n, q + 2, |i, j| {
        if j < q {
            data.x_alpha()[(i, j)]
        } else {
            let log_pi0 = base.log_pi0(theta[i]);
            if j == q {
                log_pi0
            } else {
                (-log_pi0.exp()).ln_1p()
            }
        }
    });
    let mut names = data.alpha_names().to_vec();
    names.push("tau1".to_string());
    names.push("tau2".to_string());
    data.with_alpha_design(x_ext, names)
}

/// Joint fit by block coordinate ascent with a Fisher-scoring polish.
pub fn fit_joint(
    data: &Dataset,
    base: BaseCount,
    zi: ZiSpec,
    opts: &FitOptions,
) -> Result<FitResult> {
    data.check_support(base)?;
    let n = data.n();
    let n0 = data.n_zero();
    if n0 == n {
        return Err(Error::AllZeros);
    }

    // Degenerate paths: no inflation design, or no zeros to identify it.
    if data.q() == 0 || n0 == 0 {
        return fit_null_glm_path(data, base, n0 == 0, opts);
    }

    // refuse fixed non-monotone types upfront
    if let ZiSpec::Fixed(ty) = zi {
        if !ty.is_monotone() {
            let (tau1, tau2) = ty.tau().unwrap_or((f64::NAN, f64::NAN));
            return Err(Error::NonMonotoneType { tau1, tau2 });
        }
    }

    let glm = fit_base_glm(
        base,
        data.y(),
        data.x_beta(),
        opts.max_inner,
        opts.score_tol,
    )?;
    let mut beta = glm.coef;
    let mut alpha = DVector::zeros(data.q());
    let mut tau = match zi {
        ZiSpec::Fixed(_) => (0.0, 0.0),
        ZiSpec::EstimateTau => (0.0, 0.0),
    };
    let mut current_type = match zi {
        ZiSpec::Fixed(ty) => ty,
        ZiSpec::EstimateTau => ZiType::custom(tau.0, tau.1),
    };
    let estimate_tau_mode = matches!(zi, ZiSpec::EstimateTau);

    let mut separation = false;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut prev_ll = f64::NEG_INFINITY;
    let mut prev_params = joint_params(&beta, &alpha, estimate_tau_mode.then_some(tau));

    for outer in 1..=opts.max_outer {
        iterations = outer;
        beta = fit_beta_inner(data, base, current_type, &alpha, &beta, opts)?;
        match (zi, current_type) {
            (ZiSpec::EstimateTau, _) => {
                let tf = estimate_tau(data, base, &beta, &alpha, tau, opts)?;
                separation |= tf.separation;
                alpha = tf.alpha;
                tau = (tf.tau1, tf.tau2);
                current_type = ZiType::custom(tau.0, tau.1);
            }
            (ZiSpec::Fixed(_), ZiType::Mixture) => {
                let (a, sep) = fit_mixture_alpha(data, base, &beta, &alpha, opts)?;
                alpha = a;
                separation |= sep;
            }
            (ZiSpec::Fixed(ty), _) => {
                let (a, sep) = fit_alpha_given_beta(data, base, ty, &beta, &alpha, opts)?;
                alpha = a;
                separation |= sep;
            }
        }

        let states = obs_states(base, current_type, data, &beta, &alpha)?;
        let ll = loglik_from_states(base, data, &states)?;
        trace.push(ll);
        if ll + 1e-7 * (1.0 + ll.abs()) < prev_ll {
            // ascent property violated; stop rather than oscillate
            break;
        }

        let grad = joint_score(data, base, current_type, &beta, &alpha, estimate_tau_mode);
        let params = joint_params(&beta, &alpha, estimate_tau_mode.then_some(tau));
        let dparam = (&params - &prev_params).amax();
        prev_params = params;
        let ll_stalled = (ll - prev_ll).abs() <= 1e-12 * (1.0 + ll.abs());
        prev_ll = ll;

        if grad.amax() <= opts.score_tol && dparam <= opts.param_tol {
            converged = true;
            break;
        }
        // When the alternation has stalled short of the score tolerance,
        // finish with joint Fisher scoring inside the remaining budget.
        if ll_stalled || (grad.amax() <= 1e2 * opts.score_tol && dparam <= 1e-6) {
            let budget = opts.max_outer.saturating_sub(iterations);
            let polish = polish_joint(
                data,
                base,
                &mut beta,
                &mut alpha,
                &mut tau,
                &mut current_type,
                estimate_tau_mode,
                &mut trace,
                budget,
                opts,
            )?;
            iterations += polish.steps;
            converged = polish.converged;
            break;
        }
    }

    // if alternation hit the cap without stalling, check the score once more
    if !converged && iterations >= opts.max_outer {
        let polish = polish_joint(
            data,
            base,
            &mut beta,
            &mut alpha,
            &mut tau,
            &mut current_type,
            estimate_tau_mode,
            &mut trace,
            0,
            opts,
        )?;
        iterations += polish.steps;
        converged = polish.converged;
    }

    assemble_fit(
        data,
        base,
        zi,
        current_type,
        beta,
        alpha,
        tau,
        trace,
        converged,
        iterations,
        separation,
        opts,
    )
}

fn joint_params(
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    tau: Option<(f64, f64)>,
) -> DVector<f64> {
    let mut v: Vec<f64> = beta.iter().chain(alpha.iter()).copied().collect();
    if let Some((t1, t2)) = tau {
        v.push(t1);
        v.push(t2);
    }
    DVector::from_vec(v)
}

/// Joint analytic score; includes the tau block when estimating the type.
fn joint_score(
    data: &Dataset,
    base: BaseCount,
    zi_type: ZiType,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    with_tau: bool,
) -> DVector<f64> {
    if with_tau {
        // the tau blocks of the score are sum_i (I_i - pi~0_i) f_k(pi0_i)
        match obs_states(base, zi_type, data, beta, alpha) {
            Ok(states) => {
                let g_main = regression_score_from_states(data, &states);
                let p = data.p();
                let q = data.q();
                let mut g = DVector::zeros(p + q + 2);
                for j in 0..p + q {
                    g[j] = g_main[j];
                }
                for (i, st) in states.iter().enumerate() {
                    let ind = (data.y()[i] == 0) as u64 as f64;
                    let c = ind - st.derived.pi0_tilde;
                    g[p + q] += c * st.derived.pi0.ln();
                    g[p + q + 1] += c * (-st.derived.pi0).ln_1p();
                }
                g
            }
            Err(_) => DVector::from_element(data.p() + data.q() + 2, f64::INFINITY),
        }
    } else {
        match obs_states(base, zi_type, data, beta, alpha) {
            Ok(states) => regression_score_from_states(data, &states),
            Err(_) => DVector::from_element(data.p() + data.q(), f64::INFINITY),
        }
    }
}

/// Joint expected information; over (beta, alpha, tau) when estimating tau.
fn joint_info(
    data: &Dataset,
    base: BaseCount,
    zi_type: ZiType,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
    with_tau: bool,
) -> Result<InfoMatrix> {
    let states = obs_states(base, zi_type, data, beta, alpha)?;
    if with_tau {
        let ext = extended_dataset(data, base, beta);
        Ok(regression_expected_info_from_states(&ext, &states))
    } else {
        Ok(regression_expected_info_from_states(data, &states))
    }
}

struct PolishOutcome {
    converged: bool,
    steps: usize,
}

/// Fisher scoring on the joint parameter vector until the score tolerance,
/// spending at most `budget` steps.
#[allow(clippy::too_many_arguments)]
fn polish_joint(
    data: &Dataset,
    base: BaseCount,
    beta: &mut DVector<f64>,
    alpha: &mut DVector<f64>,
    tau: &mut (f64, f64),
    current_type: &mut ZiType,
    with_tau: bool,
    trace: &mut Vec<f64>,
    budget: usize,
    opts: &FitOptions,
) -> Result<PolishOutcome> {
    let p = data.p();
    let q = data.q();

    let unpack = |v: &DVector<f64>| -> (DVector<f64>, DVector<f64>, (f64, f64)) {
        let b = DVector::from_fn(p, |j, _| v[j]);
        let a = DVector::from_fn(q, |j, _| v[p + j]);
        let t = if with_tau {
            (v[p + q], v[p + q + 1])
        } else {
            (0.0, 0.0)
        };
        (b, a, t)
    };
    let type_of = |t: (f64, f64)| -> ZiType {
        if with_tau {
            ZiType::custom(t.0, t.1)
        } else {
            *current_type
        }
    };

    let eval_ll = |v: &DVector<f64>| -> Option<f64> {
        let (b, a, t) = unpack(v);
        let states = obs_states(base, type_of(t), data, &b, &a).ok()?;
        loglik_from_states(base, data, &states).ok()
    };

    let mut v = joint_params(beta, alpha, with_tau.then_some(*tau));
    let mut ll = eval_ll(&v).ok_or(Error::NonConvergence {
        what: "joint polish".to_string(),
        iterations: 0,
    })?;

    let max_steps = budget.min(100);
    let mut converged = false;
    let mut steps = 0;
    loop {
        let (b, a, t) = unpack(&v);
        let ty = type_of(t);
        let g = joint_score(data, base, ty, &b, &a, with_tau);
        if g.amax() <= opts.score_tol {
            converged = true;
            break;
        }
        if steps >= max_steps {
            break;
        }
        steps += 1;
        let info = joint_info(data, base, ty, &b, &a, with_tau)?;
        let step = solve_spd(info.matrix(), &g).ok_or(Error::NonConvergence {
            what: "joint polish normal equations".to_string(),
            iterations: max_steps,
        })?;
        let mut tfac = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = &v + tfac * &step;
            if let Some(cand_ll) = eval_ll(&cand) {
                if cand_ll >= ll - 1e-11 * (1.0 + ll.abs()) {
                    v = cand;
                    ll = cand_ll;
                    trace.push(ll);
                    accepted = true;
                    break;
                }
            }
            tfac *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let (b, a, t) = unpack(&v);
    *beta = b;
    *alpha = a;
    if with_tau {
        *tau = t;
        *current_type = ZiType::custom(t.0, t.1);
    }
    Ok(PolishOutcome { converged, steps })
}

/// Null path: omega forced to zero, plain GLM for beta.
fn fit_null_glm_path(
    data: &Dataset,
    base: BaseCount,
    omega_unidentified: bool,
    opts: &FitOptions,
) -> Result<FitResult> {
    let glm = fit_base_glm(
        base,
        data.y(),
        data.x_beta(),
        opts.max_inner,
        opts.score_tol,
    )?;
    let p = data.p();
    let q = data.q();
    let theta = data.x_beta() * &glm.coef;
    let mut per_obs = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let pi0 = base.pi0(theta[i]);
        per_obs.push(PerObs {
            pi0,
            pi0_tilde: pi0,
            phi: 1.0,
            psi: 1.0,
            omega: 0.0,
        });
    }
    let info = InfoMatrix(glm.info.clone());
    let near_singular = info.is_near_singular();
    let (cov_beta, pseudo) = invert_info(&info);
    // alpha block left zero: with no zeros (or no design) omega is pinned at 0
    let mut cov = DMatrix::zeros(p + q, p + q);
    cov.view_mut((0, 0), (p, p)).copy_from(&cov_beta);
    Ok(FitResult {
        base,
        zi_type: ZiType::multiplicative(),
        beta: glm.coef.iter().copied().collect(),
        alpha: vec![0.0; q],
        tau: ZiType::multiplicative().tau(),
        tau_estimated: false,
        loglik: glm.loglik,
        cov,
        converged: true,
        iterations: 1,
        per_obs,
        ess: data.n() as f64,
        trace: vec![glm.loglik],
        near_singular,
        pseudo_inverse_used: pseudo,
        separation: false,
        omega_unidentified,
        beta_names: data.beta_names().to_vec(),
        alpha_names: data.alpha_names().to_vec(),
        n: data.n(),
        n0: data.n_zero(),
        sum_y: data.sum_y(),
    })
}

#[allow(clippy::too_many_arguments)]
fn assemble_fit(
    data: &Dataset,
    base: BaseCount,
    zi: ZiSpec,
    current_type: ZiType,
    beta: DVector<f64>,
    alpha: DVector<f64>,
    tau: (f64, f64),
    trace: Vec<f64>,
    converged: bool,
    iterations: usize,
    separation: bool,
    _opts: &FitOptions,
) -> Result<FitResult> {
    let estimate_tau_mode = matches!(zi, ZiSpec::EstimateTau);
    let states = obs_states(base, current_type, data, &beta, &alpha)?;
    let loglik = loglik_from_states(base, data, &states)?;
    let info = joint_info(data, base, current_type, &beta, &alpha, estimate_tau_mode)?;
    let near_singular = info.is_near_singular();
    let (cov, pseudo) = invert_info(&info);
    let mut alpha_names = data.alpha_names().to_vec();
    if estimate_tau_mode {
        alpha_names.push("tau1".to_string());
        alpha_names.push("tau2".to_string());
    }
    Ok(FitResult {
        base,
        zi_type: current_type,
        beta: beta.iter().copied().collect(),
        alpha: alpha.iter().copied().collect(),
        tau: if estimate_tau_mode {
            Some(tau)
        } else {
            current_type.tau()
        },
        tau_estimated: estimate_tau_mode,
        loglik,
        cov,
        converged,
        iterations,
        per_obs: per_obs_from_states(&states),
        ess: ess_from_states(data, &states),
        trace,
        near_singular,
        pseudo_inverse_used: pseudo,
        separation,
        omega_unidentified: false,
        beta_names: data.beta_names().to_vec(),
        alpha_names,
        n: data.n(),
        n0: data.n_zero(),
        sum_y: data.sum_y(),
    })
}
