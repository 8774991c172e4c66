//! Score functions and expected/observed information, for single
//! observations and for regression designs.
//!
//! For an exponential-family base the per-observation scores are
//! `S~_theta(y) = psi^{I(y=0)} (y - phi * mu)` and
//! `S~_gamma(y) = (I(y=0) - pi~0) * v`; the expected information follows as
//! the covariance of the score vector.

use crate::dataset::Dataset;
use crate::error::Result;
use crate::expfam::BaseCount;
use crate::zicore::{derive, ZiDerived, ZiModel};
use crate::zitype::ZiType;
use nalgebra::{DMatrix, DVector};

/// Score components with respect to (theta, gamma).
#[derive(Debug, Clone, Copy)]
pub struct ScorePair {
    pub theta: f64,
    pub gamma: f64,
}

/// A symmetric information matrix (2x2 for scalar models, (p+q)x(p+q) for
/// regression designs).
#[derive(Debug, Clone)]
pub struct InfoMatrix(pub DMatrix<f64>);

/// Condition number above which an information matrix is flagged near-singular.
pub const NEAR_SINGULAR_CONDITION: f64 = 1e10;

impl InfoMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Ratio of largest to smallest singular value.
    pub fn condition_number(&self) -> f64 {
        let svd = self.0.clone().svd(false, false);
        let max = svd.singular_values.max();
        let min = svd.singular_values.min();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn is_near_singular(&self) -> bool {
        self.condition_number() > NEAR_SINGULAR_CONDITION
    }

    /// Inverse via Cholesky with an LU fallback; `None` if singular.
    pub fn inverse(&self) -> Option<DMatrix<f64>> {
        if let Some(chol) = self.0.clone().cholesky() {
            return Some(chol.inverse());
        }
        self.0.clone().try_inverse()
    }

    /// Moore-Penrose pseudo-inverse, used as a last resort for singular
    /// information.
    pub fn pseudo_inverse(&self) -> DMatrix<f64> {
        self.0
            .clone()
            .svd(true, true)
            .pseudo_inverse(1e-12)
            .expect("svd computed with u and v_t")
    }
}

/// Per-observation score in the exponential-family form.
pub fn score_obs(model: &ZiModel, y: u64) -> Result<ScorePair> {
    let d = model.derived()?;
    let mu = model.base.mean(model.theta);
    Ok(score_from_parts(&d, mu, y))
}

pub(crate) fn score_from_parts(d: &ZiDerived, mu: f64, y: u64) -> ScorePair {
    let zero = y == 0;
    let weight = if zero { d.psi } else { 1.0 };
    let indicator = if zero { 1.0 } else { 0.0 };
    ScorePair {
        theta: weight * (y as f64 - d.phi * mu),
        gamma: (indicator - d.pi0_tilde) * d.v,
    }
}

/// The general-form score route, assembled from the base score
/// `S_theta(y) = y - mu` and `S_theta(0) = -mu`. Kept as an independent
/// algebraic path for cross-checking the exponential-family form.
pub fn score_obs_general(model: &ZiModel, y: u64) -> Result<ScorePair> {
    let d = model.derived()?;
    let mu = model.base.mean(model.theta);
    let indicator = if y == 0 { 1.0 } else { 0.0 };
    let s0 = -mu;
    let s_y = y as f64 - mu;
    Ok(ScorePair {
        theta: (indicator - d.pi0_tilde) * d.u * s0 + (d.rho - 1.0) * s0 + s_y,
        gamma: (indicator - d.pi0_tilde) * d.v,
    })
}

/// The compact matrix assembly `S~ = G [S_theta(y); I - pi~0] + [(rho-1) m_Y; 0]`
/// with `G = [[1, u * m_Y], [0, v]]` and `m_Y = S_theta(0) = -mu`.
pub fn score_obs_compact(model: &ZiModel, y: u64) -> Result<ScorePair> {
    let d = model.derived()?;
    let mu = model.base.mean(model.theta);
    let m_y = -mu;
    let indicator = if y == 0 { 1.0 } else { 0.0 };
    let s_y = y as f64 - mu;
    let centered = indicator - d.pi0_tilde;
    Ok(ScorePair {
        theta: s_y + d.u * m_y * centered + (d.rho - 1.0) * m_y,
        gamma: d.v * centered,
    })
}

/// Fisher's expected information at (theta, gamma):
/// `G H G^T` with `G = [[1, -u*mu], [0, v]]` and
/// `H = Var[(Y~, I_{Y~})] = [[rho V + rho(1-rho) mu^2, -rho mu pi~0],
///                           [-rho mu pi~0, pi~0 (1 - pi~0)]]`.
pub fn expected_info(model: &ZiModel) -> Result<InfoMatrix> {
    let d = model.derived()?;
    let m = model.base.moments(model.theta);
    Ok(InfoMatrix(expected_info_parts(&d, m.mean, m.var)))
}

pub(crate) fn expected_info_parts(d: &ZiDerived, mu: f64, var: f64) -> DMatrix<f64> {
    let h00 = d.rho * var + d.rho * (1.0 - d.rho) * mu * mu;
    let h01 = -d.rho * mu * d.pi0_tilde;
    let h11 = d.pi0_tilde * (1.0 - d.pi0_tilde);
    let a = d.u * mu; // coefficient of the indicator in S~_theta
    let f00 = h00 - 2.0 * a * h01 + a * a * h11;
    let f01 = d.v * (h01 - a * h11);
    let f11 = d.v * d.v * h11;
    DMatrix::from_row_slice(2, 2, &[f00, f01, f01, f11])
}

/// Observed information `-d^2 ln pi~_y / d(theta, gamma)^2`. Analytic for
/// tau-family types; central finite differences of the analytic score for the
/// mixture, whose second derivatives have no useful closed form.
pub fn observed_info(model: &ZiModel, y: u64) -> Result<InfoMatrix> {
    match model.zi_type {
        ZiType::TauFamily { tau2, .. } => {
            let d = model.derived()?;
            let m = model.base.moments(model.theta);
            let (mu, var) = (m.mean, m.var);
            let indicator = if y == 0 { 1.0 } else { 0.0 };
            let one_m_pi0 = 1.0 - d.pi0;

            // d u / d theta, via d pi0 / d theta = -pi0 * mu
            let du_dth = tau2 * d.pi0 * mu / (one_m_pi0 * one_m_pi0);
            // d rho / d theta = rho (1 - phi) mu
            let drho_dth = d.rho * (1.0 - d.phi) * mu;
            // d pi~0 / d theta = -pi~0 (1 - pi~0) mu (u + 1/(1 - pi0))
            let dpt_dth = -d.pi0_tilde * (1.0 - d.pi0_tilde) * mu * (d.u + 1.0 / one_m_pi0);

            let j_tt = (indicator - d.pi0_tilde) * (du_dth * mu + d.u * var) - dpt_dth * d.u * mu
                + drho_dth * mu
                + d.rho * var;
            let j_tg = -d.v * mu * d.pi0_tilde * ((1.0 - d.pi0_tilde) * d.u + d.rho);
            let j_gg = d.pi0_tilde * (1.0 - d.pi0_tilde) * d.v * d.v;
            Ok(InfoMatrix(DMatrix::from_row_slice(
                2,
                2,
                &[j_tt, j_tg, j_tg, j_gg],
            )))
        }
        ZiType::Mixture => {
            let h_th = 1e-5 * model.theta.abs().max(1.0);
            let h_gm = 1e-5 * model.gamma.abs().max(1.0);
            let at = |theta: f64, gamma: f64| -> Result<ScorePair> {
                score_obs(
                    &ZiModel {
                        theta,
                        gamma,
                        ..*model
                    },
                    y,
                )
            };
            let sp = at(model.theta + h_th, model.gamma)?;
            let sm = at(model.theta - h_th, model.gamma)?;
            let gp = at(model.theta, model.gamma + h_gm)?;
            let gm = at(model.theta, model.gamma - h_gm)?;
            let j_tt = -(sp.theta - sm.theta) / (2.0 * h_th);
            let j_gg = -(gp.gamma - gm.gamma) / (2.0 * h_gm);
            let j_tg = -0.5
                * ((gp.theta - gm.theta) / (2.0 * h_gm) + (sp.gamma - sm.gamma) / (2.0 * h_th));
            Ok(InfoMatrix(DMatrix::from_row_slice(
                2,
                2,
                &[j_tt, j_tg, j_tg, j_gg],
            )))
        }
    }
}

/// Per-observation state for a regression design.
#[derive(Debug, Clone)]
pub(crate) struct ObsState {
    pub theta: f64,
    pub derived: ZiDerived,
    pub mu: f64,
    pub var: f64,
}

/// Evaluate every observation's derived quantities at `(beta, alpha)`.
pub(crate) fn obs_states(
    base: BaseCount,
    zi_type: ZiType,
    data: &Dataset,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
) -> Result<Vec<ObsState>> {
    let theta_all = data.x_beta() * beta;
    let gamma_all = if data.q() == 0 {
        DVector::zeros(data.n())
    } else {
        data.x_alpha() * alpha
    };
    let mut out = Vec::with_capacity(data.n());
    for i in 0..data.n() {
        let theta = theta_all[i];
        let derived = derive(base, zi_type, theta, gamma_all[i])?;
        let m = base.moments(theta);
        out.push(ObsState {
            theta,
            derived,
            mu: m.mean,
            var: m.var,
        });
    }
    Ok(out)
}

/// Concatenated score for a regression design: the beta block
/// `sum_i psi_i^{I} (y_i - phi_i mu_i) x_i^beta` followed by the alpha block
/// `sum_i (I_i - pi~0_i) v_i x_i^alpha`.
pub fn regression_score(
    base: BaseCount,
    zi_type: ZiType,
    data: &Dataset,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
) -> Result<DVector<f64>> {
    let states = obs_states(base, zi_type, data, beta, alpha)?;
    Ok(regression_score_from_states(data, &states))
}

pub(crate) fn regression_score_from_states(data: &Dataset, states: &[ObsState]) -> DVector<f64> {
    let (p, q) = (data.p(), data.q());
    let mut grad = DVector::zeros(p + q);
    for (i, st) in states.iter().enumerate() {
        let s = score_from_parts(&st.derived, st.mu, data.y()[i]);
        for j in 0..p {
            grad[j] += s.theta * data.x_beta()[(i, j)];
        }
        for j in 0..q {
            grad[p + j] += s.gamma * data.x_alpha()[(i, j)];
        }
    }
    grad
}

/// Joint expected information for a regression design: per-observation 2x2
/// blocks sandwiched by the covariate vectors,
/// `sum_i (x_i^beta; x_i^alpha)^T FI(theta_i, gamma_i) (x_i^beta; x_i^alpha)`.
/// The beta and alpha covariate sets may overlap.
pub fn regression_expected_info(
    base: BaseCount,
    zi_type: ZiType,
    data: &Dataset,
    beta: &DVector<f64>,
    alpha: &DVector<f64>,
) -> Result<InfoMatrix> {
    let states = obs_states(base, zi_type, data, beta, alpha)?;
    Ok(regression_expected_info_from_states(data, &states))
}

pub(crate) fn regression_expected_info_from_states(
    data: &Dataset,
    states: &[ObsState],
) -> InfoMatrix {
    let (p, q) = (data.p(), data.q());
    let mut info = DMatrix::zeros(p + q, p + q);
    for (i, st) in states.iter().enumerate() {
        let f = expected_info_parts(&st.derived, st.mu, st.var);
        for a in 0..p {
            let xa = data.x_beta()[(i, a)];
            for b in 0..p {
                info[(a, b)] += f[(0, 0)] * xa * data.x_beta()[(i, b)];
            }
            for b in 0..q {
                info[(a, p + b)] += f[(0, 1)] * xa * data.x_alpha()[(i, b)];
            }
        }
        for a in 0..q {
            let xa = data.x_alpha()[(i, a)];
            for b in 0..p {
                info[(p + a, b)] += f[(1, 0)] * xa * data.x_beta()[(i, b)];
            }
            for b in 0..q {
                info[(p + a, p + b)] += f[(1, 1)] * xa * data.x_alpha()[(i, b)];
            }
        }
    }
    InfoMatrix(info)
}
