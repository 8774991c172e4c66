//! Shared helpers for the integration tests: adaptive pmf summation and
//! small simulation utilities. Everything here is independent of the
//! library's own score/information code paths.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use zinfer::{BaseCount, Dataset, ZiModel, ZiType};

/// Adaptive support cutoff: enough of the tail that summation errors are far
/// below the tolerances used in the tests.
pub fn y_cutoff(base: BaseCount, theta: f64) -> u64 {
    match base.support_upper() {
        Some(n) => n,
        None => {
            let m = base.moments(theta);
            (m.mean + 20.0 * m.var.sqrt()).ceil() as u64 + 10
        }
    }
}

/// Sum `f(y) * pmf(y)` over the (truncated) support of the inflated model.
pub fn expect_over_pmf<F: Fn(u64) -> f64>(model: &ZiModel, f: F) -> f64 {
    let ymax = y_cutoff(model.base, model.theta);
    (0..=ymax)
        .map(|y| f(y) * model.log_pmf(y).unwrap().exp())
        .sum()
}

/// The standard grid of (theta, gamma) points used by the identity checks.
pub fn theta_gamma_grid() -> Vec<(f64, f64)> {
    let thetas = [-1.0, -0.3, 0.0, 0.5, 1.2];
    let gammas = [-1.5, -0.5, 0.0, 0.7, 1.5];
    let mut grid = Vec::new();
    for &t in &thetas {
        for &g in &gammas {
            grid.push((t, g));
        }
    }
    grid
}

/// All preset types plus the mixture.
pub fn all_types() -> Vec<zinfer::ZiType> {
    vec![
        zinfer::ZiType::multiplicative(),
        zinfer::ZiType::additive(),
        zinfer::ZiType::hurdle(),
        zinfer::ZiType::Mixture,
    ]
}

/// Simulate a regression dataset: an intercept plus one uniform(-1, 1)
/// covariate on the theta side, intercept-only on the alpha side.
pub fn simulate_simple<R: Rng>(
    base: BaseCount,
    zi_type: ZiType,
    beta: (f64, f64),
    alpha: f64,
    n: usize,
    rng: &mut R,
) -> Dataset {
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut y = Vec::with_capacity(n);
    for &xi in &x {
        let theta = beta.0 + beta.1 * xi;
        let model = ZiModel::new(base, zi_type, theta, alpha).unwrap();
        y.push(model.sample_one(rng).unwrap());
    }
    let x_beta = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { x[i] });
    let x_alpha = DMatrix::from_element(n, 1, 1.0);
    Dataset::new(
        y,
        x_beta,
        x_alpha,
        vec!["intercept".to_string(), "x".to_string()],
        vec!["intercept".to_string()],
    )
    .unwrap()
}
