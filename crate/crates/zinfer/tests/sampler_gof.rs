//! Chi-square goodness of fit of the base samplers against their pmfs,
//! covering both Poisson branches (sequential inversion and transformed
//! rejection) and the binomial.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use zinfer::BaseCount;

fn gof(base: BaseCount, theta: f64, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = base.moments(theta);
    let ymax = match base.support_upper() {
        Some(t) => t as usize,
        None => (m.mean + 20.0 * m.var.sqrt()).ceil() as usize + 10,
    };
    let mut expected: Vec<f64> = (0..=ymax as u64)
        .map(|y| n as f64 * base.log_pmf(theta, y).unwrap().exp())
        .collect();
    let mut observed = vec![0.0f64; expected.len()];
    for _ in 0..n {
        let y = base.sample(theta, &mut rng) as usize;
        observed[y.min(ymax)] += 1.0;
    }
    // merge bins from both ends until every expected count is at least 5
    while expected.len() > 2 && *expected.last().unwrap() < 5.0 {
        let last = expected.len() - 1;
        expected[last - 1] += expected[last];
        observed[last - 1] += observed[last];
        expected.pop();
        observed.pop();
    }
    while expected.len() > 2 && expected[0] < 5.0 {
        expected[1] += expected[0];
        observed[1] += observed[0];
        expected.remove(0);
        observed.remove(0);
    }
    let stat: f64 = expected
        .iter()
        .zip(&observed)
        .map(|(e, o)| (o - e) * (o - e) / e)
        .sum();
    let crit = ChiSquared::new((expected.len() - 1) as f64)
        .unwrap()
        .inverse_cdf(0.999);
    (stat, crit)
}

#[test]
fn poisson_inversion_branch_fits_the_pmf() {
    let (stat, crit) = gof(BaseCount::Poisson, 1.2f64.ln(), 100_000, 1);
    assert!(stat <= crit, "chi2 {stat} over critical {crit}");
}

#[test]
fn poisson_rejection_branch_fits_the_pmf() {
    // lambda = 75 exercises the transformed-rejection sampler
    let (stat, crit) = gof(BaseCount::Poisson, 75.0f64.ln(), 100_000, 2);
    assert!(stat <= crit, "chi2 {stat} over critical {crit}");
}

#[test]
fn binomial_sampler_fits_the_pmf() {
    let (stat, crit) = gof(BaseCount::binomial(12).unwrap(), 0.4, 100_000, 3);
    assert!(stat <= crit, "chi2 {stat} over critical {crit}");
}
