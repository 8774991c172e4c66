//! Small numeric helpers shared across the crate.

/// Clamp applied to log-odds before `expit` so probabilities stay strictly
/// inside (0, 1) in f64 arithmetic.
pub const LOGIT_CLAMP: f64 = 36.7;

/// log(p / (1 - p)).
pub fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

/// Inverse logit, clamped so the result never rounds to exactly 0 or 1.
pub fn expit(x: f64) -> f64 {
    let x = x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^x) without overflow.
pub fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// log(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn logit_expit_roundtrip() {
        for &p in &[1e-12, 0.01, 0.3678794411714423, 0.5, 0.9, 1.0 - 1e-12] {
            assert_relative_eq!(expit(logit(p)), p, max_relative = 1e-12);
        }
    }

    #[test]
    fn expit_stays_inside_unit_interval() {
        assert!(expit(1e4) < 1.0);
        assert!(expit(-1e4) > 0.0);
    }

    #[test]
    fn log_add_exp_matches_direct() {
        assert_relative_eq!(
            log_add_exp(-1.0, -2.0),
            ((-1.0f64).exp() + (-2.0f64).exp()).ln(),
            max_relative = 1e-14
        );
        assert_eq!(log_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
    }
}
