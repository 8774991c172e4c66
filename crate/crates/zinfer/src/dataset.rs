//! Response counts plus the two design matrices.

use crate::error::{Error, Result};
use crate::expfam::BaseCount;
use nalgebra::DMatrix;

/// Observed counts with design matrices for the location side (theta) and
/// the inflation side (gamma). The inflation design may be empty (q = 0),
/// which forces omega = 0 throughout.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: Vec<u64>,
    x_beta: DMatrix<f64>,
    x_alpha: DMatrix<f64>,
    beta_names: Vec<String>,
    alpha_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        y: Vec<u64>,
        x_beta: DMatrix<f64>,
        x_alpha: DMatrix<f64>,
        beta_names: Vec<String>,
        alpha_names: Vec<String>,
    ) -> Result<Self> {
        let n = y.len();
        if x_beta.nrows() != n || (x_alpha.ncols() > 0 && x_alpha.nrows() != n) {
            return Err(Error::DimensionMismatch {
                what: format!(
                    "y has {n} rows, x_beta {} and x_alpha {}",
                    x_beta.nrows(),
                    x_alpha.nrows()
                ),
            });
        }
        if beta_names.len() != x_beta.ncols() || alpha_names.len() != x_alpha.ncols() {
            return Err(Error::DimensionMismatch {
                what: "column names do not match design matrix widths".to_string(),
            });
        }
        let needed = x_beta.ncols() + x_alpha.ncols();
        if n < needed {
            return Err(Error::TooFewObservations { n, needed });
        }
        for (m, name) in [(&x_beta, "x_beta"), (&x_alpha, "x_alpha")] {
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    if !m[(r, c)].is_finite() {
                        let _ = name;
                        return Err(Error::NonFiniteDesign { row: r, col: c });
                    }
                }
            }
        }
        // x_alpha may legitimately have zero columns; normalise its row count
        // so later matrix products are well-formed.
        let x_alpha = if x_alpha.ncols() == 0 {
            DMatrix::zeros(n, 0)
        } else {
            x_alpha
        };
        Ok(Dataset {
            y,
            x_beta,
            x_alpha,
            beta_names,
            alpha_names,
        })
    }

    /// Intercept-only design on both sides, for iid data.
    pub fn iid(y: Vec<u64>) -> Result<Self> {
        let n = y.len();
        Dataset::new(
            y,
            DMatrix::from_element(n, 1, 1.0),
            DMatrix::from_element(n, 1, 1.0),
            vec!["intercept".to_string()],
            vec!["intercept".to_string()],
        )
    }

    /// Check every count against the base support.
    pub fn check_support(&self, base: BaseCount) -> Result<()> {
        for &y in &self.y {
            if !base.in_support(y) {
                return Err(Error::OutsideSupport { y });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of zero counts.
    pub fn n_zero(&self) -> usize {
        self.y.iter().filter(|&&v| v == 0).count()
    }

    pub fn sum_y(&self) -> u64 {
        self.y.iter().sum()
    }

    pub fn p(&self) -> usize {
        self.x_beta.ncols()
    }

    pub fn q(&self) -> usize {
        self.x_alpha.ncols()
    }

    pub fn y(&self) -> &[u64] {
        &self.y
    }

    pub fn x_beta(&self) -> &DMatrix<f64> {
        &self.x_beta
    }

    pub fn x_alpha(&self) -> &DMatrix<f64> {
        &self.x_alpha
    }

    pub fn beta_names(&self) -> &[String] {
        &self.beta_names
    }

    pub fn alpha_names(&self) -> &[String] {
        &self.alpha_names
    }

    /// Same data with the inflation design replaced (used when appending the
    /// f_k(pi0) columns for tau estimation).
    pub(crate) fn with_alpha_design(
        &self,
        x_alpha: DMatrix<f64>,
        alpha_names: Vec<String>,
    ) -> Self {
        Dataset {
            y: self.y.clone(),
            x_beta: self.x_beta.clone(),
            x_alpha,
            alpha_names,
            beta_names: self.beta_names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mismatched_rows() {
        let err = Dataset::new(
            vec![0, 1, 2],
            DMatrix::from_element(2, 1, 1.0),
            DMatrix::zeros(3, 0),
            vec!["intercept".into()],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_non_finite_design() {
        let mut x = DMatrix::from_element(3, 1, 1.0);
        x[(1, 0)] = f64::NAN;
        let err = Dataset::new(
            vec![0, 1, 2],
            x,
            DMatrix::zeros(3, 0),
            vec!["intercept".into()],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteDesign { row: 1, col: 0 }));
    }

    #[test]
    fn rejects_too_few_observations() {
        let err = Dataset::new(
            vec![0],
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            vec!["intercept".into()],
            vec!["intercept".into()],
        )
        .unwrap_err();
        assert!(matches!(err, Error::TooFewObservations { n: 1, needed: 2 }));
    }

    #[test]
    fn support_check_honours_binomial_trials() {
        let d = Dataset::iid(vec![0, 3, 5]).unwrap();
        assert!(d.check_support(BaseCount::Poisson).is_ok());
        assert!(d.check_support(BaseCount::binomial(4).unwrap()).is_err());
        assert_eq!(d.n_zero(), 1);
        assert_eq!(d.sum_y(), 8);
    }
}
