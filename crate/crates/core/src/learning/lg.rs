use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kde::check_nonsingular;
use crate::kernel::log_two_pi;

/// Smallest residual variance an LG CPD may carry.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Linear Gaussian CPD: `x | pa ~ N(β₀ + Σ βₖ paₖ, σ²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LgCpd {
    intercept: f64,
    coefficients: Vec<f64>,
    variance: f64,
}

impl LgCpd {
    pub fn new(intercept: f64, coefficients: Vec<f64>, variance: f64) -> Result<Self> {
        if !intercept.is_finite() || coefficients.iter().any(|b| !b.is_finite()) {
            return Err(Error::fit("lg parameters must be finite"));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::fit(format!("lg variance must be positive, got {variance}")));
        }
        Ok(LgCpd {
            intercept,
            coefficients,
            variance: variance.max(VARIANCE_FLOOR),
        })
    }

    /// Least squares with intercept; the variance is the mean squared
    /// residual. `names` lists the child first, then the parents.
    pub fn fit(child: &[f64], parents: &[&[f64]], names: &[&str]) -> Result<Self> {
        let n = child.len();
        let p = parents.len();
        if n <= p + 1 {
            return Err(Error::fit(format!("lg fit needs more than {} instances, got {n}", p + 1)));
        }
        let mean = |c: &[f64]| c.iter().sum::<f64>() / n as f64;
        let y_mean = mean(child);
        let x_means: Vec<f64> = parents.iter().map(|c| mean(c)).collect();

        let mut coefficients = vec![0.0; p];
        if p > 0 {
            let mut gram = DMatrix::<f64>::zeros(p, p);
            let mut rhs = DVector::<f64>::zeros(p);
            for i in 0..p {
                let xi = parents[i];
                rhs[i] = xi.iter().zip(child).map(|(a, b)| (a - x_means[i]) * (b - y_mean)).sum();
                for j in 0..=i {
                    let s: f64 = xi
                        .iter()
                        .zip(parents[j])
                        .map(|(a, b)| (a - x_means[i]) * (b - x_means[j]))
                        .sum();
                    gram[(i, j)] = s;
                    gram[(j, i)] = s;
                }
            }
            check_nonsingular(&gram, &names[1..])?;
            let beta = gram
                .cholesky()
                .ok_or_else(|| Error::fit("lg design matrix is not positive definite"))?
                .solve(&rhs);
            coefficients.copy_from_slice(beta.as_slice());
        }
        let intercept = y_mean - coefficients.iter().zip(&x_means).map(|(b, m)| b * m).sum::<f64>();
        let mut ss = 0.0;
        for r in 0..n {
            let mu = intercept + coefficients.iter().zip(parents).map(|(b, c)| b * c[r]).sum::<f64>();
            ss += (child[r] - mu).powi(2);
        }
        Ok(LgCpd {
            intercept,
            coefficients,
            variance: (ss / n as f64).max(VARIANCE_FLOOR),
        })
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn mean(&self, parents: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(parents).map(|(b, x)| b * x).sum::<f64>()
    }

    /// `row` holds the child value followed by the parent values.
    pub fn logpdf(&self, row: &[f64]) -> f64 {
        let r = row[0] - self.mean(&row[1..]);
        -0.5 * (log_two_pi() + self.variance.ln()) - 0.5 * r * r / self.variance
    }

    pub fn logpdf_columns(&self, child: &[f64], parents: &[&[f64]]) -> Vec<f64> {
        let c = -0.5 * (log_two_pi() + self.variance.ln());
        (0..child.len())
            .map(|r| {
                let mu = self.intercept
                    + self.coefficients.iter().zip(parents).map(|(b, p)| b * p[r]).sum::<f64>();
                let e = child[r] - mu;
                c - 0.5 * e * e / self.variance
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginal_mean_and_mle_variance() {
        let cpd = LgCpd::fit(&[1.0, 3.0], &[], &["x"]).unwrap();
        assert_eq!(cpd.intercept(), 2.0);
        assert_eq!(cpd.variance(), 1.0);
    }

    #[test]
    fn noiseless_line_hits_floor() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let cpd = LgCpd::fit(&y, &[&x], &["y", "x"]).unwrap();
        assert!((cpd.intercept() - 1.0).abs() < 1e-12);
        assert!((cpd.coefficients()[0] - 2.0).abs() < 1e-12);
        assert_eq!(cpd.variance(), VARIANCE_FLOOR);
    }

    #[test]
    fn log_density_values() {
        let cpd = LgCpd::new(0.0, vec![], 1.0).unwrap();
        assert!((cpd.logpdf(&[0.0]) + 0.918_938_533_204_672_7).abs() < 1e-12);
        assert!((cpd.logpdf(&[1.0]) + 1.418_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn collinear_parents_are_named() {
        let a = [0.0, 1.0, 2.0, 3.0, 5.0];
        let b: Vec<f64> = a.iter().map(|v| 3.0 * v).collect();
        let y = [1.0, 0.0, 2.0, 1.0, 4.0];
        let err = LgCpd::fit(&y, &[&a, &b], &["y", "a", "b"]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("b is collinear with a"), "{msg}");
    }

    #[test]
    fn too_few_rows() {
        assert!(LgCpd::fit(&[1.0, 2.0], &[&[0.0, 1.0]], &["y", "x"]).is_err());
    }
}
