#![allow(clippy::needless_range_loop)]

use serde::{Deserialize, Serialize};

use super::{check_shape, Result};

/// Ridge strength tried first when the normal equations are singular.
pub const RIDGE_FALLBACK: f64 = 1e-8;

/// Relative pivot size below which a Cholesky factorization counts as singular.
const PIVOT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearParams {
    /// Standardize features before fitting (off by default).
    pub standardize: bool,
}

/// Ordinary least squares with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// Ridge strength that made the system solvable, if one was needed.
    pub ridge_lambda: Option<f64>,
}

impl LinearModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let p = check_shape(x, y)?;
        let n = x.len() as f64;
        let x_mean: Vec<f64> = (0..p)
            .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let y_mean = y.iter().sum::<f64>() / n;

        // Centred normal equations: (Xc'Xc) w = Xc'yc.
        let mut gram = vec![vec![0.0; p]; p];
        let mut rhs = vec![0.0; p];
        for (row, &target) in x.iter().zip(y) {
            let centred: Vec<f64> = row.iter().zip(&x_mean).map(|(v, m)| v - m).collect();
            let yc = target - y_mean;
            for i in 0..p {
                rhs[i] += centred[i] * yc;
                for j in 0..=i {
                    gram[i][j] += centred[i] * centred[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                gram[j][i] = gram[i][j];
            }
        }

        let mut ridge_lambda = None;
        let mut lambda = 0.0;
        let weights = loop {
            let mut a = gram.clone();
            for (i, row) in a.iter_mut().enumerate() {
                row[i] += lambda;
            }
            if let Some(w) = cholesky_solve(a, &rhs) {
                break w;
            }
            lambda = if lambda == 0.0 { RIDGE_FALLBACK } else { lambda * 10.0 };
            ridge_lambda = Some(lambda);
        };
        let intercept = y_mean - weights.iter().zip(&x_mean).map(|(w, m)| w * m).sum::<f64>();
        Ok(LinearModel {
            weights,
            intercept,
            ridge_lambda,
        })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Solves `a x = b` for symmetric positive definite `a`; `None` when a pivot
/// is non-positive or negligible relative to the largest diagonal entry.
fn cholesky_solve(mut a: Vec<Vec<f64>>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if d.is_nan() || d <= PIVOT_TOLERANCE * scale {
            return None;
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    // L z = b, then L' x = z.
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| a[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / a[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / a[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_a_noiseless_line() {
        let x: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.5]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        let m = LinearModel::fit(&x, &y).unwrap();
        assert!((m.weights[0] - 2.0).abs() < 1e-6);
        assert!((m.intercept - 1.0).abs() < 1e-6);
        assert_eq!(m.ridge_lambda, None);
    }

    #[test]
    fn wide_matrix_falls_back_to_ridge() {
        // More columns than rows, like a players encoding on a short season.
        let x: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..10).map(|j| if (i + j) % 3 == 0 { 1.0 } else { -1.0 }).collect())
            .collect();
        let y = vec![0.0, 1.0, 2.0, 1.0];
        let m = LinearModel::fit(&x, &y).unwrap();
        assert!(m.ridge_lambda.unwrap() >= RIDGE_FALLBACK);
        assert!(m.weights.iter().all(|w| w.is_finite()));
        assert!(m.intercept.is_finite());
    }

    #[test]
    fn constant_column_gets_zero_weight() {
        let x: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 7.0]).collect();
        let y: Vec<f64> = (0..5).map(|i| 3.0 * i as f64).collect();
        let m = LinearModel::fit(&x, &y).unwrap();
        assert!(m.ridge_lambda.is_some());
        assert!((m.weights[0] - 3.0).abs() < 1e-6);
        assert!(m.weights[1].abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            LinearModel::fit(&x, &[1.0]),
            Err(super::super::RegressError::DimensionMismatch(_))
        ));
    }
}
