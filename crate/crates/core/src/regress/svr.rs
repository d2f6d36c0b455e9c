//! Epsilon-insensitive support vector regression.
//!
//! Minimizes `0.5 |w|^2 + C * sum(max(0, |y_i - f(x_i)| - epsilon))` through its
//! dual, solved by sequential minimal optimization with second-order working
//! set selection. Training stops once the maximal KKT violation drops below
//! `tolerance` or after `max_iterations` pair updates.

use serde::{Deserialize, Serialize};

use super::{check_shape, RegressError, Result};

/// Curvature floor for non-positive-definite pairs.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    /// `exp(-gamma |a - b|^2)`; `None` uses `1 / n_features`.
    Rbf { gamma: Option<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: Kernel,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams {
            c: 1.0,
            epsilon: 0.1,
            kernel: Kernel::Linear,
            tolerance: 1e-6,
            max_iterations: 50_000,
        }
    }
}

impl SvrParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(RegressError::InvalidHyperparameter(m.into()));
        if !self.c.is_finite() || self.c <= 0.0 {
            return bad("C must be positive");
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return bad("epsilon must be non-negative");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad("tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if let Kernel::Rbf { gamma: Some(g) } = self.kernel {
            if g.is_nan() || g <= 0.0 {
                return bad("gamma must be positive");
            }
        }
        Ok(())
    }
}

/// Solver outcome. Not converging is a warning, not a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrStatus {
    pub converged: bool,
    pub iterations: usize,
    /// Maximal KKT violation at exit.
    pub kkt_gap: f64,
    /// Primal objective at the returned solution.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SvrFunction {
    /// `w . x + bias`.
    Linear { weights: Vec<f64> },
    /// `sum_i coef_i k(sv_i, x) + bias`.
    Rbf {
        gamma: f64,
        support: Vec<Vec<f64>>,
        coef: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub function: SvrFunction,
    pub bias: f64,
    pub status: SvrStatus,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d).exp()
}

/// Primal objective `0.5 |w|^2 + C * sum(eps-insensitive loss)` for a linear
/// function, used to report solver quality.
pub fn linear_objective(x: &[Vec<f64>], y: &[f64], weights: &[f64], bias: f64, c: f64, epsilon: f64) -> f64 {
    let reg = 0.5 * dot(weights, weights);
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(r, t)| ((t - dot(weights, r) - bias).abs() - epsilon).max(0.0))
        .sum();
    reg + c * loss
}

impl SvrModel {
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &SvrParams) -> Result<Self> {
        params.validate()?;
        let width = check_shape(x, y)?;
        let n = x.len();
        if n < 2 {
            return Err(RegressError::TooFewRows { rows: n, min_leaf: 1 });
        }
        let gamma = match params.kernel {
            Kernel::Linear => None,
            Kernel::Rbf { gamma } => Some(gamma.unwrap_or(1.0 / width.max(1) as f64)),
        };
        let k = |a: usize, b: usize| match gamma {
            None => dot(&x[a], &x[b]),
            Some(g) => rbf(g, &x[a], &x[b]),
        };
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = k(i, j);
                kernel[i * n + j] = v;
                kernel[j * n + i] = v;
            }
        }
        let c = params.c;

        // Variables t < n carry alpha_i (sign +1), t >= n carry alpha*_i (sign -1).
        let l = 2 * n;
        let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
        let src = |t: usize| if t < n { t } else { t - n };
        let q = |s: usize, t: usize| sign(s) * sign(t) * kernel[src(s) * n + src(t)];
        let mut alpha = vec![0.0; l];
        let mut grad: Vec<f64> = (0..l)
            .map(|t| if t < n { params.epsilon - y[t] } else { params.epsilon + y[t - n] })
            .collect();
        let is_upper = |a: f64| a >= c;
        let is_lower = |a: f64| a <= 0.0;

        let mut iterations = 0;
        let mut converged = false;
        let mut gap = f64::INFINITY;
        while iterations < params.max_iterations {
            // First index: maximal violation in the "up" set.
            let mut g_max = f64::NEG_INFINITY;
            let mut i_sel = None;
            for t in 0..l {
                let up = if sign(t) > 0.0 { !is_upper(alpha[t]) } else { !is_lower(alpha[t]) };
                if up && -sign(t) * grad[t] >= g_max {
                    g_max = -sign(t) * grad[t];
                    i_sel = Some(t);
                }
            }
            // Second index: largest objective decrease in the "low" set.
            let mut g_max2 = f64::NEG_INFINITY;
            let mut j_sel = None;
            let mut best_decrease = f64::INFINITY;
            if let Some(i) = i_sel {
                for t in 0..l {
                    let low = if sign(t) > 0.0 { !is_lower(alpha[t]) } else { !is_upper(alpha[t]) };
                    if !low {
                        continue;
                    }
                    let yg = sign(t) * grad[t];
                    g_max2 = g_max2.max(yg);
                    let diff = g_max + yg;
                    if diff > 0.0 {
                        let curvature = q(i, i) + q(t, t) - 2.0 * sign(i) * sign(t) * q(i, t);
                        let decrease = -(diff * diff) / if curvature > 0.0 { curvature } else { TAU };
                        if decrease <= best_decrease {
                            best_decrease = decrease;
                            j_sel = Some(t);
                        }
                    }
                }
            }
            gap = g_max + g_max2;
            let (Some(i), Some(j)) = (i_sel, j_sel) else {
                converged = true;
                break;
            };
            if gap < params.tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let q_ij = q(i, j);
            if sign(i) != sign(j) {
                let curvature = (q(i, i) + q(j, j) + 2.0 * q_ij).max(TAU);
                let delta = (-grad[i] - grad[j]) / curvature;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let curvature = (q(i, i) + q(j, j) - 2.0 * q_ij).max(TAU);
                let delta = (grad[i] - grad[j]) / curvature;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for (t, g) in grad.iter_mut().enumerate() {
                *g += q(i, t) * di + q(j, t) * dj;
            }
        }

        // Bias from free variables, or the midpoint of the feasible interval.
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free_sum, mut free_n) = (0.0, 0usize);
        for t in 0..l {
            let yg = sign(t) * grad[t];
            if is_upper(alpha[t]) {
                if sign(t) < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if is_lower(alpha[t]) {
                if sign(t) > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free_n += 1;
                free_sum += yg;
            }
        }
        let rho = if free_n > 0 { free_sum / free_n as f64 } else { (ub + lb) / 2.0 };
        let bias = -rho;

        let beta: Vec<f64> = (0..n).map(|i| alpha[i] - alpha[i + n]).collect();
        let fitted: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| beta[j] * kernel[j * n + i]).sum::<f64>() + bias)
            .collect();
        let norm_sq: f64 = (0..n).map(|i| beta[i] * (fitted[i] - bias)).sum();
        let loss: f64 = fitted
            .iter()
            .zip(y)
            .map(|(f, t)| ((t - f).abs() - params.epsilon).max(0.0))
            .sum();
        let status = SvrStatus {
            converged,
            iterations,
            kkt_gap: gap,
            objective: 0.5 * norm_sq + c * loss,
        };
        if !converged {
            log::warn!(
                "SVR stopped after {iterations} iterations with KKT gap {gap:.3e} (tolerance {:.1e})",
                params.tolerance
            );
        }

        let function = match gamma {
            None => {
                let mut weights = vec![0.0; width];
                for (b, row) in beta.iter().zip(x) {
                    for (w, v) in weights.iter_mut().zip(row) {
                        *w += b * v;
                    }
                }
                SvrFunction::Linear { weights }
            }
            Some(gamma) => {
                let (support, coef) = beta
                    .iter()
                    .zip(x)
                    .filter(|(b, _)| **b != 0.0)
                    .map(|(b, r)| (r.clone(), *b))
                    .unzip();
                SvrFunction::Rbf { gamma, support, coef }
            }
        };
        Ok(SvrModel { function, bias, status })
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let raw = match &self.function {
            SvrFunction::Linear { weights } => dot(weights, row),
            SvrFunction::Rbf { gamma, support, coef } => support
                .iter()
                .zip(coef)
                .map(|(s, c)| c * rbf(*gamma, s, row))
                .sum(),
        };
        raw + self.bias
    }

    /// Weights of the linear function; `None` for kernel expansions.
    pub fn weights(&self) -> Option<&[f64]> {
        match &self.function {
            SvrFunction::Linear { weights } => Some(weights),
            SvrFunction::Rbf { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_tube_for_constant_targets() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 / 3.0 - 1.5, (i % 3) as f64]).collect();
        let y = vec![2.0; 10];
        let m = SvrModel::fit(&x, &y, &SvrParams::default()).unwrap();
        assert!(m.status.converged);
        assert!(m.weights().unwrap().iter().all(|w| w.abs() < 1e-9));
        assert!((m.bias - 2.0).abs() < 1e-9);
        for r in &x {
            assert!((m.predict_row(r) - 2.0).abs() <= 0.1);
        }
    }

    #[test]
    fn recovers_slope_with_large_c() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 10.0 - 1.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| 3.0 * r[0]).collect();
        let params = SvrParams {
            c: 1000.0,
            epsilon: 0.01,
            ..SvrParams::default()
        };
        let m = SvrModel::fit(&x, &y, &params).unwrap();
        let slope = m.weights().unwrap()[0];
        assert!((slope - 3.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn rbf_kernel_fits_a_curve_inside_the_tube() {
        let x: Vec<Vec<f64>> = (0..25).map(|i| vec![i as f64 / 6.0 - 2.0]).collect();
        let y: Vec<f64> = x.iter().map(|r| r[0] * r[0]).collect();
        let params = SvrParams {
            c: 100.0,
            epsilon: 0.05,
            kernel: Kernel::Rbf { gamma: Some(1.0) },
            ..SvrParams::default()
        };
        let m = SvrModel::fit(&x, &y, &params).unwrap();
        let worst = x
            .iter()
            .zip(&y)
            .map(|(r, t)| (m.predict_row(r) - t).abs())
            .fold(0.0, f64::max);
        assert!(worst < 0.05 + 1e-3, "worst residual {worst}");
    }

    #[test]
    fn iteration_cap_reports_not_converged() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64).sin(), (i as f64 * 0.7).cos()]).collect();
        let y: Vec<f64> = (0..30).map(|i| ((i * 7) % 4) as f64).collect();
        let params = SvrParams {
            max_iterations: 2,
            ..SvrParams::default()
        };
        let m = SvrModel::fit(&x, &y, &params).unwrap();
        assert!(!m.status.converged);
        assert_eq!(m.status.iterations, 2);
    }
}
