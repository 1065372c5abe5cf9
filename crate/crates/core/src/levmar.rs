//! Small dense Levenberg–Marquardt solver for the handful of nonlinear fits
//! in this crate (Lorentzian lineshapes, decay-rate extraction). Normal
//! equations with multiplicative damping; fine for ≤ 6 well-scaled
//! parameters.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::math;

pub(crate) struct LmResult {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    /// (JᵀJ)⁻¹ scaled by cost/(n−p): parameter covariance estimate.
    pub covariance: Vec<f64>,
}

/// Minimizes Σ r_i(p)² for a model providing residuals and an analytic
/// Jacobian (row-major, n_points × n_params).
pub(crate) fn fit<F>(mut eval: F, p0: &[f64], n_points: usize, max_iter: usize) -> Result<LmResult>
where
    F: FnMut(&[f64], &mut [f64], Option<&mut [f64]>),
{
    let np = p0.len();
    if n_points < np {
        return Err(CoreError::Argument("fewer data points than fit parameters"));
    }
    let mut params = p0.to_vec();
    let mut residuals = vec![0.0; n_points];
    let mut jacobian = vec![0.0; n_points * np];
    let mut trial = vec![0.0; n_points];

    eval(&params, &mut residuals, Some(&mut jacobian));
    let mut cost: f64 = residuals.iter().map(|r| r * r).sum();
    let mut lambda = 1e-3;
    let mut iterations = 0;

    for _ in 0..max_iter {
        iterations += 1;
        // Normal equations: (JᵀJ + λ·diag(JᵀJ)) δ = −Jᵀr
        let mut jtj = vec![0.0; np * np];
        let mut jtr = vec![0.0; np];
        for i in 0..n_points {
            let row = &jacobian[i * np..(i + 1) * np];
            for a in 0..np {
                jtr[a] += row[a] * residuals[i];
                for b in a..np {
                    jtj[a * np + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                jtj[a * np + b] = jtj[b * np + a];
            }
        }

        let mut improved = false;
        for _ in 0..12 {
            let mut lhs = jtj.clone();
            for a in 0..np {
                lhs[a * np + a] += lambda * jtj[a * np + a].max(1e-300);
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(step) = solve_dense(&mut lhs, &rhs, np) else {
                lambda *= 10.0;
                continue;
            };
            let candidate: Vec<f64> = params.iter().zip(&step).map(|(p, d)| p + d).collect();
            eval(&candidate, &mut trial, None);
            let new_cost: f64 = trial.iter().map(|r| r * r).sum();
            if new_cost.is_finite() && new_cost < cost {
                let rel_drop = (cost - new_cost) / cost.max(1e-300);
                params = candidate;
                cost = new_cost;
                lambda = (lambda * 0.3).max(1e-12);
                eval(&params, &mut residuals, Some(&mut jacobian));
                improved = true;
                if rel_drop < 1e-12 {
                    iterations = max_iter; // converged; fall through
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved || iterations >= max_iter {
            break;
        }
    }

    // Covariance from the undamped normal matrix at the optimum.
    let mut jtj = vec![0.0; np * np];
    for i in 0..n_points {
        let row = &jacobian[i * np..(i + 1) * np];
        for a in 0..np {
            for b in 0..np {
                jtj[a * np + b] += row[a] * row[b];
            }
        }
    }
    let dof = (n_points - np).max(1) as f64;
    let covariance = invert_dense(&jtj, np)
        .map(|inv| inv.iter().map(|v| v * cost / dof).collect())
        .unwrap_or_else(|| vec![f64::NAN; np * np]);

    Ok(LmResult {
        params,
        cost,
        iterations,
        covariance,
    })
}

/// Gaussian elimination with partial pivoting; `a` is destroyed.
fn solve_dense(a: &mut [f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut x = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        let mut best = math::abs(a[col * n + col]);
        for row in col + 1..n {
            let v = math::abs(a[row * n + col]);
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * x[k];
        }
        x[col] = acc / a[col * n + col];
    }
    Some(x)
}

fn invert_dense(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        let mut work = a.to_vec();
        let x = solve_dense(&mut work, &e, n)?;
        for row in 0..n {
            inv[row * n + col] = x[row];
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_linear_system() {
        let a = vec![4.0, 1.0, 2.0, 1.0, 3.0, 0.5, 2.0, 0.5, 5.0];
        let b = vec![1.0, 2.0, 3.0];
        let x = solve_dense(&mut a.clone(), &b, 3).unwrap();
        // Verify A·x = b.
        for i in 0..3 {
            let mut acc = 0.0;
            for j in 0..3 {
                acc += a[i * 3 + j] * x[j];
            }
            assert!((acc - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn fits_exponential_decay() {
        // y = a·exp(−b t); recover (a, b) from exact samples.
        let (a_true, b_true) = (2.5, 0.7);
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| a_true * math::exp(-b_true * t)).collect();
        let result = fit(
            |p, r, mut jac| {
                for (i, (&t, &y)) in ts.iter().zip(&ys).enumerate() {
                    let model = p[0] * math::exp(-p[1] * t);
                    r[i] = model - y;
                    if let Some(j) = jac.as_deref_mut() {
                        j[i * 2] = math::exp(-p[1] * t);
                        j[i * 2 + 1] = -t * model;
                    }
                }
            },
            &[1.0, 0.3],
            50,
            100,
        )
        .unwrap();
        assert!((result.params[0] - a_true).abs() < 1e-8);
        assert!((result.params[1] - b_true).abs() < 1e-8);
        assert!(result.cost < 1e-16);
    }
}
