//! Weighted nonlinear least squares (Levenberg–Marquardt with Marquardt
//! diagonal scaling and central-difference Jacobians).
//!
//! Shared by the decay fits in [`crate::correlator`] and the spectroscopy fits
//! in [`crate::fss`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Relative chi² decrease below which an accepted step counts as stalled.
    pub ftol: f64,
    /// Relative parameter change below which an accepted step counts as stalled.
    pub xtol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            ftol: 1e-13,
            xtol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub params: Vec<f64>,
    /// Unscaled covariance `(JᵀWJ)⁻¹`; `None` when the normal matrix is
    /// singular at the optimum.
    pub covariance: Option<DMatrix<f64>>,
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
}

impl FitReport {
    pub fn reduced_chi2(&self) -> f64 {
        if self.dof == 0 {
            f64::NAN
        } else {
            self.chi2 / self.dof as f64
        }
    }

    /// Standard error of parameter `i` from the covariance diagonal.
    pub fn sigma(&self, i: usize) -> Option<f64> {
        self.covariance
            .as_ref()
            .map(|c| c[(i, i)].max(0.0).sqrt())
    }
}

/// Fits `model(params, x)` to `(x, y)` with per-point standard deviations
/// `sigma`. Points with non-positive or non-finite sigma are ignored.
pub fn levenberg_marquardt<F>(
    model: F,
    x: &[f64],
    y: &[f64],
    sigma: &[f64],
    initial: &[f64],
    options: &LmOptions,
) -> Result<FitReport>
where
    F: Fn(&[f64], f64) -> f64,
{
    assert_eq!(x.len(), y.len());
    assert_eq!(x.len(), sigma.len());
    let points: Vec<(f64, f64, f64)> = x
        .iter()
        .zip(y)
        .zip(sigma)
        .filter(|((xi, yi), si)| xi.is_finite() && yi.is_finite() && si.is_finite() && **si > 0.0)
        .map(|((&xi, &yi), &si)| (xi, yi, 1.0 / si))
        .collect();
    let n_par = initial.len();
    if points.len() < n_par {
        return Err(Error::Degenerate(format!(
            "{} usable points for {} parameters",
            points.len(),
            n_par
        )));
    }

    let residuals = |p: &[f64]| -> DVector<f64> {
        DVector::from_iterator(
            points.len(),
            points.iter().map(|&(xi, yi, wi)| (yi - model(p, xi)) * wi),
        )
    };
    // Jacobian of the model (not the residual), weighted.
    let jacobian = |p: &[f64]| -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(points.len(), n_par);
        let mut q = p.to_vec();
        for j in 0..n_par {
            let h = 1e-6 * p[j].abs().max(1e-3);
            q[j] = p[j] + h;
            let plus: Vec<f64> = points.iter().map(|&(xi, _, _)| model(&q, xi)).collect();
            q[j] = p[j] - h;
            for (i, &(xi, _, wi)) in points.iter().enumerate() {
                jac[(i, j)] = (plus[i] - model(&q, xi)) / (2.0 * h) * wi;
            }
            q[j] = p[j];
        }
        jac
    };

    let mut params = initial.to_vec();
    let mut r = residuals(&params);
    let mut chi2 = r.norm_squared();
    if !chi2.is_finite() {
        return Err(Error::FitFailed {
            iterations: 0,
            chi2,
        });
    }
    let mut lambda = -1.0;
    let mut stalled = 0;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let jac = jacobian(&params);
        let normal = jac.tr_mul(&jac);
        let gradient = jac.tr_mul(&r);
        if lambda < 0.0 {
            lambda = 1e-3 * normal.diagonal().max().max(1e-300);
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = normal.clone();
            for j in 0..n_par {
                damped[(j, j)] += lambda * normal[(j, j)].max(1e-12);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&gradient),
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, d)| p + d).collect();
            let trial_r = residuals(&trial);
            let trial_chi2 = trial_r.norm_squared();
            if trial_chi2.is_finite() && trial_chi2 <= chi2 {
                let rel_f = (chi2 - trial_chi2) / chi2.max(1e-300);
                let rel_x = params
                    .iter()
                    .zip(&trial)
                    .map(|(a, b)| (a - b).abs() / (a.abs() + 1e-12))
                    .fold(0.0, f64::max);
                params = trial;
                r = trial_r;
                chi2 = trial_chi2;
                lambda = (lambda / 5.0).max(1e-12);
                accepted = true;
                if rel_f < options.ftol || rel_x < options.xtol || chi2 < 1e-28 {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                break;
            }
            lambda *= 4.0;
        }
        // No downhill step exists at any damping: a local minimum.
        if !accepted || stalled >= 2 {
            return Ok(finish(params, &jacobian, chi2, points.len(), iterations));
        }
    }
    Err(Error::FitFailed { iterations, chi2 })
}

fn finish<J>(params: Vec<f64>, jacobian: &J, chi2: f64, n_points: usize, iterations: usize) -> FitReport
where
    J: Fn(&[f64]) -> DMatrix<f64>,
{
    let jac = jacobian(&params);
    let normal = jac.tr_mul(&jac);
    let covariance = normal
        .clone()
        .try_inverse()
        .filter(|c| c.iter().all(|v| v.is_finite()) && (0..c.nrows()).all(|i| c[(i, i)] >= 0.0));
    FitReport {
        dof: n_points.saturating_sub(params.len()),
        params,
        covariance,
        chi2,
        iterations,
    }
}
