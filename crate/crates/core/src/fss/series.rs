use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::model::{mixing_term, qwp_energy_shift, QwpModelParams};
use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QwpPoint {
    pub chi_rad: f64,
    pub delta_e_ueV: f64,
    pub sigma_ueV: f64,
}

/// Line-centre energies measured over a quarter-wave-plate rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct QwpSeries {
    points: Vec<QwpPoint>,
}

impl QwpSeries {
    pub const MIN_POINTS: usize = 8;

    /// Requires positive finite sigmas, at least [`Self::MIN_POINTS`] points
    /// and a rotation span of at least π.
    pub fn new(points: Vec<QwpPoint>) -> Result<Self> {
        if points.len() < Self::MIN_POINTS {
            return Err(Error::Degenerate(format!(
                "{} points, need at least {}",
                points.len(),
                Self::MIN_POINTS
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.chi_rad.is_finite() && p.delta_e_ueV.is_finite()) {
                return Err(Error::range("points", format!("row {i} is not finite")));
            }
            if !(p.sigma_ueV > 0.0 && p.sigma_ueV.is_finite()) {
                return Err(Error::range(
                    "sigma_ueV",
                    format!("row {i}: {} must be > 0", p.sigma_ueV),
                ));
            }
        }
        let lo = points.iter().map(|p| p.chi_rad).fold(f64::INFINITY, f64::min);
        let hi = points.iter().map(|p| p.chi_rad).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < PI - 1e-9 {
            return Err(Error::Degenerate(format!(
                "rotation span {:.4} rad is shorter than pi",
                hi - lo
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[QwpPoint] {
        &self.points
    }

    fn columns(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let chi = self.points.iter().map(|p| p.chi_rad).collect();
        let e = self.points.iter().map(|p| p.delta_e_ueV).collect();
        let s = self.points.iter().map(|p| p.sigma_ueV).collect();
        (chi, e, s)
    }
}

/// Samples the QWP model at `points` angles evenly covering `[0, π]`.
/// With a `noise_seed`, Gaussian noise of width `noise_sigma_ueV` is added;
/// the sigma column is `noise_sigma_ueV` either way.
pub fn synth_qwp_series(
    params: &QwpModelParams,
    points: usize,
    noise_sigma_ueV: f64,
    noise_seed: Option<u64>,
) -> Result<QwpSeries> {
    if !(noise_sigma_ueV > 0.0) {
        return Err(Error::range(
            "noise_sigma_ueV",
            format!("{noise_sigma_ueV} must be > 0"),
        ));
    }
    if points < 2 {
        return Err(Error::range("points", "need at least 2"));
    }
    let noise = Normal::new(0.0, noise_sigma_ueV)
        .map_err(|e| Error::range("noise_sigma_ueV", e.to_string()))?;
    let mut rng = noise_seed.map(ChaCha8Rng::seed_from_u64);
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let chi = PI * i as f64 / (points - 1) as f64;
        let mut e = params.epsilon_ueV + qwp_energy_shift(chi, params)?;
        if let Some(rng) = rng.as_mut() {
            e += noise.sample(rng);
        }
        out.push(QwpPoint {
            chi_rad: chi,
            delta_e_ueV: e,
            sigma_ueV: noise_sigma_ueV,
        });
    }
    QwpSeries::new(out)
}

#[derive(Debug, Clone, Copy)]
pub struct FssFitOptions {
    /// Fit the state polarization `p` instead of fixing it at zero.
    pub fit_p: bool,
    /// Starting grid size along θ and φ.
    pub grid: usize,
    /// Number of best-scoring grid nodes refined by the nonlinear fit.
    pub refine: usize,
    pub lm: LmOptions,
}

impl Default for FssFitOptions {
    fn default() -> Self {
        Self {
            fit_p: false,
            grid: 8,
            refine: 4,
            lm: LmOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FssFit {
    pub params: QwpModelParams,
    /// Covariance in the order `s, θ, φ, ε` (then `p` when fitted).
    pub covariance: Option<DMatrix<f64>>,
    pub chi2: f64,
    pub dof: usize,
}

impl FssFit {
    pub fn parameter_names(&self) -> &'static [&'static str] {
        if self.covariance.as_ref().is_some_and(|c| c.nrows() == 5) {
            &["s_ueV", "theta_rad", "phi_rad", "epsilon_ueV", "p"]
        } else {
            &["s_ueV", "theta_rad", "phi_rad", "epsilon_ueV"]
        }
    }

    pub fn estimates(&self) -> Vec<f64> {
        let p = &self.params;
        let mut v = vec![p.s_ueV, p.theta_rad, p.phi_rad, p.epsilon_ueV];
        if self.parameter_names().len() == 5 {
            v.push(p.p);
        }
        v
    }

    pub fn sigma(&self, i: usize) -> Option<f64> {
        self.covariance.as_ref().map(|c| c[(i, i)].max(0.0).sqrt())
    }

    pub fn s_sigma_ueV(&self) -> Option<f64> {
        self.sigma(0)
    }
}

#[derive(Debug, Clone)]
pub enum FssOutcome {
    Resolved(FssFit),
    /// The energy variation is consistent with noise alone.
    Unresolved {
        /// Approximate two-sigma upper bound on |s|.
        upper_bound_ueV: f64,
        chi2_constant: f64,
        dof: usize,
    },
}

impl FssOutcome {
    pub fn resolved(&self) -> Option<&FssFit> {
        match self {
            FssOutcome::Resolved(f) => Some(f),
            FssOutcome::Unresolved { .. } => None,
        }
    }
}

/// Weighted fit of the QWP model over `(s, θ, φ, ε)` (and `p` when
/// requested). At `p = 0` the model is linear in
/// `{1, cos4χ, sin4χ, sin2χ}`; that solution seeds the search together with
/// the best nodes of a θ×φ grid. The result is mapped to the canonical
/// representative `s ≥ 0`, `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
pub fn fit_fss(series: &QwpSeries, options: &FssFitOptions) -> Result<FssOutcome> {
    let (chi, e, sigma) = series.columns();
    let n = chi.len();

    let weights: Vec<f64> = sigma.iter().map(|s| 1.0 / (s * s)).collect();
    let wsum: f64 = weights.iter().sum();
    let mean = e.iter().zip(&weights).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let chi2_constant: f64 = e.iter().zip(&weights).map(|(y, w)| (y - mean).powi(2) * w).sum();
    let dof_constant = n - 1;

    let linear = linear_solution(&chi, &e, &sigma)?;
    if chi2_constant <= dof_constant as f64 + 3.0 * (2.0 * dof_constant as f64).sqrt() {
        return Ok(FssOutcome::Unresolved {
            upper_bound_ueV: linear.upper_bound(),
            chi2_constant,
            dof: dof_constant,
        });
    }

    let fit_p = options.fit_p;
    let model = move |q: &[f64], x: f64| {
        let p = if fit_p { q[4] } else { 0.0 };
        let xm = mixing_term(x, q[1], q[2]);
        let den = 2.0 + p * xm;
        if den.abs() < 1e-9 {
            f64::NAN
        } else {
            q[0] / 2.0 * (2.0 * p + xm) / den + q[3]
        }
    };

    let lin = linear.params();
    let mut starts = vec![lin];
    starts.extend(grid_starts(&chi, &e, &sigma, options.grid, options.refine));
    let mut best: Option<crate::fit::FitReport> = None;
    let mut last_err = None;
    for start in &starts {
        let mut initial = start.to_vec();
        if fit_p {
            initial.push(0.0);
        }
        match levenberg_marquardt(model, &chi, &e, &sigma, &initial, &options.lm) {
            Ok(report) => {
                if fit_p && report.params[4].abs() > 1.0 {
                    continue;
                }
                if best.as_ref().is_none_or(|b| report.chi2 < b.chi2) {
                    best = Some(report);
                }
            }
            Err(err) => last_err = Some(err),
        }
    }
    let report = match (best, last_err) {
        (Some(r), _) => r,
        (None, Some(err)) => return Err(err),
        (None, None) => return Err(Error::Degenerate("no admissible fit start".into())),
    };
    let (params, covariance) = canonicalize(&report.params, report.covariance, fit_p);
    Ok(FssOutcome::Resolved(FssFit {
        params,
        covariance,
        chi2: report.chi2,
        dof: report.dof,
    }))
}

/// Scores every node of a θ×φ grid by the best linear fit of `(s, ε)` at
/// `p = 0` (the model is linear in both once θ and φ are fixed) and returns
/// the `keep` best nodes as starting points.
fn grid_starts(chi: &[f64], e: &[f64], sigma: &[f64], grid: usize, keep: usize) -> Vec<[f64; 4]> {
    let g = grid.max(1);
    let mut nodes: Vec<(f64, [f64; 4])> = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let theta = PI * i as f64 / g as f64;
            let phi = TAU * j as f64 / g as f64;
            // Weighted normal equations of y = (s/2)·X + ε.
            let (mut sxx, mut sx, mut s1, mut sxy, mut sy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for ((&c, &y), &sg) in chi.iter().zip(e).zip(sigma) {
                let w = 1.0 / (sg * sg);
                let x = 0.5 * mixing_term(c, theta, phi);
                sxx += w * x * x;
                sx += w * x;
                s1 += w;
                sxy += w * x * y;
                sy += w * y;
                syy += w * y * y;
            }
            let det = sxx * s1 - sx * sx;
            if det.abs() < 1e-300 {
                continue;
            }
            let s = (sxy * s1 - sx * sy) / det;
            let eps = (sxx * sy - sx * sxy) / det;
            let chi2 = syy - s * sxy - eps * sy;
            nodes.push((chi2, [s, theta, phi, eps]));
        }
    }
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes.into_iter().take(keep).map(|(_, p)| p).collect()
}

/// Maps fitted parameters onto the representative `s ≥ 0`, `θ ∈ [0, π]`,
/// `φ ∈ [0, 2π)` using `(s, θ, φ, p) ~ (−s, θ+π, φ, −p) ~ (s, −θ, φ+π, p)`,
/// transforming the covariance by the matching sign flips.
fn canonicalize(
    q: &[f64],
    covariance: Option<DMatrix<f64>>,
    fit_p: bool,
) -> (QwpModelParams, Option<DMatrix<f64>>) {
    let (mut s, mut theta, mut phi, eps) = (q[0], q[1], q[2], q[3]);
    let mut p = if fit_p { q[4] } else { 0.0 };
    let mut signs = vec![1.0; q.len()];
    if s < 0.0 {
        s = -s;
        theta += PI;
        p = -p;
        signs[0] = -1.0;
        if fit_p {
            signs[4] = -1.0;
        }
    }
    theta = wrap_symmetric(theta);
    if theta < 0.0 {
        theta = -theta;
        phi += PI;
        signs[1] = -signs[1];
    }
    phi = phi.rem_euclid(TAU);
    if phi >= TAU {
        phi = 0.0;
    }
    let covariance = covariance.map(|c| {
        let d = DMatrix::from_diagonal(&DVector::from_vec(signs));
        &d * c * &d
    });
    (
        QwpModelParams {
            s_ueV: s,
            theta_rad: theta,
            phi_rad: phi,
            p,
            epsilon_ueV: eps,
        },
        covariance,
    )
}

/// Wraps an angle into `(−π, π]`.
fn wrap_symmetric(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

struct LinearSolution {
    c: [f64; 4],
    covariance: DMatrix<f64>,
}

impl LinearSolution {
    /// `(s, θ, φ, ε)` from the linear coefficients at `p = 0`.
    fn params(&self) -> [f64; 4] {
        let [c0, c1, c2, c3] = self.c;
        let b = -c3 / 2.0;
        let s = 4.0 * (c1 * c1 + c2 * c2 + b * b).sqrt();
        let theta = (c2 * c2 + b * b).sqrt().atan2(c1);
        let phi = b.atan2(c2).rem_euclid(TAU);
        [s, theta, phi, c0 - c1]
    }

    fn upper_bound(&self) -> f64 {
        let [_, c1, c2, c3] = self.c;
        let v = &self.covariance;
        let magnitude = c1 * c1 + c2 * c2 + c3 * c3 / 4.0;
        let spread = v[(1, 1)] + v[(2, 2)] + v[(3, 3)] / 4.0;
        4.0 * (magnitude + 4.0 * spread).sqrt()
    }
}

fn linear_solution(chi: &[f64], e: &[f64], sigma: &[f64]) -> Result<LinearSolution> {
    let n = chi.len();
    let design = DMatrix::from_fn(n, 4, |i, j| {
        let x = chi[i];
        let f = match j {
            0 => 1.0,
            1 => (4.0 * x).cos(),
            2 => (4.0 * x).sin(),
            _ => (2.0 * x).sin(),
        };
        f / sigma[i]
    });
    let rhs = DVector::from_fn(n, |i, _| e[i] / sigma[i]);
    let normal = design.tr_mul(&design);
    let covariance = normal
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("QWP angles do not constrain the model".into()))?;
    let c = &covariance * design.tr_mul(&rhs);
    Ok(LinearSolution {
        c: [c[0], c[1], c[2], c[3]],
        covariance,
    })
}
