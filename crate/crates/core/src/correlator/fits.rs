use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions};

use super::{CorrelationCurve, CorrelationHistogram};

/// `F(τ) = floor + (A − floor)·exp(−(τ/w)²·ln 2)` fitted over `τ ≥ 0`.
#[derive(Debug, Clone)]
pub struct GaussianDecayFit {
    pub amplitude: f64,
    /// Half width at half maximum of the decay above the floor.
    pub hwhm_ps: f64,
    /// Covariance of `(amplitude, hwhm_ps)`; `None` when singular.
    pub covariance: Option<DMatrix<f64>>,
    /// The curve carries no decay distinguishable from the floor; `hwhm_ps`
    /// is then meaningless.
    pub degenerate: bool,
    pub chi2: f64,
}

impl GaussianDecayFit {
    pub fn hwhm_sigma(&self) -> Option<f64> {
        self.covariance.as_ref().map(|c| c[(1, 1)].max(0.0).sqrt())
    }
}

fn gaussian_decay(floor: f64) -> impl Fn(&[f64], f64) -> f64 {
    move |p: &[f64], t: f64| floor + (p[0] - floor) * (-(t / p[1]).powi(2) * LN_2).exp()
}

/// Weighted fit of a Gaussian decay towards `floor` (0.25 for an
/// uncorrelated source). Bins with zero sigma are ignored.
pub fn fit_gaussian_decay(curve: &CorrelationCurve, floor: f64) -> Result<GaussianDecayFit> {
    let pts: Vec<(f64, f64, f64)> = curve
        .defined()
        .filter(|&(d, _, s)| d >= 0.0 && s > 0.0)
        .collect();
    if pts.len() < 5 {
        return Err(Error::Degenerate(format!(
            "{} usable bins, need at least 5",
            pts.len()
        )));
    }
    let (x, y, s) = unzip3(&pts);
    let amp0 = y.iter().take(3).copied().fold(f64::NEG_INFINITY, f64::max);
    let half = floor + 0.5 * (amp0 - floor);
    let w0 = pts
        .iter()
        .find(|p| (p.1 - floor).abs() < (half - floor).abs())
        .map(|p| p.0)
        .filter(|&d| d > 0.0)
        .unwrap_or_else(|| 0.5 * x[x.len() - 1]);
    let model = gaussian_decay(floor);
    let report = levenberg_marquardt(
        |p: &[f64], t| model(&[p[0], p[1].abs().max(1e-9)], t),
        &x,
        &y,
        &s,
        &[amp0, w0.max(1.0)],
        &LmOptions::default(),
    )?;
    let amplitude = report.params[0];
    let hwhm_ps = report.params[1].abs();
    let degenerate = match report.sigma(0) {
        Some(sa) => (amplitude - floor).abs() < 3.0 * sa || !report.sigma(1).is_some_and(|sw| sw < hwhm_ps),
        None => true,
    };
    Ok(GaussianDecayFit {
        amplitude,
        hwhm_ps,
        covariance: report.covariance,
        degenerate,
        chi2: report.chi2,
    })
}

/// `counts(τ) = floor + A·exp(−τ/tau)`.
#[derive(Debug, Clone)]
pub struct ExponentialDecayFit {
    pub tau_ps: f64,
    pub amplitude: f64,
    pub floor: f64,
    /// Covariance of `(floor, amplitude, tau_ps)`.
    pub covariance: Option<DMatrix<f64>>,
}

impl ExponentialDecayFit {
    pub fn tau_sigma(&self) -> Option<f64> {
        self.covariance.as_ref().map(|c| c[(2, 2)].max(0.0).sqrt())
    }
}

/// Exponential-plus-floor fit of an XX–X histogram over bin centres in
/// `fit_range_ps`, with Poisson weights. Fails unless at least five bins sit
/// clearly above the floor estimated from the tail of the range.
pub fn fit_exponential_decay(
    hist: &CorrelationHistogram,
    fit_range_ps: (f64, f64),
) -> Result<ExponentialDecayFit> {
    let pts: Vec<(f64, f64, f64)> = hist
        .delays_ps()
        .into_iter()
        .zip(&hist.counts)
        .filter(|(d, _)| *d >= fit_range_ps.0 && *d <= fit_range_ps.1)
        .map(|(d, &c)| (d, c as f64, (c as f64).max(1.0).sqrt()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::Degenerate(format!("{} bins in fit range", pts.len())));
    }
    let tail = (pts.len() / 5).max(1);
    let floor0 = pts[pts.len() - tail..].iter().map(|p| p.1).sum::<f64>() / tail as f64;
    let threshold = floor0 + 3.0 * floor0.max(1.0).sqrt() + 1.0;
    let above = pts.iter().filter(|p| p.1 > threshold).count();
    if above < 5 {
        return Err(Error::Degenerate(format!(
            "only {above} bins above the accidental floor ({floor0:.1} counts)"
        )));
    }
    let (x, y, s) = unzip3(&pts);
    let amp0 = (y[0] - floor0).max(1.0);
    let tau0 = pts
        .iter()
        .find(|p| p.1 - floor0 < amp0 / std::f64::consts::E)
        .map(|p| (p.0 - x[0]).max(hist.bin_width_ps as f64))
        .unwrap_or(0.5 * (x[x.len() - 1] - x[0]));
    let x0 = x[0];
    let model = move |p: &[f64], t: f64| p[0] + p[1] * (-(t - x0) / p[2].abs().max(1e-9)).exp();
    let report = levenberg_marquardt(model, &x, &y, &s, &[floor0, amp0, tau0], &LmOptions::default())?;
    let tau_ps = report.params[2].abs();
    Ok(ExponentialDecayFit {
        tau_ps,
        // amplitude at zero delay
        amplitude: report.params[1] * (x0 / tau_ps).exp(),
        floor: report.params[0],
        covariance: report.covariance,
    })
}

/// `C(τ) = offset + A·cos(2πτ/period + phase)`.
#[derive(Debug, Clone)]
pub struct OscillationFit {
    pub period_ps: f64,
    pub period_sigma_ps: Option<f64>,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub chi2: f64,
}

/// Fits a sinusoid to the defined bins of `curve` with delay in `range_ps`.
/// The period is seeded by a linear least-squares scan over
/// `[min_period_ps, max_period_ps]`.
pub fn fit_oscillation(
    curve: &CorrelationCurve,
    range_ps: (f64, f64),
    min_period_ps: f64,
    max_period_ps: f64,
) -> Result<OscillationFit> {
    let pts: Vec<(f64, f64, f64)> = curve
        .defined()
        .filter(|&(d, _, s)| d >= range_ps.0 && d <= range_ps.1 && s > 0.0)
        .collect();
    if pts.len() < 6 {
        return Err(Error::Degenerate(format!("{} usable bins", pts.len())));
    }
    let (x, y, s) = unzip3(&pts);

    // Weighted linear fit of (a·cos + b·sin + c) at fixed period.
    let linear = |period: f64| -> Option<(f64, [f64; 3])> {
        let mut m = Matrix3::zeros();
        let mut r = Vector3::zeros();
        for i in 0..x.len() {
            let w = 1.0 / (s[i] * s[i]);
            let ph = 2.0 * PI * x[i] / period;
            let basis = Vector3::new(ph.cos(), ph.sin(), 1.0);
            m += basis * basis.transpose() * w;
            r += basis * (y[i] * w);
        }
        let sol = m.lu().solve(&r)?;
        let chi2: f64 = (0..x.len())
            .map(|i| {
                let ph = 2.0 * PI * x[i] / period;
                ((y[i] - sol[0] * ph.cos() - sol[1] * ph.sin() - sol[2]) / s[i]).powi(2)
            })
            .sum();
        Some((chi2, [sol[0], sol[1], sol[2]]))
    };
    let steps = 2000;
    let ratio = (max_period_ps / min_period_ps).ln();
    let (period0, coef) = (0..=steps)
        .filter_map(|i| {
            let p = min_period_ps * (ratio * i as f64 / steps as f64).exp();
            linear(p).map(|(c, sol)| (p, c, sol))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, _, sol)| (p, sol))
        .ok_or_else(|| Error::Degenerate("no admissible period".into()))?;
    let amp0 = coef[0].hypot(coef[1]);
    let phase0 = (-coef[1]).atan2(coef[0]);

    let model = |p: &[f64], t: f64| p[3] + p[1] * (2.0 * PI * t / p[0] + p[2]).cos();
    let report = levenberg_marquardt(
        model,
        &x,
        &y,
        &s,
        &[period0, amp0, phase0, coef[2]],
        &LmOptions::default(),
    )?;
    Ok(OscillationFit {
        period_ps: report.params[0],
        period_sigma_ps: report.sigma(0),
        amplitude: report.params[1],
        phase: report.params[2],
        offset: report.params[3],
        chi2: report.chi2,
    })
}

fn unzip3(pts: &[(f64, f64, f64)]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let x = pts.iter().map(|p| p.0).collect();
    let y = pts.iter().map(|p| p.1).collect();
    let s = pts.iter().map(|p| p.2).collect();
    (x, y, s)
}
