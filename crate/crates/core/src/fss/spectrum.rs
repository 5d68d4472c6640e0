use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::model::{qwp_energy_shift, QwpModelParams};
use crate::error::{Error, Result};
use crate::fit::{levenberg_marquardt, LmOptions};
use crate::units::FWHM_PER_SIGMA;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineBehavior {
    /// Neutral exciton-like line whose centre follows the QWP model.
    FssSplit(QwpModelParams),
    /// Charged transition; the centre does not depend on polarization.
    Unsplit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub center_ueV: f64,
    /// Peak height in counts per grid point before resolution broadening.
    pub intensity: f64,
    pub fwhm_ueV: f64,
    pub behavior: LineBehavior,
}

impl SpectralLine {
    pub fn new(center_ueV: f64, intensity: f64, fwhm_ueV: f64, behavior: LineBehavior) -> Result<Self> {
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::range("intensity", format!("{intensity} must be > 0")));
        }
        if !(fwhm_ueV > 0.0 && fwhm_ueV.is_finite()) {
            return Err(Error::range("fwhm_ueV", format!("{fwhm_ueV} must be > 0")));
        }
        if !center_ueV.is_finite() {
            return Err(Error::range("center_ueV", "must be finite"));
        }
        if let LineBehavior::FssSplit(p) = behavior {
            if !(p.p.abs() <= 1.0) {
                return Err(Error::range("p", format!("{} outside [-1, 1]", p.p)));
            }
        }
        Ok(Self {
            center_ueV,
            intensity,
            fwhm_ueV,
            behavior,
        })
    }

    /// Line centre at QWP angle `chi_rad`.
    pub fn center_at(&self, chi_rad: f64) -> Result<f64> {
        match self.behavior {
            LineBehavior::Unsplit => Ok(self.center_ueV),
            LineBehavior::FssSplit(p) => Ok(self.center_ueV + qwp_energy_shift(chi_rad, &p)?),
        }
    }
}

/// Uniform energy axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGrid {
    pub start_ueV: f64,
    pub step_ueV: f64,
    pub points: usize,
}

impl EnergyGrid {
    /// Grid of `points` values centred on `center_ueV`.
    pub fn centered(center_ueV: f64, step_ueV: f64, points: usize) -> Self {
        let half = (points.saturating_sub(1)) as f64 / 2.0;
        Self {
            start_ueV: center_ueV - half * step_ueV,
            step_ueV,
            points,
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| self.start_ueV + i as f64 * self.step_ueV)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies_ueV: Vec<f64>,
    pub counts: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Sums Gaussian lines at QWP angle `chi_rad`. Each line is broadened by a
/// Gaussian spectrometer response of FWHM `resolution_ueV` (widths add in
/// quadrature). With `noise_seed` set, counts are replaced by Poisson draws.
pub fn synth_spectrum(
    lines: &[SpectralLine],
    chi_rad: f64,
    resolution_ueV: f64,
    grid: &EnergyGrid,
    noise_seed: Option<u64>,
) -> Result<Spectrum> {
    if !(resolution_ueV > 0.0) {
        return Err(Error::range(
            "resolution_ueV",
            format!("{resolution_ueV} must be > 0"),
        ));
    }
    let energies = grid.energies();
    let mut counts = vec![0.0; energies.len()];
    for line in lines {
        let center = line.center_at(chi_rad)?;
        let fwhm = line.fwhm_ueV.hypot(resolution_ueV);
        let sigma = fwhm / FWHM_PER_SIGMA;
        // Peak height scales down so the integrated area is conserved.
        let height = line.intensity * line.fwhm_ueV / fwhm;
        for (c, e) in counts.iter_mut().zip(&energies) {
            let z = (e - center) / sigma;
            *c += height * (-0.5 * z * z).exp();
        }
    }
    if let Some(seed) = noise_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in counts.iter_mut() {
            *c = if *c > 0.0 {
                Poisson::new(*c).map(|d| d.sample(&mut rng)).unwrap_or(0.0)
            } else {
                0.0
            };
        }
    }
    Ok(Spectrum {
        energies_ueV: energies,
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCenter {
    pub center_ueV: f64,
    pub sigma_ueV: f64,
    pub fwhm_ueV: f64,
    pub amplitude: f64,
    pub offset: f64,
}

/// Fits `offset + A·exp(−(E−c)²/2w²)` to the spectrum points inside
/// `window_ueV` with Poisson weights. Fails with [`Error::Ambiguous`] when
/// the window holds more than one well-separated peak of comparable height.
pub fn fit_line_center(spectrum: &Spectrum, window_ueV: (f64, f64)) -> Result<LineCenter> {
    let (lo, hi) = window_ueV;
    let (x, y): (Vec<f64>, Vec<f64>) = spectrum
        .energies_ueV
        .iter()
        .zip(&spectrum.counts)
        .filter(|(e, _)| **e >= lo && **e <= hi)
        .map(|(e, c)| (*e, *c))
        .unzip();
    if x.is_empty() {
        return Err(Error::Degenerate(format!(
            "no spectrum points in window [{lo}, {hi}] ueV"
        )));
    }
    if x.len() < 5 {
        return Err(Error::Degenerate(format!(
            "only {} spectrum points in window",
            x.len()
        )));
    }
    check_single_peak(&y)?;

    let (imax, &ymax) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    if ymax <= ymin {
        return Err(Error::Degenerate("flat spectrum in window".into()));
    }
    let half = ymin + 0.5 * (ymax - ymin);
    let above: Vec<f64> = x
        .iter()
        .zip(&y)
        .filter(|(_, v)| **v >= half)
        .map(|(e, _)| *e)
        .collect();
    let step = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    let fwhm0 = (above[above.len() - 1] - above[0]).max(step);
    let initial = [ymax - ymin, x[imax], fwhm0 / FWHM_PER_SIGMA, ymin];
    let sigma: Vec<f64> = y.iter().map(|v| v.max(1.0).sqrt()).collect();
    let model = |p: &[f64], e: f64| {
        let z = (e - p[1]) / p[2];
        p[0] * (-0.5 * z * z).exp() + p[3]
    };
    let report = levenberg_marquardt(model, &x, &y, &sigma, &initial, &LmOptions::default())?;
    let p = &report.params;
    Ok(LineCenter {
        center_ueV: p[1],
        sigma_ueV: report.sigma(1).unwrap_or(f64::NAN),
        fwhm_ueV: p[2].abs() * FWHM_PER_SIGMA,
        amplitude: p[0],
        offset: p[3],
    })
}

/// Two local maxima count as distinct peaks when both exceed half the
/// window maximum and the valley between them drops below 70 % of the
/// smaller one.
fn check_single_peak(y: &[f64]) -> Result<()> {
    let smooth: Vec<f64> = (0..y.len())
        .map(|i| {
            let a = y[i.saturating_sub(1)];
            let b = y[(i + 1).min(y.len() - 1)];
            (a + 2.0 * y[i] + b) / 4.0
        })
        .collect();
    let top = smooth.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = smooth.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = floor + 0.5 * (top - floor);
    let maxima: Vec<usize> = (1..smooth.len() - 1)
        .filter(|&i| smooth[i] >= smooth[i - 1] && smooth[i] > smooth[i + 1] && smooth[i] >= threshold)
        .collect();
    let mut peaks: Vec<usize> = Vec::new();
    for m in maxima {
        match peaks.last_mut() {
            Some(last) => {
                let valley = smooth[*last..=m].iter().copied().fold(f64::INFINITY, f64::min);
                let smaller = smooth[*last].min(smooth[m]);
                if valley - floor < 0.7 * (smaller - floor) {
                    peaks.push(m);
                } else if smooth[m] > smooth[*last] {
                    *last = m;
                }
            }
            None => peaks.push(m),
        }
    }
    if peaks.len() > 1 {
        return Err(Error::Ambiguous(format!(
            "{} comparable peaks in window",
            peaks.len()
        )));
    }
    Ok(())
}
