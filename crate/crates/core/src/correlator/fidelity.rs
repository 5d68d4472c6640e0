use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::units::precession_phase;

use super::CorrelationCurve;

/// Degrees of correlation in the five bases on one delay grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityInputs {
    pub c_hv: CorrelationCurve,
    pub c_da: CorrelationCurve,
    pub c_lr: CorrelationCurve,
    pub c_eld_era: CorrelationCurve,
    pub c_ela_erd: CorrelationCurve,
    pub fss_ueV: f64,
}

impl FidelityInputs {
    fn curves(&self) -> [&CorrelationCurve; 5] {
        [&self.c_hv, &self.c_da, &self.c_lr, &self.c_eld_era, &self.c_ela_erd]
    }

    pub fn validate(&self) -> Result<()> {
        let grid = &self.c_hv;
        if self.curves().iter().any(|c| !c.same_grid(grid)) {
            return Err(Error::GridMismatch("basis curves use different delay grids".into()));
        }
        if !self.fss_ueV.is_finite() {
            return Err(Error::range("fss_ueV", "must be finite"));
        }
        Ok(())
    }
}

/// Target of the fidelity evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FidelityMode {
    /// Bell state whose phase follows `S·τ/ħ` at each delay.
    Evolving,
    /// Fixed Bell state `(|HH⟩ + e^{iχ}|VV⟩)/√2`.
    Static(f64),
}

/// Bell-state fidelity per delay bin from the five degrees of correlation:
///
/// `F = ¼[1 + C_HV + (C_DA − C_LR)·cos φ + (C_ELD,ERA − C_ELA,ERD)·sin φ]`
///
/// with `φ = S·τ/ħ` (evolving) or `φ = χ` (static). Errors add in
/// quadrature, treating the five runs as independent.
pub fn fidelity_curve(inputs: &FidelityInputs, mode: FidelityMode) -> Result<CorrelationCurve> {
    inputs.validate()?;
    let n = inputs.c_hv.len();
    let mut values = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for k in 0..n {
        let phase = match mode {
            FidelityMode::Evolving => precession_phase(inputs.fss_ueV, inputs.c_hv.delays_ps[k]),
            FidelityMode::Static(chi) => chi,
        };
        let (cos, sin) = (phase.cos(), phase.sin());
        let c = inputs.curves().map(|c| c.values[k]);
        let s = inputs.curves().map(|c| c.sigma[k]);
        match c {
            [Some(hv), Some(da), Some(lr), Some(e1), Some(e2)] => {
                values.push(Some(0.25 * (1.0 + hv + (da - lr) * cos + (e1 - e2) * sin)));
                let var = s[0].powi(2)
                    + cos * cos * (s[1].powi(2) + s[2].powi(2))
                    + sin * sin * (s[3].powi(2) + s[4].powi(2));
                sigma.push(0.25 * var.sqrt());
            }
            _ => {
                values.push(None);
                sigma.push(0.0);
            }
        }
    }
    CorrelationCurve::new(inputs.c_hv.delays_ps.clone(), values, sigma)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakFidelity {
    pub value: f64,
    pub sigma: f64,
    pub delay_ps: f64,
}

impl PeakFidelity {
    /// Distance above the classical limit of 0.5 in standard deviations.
    pub fn significance_above_classical(&self) -> f64 {
        (self.value - 0.5) / self.sigma
    }
}

/// Largest defined value at non-negative delay. The first bin wins ties.
pub fn peak_fidelity(curve: &CorrelationCurve) -> Result<PeakFidelity> {
    let mut best: Option<PeakFidelity> = None;
    for (d, v, s) in curve.defined().filter(|(d, _, _)| *d >= 0.0) {
        if best.is_none_or(|b| v > b.value) {
            best = Some(PeakFidelity {
                value: v,
                sigma: s,
                delay_ps: d,
            });
        }
    }
    best.ok_or_else(|| Error::Degenerate("no defined bin at non-negative delay".into()))
}

/// Poincaré plane spanned by the two bases entering the CHSH estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChshPlane {
    DaLr,
    HvDa,
    HvLr,
}

impl std::str::FromStr for ChshPlane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace(['_', ' '], "-").as_str() {
            "DA-LR" => Ok(Self::DaLr),
            "HV-DA" => Ok(Self::HvDa),
            "HV-LR" => Ok(Self::HvLr),
            _ => Err(Error::range("plane", format!("unknown CHSH plane `{s}`"))),
        }
    }
}

/// CHSH parameter for analyzers rotated by 45° within `plane`:
/// `S = √2·(|C_1| + |C_2|)`.
pub fn chsh_parameter(inputs: &FidelityInputs, plane: ChshPlane) -> Result<CorrelationCurve> {
    let (c1, c2) = match plane {
        ChshPlane::DaLr => (&inputs.c_da, &inputs.c_lr),
        ChshPlane::HvDa => (&inputs.c_hv, &inputs.c_da),
        ChshPlane::HvLr => (&inputs.c_hv, &inputs.c_lr),
    };
    if !c1.same_grid(c2) {
        return Err(Error::GridMismatch("CHSH curves use different delay grids".into()));
    }
    let (values, sigma) = (0..c1.len())
        .map(|k| match (c1.values[k], c2.values[k]) {
            (Some(a), Some(b)) => (
                Some(SQRT_2 * (a.abs() + b.abs())),
                SQRT_2 * c1.sigma[k].hypot(c2.sigma[k]),
            ),
            _ => (None, 0.0),
        })
        .unzip();
    CorrelationCurve::new(c1.delays_ps.clone(), values, sigma)
}
