use std::f64::consts::FRAC_1_SQRT_2;
use std::str::FromStr;

use nalgebra::Matrix4;
use num_complex::Complex64;

use super::{AnalyzerSetting, MeasurementBasis, PairAmplitudes};
use crate::error::{Error, Result};

const STATE_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

/// Pure polarization state of an XX–X photon pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    amplitudes: PairAmplitudes,
    phase_chi: f64,
}

impl TwoPhotonState {
    /// Wraps amplitudes over `(HH, HV, VH, VV)`. They must have unit norm.
    pub fn new(amplitudes: PairAmplitudes, phase_chi: f64) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "amplitudes must have unit norm, got {norm}"
            )));
        }
        Ok(Self {
            amplitudes,
            phase_chi,
        })
    }

    pub fn amplitudes(&self) -> &PairAmplitudes {
        &self.amplitudes
    }

    pub fn phase_chi(&self) -> f64 {
        self.phase_chi
    }
}

/// `(|HH⟩ + e^{iχ}|VV⟩)/√2`: the cascade state after the exciton has
/// accumulated phase `χ = S·τ/ħ`.
pub fn bell_state(chi: f64) -> TwoPhotonState {
    let h = FRAC_1_SQRT_2;
    let zero = Complex64::new(0.0, 0.0);
    TwoPhotonState {
        amplitudes: PairAmplitudes::new(
            Complex64::new(h, 0.0),
            zero,
            zero,
            Complex64::from_polar(h, chi),
        ),
        phase_chi: chi,
    }
}

/// Polarization content of the uncorrelated admixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// Maximally mixed, `I/4`.
    #[default]
    White,
    /// Classically correlated in the HV basis, `diag(½, 0, 0, ½)`.
    Classical,
}

impl FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "white" => Ok(Self::White),
            "classical" => Ok(Self::Classical),
            _ => Err(Error::range(
                "noise_mode",
                format!("`{s}` is not one of white, classical"),
            )),
        }
    }
}

impl std::fmt::Display for NoiseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::White => "white",
            Self::Classical => "classical",
        })
    }
}

/// Validated 4×4 two-photon density matrix.
///
/// Hermiticity, unit trace and positivity are checked on construction, so
/// every operation taking a `TwoPhotonDensityMatrix` may assume them.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonDensityMatrix {
    rho: Matrix4<Complex64>,
}

impl TwoPhotonDensityMatrix {
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let asym = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > STATE_TOL {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (max deviation {asym:e})"
            )));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let min_eig = rho
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { rho })
    }

    pub fn pure(state: &TwoPhotonState) -> Self {
        let a = state.amplitudes();
        Self { rho: a * a.adjoint() }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: Matrix4::identity() * Complex64::new(0.25, 0.0),
        }
    }

    pub fn classical_mixture() -> Self {
        let mut rho = Matrix4::zeros();
        rho[(0, 0)] = Complex64::new(0.5, 0.0);
        rho[(3, 3)] = Complex64::new(0.5, 0.0);
        Self { rho }
    }

    pub fn noise(mode: NoiseMode) -> Self {
        match mode {
            NoiseMode::White => Self::maximally_mixed(),
            NoiseMode::Classical => Self::classical_mixture(),
        }
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    /// Convex combination `w·self + (1−w)·other`.
    fn blend(&self, other: &Self, w: f64) -> Self {
        Self {
            rho: self.rho * Complex64::new(w, 0.0) + other.rho * Complex64::new(1.0 - w, 0.0),
        }
    }
}

/// `v·|ψ⟩⟨ψ| + (1−v)·I/4`.
pub fn mix_white_noise(state: &TwoPhotonState, v: f64) -> Result<TwoPhotonDensityMatrix> {
    mix_noise(state, v, NoiseMode::White)
}

/// `v·|ψ⟩⟨ψ| + (1−v)·N` with `N` chosen by `mode`.
pub fn mix_noise(
    state: &TwoPhotonState,
    v: f64,
    mode: NoiseMode,
) -> Result<TwoPhotonDensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::range("v", format!("{v} not in [0, 1]")));
    }
    Ok(TwoPhotonDensityMatrix::pure(state).blend(&TwoPhotonDensityMatrix::noise(mode), v))
}

/// Born-rule probability that the XX photon passes `a_xx` and the X photon
/// passes `a_x`.
pub fn coincidence_probability(
    state: &TwoPhotonDensityMatrix,
    a_xx: &AnalyzerSetting,
    a_x: &AnalyzerSetting,
) -> f64 {
    let (p, q) = (a_xx.jones(), a_x.jones());
    let ket = PairAmplitudes::new(p[0] * q[0], p[0] * q[1], p[1] * q[0], p[1] * q[1]);
    let value = ket.dotc(&(state.matrix() * ket)).re;
    value.clamp(0.0, 1.0)
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_to_state(rho: &TwoPhotonDensityMatrix, psi: &TwoPhotonState) -> f64 {
    let a = psi.amplitudes();
    a.dotc(&(rho.matrix() * a)).re.clamp(0.0, 1.0)
}

/// Degree of correlation `(P_co − P_cross)/(P_co + P_cross)` when both photons
/// are analysed in the same basis.
pub fn theoretical_correlation(
    basis: &MeasurementBasis,
    state: &TwoPhotonDensityMatrix,
) -> Result<f64> {
    let p = |a: &AnalyzerSetting, b: &AnalyzerSetting| coincidence_probability(state, a, b);
    let co = p(&basis.plus, &basis.plus) + p(&basis.minus, &basis.minus);
    let cross = p(&basis.plus, &basis.minus) + p(&basis.minus, &basis.plus);
    let total = co + cross;
    if total < 1e-12 {
        return Err(Error::Unphysical(format!(
            "co + cross probability {total:e} vanishes"
        )));
    }
    Ok((co - cross) / total)
}
