use crate::error::{Error, Result};

/// Parameters of the quarter-wave-plate energy-shift model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QwpModelParams {
    /// Fine-structure splitting (signed).
    pub s_ueV: f64,
    /// Polarization rotation of the setup optics.
    pub theta_rad: f64,
    /// Phase shift of the setup optics.
    pub phi_rad: f64,
    /// Degree of polarization of the emitting state, usually 0.
    pub p: f64,
    /// Mean transition energy offset.
    pub epsilon_ueV: f64,
}

impl QwpModelParams {
    pub fn new(s_ueV: f64, theta_rad: f64, phi_rad: f64) -> Self {
        Self {
            s_ueV,
            theta_rad,
            phi_rad,
            p: 0.0,
            epsilon_ueV: 0.0,
        }
    }
}

/// Energy deviation `ΔE(χ) = E(χ) − ε` of a split line at quarter-wave-plate
/// angle `chi_rad`:
///
/// ```text
/// ΔE = (s/2)·(2p + X)/(2 + p·X)
/// X  = cosθ(1 + cos4χ) + sinθ·sin4χ·cosφ − 2·sinθ·sin2χ·sinφ
/// ```
pub fn qwp_energy_shift(chi_rad: f64, params: &QwpModelParams) -> Result<f64> {
    let x = mixing_term(chi_rad, params.theta_rad, params.phi_rad);
    let denominator = 2.0 + params.p * x;
    if denominator.abs() < 1e-9 {
        return Err(Error::Unphysical(format!(
            "model denominator vanishes at chi = {chi_rad} (p = {})",
            params.p
        )));
    }
    Ok(params.s_ueV / 2.0 * (2.0 * params.p + x) / denominator)
}

pub(crate) fn mixing_term(chi: f64, theta: f64, phi: f64) -> f64 {
    theta.cos() * (1.0 + (4.0 * chi).cos()) + theta.sin() * (4.0 * chi).sin() * phi.cos()
        - 2.0 * theta.sin() * (2.0 * chi).sin() * phi.sin()
}
