use crate::error::{Error, Result};
use crate::polarization::NoiseMode;
use crate::units::PS_PER_S;

/// Physical parameters of the quantum-dot source.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeParams {
    /// Fine-structure splitting S in µeV.
    pub fss_ueV: f64,
    /// Exciton radiative lifetime.
    pub x_lifetime_ps: f64,
    pub xx_lifetime_ps: f64,
    /// Re-excitation rate of the empty dot. The mean cycle period is
    /// `1/cycle_rate + xx_lifetime + mean exciton delay`.
    pub cycle_rate_hz: f64,
    /// Rate of processes that destroy the exciton population before
    /// radiative decay; each such event leaves the pair uncorrelated.
    pub reexcitation_rate_hz: f64,
    /// Fraction of photons at each transition wavelength from uncorrelated
    /// sources.
    pub background_fraction: f64,
    pub noise_mode: NoiseMode,
}

impl CascadeParams {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                problems.push(msg.to_string());
            }
        };
        check(self.fss_ueV.is_finite() && self.fss_ueV >= 0.0, "fss_ueV must be finite and >= 0");
        check(self.x_lifetime_ps.is_finite() && self.x_lifetime_ps > 0.0, "x_lifetime_ps must be > 0");
        check(self.xx_lifetime_ps.is_finite() && self.xx_lifetime_ps > 0.0, "xx_lifetime_ps must be > 0");
        check(self.cycle_rate_hz.is_finite() && self.cycle_rate_hz > 0.0, "cycle_rate_hz must be > 0");
        check(
            self.reexcitation_rate_hz.is_finite() && self.reexcitation_rate_hz >= 0.0,
            "reexcitation_rate_hz must be >= 0",
        );
        check(
            (0.0..1.0).contains(&self.background_fraction),
            "background_fraction must be in [0, 1)",
        );
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Total depopulation rate of the exciton, per ps.
    pub fn exciton_decay_rate_per_ps(&self) -> f64 {
        1.0 / self.x_lifetime_ps + self.reexcitation_rate_hz / PS_PER_S
    }

    /// Mean exciton delay `1/(1/τ_X + r_re)`.
    pub fn mean_x_delay_ps(&self) -> f64 {
        1.0 / self.exciton_decay_rate_per_ps()
    }

    /// Probability that a cycle ends through re-excitation rather than
    /// radiative exciton decay.
    pub fn uncorrelated_probability(&self) -> f64 {
        self.reexcitation_rate_hz / PS_PER_S / self.exciton_decay_rate_per_ps()
    }

    pub fn mean_cycle_period_ps(&self) -> f64 {
        PS_PER_S / self.cycle_rate_hz + self.xx_lifetime_ps + self.mean_x_delay_ps()
    }

    /// Mean rate of cascade photons per transition, in Hz.
    pub fn emission_rate_hz(&self) -> f64 {
        PS_PER_S / self.mean_cycle_period_ps()
    }

    /// Rate of Poissonian background photons per transition that makes up
    /// `background_fraction` of all photons at that wavelength.
    pub fn background_rate_hz(&self) -> f64 {
        let f = self.background_fraction;
        f / (1.0 - f) * self.emission_rate_hz()
    }
}

impl Default for CascadeParams {
    /// Plausible calibration for a telecom InAs/InP droplet dot at 44 K. Only
    /// the splitting is a measured value; lifetimes and rates are
    /// representative.
    fn default() -> Self {
        Self {
            fss_ueV: 17.7,
            x_lifetime_ps: 1000.0,
            xx_lifetime_ps: 500.0,
            cycle_rate_hz: 5e6,
            reexcitation_rate_hz: 0.0,
            background_fraction: 0.0,
            noise_mode: NoiseMode::White,
        }
    }
}

/// One superconducting detector channel followed by the time tagger.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    pub efficiency: f64,
    /// FWHM of the Gaussian timing jitter.
    pub jitter_fwhm_ps: f64,
    pub dark_rate_hz: f64,
    pub dead_time_ps: f64,
    /// Time-tag quantization step.
    pub time_bin_ps: f64,
}

impl DetectorModel {
    /// Lossless, jitter-free detector with 1 ps tags.
    pub fn ideal() -> Self {
        Self {
            efficiency: 1.0,
            jitter_fwhm_ps: 0.0,
            dark_rate_hz: 0.0,
            dead_time_ps: 0.0,
            time_bin_ps: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(0.0..=1.0).contains(&self.efficiency) {
            problems.push("efficiency must be in [0, 1]".to_string());
        }
        if !(self.jitter_fwhm_ps.is_finite() && self.jitter_fwhm_ps >= 0.0) {
            problems.push("jitter_fwhm_ps must be >= 0".to_string());
        }
        if !(self.dark_rate_hz.is_finite() && self.dark_rate_hz >= 0.0) {
            problems.push("dark_rate_hz must be >= 0".to_string());
        }
        if !(self.dead_time_ps.is_finite() && self.dead_time_ps >= 0.0) {
            problems.push("dead_time_ps must be >= 0".to_string());
        }
        if !(self.time_bin_ps.is_finite() && self.time_bin_ps > 0.0) {
            problems.push("time_bin_ps must be > 0".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

impl Default for DetectorModel {
    /// SSPD with mid-range efficiency, 64 ps FWHM jitter and a 32 ps
    /// time-interval-analyser bin.
    fn default() -> Self {
        Self {
            efficiency: 0.5,
            jitter_fwhm_ps: 64.0,
            dark_rate_hz: 100.0,
            dead_time_ps: 20_000.0,
            time_bin_ps: 32.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        CascadeParams::default().validate().unwrap();
        DetectorModel::default().validate().unwrap();
        DetectorModel::ideal().validate().unwrap();
    }

    #[test]
    fn validation_lists_every_problem() {
        let p = CascadeParams {
            x_lifetime_ps: 0.0,
            background_fraction: 1.0,
            ..CascadeParams::default()
        };
        match p.validate() {
            Err(Error::Config(list)) => assert_eq!(list.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn background_rate_matches_fraction() {
        let p = CascadeParams {
            background_fraction: 0.2,
            ..CascadeParams::default()
        };
        let bg = p.background_rate_hz();
        let total = bg + p.emission_rate_hz();
        assert!((bg / total - 0.2).abs() < 1e-12);
    }

    #[test]
    fn mean_delay_with_reexcitation() {
        let p = CascadeParams {
            x_lifetime_ps: 1000.0,
            reexcitation_rate_hz: 1e9,
            ..CascadeParams::default()
        };
        assert!((p.mean_x_delay_ps() - 500.0).abs() < 1e-9);
        assert!((p.uncorrelated_probability() - 0.5).abs() < 1e-12);
    }
}
