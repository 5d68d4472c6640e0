//! Two-photon polarization algebra for the XX–X photon pair.
//!
//! States live on the ordered product basis `(HH, HV, VH, VV)` with the
//! biexciton photon as the first factor. Analyzer settings are points on the
//! Poincaré sphere with `H = (+1,0,0)`, `D = (0,+1,0)` and `L = (0,0,+1)`,
//! where `L = (|H⟩ + i|V⟩)/√2`.

mod analyzer;
mod state;

pub use analyzer::{stokes_from_jones, AnalyzerLabel, AnalyzerSetting, BasisLabel, MeasurementBasis};
pub use state::{
    bell_state, coincidence_probability, fidelity_to_state, mix_noise, mix_white_noise,
    theoretical_correlation, NoiseMode, TwoPhotonDensityMatrix, TwoPhotonState,
};

use nalgebra::{Vector2, Vector4};
use num_complex::Complex64;

pub type JonesVector = Vector2<Complex64>;
pub type PairAmplitudes = Vector4<Complex64>;
