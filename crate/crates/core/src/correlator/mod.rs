//! Coincidence analysis of time-tag streams.
//!
//! Histograms count all pairs `(a, b)` with `t_b − t_a` inside a symmetric
//! window (no start–stop dead time). Bin `k` covers delays
//! `[k·w − w/2, k·w + w/2)` and is reported at its centre `k·w`.

mod curve;
mod fidelity;
mod fits;
mod histogram;
mod protocol;

pub use curve::{degree_of_correlation, normalize_g2, CorrelationCurve};
pub use fidelity::{
    chsh_parameter, fidelity_curve, peak_fidelity, ChshPlane, FidelityInputs, FidelityMode,
    PeakFidelity,
};
pub use fits::{
    fit_exponential_decay, fit_gaussian_decay, fit_oscillation, ExponentialDecayFit,
    GaussianDecayFit, OscillationFit,
};
pub use histogram::{cross_correlation, cross_correlation_segmented, CorrelationHistogram};
pub use protocol::{co_cross_histograms, fidelity_inputs, unpolarized_histogram, ChannelIds};
