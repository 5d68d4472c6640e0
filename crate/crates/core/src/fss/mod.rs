//! Quarter-wave-plate spectroscopy of the exciton fine-structure splitting.
//!
//! A quarter-wave plate at angle χ followed by a fixed polarizer selects a
//! polarization-dependent mixture of the two split exciton states, shifting
//! the measured line centre by [`qwp_energy_shift`]. Setup birefringence
//! enters through a rotation θ and a phase φ.

mod model;
mod series;
mod spectrum;

pub use model::{qwp_energy_shift, QwpModelParams};
pub use series::{fit_fss, synth_qwp_series, FssFit, FssFitOptions, FssOutcome, QwpPoint, QwpSeries};
pub use spectrum::{
    fit_line_center, synth_spectrum, EnergyGrid, LineBehavior, LineCenter, SpectralLine, Spectrum,
};
