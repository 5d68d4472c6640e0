//! Simulation and analysis of polarization-entangled photon pairs emitted by a
//! quantum-dot biexciton cascade.
//!
//! The crate is organised along the measurement chain:
//!
//! - [`polarization`]: two-photon polarization states, analyzer settings and
//!   Born-rule probabilities. Doubles as the analytic oracle for every
//!   statistical estimate.
//! - [`sim`]: Monte Carlo generation of time-tagged detector clicks from a
//!   cascade source under DC drive.
//! - [`correlator`]: coincidence histograms, g², degrees of correlation,
//!   evolving/static Bell fidelity, CHSH and decay fits.
//! - [`fss`]: quarter-wave-plate spectroscopy of the fine-structure splitting.
//! - [`io`]: the `QTT1` time-tag file, scenario configs and CSV curves.
//! - [`cli`]: the workflows behind the `qled` binary.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

// Physical quantities carry their unit in the name (`fss_ueV`, `delay_ps`).
#![allow(non_snake_case)]

pub mod cli;
pub mod correlator;
pub mod error;
pub mod fit;
pub mod fss;
pub mod io;
pub mod polarization;
pub mod sim;
pub mod units;

pub use error::{Error, Result};
