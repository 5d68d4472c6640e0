//! Monte Carlo generation of time-tagged click streams from a biexciton
//! cascade under DC electrical drive.
//!
//! A cycle starts when the empty dot is re-excited after an exponential
//! wait, emits the XX photon after an exponential biexciton lifetime and the
//! X photon after a further exponential exciton delay `τ`. The pair's
//! polarization is the evolving Bell state with phase `S·τ/ħ`, mixed with
//! noise according to [`CascadeParams::background_fraction`]. Detection is
//! resolved per click through a [`DetectorChain`].

mod cascade;
mod detector;
mod params;
mod scenario;
mod stream;
mod temperature;

pub use cascade::{resolve_clicks, Arm, CascadeSource, IdealClick, PairEvent, Photon};
pub use detector::{apply_detector, DetectorChain};
pub use params::{CascadeParams, DetectorModel};
pub use scenario::{basis_seed, simulate_basis_set, simulate_stream, ChannelPlan, Port, Scenario};
pub use stream::{flags, TimeTagRecord, TimeTagStream};
pub use temperature::{TemperatureModel, TemperatureOverrides, TemperatureRow};
