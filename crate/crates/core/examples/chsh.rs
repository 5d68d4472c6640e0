//! CHSH parameter of a zero-splitting source with and without background
//! light, evaluated in the central coincidence bin.

use qled::correlator::{chsh_parameter, fidelity_inputs, ChshPlane};
use qled::polarization::BasisLabel;
use qled::sim::{simulate_basis_set, CascadeParams, ChannelPlan, DetectorModel, Scenario};

fn main() -> qled::Result<()> {
    for background_fraction in [0.0, 0.1, 0.3] {
        let scenario = Scenario {
            source: CascadeParams {
                fss_ueV: 0.0,
                x_lifetime_ps: 300.0,
                cycle_rate_hz: 5e5,
                background_fraction,
                ..CascadeParams::default()
            },
            channels: ChannelPlan::uniform(DetectorModel::ideal()),
            xx_basis: BasisLabel::HV,
            x_basis: BasisLabel::HV,
            duration_ps: 100_000_000_000,
            seed: 0,
        };
        let runs = simulate_basis_set(&scenario, 11)?;
        let refs: Vec<_> = runs.iter().map(|(b, s)| (*b, s)).collect();
        let inputs = fidelity_inputs(&refs, scenario.channels.ids(), 0.0, 4000, 4000)?;
        let s = chsh_parameter(&inputs, ChshPlane::DaLr)?;
        let k = s.len() / 2;
        println!(
            "background {background_fraction:.1}: S = {:.3} +/- {:.3} (classical bound 2)",
            s.values[k].unwrap_or(f64::NAN),
            s.sigma[k]
        );
    }
    Ok(())
}
