//! Hanbury Brown–Twiss measurement on the exciton line: the two outputs of
//! the X polarizing beam splitter show antibunching at zero delay.

use qled::correlator::{cross_correlation, normalize_g2};
use qled::polarization::BasisLabel;
use qled::sim::{simulate_stream, CascadeParams, ChannelPlan, DetectorModel, Scenario};

fn main() -> qled::Result<()> {
    for background_fraction in [0.0, 0.2] {
        let scenario = Scenario {
            source: CascadeParams {
                cycle_rate_hz: 1e8,
                background_fraction,
                ..CascadeParams::default()
            },
            channels: ChannelPlan::uniform(DetectorModel::ideal()),
            xx_basis: BasisLabel::HV,
            x_basis: BasisLabel::HV,
            duration_ps: 5_000_000_000,
            seed: 3,
        };
        let stream = simulate_stream(&scenario)?;
        let ids = scenario.channels.ids();
        let g2 = normalize_g2(&cross_correlation(&stream, ids.x_plus, ids.x_minus, 64, 20_000)?)?;
        let center = g2.len() / 2;
        let far: Vec<f64> = g2
            .defined()
            .filter(|(d, _, _)| d.abs() > 15_000.0)
            .map(|(_, v, _)| v)
            .collect();
        let f = background_fraction;
        println!(
            "background {background_fraction:.1}: g2(0) = {:.3} +/- {:.3} (f(2-f) predicts {:.3}), g2(far) = {:.3}",
            g2.values[center].unwrap_or(f64::NAN),
            g2.sigma[center],
            f * (2.0 - f),
            far.iter().sum::<f64>() / far.len() as f64
        );
    }
    Ok(())
}
