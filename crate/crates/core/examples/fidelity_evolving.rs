//! Five co-basis runs, the time-resolved fidelity to the precessing Bell
//! state, and the oscillation period of the DA correlation.

use qled::correlator::{
    fidelity_curve, fidelity_inputs, fit_oscillation, peak_fidelity, FidelityMode,
};
use qled::polarization::BasisLabel;
use qled::sim::{simulate_basis_set, CascadeParams, ChannelPlan, DetectorModel, Scenario};
use qled::units::precession_period_ps;

fn main() -> qled::Result<()> {
    let fss = 17.7;
    let scenario = Scenario {
        source: CascadeParams {
            fss_ueV: fss,
            x_lifetime_ps: 400.0,
            cycle_rate_hz: 1.7e7,
            background_fraction: 0.17333,
            ..CascadeParams::default()
        },
        channels: ChannelPlan::uniform(DetectorModel::ideal()),
        xx_basis: BasisLabel::HV,
        x_basis: BasisLabel::HV,
        duration_ps: 20_000_000_000,
        seed: 0,
    };
    let runs = simulate_basis_set(&scenario, 7)?;
    let refs: Vec<_> = runs.iter().map(|(b, s)| (*b, s)).collect();
    let inputs = fidelity_inputs(&refs, scenario.channels.ids(), fss, 16, 3000)?;

    let evolving = fidelity_curve(&inputs, FidelityMode::Evolving)?;
    let fixed = fidelity_curve(&inputs, FidelityMode::Static(0.0))?;
    println!("{:>8} {:>14} {:>14}", "delay_ps", "F(evolving)", "F(chi = 0)");
    for i in (evolving.len() / 2..evolving.len()).step_by(8) {
        let d = evolving.delays_ps[i];
        if d <= 1200.0 {
            let show = |c: &qled::correlator::CorrelationCurve| {
                c.values[i].map_or("-".to_string(), |v| format!("{v:.3}±{:.3}", c.sigma[i]))
            };
            println!("{d:>8} {:>14} {:>14}", show(&evolving), show(&fixed));
        }
    }
    let peak = peak_fidelity(&evolving)?;
    println!(
        "peak {:.4} +/- {:.4} at {} ps, {:.0} sigma above 0.5",
        peak.value,
        peak.sigma,
        peak.delay_ps,
        peak.significance_above_classical()
    );

    let fit = fit_oscillation(&inputs.c_da, (0.0, 1200.0), 150.0, 400.0)?;
    println!(
        "C_DA period {:.1} ps (expected {:.1} ps)",
        fit.period_ps,
        precession_period_ps(fss)
    );
    Ok(())
}
