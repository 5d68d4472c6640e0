//! Fine-structure splitting from polarization-resolved spectra: synthesize a
//! quarter-wave-plate rotation, fit the line centres against an unsplit
//! reference line, then fit the energy-shift model.

use std::f64::consts::PI;

use qled::fss::{
    fit_fss, fit_line_center, synth_spectrum, EnergyGrid, FssFitOptions, FssOutcome,
    LineBehavior, QwpModelParams, QwpPoint, QwpSeries, SpectralLine,
};

fn main() -> qled::Result<()> {
    let truth = QwpModelParams::new(17.7, 0.9, 1.3);
    let exciton = SpectralLine::new(0.0, 8000.0, 40.0, LineBehavior::FssSplit(truth))?;
    let reference = SpectralLine::new(600.0, 6000.0, 40.0, LineBehavior::Unsplit)?;
    let grid = EnergyGrid::centered(300.0, 2.0, 600);

    let mut points = Vec::new();
    for i in 0..91 {
        let chi = PI * i as f64 / 90.0;
        let spectrum = synth_spectrum(&[exciton, reference], chi, 30.0, &grid, Some(i))?;
        let x = fit_line_center(&spectrum, (-150.0, 150.0))?;
        let r = fit_line_center(&spectrum, (450.0, 750.0))?;
        points.push(QwpPoint {
            chi_rad: chi,
            delta_e_ueV: x.center_ueV - r.center_ueV,
            sigma_ueV: x.sigma_ueV.hypot(r.sigma_ueV),
        });
    }
    let series = QwpSeries::new(points)?;
    match fit_fss(&series, &FssFitOptions::default())? {
        FssOutcome::Resolved(fit) => {
            for (i, name) in fit.parameter_names().iter().enumerate() {
                println!(
                    "{name:>12} = {:>9.4} +/- {:.4}",
                    fit.estimates()[i],
                    fit.sigma(i).unwrap_or(f64::NAN)
                );
            }
            println!("chi2/dof = {:.2}", fit.chi2 / fit.dof as f64);
            println!("true splitting {:.1} ueV", truth.s_ueV);
        }
        FssOutcome::Unresolved { upper_bound_ueV, .. } => {
            println!("splitting unresolved, |s| < {upper_bound_ueV:.2} ueV")
        }
    }
    Ok(())
}
