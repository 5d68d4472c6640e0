//! Correlations and fidelity of the cascade two-photon state as the
//! precession phase advances and white noise is mixed in.

use std::f64::consts::PI;

use qled::polarization::{
    bell_state, fidelity_to_state, mix_white_noise, theoretical_correlation, BasisLabel,
    MeasurementBasis,
};

fn main() -> qled::Result<()> {
    println!("{:>6} {:>5} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7}", "chi", "v", "HV", "DA", "LR", "ELD/ERA", "ELA/ERD", "F");
    for &v in &[1.0, 0.82667] {
        for i in 0..=4 {
            let chi = PI * i as f64 / 4.0;
            let psi = bell_state(chi);
            let rho = mix_white_noise(&psi, v)?;
            let mut row = format!("{chi:>6.3} {v:>5.3}");
            for basis in BasisLabel::ALL {
                let c = theoretical_correlation(&MeasurementBasis::new(basis), &rho)?;
                row.push_str(&format!(" {c:>7.3}"));
            }
            row.push_str(&format!(" {:>7.4}", fidelity_to_state(&rho, &psi)));
            println!("{row}");
        }
    }
    // Fidelity to the fixed state at chi = 0 of a state that has precessed.
    let target = bell_state(0.0);
    for i in 0..=4 {
        let chi = PI * i as f64 / 4.0;
        let rho = mix_white_noise(&bell_state(chi), 1.0)?;
        println!("static target, chi = {chi:.3}: F = {:.4}", fidelity_to_state(&rho, &target));
    }
    Ok(())
}
