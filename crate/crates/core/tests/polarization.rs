//! Born-rule probabilities against the closed-form Stokes correlation tensor
//! of `v·|ψ(χ)⟩⟨ψ(χ)| + (1 − v)·I/4`, `ψ(χ) = (|HH⟩ + e^{iχ}|VV⟩)/√2`:
//!
//! `P(a, b) = ¼·(1 + v·aᵀ T(χ) b)`, `T = [[1, 0, 0], [0, cos χ, sin χ], [0, sin χ, −cos χ]]`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;

use qled::polarization::{
    bell_state, coincidence_probability, fidelity_to_state, mix_noise, mix_white_noise,
    stokes_from_jones, theoretical_correlation, AnalyzerSetting, BasisLabel, MeasurementBasis,
    NoiseMode, TwoPhotonDensityMatrix,
};

fn tensor(chi: f64) -> Matrix3<f64> {
    Matrix3::new(
        1.0, 0.0, 0.0, //
        0.0, chi.cos(), chi.sin(), //
        0.0, chi.sin(), -chi.cos(),
    )
}

fn oracle_probability(chi: f64, v: f64, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    0.25 * (1.0 + v * a.dot(&(tensor(chi) * b)))
}

fn unit(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.cos(), theta.sin() * phi.cos(), theta.sin() * phi.sin())
}

fn setting(theta: f64, phi: f64) -> AnalyzerSetting {
    AnalyzerSetting::from_stokes(unit(theta, phi)).unwrap()
}

proptest! {
    #[test]
    fn probabilities_match_stokes_tensor(
        chi in -7.0..7.0f64, v in 0.0..=1.0f64,
        ta in 0.0..PI, pa in 0.0..2.0 * PI, tb in 0.0..PI, pb in 0.0..2.0 * PI,
    ) {
        let rho = mix_white_noise(&bell_state(chi), v).unwrap();
        let (a, b) = (setting(ta, pa), setting(tb, pb));
        let p = coincidence_probability(&rho, &a, &b);
        prop_assert!((p - oracle_probability(chi, v, a.stokes(), b.stokes())).abs() < 1e-12);
    }

    #[test]
    fn born_rule_is_complete(
        chi in -7.0..7.0f64, v in 0.0..=1.0f64,
        ta in 0.0..PI, pa in 0.0..2.0 * PI, tb in 0.0..PI, pb in 0.0..2.0 * PI,
    ) {
        let rho = mix_white_noise(&bell_state(chi), v).unwrap();
        let (a, b) = (setting(ta, pa), setting(tb, pb));
        let total: f64 = [a.clone(), a.orthogonal()]
            .iter()
            .flat_map(|x| [b.clone(), b.orthogonal()].map(|y| coincidence_probability(&rho, x, &y)))
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlations_are_two_pi_periodic(chi in -7.0..7.0f64, v in 0.0..=1.0f64) {
        for basis in BasisLabel::ALL {
            let m = MeasurementBasis::new(basis);
            let c0 = theoretical_correlation(&m, &mix_white_noise(&bell_state(chi), v).unwrap()).unwrap();
            let c1 = theoretical_correlation(&m, &mix_white_noise(&bell_state(chi + 2.0 * PI), v).unwrap()).unwrap();
            prop_assert!((c0 - c1).abs() < 1e-12);
        }
    }

    #[test]
    fn correlations_scale_linearly_with_visibility(chi in -7.0..7.0f64, v in 0.0..=1.0f64) {
        for basis in BasisLabel::ALL {
            let m = MeasurementBasis::new(basis);
            let pure = theoretical_correlation(&m, &TwoPhotonDensityMatrix::pure(&bell_state(chi))).unwrap();
            let mixed = theoretical_correlation(&m, &mix_white_noise(&bell_state(chi), v).unwrap()).unwrap();
            prop_assert!((mixed - v * pure).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_from_five_bases(chi in -7.0..7.0f64, v in 0.0..=1.0f64) {
        let psi = bell_state(chi);
        let rho = mix_white_noise(&psi, v).unwrap();
        let c = |b| theoretical_correlation(&MeasurementBasis::new(b), &rho).unwrap();
        let f = 0.25 * (1.0 + c(BasisLabel::HV)
            + (c(BasisLabel::DA) - c(BasisLabel::LR)) * chi.cos()
            + (c(BasisLabel::EldEra) - c(BasisLabel::ElaErd)) * chi.sin());
        prop_assert!((f - fidelity_to_state(&rho, &psi)).abs() < 1e-12);
        prop_assert!((f - (v + (1.0 - v) / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn classical_noise_keeps_hv_correlation(chi in -7.0..7.0f64, v in 0.0..=1.0f64) {
        let rho = mix_noise(&bell_state(chi), v, NoiseMode::Classical).unwrap();
        let hv = theoretical_correlation(&MeasurementBasis::new(BasisLabel::HV), &rho).unwrap();
        let da = theoretical_correlation(&MeasurementBasis::new(BasisLabel::DA), &rho).unwrap();
        prop_assert!((hv - 1.0).abs() < 1e-12);
        prop_assert!((da - v * chi.cos()).abs() < 1e-12);
    }

    #[test]
    fn stokes_round_trip(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
        let s = unit(theta, phi);
        let a = AnalyzerSetting::from_stokes(s).unwrap();
        prop_assert!((stokes_from_jones(a.jones()) - s).norm() < 1e-12);
        prop_assert!((a.orthogonal().stokes() + s).norm() < 1e-12);
    }
}

#[test]
fn stokes_input_is_normalized() {
    let a = AnalyzerSetting::from_stokes(Vector3::new(0.0, 0.5, 0.0)).unwrap();
    assert!((a.stokes() - Vector3::new(0.0, 1.0, 0.0)).norm() < 1e-12);
    assert!(AnalyzerSetting::from_stokes(Vector3::zeros()).is_err());
    assert!(AnalyzerSetting::from_stokes(Vector3::new(f64::NAN, 0.0, 0.0)).is_err());
}
