//! Quarter-wave-plate model, its fit, and the spectrum-to-splitting pipeline.

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use qled::fss::{
    fit_fss, fit_line_center, qwp_energy_shift, synth_qwp_series, synth_spectrum, EnergyGrid,
    FssFitOptions, FssOutcome, LineBehavior, QwpModelParams, QwpPoint, QwpSeries, SpectralLine,
};

/// At zero state polarization the shift is a linear combination of
/// `1, cos4χ, sin4χ, sin2χ`.
fn linear_form(chi: f64, s: f64, theta: f64, phi: f64) -> f64 {
    s / 4.0 * theta.cos()
        + s / 4.0 * theta.cos() * (4.0 * chi).cos()
        + s / 4.0 * theta.sin() * phi.cos() * (4.0 * chi).sin()
        - s / 2.0 * theta.sin() * phi.sin() * (2.0 * chi).sin()
}

fn wrapped_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

proptest! {
    #[test]
    fn zero_polarization_model_is_linear(
        chi in -10.0..10.0f64, s in -40.0..40.0f64, theta in -7.0..7.0f64, phi in -7.0..7.0f64,
    ) {
        let params = QwpModelParams::new(s, theta, phi);
        let e = qwp_energy_shift(chi, &params).unwrap();
        prop_assert!((e - linear_form(chi, s, theta, phi)).abs() < 1e-9);
        let shifted = qwp_energy_shift(chi + PI, &params).unwrap();
        prop_assert!((e - shifted).abs() < 1e-9);
    }

    #[test]
    fn shift_stays_within_half_splitting(
        chi in 0.0..PI, s in -40.0..40.0f64, theta in 0.0..PI, phi in 0.0..TAU, p in -0.9..0.9f64,
    ) {
        let params = QwpModelParams { p, ..QwpModelParams::new(s, theta, phi) };
        let e = qwp_energy_shift(chi, &params).unwrap();
        prop_assert!(e.abs() <= s.abs() / 2.0 + 1e-9);
    }

    #[test]
    fn symmetric_parameters_give_identical_curves(
        chi in 0.0..PI, s in -40.0..40.0f64, theta in 0.0..PI, phi in 0.0..TAU, p in -0.9..0.9f64,
    ) {
        let a = QwpModelParams { p, ..QwpModelParams::new(s, theta, phi) };
        let b = QwpModelParams { p: -p, ..QwpModelParams::new(-s, theta + PI, phi) };
        let c = QwpModelParams { p, ..QwpModelParams::new(s, -theta, phi + PI) };
        let e = qwp_energy_shift(chi, &a).unwrap();
        prop_assert!((e - qwp_energy_shift(chi, &b).unwrap()).abs() < 1e-9);
        prop_assert!((e - qwp_energy_shift(chi, &c).unwrap()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn noiseless_fit_recovers_parameters(
        s in 2.0..30.0f64, theta in 0.2..(PI - 0.2), phi in 0.0..TAU, eps in -5.0..5.0f64,
    ) {
        let truth = QwpModelParams { epsilon_ueV: eps, ..QwpModelParams::new(s, theta, phi) };
        let series = synth_qwp_series(&truth, 181, 0.3, None).unwrap();
        let fit = match fit_fss(&series, &FssFitOptions::default()).unwrap() {
            FssOutcome::Resolved(f) => f,
            other => return Err(TestCaseError::fail(format!("{other:?}"))),
        };
        let p = fit.params;
        prop_assert!((p.s_ueV - s).abs() < 1e-5, "s {} vs {}", p.s_ueV, s);
        prop_assert!((p.theta_rad - theta).abs() < 1e-5);
        prop_assert!(wrapped_diff(p.phi_rad, phi) < 1e-5);
        prop_assert!((p.epsilon_ueV - eps).abs() < 1e-5);
        prop_assert!(fit.chi2 < 1e-6);
    }
}

#[test]
fn noisy_fit_has_calibrated_uncertainty() {
    let truth = QwpModelParams::new(17.7, 1.1, 2.5);
    let mut pulls = Vec::new();
    for seed in 0..40 {
        let series = synth_qwp_series(&truth, 181, 0.5, Some(seed)).unwrap();
        let fit = fit_fss(&series, &FssFitOptions::default()).unwrap();
        let fit = fit.resolved().expect("resolved");
        pulls.push((fit.params.s_ueV - 17.7) / fit.s_sigma_ueV().unwrap());
        let reduced = fit.chi2 / fit.dof as f64;
        assert!((reduced - 1.0).abs() < 0.4, "reduced chi2 {reduced}");
    }
    let n = pulls.len() as f64;
    let mean = pulls.iter().sum::<f64>() / n;
    let var = pulls.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!(mean.abs() < 0.6, "pull mean {mean}");
    assert!((0.5..1.6).contains(&var), "pull variance {var}");
}

#[test]
fn flat_series_is_unresolved() {
    let points = (0..91)
        .map(|i| QwpPoint {
            chi_rad: PI * i as f64 / 90.0,
            delta_e_ueV: 3.0,
            sigma_ueV: 0.2,
        })
        .collect();
    let series = QwpSeries::new(points).unwrap();
    match fit_fss(&series, &FssFitOptions::default()).unwrap() {
        FssOutcome::Unresolved { upper_bound_ueV, .. } => {
            assert!(upper_bound_ueV > 0.0 && upper_bound_ueV < 1.0)
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn short_or_invalid_series_rejected() {
    let pt = |chi| QwpPoint {
        chi_rad: chi,
        delta_e_ueV: 0.0,
        sigma_ueV: 0.1,
    };
    assert!(QwpSeries::new((0..7).map(|i| pt(i as f64)).collect()).is_err());
    assert!(QwpSeries::new((0..10).map(|i| pt(i as f64 * 0.1)).collect()).is_err());
    let mut bad: Vec<QwpPoint> = (0..10).map(|i| pt(i as f64 * 0.4)).collect();
    bad[3].sigma_ueV = 0.0;
    assert!(QwpSeries::new(bad).is_err());
}

#[test]
fn spectra_to_splitting() {
    let truth = QwpModelParams::new(17.7, 0.9, 1.3);
    let x_line = SpectralLine::new(0.0, 8000.0, 40.0, LineBehavior::FssSplit(truth)).unwrap();
    let trion = SpectralLine::new(600.0, 6000.0, 40.0, LineBehavior::Unsplit).unwrap();
    let grid = EnergyGrid::centered(300.0, 2.0, 600);
    let mut x_points = Vec::new();
    let mut trion_centers = Vec::new();
    for i in 0..61 {
        let chi = PI * i as f64 / 60.0;
        let spectrum = synth_spectrum(&[x_line, trion], chi, 30.0, &grid, Some(i)).unwrap();
        let x = fit_line_center(&spectrum, (-150.0, 150.0)).unwrap();
        let t = fit_line_center(&spectrum, (450.0, 750.0)).unwrap();
        x_points.push(QwpPoint {
            chi_rad: chi,
            delta_e_ueV: x.center_ueV - t.center_ueV,
            sigma_ueV: x.sigma_ueV.hypot(t.sigma_ueV),
        });
        trion_centers.push(t.center_ueV);
    }
    let spread = trion_centers.iter().map(|c| (c - 600.0).abs()).fold(0.0, f64::max);
    assert!(spread < 1.0, "reference line wanders by {spread}");

    let series = QwpSeries::new(x_points).unwrap();
    let fit = fit_fss(&series, &FssFitOptions::default()).unwrap();
    let fit = fit.resolved().expect("resolved");
    let s = fit.params.s_ueV;
    let sigma = fit.s_sigma_ueV().unwrap();
    assert!((s - 17.7).abs() < 4.0 * sigma, "s = {s} ± {sigma}");
    assert!(sigma < 1.0);
    assert!((fit.params.epsilon_ueV + 600.0).abs() < 1.0);
}

#[test]
fn overlapping_window_is_ambiguous() {
    let a = SpectralLine::new(0.0, 5000.0, 20.0, LineBehavior::Unsplit).unwrap();
    let b = SpectralLine::new(120.0, 5000.0, 20.0, LineBehavior::Unsplit).unwrap();
    let grid = EnergyGrid::centered(60.0, 2.0, 200);
    let spectrum = synth_spectrum(&[a, b], 0.0, 10.0, &grid, None).unwrap();
    assert!(matches!(
        fit_line_center(&spectrum, (-100.0, 220.0)),
        Err(qled::Error::Ambiguous(_))
    ));
}
