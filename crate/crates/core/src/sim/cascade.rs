use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::polarization::{
    bell_state, coincidence_probability, mix_noise, MeasurementBasis, TwoPhotonDensityMatrix,
};
use crate::units::{precession_phase, PS_PER_S};

use super::CascadeParams;

/// One XX–X emission cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct PairEvent {
    pub xx_emit_time_ps: f64,
    /// Time spent in the exciton state.
    pub x_delay_ps: f64,
    /// Polarization state of the pair, resolved only when the photons reach
    /// the analyzers.
    pub latent_state: TwoPhotonDensityMatrix,
    /// False when re-excitation destroyed the exciton coherence.
    pub correlated: bool,
}

impl PairEvent {
    pub fn x_emit_time_ps(&self) -> f64 {
        self.xx_emit_time_ps + self.x_delay_ps
    }
}

/// Renewal process of cascade cycles under DC drive.
///
/// The dot is empty after each exciton emission and is re-excited after an
/// exponential wait with rate `cycle_rate_hz`, so consecutive photons of the
/// same transition never overlap.
#[derive(Debug, Clone)]
pub struct CascadeSource {
    params: CascadeParams,
    wait: Exp<f64>,
    xx_decay: Exp<f64>,
    x_decay: Exp<f64>,
    empty_since_ps: f64,
}

impl CascadeSource {
    pub fn new(params: CascadeParams) -> Self {
        let wait = Exp::new(params.cycle_rate_hz / PS_PER_S).expect("validated rate");
        let xx_decay = Exp::new(1.0 / params.xx_lifetime_ps).expect("validated lifetime");
        let x_decay = Exp::new(params.exciton_decay_rate_per_ps()).expect("validated lifetime");
        Self {
            params,
            wait,
            xx_decay,
            x_decay,
            empty_since_ps: 0.0,
        }
    }

    pub fn params(&self) -> &CascadeParams {
        &self.params
    }

    /// Draws the next cycle and advances the source clock past its X photon.
    pub fn sample_event<R: Rng + ?Sized>(&mut self, rng: &mut R) -> PairEvent {
        let xx_emit_time_ps =
            self.empty_since_ps + self.wait.sample(rng) + self.xx_decay.sample(rng);
        let x_delay_ps = self.x_decay.sample(rng);
        let correlated = rng.random::<f64>() >= self.params.uncorrelated_probability();
        let latent_state = if correlated {
            let chi = precession_phase(self.params.fss_ueV, x_delay_ps);
            mix_noise(
                &bell_state(chi),
                1.0 - self.params.background_fraction,
                self.params.noise_mode,
            )
            .expect("validated background fraction")
        } else {
            TwoPhotonDensityMatrix::noise(self.params.noise_mode)
        };
        self.empty_since_ps = xx_emit_time_ps + x_delay_ps;
        PairEvent {
            xx_emit_time_ps,
            x_delay_ps,
            latent_state,
            correlated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Photon {
    Biexciton,
    Exciton,
}

/// Output port of a polarizing beam splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Plus,
    Minus,
}

/// A photon arriving at a detector, before any detector effects.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealClick {
    pub photon: Photon,
    pub arm: Arm,
    pub time_ps: f64,
}

/// Samples the joint analyzer outcome of both photons and returns the XX and
/// X clicks.
pub fn resolve_clicks<R: Rng + ?Sized>(
    event: &PairEvent,
    basis_xx: &MeasurementBasis,
    basis_x: &MeasurementBasis,
    rng: &mut R,
) -> [IdealClick; 2] {
    let rho = &event.latent_state;
    let outcomes = [
        (Arm::Plus, Arm::Plus, &basis_xx.plus, &basis_x.plus),
        (Arm::Plus, Arm::Minus, &basis_xx.plus, &basis_x.minus),
        (Arm::Minus, Arm::Plus, &basis_xx.minus, &basis_x.plus),
        (Arm::Minus, Arm::Minus, &basis_xx.minus, &basis_x.minus),
    ];
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = (Arm::Minus, Arm::Minus);
    for (arm_xx, arm_x, a, b) in outcomes.iter().take(3) {
        acc += coincidence_probability(rho, a, b);
        if u < acc {
            chosen = (*arm_xx, *arm_x);
            break;
        }
    }
    [
        IdealClick {
            photon: Photon::Biexciton,
            arm: chosen.0,
            time_ps: event.xx_emit_time_ps,
        },
        IdealClick {
            photon: Photon::Exciton,
            arm: chosen.1,
            time_ps: event.x_emit_time_ps(),
        },
    ]
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::polarization::{fidelity_to_state, BasisLabel};

    fn params() -> CascadeParams {
        CascadeParams {
            x_lifetime_ps: 300.0,
            ..CascadeParams::default()
        }
    }

    fn event_with(rho: TwoPhotonDensityMatrix) -> PairEvent {
        PairEvent {
            xx_emit_time_ps: 1000.0,
            x_delay_ps: 50.0,
            latent_state: rho,
            correlated: true,
        }
    }

    fn outcome_frequencies(event: &PairEvent, basis: BasisLabel, n: usize) -> [f64; 4] {
        let b = MeasurementBasis::new(basis);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let [xx, x] = resolve_clicks(event, &b, &b, &mut rng);
            let i = match (xx.arm, x.arm) {
                (Arm::Plus, Arm::Plus) => 0,
                (Arm::Plus, Arm::Minus) => 1,
                (Arm::Minus, Arm::Plus) => 2,
                (Arm::Minus, Arm::Minus) => 3,
            };
            counts[i] += 1;
        }
        counts.map(|c| c as f64 / n as f64)
    }

    #[test]
    fn pure_state_without_noise_channels() {
        let mut src = CascadeSource::new(params());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let e = src.sample_event(&mut rng);
            assert!(e.correlated);
            let chi = precession_phase(17.7, e.x_delay_ps);
            let f = fidelity_to_state(&e.latent_state, &bell_state(chi));
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_delay_includes_reexcitation() {
        let p = CascadeParams {
            x_lifetime_ps: 300.0,
            reexcitation_rate_hz: 1e9,
            ..CascadeParams::default()
        };
        let mut src = CascadeSource::new(p);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000;
        let mean = (0..n).map(|_| src.sample_event(&mut rng).x_delay_ps).sum::<f64>() / n as f64;
        let expected = 300.0 / (1.0 + 300.0 * 1e9 * 1e-12);
        assert!((mean / expected - 1.0).abs() < 0.005, "{mean} vs {expected}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let run = || {
            let mut src = CascadeSource::new(params());
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            (0..50).map(|_| src.sample_event(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn cycles_do_not_overlap() {
        let mut src = CascadeSource::new(params());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut last_x = 0.0;
        for _ in 0..1000 {
            let e = src.sample_event(&mut rng);
            assert!(e.xx_emit_time_ps > last_x);
            assert!(e.x_delay_ps > 0.0);
            last_x = e.x_emit_time_ps();
        }
    }

    #[test]
    fn symmetric_state_never_gives_cross_outcomes_in_hv() {
        let ev = event_with(TwoPhotonDensityMatrix::pure(&bell_state(0.0)));
        let f = outcome_frequencies(&ev, BasisLabel::HV, 20_000);
        assert_eq!(f[1], 0.0);
        assert_eq!(f[2], 0.0);
        assert!((f[0] - 0.5).abs() < 0.02);
    }

    #[test]
    fn mixed_state_outcomes_equiprobable() {
        let ev = event_with(TwoPhotonDensityMatrix::maximally_mixed());
        for p in outcome_frequencies(&ev, BasisLabel::DA, 40_000) {
            assert!((p - 0.25).abs() < 0.015);
        }
    }

    #[test]
    fn quarter_period_state_in_da() {
        let ev = event_with(TwoPhotonDensityMatrix::pure(&bell_state(FRAC_PI_2)));
        let f = outcome_frequencies(&ev, BasisLabel::DA, 40_000);
        // (1 + cos(π/2))/2
        assert!((f[0] + f[3] - 0.5).abs() < 0.015);
    }
}
