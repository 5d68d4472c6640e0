use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::correlator::ChannelIds;
use crate::error::{Error, Result};
use crate::polarization::{BasisLabel, MeasurementBasis};
use crate::units::PS_PER_S;

use super::{
    flags, resolve_clicks, Arm, CascadeParams, CascadeSource, DetectorChain, DetectorModel,
    Photon, TimeTagStream,
};

/// A detector port: tagger channel plus the detector behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Port {
    pub channel: u16,
    pub detector: DetectorModel,
}

/// Channel assignment of the four analyzer outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPlan {
    pub xx_plus: Port,
    pub xx_minus: Port,
    pub x_plus: Port,
    pub x_minus: Port,
}

impl ChannelPlan {
    pub const LABELS: [&'static str; 4] = ["xx_plus", "xx_minus", "x_plus", "x_minus"];

    /// Channels 0–3 in label order, all with the same detector.
    pub fn uniform(detector: DetectorModel) -> Self {
        let port = |channel| Port {
            channel,
            detector: detector.clone(),
        };
        Self {
            xx_plus: port(0),
            xx_minus: port(1),
            x_plus: port(2),
            x_minus: port(3),
        }
    }

    pub fn ports(&self) -> [(&'static str, &Port); 4] {
        [
            (Self::LABELS[0], &self.xx_plus),
            (Self::LABELS[1], &self.xx_minus),
            (Self::LABELS[2], &self.x_plus),
            (Self::LABELS[3], &self.x_minus),
        ]
    }

    pub fn ids(&self) -> ChannelIds {
        ChannelIds {
            xx_plus: self.xx_plus.channel,
            xx_minus: self.xx_minus.channel,
            x_plus: self.x_plus.channel,
            x_minus: self.x_minus.channel,
        }
    }

    pub fn port(&self, photon: Photon, arm: Arm) -> &Port {
        match (photon, arm) {
            (Photon::Biexciton, Arm::Plus) => &self.xx_plus,
            (Photon::Biexciton, Arm::Minus) => &self.xx_minus,
            (Photon::Exciton, Arm::Plus) => &self.x_plus,
            (Photon::Exciton, Arm::Minus) => &self.x_minus,
        }
    }

    fn chain(&self) -> Result<DetectorChain> {
        let mut chain = DetectorChain::new();
        for (label, port) in self.ports() {
            chain.add_channel(port.channel, label, port.detector.clone())?;
        }
        Ok(chain)
    }
}

impl Default for ChannelPlan {
    fn default() -> Self {
        Self::uniform(DetectorModel::default())
    }
}

/// Everything needed to generate one measurement run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub source: CascadeParams,
    pub channels: ChannelPlan,
    pub xx_basis: BasisLabel,
    pub x_basis: BasisLabel,
    pub duration_ps: u64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(Error::Config(p)) = self.source.validate() {
            problems.extend(p.into_iter().map(|m| format!("source: {m}")));
        }
        let mut seen = Vec::new();
        for (label, port) in self.channels.ports() {
            if let Err(Error::Config(p)) = port.detector.validate() {
                problems.extend(p.into_iter().map(|m| format!("detector.{label}: {m}")));
            }
            if seen.contains(&port.channel) {
                problems.push(format!("detector.{label}: channel {} used twice", port.channel));
            }
            seen.push(port.channel);
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Same scenario with both arms in `basis`.
    pub fn with_basis(&self, basis: BasisLabel) -> Self {
        Self {
            xx_basis: basis,
            x_basis: basis,
            ..self.clone()
        }
    }
}

const STREAM_CASCADE: u64 = 0;
const STREAM_BACKGROUND: u64 = 1;
const STREAM_DETECTOR: u64 = 2;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generates the time-tag stream of one run. The output is a pure function of
/// the scenario, including its seed.
pub fn simulate_stream(scenario: &Scenario) -> Result<TimeTagStream> {
    scenario.validate()?;
    let duration = scenario.duration_ps;
    let mut chain = scenario.channels.chain()?;
    let mut detector_rng = rng_for(scenario.seed, STREAM_DETECTOR);
    if duration == 0 {
        return Ok(chain.finish(0, &mut detector_rng));
    }
    let basis_xx = MeasurementBasis::new(scenario.xx_basis);
    let basis_x = MeasurementBasis::new(scenario.x_basis);
    let plan = &scenario.channels;

    let mut rng = rng_for(scenario.seed, STREAM_CASCADE);
    let mut source = CascadeSource::new(scenario.source.clone());
    loop {
        let event = source.sample_event(&mut rng);
        if event.xx_emit_time_ps >= duration as f64 {
            break;
        }
        for click in resolve_clicks(&event, &basis_xx, &basis_x, &mut rng) {
            let port = plan.port(click.photon, click.arm);
            chain.push(port.channel, click.time_ps, 0, &mut detector_rng)?;
        }
    }

    // Unpolarized Poissonian photons at both transition wavelengths.
    let bg_rate = scenario.source.background_rate_hz();
    if bg_rate > 0.0 {
        let mut rng = rng_for(scenario.seed, STREAM_BACKGROUND);
        let gap = Exp::new(bg_rate / PS_PER_S).expect("positive rate");
        for photon in [Photon::Biexciton, Photon::Exciton] {
            let mut t = gap.sample(&mut rng);
            while t < duration as f64 {
                let arm = if rand::Rng::random::<bool>(&mut rng) {
                    Arm::Plus
                } else {
                    Arm::Minus
                };
                let port = plan.port(photon, arm);
                chain.push(port.channel, t, flags::BACKGROUND, &mut detector_rng)?;
                t += gap.sample(&mut rng);
            }
        }
    }
    Ok(chain.finish(duration, &mut detector_rng))
}

/// Seed of basis run `index` derived from a master seed (SplitMix64 step).
pub fn basis_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Simulates the five co-basis runs of the fidelity protocol in parallel.
/// Run `i` (in [`BasisLabel::ALL`] order) uses `basis_seed(seed, i)`.
pub fn simulate_basis_set(
    scenario: &Scenario,
    seed: u64,
) -> Result<Vec<(BasisLabel, TimeTagStream)>> {
    BasisLabel::ALL
        .par_iter()
        .map(|&basis| {
            let run = Scenario {
                seed: basis_seed(seed, basis.index()),
                ..scenario.with_basis(basis)
            };
            simulate_stream(&run).map(|s| (basis, s))
        })
        .collect()
}
