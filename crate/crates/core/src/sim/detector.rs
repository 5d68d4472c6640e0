use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{Error, Result};
use crate::units::{FWHM_PER_SIGMA, PS_PER_S};

use super::{flags, DetectorModel, TimeTagRecord, TimeTagStream};

#[derive(Debug, Clone)]
struct Channel {
    label: String,
    model: DetectorModel,
    jitter: Option<Normal<f64>>,
    tags: Vec<(u64, u8)>,
    input_clicks: usize,
}

/// Per-channel detector models feeding one time tagger.
///
/// Clicks are pushed one at a time (loss, jitter, quantization); dark counts,
/// dead time and the global merge are applied by [`DetectorChain::finish`].
#[derive(Debug, Clone)]
pub struct DetectorChain {
    channels: BTreeMap<u16, Channel>,
}

impl DetectorChain {
    pub fn new() -> Self {
        Self {
            channels: BTreeMap::new(),
        }
    }

    pub fn add_channel(
        &mut self,
        channel: u16,
        label: impl Into<String>,
        model: DetectorModel,
    ) -> Result<()> {
        model.validate()?;
        if self.channels.contains_key(&channel) {
            return Err(Error::Config(vec![format!("channel {channel} defined twice")]));
        }
        let sigma = model.jitter_fwhm_ps / FWHM_PER_SIGMA;
        let jitter = (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("finite sigma"));
        self.channels.insert(
            channel,
            Channel {
                label: label.into(),
                model,
                jitter,
                tags: Vec::new(),
                input_clicks: 0,
            },
        );
        Ok(())
    }

    pub fn model(&self, channel: u16) -> Option<&DetectorModel> {
        self.channels.get(&channel).map(|c| &c.model)
    }

    /// Offers one photon to `channel` at true arrival time `time_ps`.
    pub fn push<R: Rng + ?Sized>(
        &mut self,
        channel: u16,
        time_ps: f64,
        extra_flags: u8,
        rng: &mut R,
    ) -> Result<()> {
        let ch = self
            .channels
            .get_mut(&channel)
            .ok_or(Error::UnknownChannel(channel))?;
        ch.input_clicks += 1;
        if ch.model.efficiency < 1.0 && rng.random::<f64>() >= ch.model.efficiency {
            return Ok(());
        }
        let t = match &ch.jitter {
            Some(n) => time_ps + n.sample(rng),
            None => time_ps,
        };
        ch.tags.push(quantize(t, ch.model.time_bin_ps, extra_flags));
        Ok(())
    }

    /// Adds dark counts over `[0, duration_ps)`, drops tags at or beyond the
    /// duration, applies dead time per channel and merges all channels in
    /// time order.
    pub fn finish<R: Rng + ?Sized>(self, duration_ps: u64, rng: &mut R) -> TimeTagStream {
        let mut records = Vec::new();
        let mut channel_map = BTreeMap::new();
        for (id, mut ch) in self.channels {
            let mean = ch.model.dark_rate_hz * duration_ps as f64 / PS_PER_S;
            if mean > 0.0 {
                let n = Poisson::new(mean).expect("positive mean").sample(rng) as u64;
                for _ in 0..n {
                    let t = rng.random::<f64>() * duration_ps as f64;
                    ch.tags.push(quantize(t, ch.model.time_bin_ps, flags::DARK));
                }
            }
            ch.tags.retain(|&(t, _)| t < duration_ps);
            ch.tags.sort_unstable();
            let dead = ch.model.dead_time_ps;
            let mut last: Option<u64> = None;
            for (t, f) in ch.tags {
                if let Some(prev) = last {
                    if ((t - prev) as f64) < dead {
                        continue;
                    }
                }
                last = Some(t);
                records.push(TimeTagRecord {
                    timestamp_ps: t,
                    channel: id,
                    flags: f,
                });
            }
            channel_map.insert(id, ch.label);
        }
        records.sort_unstable();
        TimeTagStream::new_unchecked(records, duration_ps, channel_map)
    }
}

impl Default for DetectorChain {
    fn default() -> Self {
        Self::new()
    }
}

fn quantize(t: f64, bin: f64, extra_flags: u8) -> (u64, u8) {
    let q = (t / bin).floor() * bin;
    if q < 0.0 {
        (0, extra_flags | flags::CLAMPED)
    } else {
        (q.round() as u64, extra_flags)
    }
}

/// Runs ideal `(channel, time_ps)` clicks through the detector chain.
pub fn apply_detector<R: Rng + ?Sized>(
    clicks: &[(u16, f64)],
    mut chain: DetectorChain,
    duration_ps: u64,
    rng: &mut R,
) -> Result<TimeTagStream> {
    for &(ch, t) in clicks {
        chain.push(ch, t, 0, rng)?;
    }
    Ok(chain.finish(duration_ps, rng))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn chain(model: DetectorModel) -> DetectorChain {
        let mut c = DetectorChain::new();
        c.add_channel(0, "a", model.clone()).unwrap();
        c.add_channel(1, "b", model).unwrap();
        c
    }

    #[test]
    fn identity_chain_only_quantizes() {
        let model = DetectorModel {
            time_bin_ps: 32.0,
            ..DetectorModel::ideal()
        };
        let clicks = [(0, 100.0), (1, 31.9), (0, 64.0), (1, 1000.5)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = apply_detector(&clicks, chain(model), 10_000, &mut rng).unwrap();
        let got: Vec<(u64, u16)> = s.records().iter().map(|r| (r.timestamp_ps, r.channel)).collect();
        assert_eq!(got, vec![(0, 1), (64, 0), (96, 0), (992, 1)]);
    }

    #[test]
    fn negative_times_clamped_and_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = apply_detector(&[(0, -5.0)], chain(DetectorModel::ideal()), 100, &mut rng).unwrap();
        assert_eq!(s.records()[0].timestamp_ps, 0);
        assert_eq!(s.records()[0].flags & flags::CLAMPED, flags::CLAMPED);
    }

    #[test]
    fn dark_counts_are_poissonian() {
        // R·T = 1e4
        let model = DetectorModel {
            dark_rate_hz: 1e4,
            ..DetectorModel::ideal()
        };
        let mut c = DetectorChain::new();
        c.add_channel(0, "dark", model).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = c.finish(1_000_000_000_000, &mut rng);
        let n = s.len() as f64;
        assert!((n - 1e4).abs() < 5.0 * 100.0, "{n}");
        assert!(s.records().iter().all(|r| r.flags == flags::DARK));
        s.check_sorted().unwrap();
    }

    #[test]
    fn dead_time_suppresses_close_clicks() {
        let model = DetectorModel {
            dead_time_ps: 50.0,
            ..DetectorModel::ideal()
        };
        let clicks = [(0, 0.0), (0, 20.0), (0, 49.0), (0, 50.0), (0, 120.0), (1, 10.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = apply_detector(&clicks, chain(model), 1000, &mut rng).unwrap();
        assert_eq!(s.channel_times(0), vec![0, 50, 120]);
        assert_eq!(s.channel_times(1), vec![10]);
    }

    #[test]
    fn efficiency_thins_clicks() {
        let model = DetectorModel {
            efficiency: 0.3,
            ..DetectorModel::ideal()
        };
        let clicks: Vec<(u16, f64)> = (0..100_000).map(|i| (0, i as f64 * 10.0)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = apply_detector(&clicks, chain(model), 10_000_000, &mut rng).unwrap();
        let frac = s.len() as f64 / 1e5;
        assert!((frac - 0.3).abs() < 5.0 * (0.3f64 * 0.7 / 1e5).sqrt());
    }

    #[test]
    fn unknown_channel_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(apply_detector(&[(9, 1.0)], chain(DetectorModel::ideal()), 10, &mut rng).is_err());
    }
}
