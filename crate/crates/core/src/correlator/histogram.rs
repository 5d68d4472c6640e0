use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sim::TimeTagStream;

/// Binned coincidence counts between channel `a` (start) and `b` (stop).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationHistogram {
    pub bin_width_ps: u64,
    pub window_ps: u64,
    /// `2K + 1` bins for `K = window / bin_width`; index `K` is zero delay.
    pub counts: Vec<u64>,
    pub total_a: u64,
    pub total_b: u64,
    pub duration_ps: u64,
}

impl CorrelationHistogram {
    pub fn empty(bin_width_ps: u64, window_ps: u64, duration_ps: u64) -> Result<Self> {
        if bin_width_ps == 0 {
            return Err(Error::range("bin_width_ps", "must be > 0"));
        }
        let half = (window_ps / bin_width_ps) as usize;
        Ok(Self {
            bin_width_ps,
            window_ps,
            counts: vec![0; 2 * half + 1],
            total_a: 0,
            total_b: 0,
            duration_ps,
        })
    }

    pub fn half_bins(&self) -> usize {
        self.counts.len() / 2
    }

    /// Bin-centre delays.
    pub fn delays_ps(&self) -> Vec<f64> {
        let k = self.half_bins() as i64;
        (-k..=k).map(|i| (i * self.bin_width_ps as i64) as f64).collect()
    }

    pub fn total_coincidences(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.bin_width_ps == other.bin_width_ps && self.counts.len() == other.counts.len()
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "bin {} ps × {} bins vs bin {} ps × {} bins",
                self.bin_width_ps,
                self.counts.len(),
                other.bin_width_ps,
                other.counts.len()
            )))
        }
    }

    /// Merges a histogram of a disjoint time segment: counts, singles and
    /// durations add. Associative and commutative.
    pub fn merge_segment(&mut self, other: &Self) -> Result<()> {
        self.check_grid(other)?;
        self.add_counts(other);
        self.duration_ps += other.duration_ps;
        Ok(())
    }

    /// Sums two histograms over the same acquisition (e.g. the two
    /// co-polarized channel pairs). Duration is kept.
    pub fn combine(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let mut out = self.clone();
        out.add_counts(other);
        out.duration_ps = self.duration_ps.max(other.duration_ps);
        Ok(out)
    }

    fn add_counts(&mut self, other: &Self) {
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total_a += other.total_a;
        self.total_b += other.total_b;
    }

    /// Accumulates pairs for start times `a[a_range]` against all of `b`.
    /// With `same_channel`, pairs of a record with itself are skipped.
    fn accumulate(&mut self, a: &[u64], a_range: std::ops::Range<usize>, b: &[u64], same_channel: bool) {
        let w = self.bin_width_ps as i64;
        let k_max = self.half_bins() as i64;
        // |d| bound of the outermost bins: d ∈ [−K·w − w/2, K·w + w/2)
        let reach = (k_max * w + w / 2 + 1) as u64;
        let mut start = b.partition_point(|&t| t + reach < a.get(a_range.start).copied().unwrap_or(0));
        for i in a_range {
            let ta = a[i];
            while start < b.len() && b[start] + reach < ta {
                start += 1;
            }
            let mut j = start;
            while j < b.len() && b[j] <= ta + reach {
                if !(same_channel && i == j) {
                    let d = b[j] as i64 - ta as i64;
                    let k = (2 * d + w).div_euclid(2 * w);
                    if (-k_max..=k_max).contains(&k) {
                        self.counts[(k + k_max) as usize] += 1;
                    }
                }
                j += 1;
            }
        }
    }
}

fn channel_pair(stream: &TimeTagStream, ch_a: u16, ch_b: u16) -> Result<(Vec<u64>, Vec<u64>)> {
    stream.check_sorted()?;
    for ch in [ch_a, ch_b] {
        if !stream.channel_map().contains_key(&ch) {
            return Err(Error::UnknownChannel(ch));
        }
    }
    Ok((stream.channel_times(ch_a), stream.channel_times(ch_b)))
}

/// All-pairs cross-correlation of `ch_b` against `ch_a` (`t_b − t_a`).
pub fn cross_correlation(
    stream: &TimeTagStream,
    ch_a: u16,
    ch_b: u16,
    bin_width_ps: u64,
    window_ps: u64,
) -> Result<CorrelationHistogram> {
    let mut hist = CorrelationHistogram::empty(bin_width_ps, window_ps, stream.duration_ps())?;
    let (a, b) = channel_pair(stream, ch_a, ch_b)?;
    hist.total_a = a.len() as u64;
    hist.total_b = b.len() as u64;
    hist.accumulate(&a, 0..a.len(), &b, ch_a == ch_b);
    Ok(hist)
}

/// Same result as [`cross_correlation`], computed over `segments` equal time
/// slices in parallel and merged. Start clicks belong to exactly one slice;
/// stop clicks are shared across slice edges within the window.
pub fn cross_correlation_segmented(
    stream: &TimeTagStream,
    ch_a: u16,
    ch_b: u16,
    bin_width_ps: u64,
    window_ps: u64,
    segments: usize,
) -> Result<CorrelationHistogram> {
    let segments = segments.max(1) as u64;
    let (a, b) = channel_pair(stream, ch_a, ch_b)?;
    let duration = stream.duration_ps();
    let edges: Vec<u64> = (0..=segments)
        .map(|i| (duration as u128 * i as u128 / segments as u128) as u64)
        .collect();
    let same = ch_a == ch_b;
    let parts: Vec<Result<CorrelationHistogram>> = (0..segments as usize)
        .into_par_iter()
        .map(|i| {
            let (lo, hi) = (edges[i], edges[i + 1]);
            let last = i + 1 == segments as usize;
            let upper = |t: &u64| last || *t < hi;
            let a_lo = a.partition_point(|t| *t < lo);
            let a_hi = a.partition_point(|t| *t < lo || upper(t));
            let b_lo = b.partition_point(|t| *t < lo);
            let b_hi = b.partition_point(|t| *t < lo || upper(t));
            let mut h = CorrelationHistogram::empty(bin_width_ps, window_ps, hi - lo)?;
            h.total_a = (a_hi - a_lo) as u64;
            h.total_b = (b_hi - b_lo) as u64;
            h.accumulate(&a, a_lo..a_hi, &b, same);
            Ok(h)
        })
        .collect();
    let mut merged = CorrelationHistogram::empty(bin_width_ps, window_ps, 0)?;
    for part in parts {
        merged.merge_segment(&part?)?;
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::sim::TimeTagRecord;

    fn stream(records: &[(u64, u16)], duration: u64) -> TimeTagStream {
        let mut recs: Vec<TimeTagRecord> = records
            .iter()
            .map(|&(t, c)| TimeTagRecord {
                timestamp_ps: t,
                channel: c,
                flags: 0,
            })
            .collect();
        recs.sort();
        let map: BTreeMap<u16, String> = [(0, "a".into()), (1, "b".into())].into();
        TimeTagStream::new(recs, duration, map).unwrap()
    }

    #[test]
    fn single_pair_lands_in_its_bin() {
        let s = stream(&[(0, 0), (100, 1)], 1000);
        let h = cross_correlation(&s, 0, 1, 32, 320).unwrap();
        assert_eq!(h.counts.len(), 21);
        assert_eq!(h.total_coincidences(), 1);
        let k = h.counts.iter().position(|&c| c == 1).unwrap();
        let centre = h.delays_ps()[k];
        assert!(centre - 16.0 <= 100.0 && 100.0 < centre + 16.0);
        assert_eq!(centre, 96.0);
    }

    #[test]
    fn bin_edges_are_half_open() {
        // zero-delay bin is [−16, 16)
        let s = stream(&[(100, 0), (84, 1), (115, 1), (116, 1)], 1000);
        let h = cross_correlation(&s, 0, 1, 32, 64).unwrap();
        assert_eq!(h.counts, vec![0, 0, 2, 1, 0]);
    }

    #[test]
    fn window_edges() {
        let s = stream(&[(1000, 0), (1000 - 80, 1), (1000 - 81, 1), (1000 + 79, 1), (1000 + 80, 1)], 5000);
        let h = cross_correlation(&s, 0, 1, 32, 64).unwrap();
        assert_eq!(h.counts, vec![1, 0, 0, 0, 1]);
    }

    #[test]
    fn empty_channel_gives_zero_histogram() {
        let s = stream(&[(10, 0)], 100);
        let h = cross_correlation(&s, 0, 1, 32, 320).unwrap();
        assert_eq!(h.total_coincidences(), 0);
        assert_eq!(h.total_b, 0);
    }

    #[test]
    fn unsorted_stream_is_rejected() {
        let recs = vec![
            TimeTagRecord { timestamp_ps: 10, channel: 0, flags: 0 },
            TimeTagRecord { timestamp_ps: 5, channel: 1, flags: 0 },
        ];
        let map: BTreeMap<u16, String> = [(0, "a".into()), (1, "b".into())].into();
        let s = TimeTagStream::new_unchecked(recs, 100, map);
        assert!(matches!(
            cross_correlation(&s, 0, 1, 32, 320),
            Err(Error::UnsortedStream { .. })
        ));
        assert!(matches!(
            cross_correlation(&stream(&[], 10), 0, 9, 32, 320),
            Err(Error::UnknownChannel(9))
        ));
    }

    #[test]
    fn autocorrelation_is_symmetric_without_self_pairs() {
        // no delay sits exactly on a bin edge (8 + 16k)
        let s = stream(&[(0, 0), (50, 0), (70, 0), (201, 0)], 1000);
        let h = cross_correlation(&s, 0, 0, 16, 256).unwrap();
        let n = h.counts.len();
        for k in 0..n {
            assert_eq!(h.counts[k], h.counts[n - 1 - k]);
        }
        assert_eq!(h.counts[n / 2], 0);
        assert_eq!(h.total_coincidences(), 12);
    }

    #[test]
    fn segmented_matches_serial() {
        let recs: Vec<(u64, u16)> = (0..2000u64)
            .map(|i| (i * 37 + (i * i) % 13, (i % 3 == 0) as u16))
            .collect();
        let s = stream(&recs, 80_000);
        for ch in [(0, 1), (1, 1)] {
            let serial = cross_correlation(&s, ch.0, ch.1, 8, 400).unwrap();
            for n in [1, 2, 7, 64] {
                let seg = cross_correlation_segmented(&s, ch.0, ch.1, 8, 400, n).unwrap();
                assert_eq!(seg, serial, "{n} segments");
            }
        }
    }
}
