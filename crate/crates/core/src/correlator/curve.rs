use crate::error::{Error, Result};

use super::CorrelationHistogram;

/// A derived curve (g², degree of correlation, fidelity, CHSH) on a delay
/// grid. Undefined bins hold `None` and are skipped by fits and peak search.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    pub delays_ps: Vec<f64>,
    pub values: Vec<Option<f64>>,
    pub sigma: Vec<f64>,
}

impl CorrelationCurve {
    pub fn new(delays_ps: Vec<f64>, values: Vec<Option<f64>>, sigma: Vec<f64>) -> Result<Self> {
        if delays_ps.len() != values.len() || values.len() != sigma.len() {
            return Err(Error::GridMismatch(format!(
                "{} delays, {} values, {} sigmas",
                delays_ps.len(),
                values.len(),
                sigma.len()
            )));
        }
        if sigma.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::range("sigma", "must be >= 0"));
        }
        Ok(Self {
            delays_ps,
            values,
            sigma,
        })
    }

    pub fn len(&self) -> usize {
        self.delays_ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays_ps.is_empty()
    }

    /// `(delay, value, sigma)` of every defined bin.
    pub fn defined(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.delays_ps
            .iter()
            .zip(&self.values)
            .zip(&self.sigma)
            .filter_map(|((&d, v), &s)| v.map(|v| (d, v, s)))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.delays_ps == other.delays_ps
    }

    /// Restriction to bins whose delay lies in `[lo, hi]`.
    pub fn slice_delays(&self, lo: f64, hi: f64) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.delays_ps[i] >= lo && self.delays_ps[i] <= hi)
            .collect();
        Self {
            delays_ps: keep.iter().map(|&i| self.delays_ps[i]).collect(),
            values: keep.iter().map(|&i| self.values[i]).collect(),
            sigma: keep.iter().map(|&i| self.sigma[i]).collect(),
        }
    }
}

/// Normalises coincidences by the accidental expectation
/// `N_a·N_b·w/T`, giving g²(τ).
pub fn normalize_g2(hist: &CorrelationHistogram) -> Result<CorrelationCurve> {
    if hist.total_a == 0 || hist.total_b == 0 || hist.duration_ps == 0 {
        return Err(Error::Degenerate(
            "g2 normalisation needs non-zero singles and duration".into(),
        ));
    }
    let norm = hist.total_a as f64 * hist.total_b as f64 * hist.bin_width_ps as f64
        / hist.duration_ps as f64;
    let values = hist.counts.iter().map(|&c| Some(c as f64 / norm)).collect();
    let sigma = hist.counts.iter().map(|&c| (c as f64).sqrt() / norm).collect();
    CorrelationCurve::new(hist.delays_ps(), values, sigma)
}

/// Contrast `(co − cross)/(co + cross)` per bin with binomial errors
/// `σ² = 4·co·cross/(co + cross)³`. Empty bins are undefined.
pub fn degree_of_correlation(
    co: &CorrelationHistogram,
    cross: &CorrelationHistogram,
) -> Result<CorrelationCurve> {
    if !co.same_grid(cross) {
        return Err(Error::GridMismatch(
            "co- and cross-polarized histograms use different bins".into(),
        ));
    }
    let (values, sigma) = co
        .counts
        .iter()
        .zip(&cross.counts)
        .map(|(&a, &b)| {
            let (a, b) = (a as f64, b as f64);
            let n = a + b;
            if n == 0.0 {
                (None, 0.0)
            } else {
                (Some((a - b) / n), (4.0 * a * b / (n * n * n)).sqrt())
            }
        })
        .unzip();
    CorrelationCurve::new(co.delays_ps(), values, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(counts: Vec<u64>) -> CorrelationHistogram {
        CorrelationHistogram {
            bin_width_ps: 10,
            window_ps: 10 * (counts.len() as u64 / 2),
            counts,
            total_a: 100,
            total_b: 200,
            duration_ps: 1_000_000,
        }
    }

    #[test]
    fn contrast_limits() {
        let co = hist(vec![5, 7, 0]);
        let cross = hist(vec![5, 0, 0]);
        let c = degree_of_correlation(&co, &cross).unwrap();
        assert_eq!(c.values, vec![Some(0.0), Some(1.0), None]);
        assert_eq!(c.sigma[1], 0.0);
        assert!((c.sigma[0] - (4.0 * 25.0 / 1000.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn contrast_grid_mismatch() {
        let err = degree_of_correlation(&hist(vec![1, 2, 3]), &hist(vec![1, 2, 3, 4, 5]));
        assert!(matches!(err, Err(Error::GridMismatch(_))));
    }

    #[test]
    fn g2_normalisation() {
        // accidental expectation per bin: 100·200·10/1e6 = 0.2
        let g = normalize_g2(&hist(vec![2, 0, 1])).unwrap();
        assert_eq!(g.values, vec![Some(10.0), Some(0.0), Some(5.0)]);
        assert!((g.sigma[0] - 2f64.sqrt() / 0.2).abs() < 1e-12);
        let mut h = hist(vec![1]);
        h.total_a = 0;
        assert!(normalize_g2(&h).is_err());
        let mut h = hist(vec![1]);
        h.duration_ps = 0;
        assert!(normalize_g2(&h).is_err());
    }
}
