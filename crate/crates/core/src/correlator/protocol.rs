use crate::error::Result;
use crate::polarization::BasisLabel;
use crate::sim::TimeTagStream;

use super::{cross_correlation, degree_of_correlation, CorrelationHistogram, FidelityInputs};

/// Tagger channels of the four analyzer outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelIds {
    pub xx_plus: u16,
    pub xx_minus: u16,
    pub x_plus: u16,
    pub x_minus: u16,
}

impl Default for ChannelIds {
    fn default() -> Self {
        Self {
            xx_plus: 0,
            xx_minus: 1,
            x_plus: 2,
            x_minus: 3,
        }
    }
}

/// Co-polarized (`++`, `−−`) and cross-polarized (`+−`, `−+`) XX–X
/// histograms of one co-basis run.
pub fn co_cross_histograms(
    stream: &TimeTagStream,
    ch: ChannelIds,
    bin_width_ps: u64,
    window_ps: u64,
) -> Result<(CorrelationHistogram, CorrelationHistogram)> {
    let h = |a, b| cross_correlation(stream, a, b, bin_width_ps, window_ps);
    let co = h(ch.xx_plus, ch.x_plus)?.combine(&h(ch.xx_minus, ch.x_minus)?)?;
    let cross = h(ch.xx_plus, ch.x_minus)?.combine(&h(ch.xx_minus, ch.x_plus)?)?;
    Ok((co, cross))
}

/// Polarization-insensitive XX–X histogram: the sum over all four channel
/// pairs.
pub fn unpolarized_histogram(
    stream: &TimeTagStream,
    ch: ChannelIds,
    bin_width_ps: u64,
    window_ps: u64,
) -> Result<CorrelationHistogram> {
    let (co, cross) = co_cross_histograms(stream, ch, bin_width_ps, window_ps)?;
    co.combine(&cross)
}

/// Degrees of correlation of the five basis runs. `runs` must contain every
/// basis once; the lookup is by label.
pub fn fidelity_inputs(
    runs: &[(BasisLabel, &TimeTagStream)],
    ch: ChannelIds,
    fss_ueV: f64,
    bin_width_ps: u64,
    window_ps: u64,
) -> Result<FidelityInputs> {
    let curve = |basis: BasisLabel| {
        let stream = runs
            .iter()
            .find(|(b, _)| *b == basis)
            .map(|(_, s)| *s)
            .ok_or_else(|| crate::Error::Degenerate(format!("missing {basis} run")))?;
        let (co, cross) = co_cross_histograms(stream, ch, bin_width_ps, window_ps)?;
        degree_of_correlation(&co, &cross)
    };
    Ok(FidelityInputs {
        c_hv: curve(BasisLabel::HV)?,
        c_da: curve(BasisLabel::DA)?,
        c_lr: curve(BasisLabel::LR)?,
        c_eld_era: curve(BasisLabel::EldEra)?,
        c_ela_erd: curve(BasisLabel::ElaErd)?,
        fss_ueV,
    })
}
