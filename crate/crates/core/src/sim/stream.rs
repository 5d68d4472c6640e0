use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Bits of [`TimeTagRecord::flags`].
pub mod flags {
    /// The jittered time was negative and clamped to zero.
    pub const CLAMPED: u8 = 0x01;
    /// Dark count.
    pub const DARK: u8 = 0x02;
    /// Photon from the uncorrelated Poissonian background.
    pub const BACKGROUND: u8 = 0x04;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeTagRecord {
    pub timestamp_ps: u64,
    pub channel: u16,
    pub flags: u8,
}

/// Time-ordered detection records: what a time-interval analyser hands to
/// the correlation software.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeTagStream {
    records: Vec<TimeTagRecord>,
    duration_ps: u64,
    channel_map: BTreeMap<u16, String>,
}

impl TimeTagStream {
    /// Builds a stream, checking ordering and that every channel is mapped.
    pub fn new(
        records: Vec<TimeTagRecord>,
        duration_ps: u64,
        channel_map: BTreeMap<u16, String>,
    ) -> Result<Self> {
        if let Some(index) = first_unsorted(&records) {
            return Err(Error::UnsortedStream { index });
        }
        if let Some(r) = records.iter().find(|r| !channel_map.contains_key(&r.channel)) {
            return Err(Error::UnknownChannel(r.channel));
        }
        Ok(Self {
            records,
            duration_ps,
            channel_map,
        })
    }

    /// Skips the ordering check. Correlation entry points re-check it.
    pub fn new_unchecked(
        records: Vec<TimeTagRecord>,
        duration_ps: u64,
        channel_map: BTreeMap<u16, String>,
    ) -> Self {
        Self {
            records,
            duration_ps,
            channel_map,
        }
    }

    pub fn empty(duration_ps: u64, channel_map: BTreeMap<u16, String>) -> Self {
        Self::new_unchecked(Vec::new(), duration_ps, channel_map)
    }

    pub fn records(&self) -> &[TimeTagRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TimeTagRecord> {
        self.records
    }

    pub fn duration_ps(&self) -> u64 {
        self.duration_ps
    }

    pub fn channel_map(&self) -> &BTreeMap<u16, String> {
        &self.channel_map
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn check_sorted(&self) -> Result<()> {
        match first_unsorted(&self.records) {
            Some(index) => Err(Error::UnsortedStream { index }),
            None => Ok(()),
        }
    }

    /// Timestamps on one channel, in order.
    pub fn channel_times(&self, channel: u16) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.channel == channel)
            .map(|r| r.timestamp_ps)
            .collect()
    }

    pub fn count(&self, channel: u16) -> usize {
        self.records.iter().filter(|r| r.channel == channel).count()
    }
}

fn first_unsorted(records: &[TimeTagRecord]) -> Option<usize> {
    records
        .windows(2)
        .position(|w| w[1].timestamp_ps < w[0].timestamp_ps)
        .map(|i| i + 1)
}
