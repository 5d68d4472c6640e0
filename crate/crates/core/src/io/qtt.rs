//! QTT1: a little-endian header followed by fixed 16-byte records.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "QTT1"
//!      4     2  version (1)
//!      6     2  header_len (28)
//!      8     4  channel_count
//!     12     8  record_count
//!     20     8  duration_ps
//! record: timestamp_ps u64, channel u8, flags u8, 6 reserved zero bytes
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{TimeTagRecord, TimeTagStream};

pub const MAGIC: [u8; 4] = *b"QTT1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: u16 = 28;
pub const RECORD_LEN: usize = 16;

/// Serializes a stream. Channels must fit in one byte; `channel_count` is
/// one past the highest mapped channel.
pub fn encode_qtt(stream: &TimeTagStream) -> Result<Vec<u8>> {
    stream.check_sorted()?;
    let channel_count = stream
        .channel_map()
        .keys()
        .chain(stream.records().iter().map(|r| &r.channel))
        .max()
        .map_or(0, |&c| u32::from(c) + 1);
    if channel_count > 256 {
        return Err(Error::range(
            "channel",
            format!("channel {} does not fit the one-byte record field", channel_count - 1),
        ));
    }
    let mut out = Vec::with_capacity(HEADER_LEN as usize + RECORD_LEN * stream.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&HEADER_LEN.to_le_bytes());
    out.extend_from_slice(&channel_count.to_le_bytes());
    out.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    out.extend_from_slice(&stream.duration_ps().to_le_bytes());
    for r in stream.records() {
        out.extend_from_slice(&r.timestamp_ps.to_le_bytes());
        out.push(r.channel as u8);
        out.push(r.flags);
        out.extend_from_slice(&[0u8; 6]);
    }
    Ok(out)
}

/// Parses and validates a QTT1 image. Errors carry the byte offset of the
/// offending field. Channels are labelled `ch<N>`.
pub fn decode_qtt(bytes: &[u8]) -> Result<TimeTagStream> {
    let fail = |offset: usize, message: String| Error::Format {
        offset: offset as u64,
        message,
    };
    let min_header = HEADER_LEN as usize;
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        if bytes.len() < 4 && MAGIC.starts_with(bytes) {
            return Err(fail(bytes.len(), "truncated header".into()));
        }
        return Err(fail(0, "bad magic, expected \"QTT1\"".into()));
    }
    if bytes.len() < min_header {
        return Err(fail(
            bytes.len(),
            format!("truncated header: {} of {min_header} bytes", bytes.len()),
        ));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(fail(4, format!("unsupported version {version}")));
    }
    let header_len = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    if header_len < min_header {
        return Err(fail(6, format!("header length {header_len} below {min_header}")));
    }
    let channel_count = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if channel_count > 256 {
        return Err(fail(8, format!("channel count {channel_count} exceeds 256")));
    }
    let record_count = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
    let duration_ps = u64::from_le_bytes(bytes[20..28].try_into().expect("8 bytes"));
    if bytes.len() < header_len {
        return Err(fail(bytes.len(), "truncated header".into()));
    }

    let body = bytes.len() - header_len;
    let complete = (body / RECORD_LEN) as u64;
    if complete < record_count {
        let offset = header_len + complete as usize * RECORD_LEN;
        let message = if !body.is_multiple_of(RECORD_LEN) {
            format!(
                "record {complete} truncated: {} of {RECORD_LEN} bytes",
                body % RECORD_LEN
            )
        } else {
            format!("file ends after {complete} of {record_count} records")
        };
        return Err(fail(offset, message));
    }
    let expected_end = header_len + record_count as usize * RECORD_LEN;
    if bytes.len() > expected_end {
        return Err(fail(
            expected_end,
            format!("{} trailing bytes after the last record", bytes.len() - expected_end),
        ));
    }

    let mut records = Vec::with_capacity(record_count as usize);
    let mut previous = 0u64;
    for (i, chunk) in bytes[header_len..].chunks_exact(RECORD_LEN).enumerate() {
        let offset = header_len + i * RECORD_LEN;
        let timestamp_ps = u64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
        if timestamp_ps < previous {
            return Err(fail(
                offset,
                format!("timestamp {timestamp_ps} decreases (previous {previous})"),
            ));
        }
        previous = timestamp_ps;
        let channel = chunk[8];
        if u32::from(channel) >= channel_count {
            return Err(fail(
                offset + 8,
                format!("channel {channel} outside channel count {channel_count}"),
            ));
        }
        if let Some(j) = chunk[10..].iter().position(|&b| b != 0) {
            return Err(fail(offset + 10 + j, "reserved byte is not zero".into()));
        }
        records.push(TimeTagRecord {
            timestamp_ps,
            channel: u16::from(channel),
            flags: chunk[9],
        });
    }
    let channel_map: BTreeMap<u16, String> = (0..channel_count as u16)
        .map(|c| (c, format!("ch{c}")))
        .collect();
    Ok(TimeTagStream::new_unchecked(records, duration_ps, channel_map))
}

pub fn read_qtt_file(path: &Path) -> Result<TimeTagStream> {
    decode_qtt(&super::read_file(path)?)
}

pub fn write_qtt_file(path: &Path, stream: &TimeTagStream) -> Result<()> {
    super::write_atomic(path, &encode_qtt(stream)?)
}
