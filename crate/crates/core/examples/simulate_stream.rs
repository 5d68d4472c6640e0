//! Simulates one co-basis run with realistic detectors, stores it in the
//! binary time-tag format and reads it back.

use qled::io::{read_qtt_file, write_qtt_file};
use qled::polarization::BasisLabel;
use qled::sim::{simulate_stream, CascadeParams, ChannelPlan, DetectorModel, Scenario};

fn main() -> qled::Result<()> {
    let scenario = Scenario {
        source: CascadeParams {
            x_lifetime_ps: 400.0,
            cycle_rate_hz: 2e7,
            background_fraction: 0.1,
            ..CascadeParams::default()
        },
        channels: ChannelPlan::uniform(DetectorModel::default()),
        xx_basis: BasisLabel::DA,
        x_basis: BasisLabel::DA,
        duration_ps: 10_000_000_000,
        seed: 1,
    };
    let stream = simulate_stream(&scenario)?;
    println!("{} records over {} ps", stream.len(), stream.duration_ps());
    for (ch, label) in stream.channel_map() {
        let rate = stream.count(*ch) as f64 / (stream.duration_ps() as f64 * 1e-12);
        println!("  channel {ch} ({label}): {rate:.0} counts/s");
    }

    let dir = tempfile::tempdir().map_err(|e| qled::Error::Io {
        path: std::env::temp_dir(),
        source: e,
    })?;
    let path = dir.path().join("da.qtt");
    write_qtt_file(&path, &stream)?;
    let back = read_qtt_file(&path)?;
    println!(
        "wrote {} bytes, read back {} records (identical: {})",
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0),
        back.len(),
        back.records() == stream.records()
    );
    Ok(())
}
