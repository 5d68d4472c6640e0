//! Peak fidelity and decay width across a temperature table.

use qled::cli::temperature_sweep;
use qled::io::ScenarioConfig;

const CONFIG: &str = r#"
[source]
fss_ueV = 17.7
x_lifetime_ps = 400
xx_lifetime_ps = 500
cycle_rate_hz = 1.7e7
background_fraction = 0.17333

[detector]
efficiency = 1.0
jitter_fwhm_ps = 0
dark_rate_hz = 0
dead_time_ps = 0
time_bin_ps = 1

[measurement]
xx_basis = "HV"
x_basis = "HV"
duration_s = 0.02
seed = 6

[analysis]
bin_ps = 16
window_ns = 6

[temperature]
rows = [
  [44, 400, 0.17333],
  [75, 340, 0.43],
  [99, 260, 0.75],
]
"#;

fn main() -> qled::Result<()> {
    let config = ScenarioConfig::parse(CONFIG)?;
    let rows = temperature_sweep(&config, config.scenario.seed, &[44.0, 60.0, 75.0, 90.0, 99.0])?;
    println!("{:>6} {:>16} {:>10} {:>12}", "T (K)", "peak F", "HWHM (ps)", "tau_X (ps)");
    for r in rows {
        println!(
            "{:>6} {:>9.4}±{:.4} {:>10} {:>12.0}",
            r.temperature_k,
            r.peak_fidelity,
            r.sigma,
            r.hwhm_ps.map_or("-".to_string(), |h| format!("{h:.0}")),
            r.x_lifetime_ps
        );
    }
    Ok(())
}
