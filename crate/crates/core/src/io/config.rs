//! Scenario configuration text: `[section]` headers, `key = value` lines and
//! `#` comments (a TOML subset). Every problem is collected before failing,
//! so one run reports all offending keys.

use std::path::Path;
use std::str::FromStr;

use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::fss::QwpModelParams;
use crate::polarization::{BasisLabel, NoiseMode};
use crate::sim::{
    CascadeParams, ChannelPlan, DetectorModel, Port, Scenario, TemperatureModel, TemperatureRow,
};

/// Histogram settings used by the analysis commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisConfig {
    pub bin_ps: u64,
    pub window_ps: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bin_ps: 32,
            window_ps: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub analysis: AnalysisConfig,
    pub temperature: Option<TemperatureModel>,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let root = parse_table(text)?;
        let mut r = Reader::default();
        r.allow_sections(&root, &["source", "detector", "measurement", "analysis", "temperature"]);

        let source = r.section(&root, "source");
        let d = CascadeParams::default();
        let noise_mode = match r.string(&source, "source", "noise_mode") {
            Some(s) => NoiseMode::from_str(&s).unwrap_or_else(|e| {
                r.problem(format!("source.noise_mode: {e}"));
                d.noise_mode
            }),
            None => d.noise_mode,
        };
        let params = CascadeParams {
            fss_ueV: r.real(&source, "source", "fss_ueV").unwrap_or(d.fss_ueV),
            x_lifetime_ps: r.real(&source, "source", "x_lifetime_ps").unwrap_or(d.x_lifetime_ps),
            xx_lifetime_ps: r.real(&source, "source", "xx_lifetime_ps").unwrap_or(d.xx_lifetime_ps),
            cycle_rate_hz: r.real(&source, "source", "cycle_rate_hz").unwrap_or(d.cycle_rate_hz),
            reexcitation_rate_hz: r
                .real(&source, "source", "reexcitation_rate_hz")
                .unwrap_or(d.reexcitation_rate_hz),
            background_fraction: r
                .real(&source, "source", "background_fraction")
                .unwrap_or(d.background_fraction),
            noise_mode,
        };
        r.finish_section(&source, "source", &SOURCE_KEYS);

        let detector = r.section(&root, "detector");
        let shared = r.detector(&detector, "detector", DetectorModel::default());
        let mut allowed: Vec<&str> = DETECTOR_KEYS.to_vec();
        allowed.extend(ChannelPlan::LABELS);
        r.finish_section(&detector, "detector", &allowed);
        let defaults = ChannelPlan::uniform(shared);
        let mut ports = Vec::new();
        for (label, default_port) in defaults.ports() {
            let name = format!("detector.{label}");
            let sub = r.subsection(&detector, label, &name);
            let model = r.detector(&sub, &name, default_port.detector.clone());
            let channel = match r.integer(&sub, &name, "channel") {
                Some(c) if (0..=255).contains(&c) => c as u16,
                Some(c) => {
                    r.problem(format!("{name}.channel: {c} outside 0..=255"));
                    default_port.channel
                }
                None => default_port.channel,
            };
            let mut keys = DETECTOR_KEYS.to_vec();
            keys.push("channel");
            r.finish_section(&sub, &name, &keys);
            ports.push(Port {
                channel,
                detector: model,
            });
        }
        let mut ports = ports.into_iter();
        let mut next = || ports.next().expect("four ports");
        let channels = ChannelPlan {
            xx_plus: next(),
            xx_minus: next(),
            x_plus: next(),
            x_minus: next(),
        };

        let m = r.section(&root, "measurement");
        let basis = |r: &mut Reader, key: &str| match r.string(&m, "measurement", key) {
            Some(s) => BasisLabel::from_str(&s)
                .map_err(|e| r.problem(format!("measurement.{key}: {e}")))
                .ok(),
            None => {
                r.problem(format!("measurement.{key}: required"));
                None
            }
        };
        let xx_basis = basis(&mut r, "xx_basis");
        let x_basis = basis(&mut r, "x_basis");
        let duration_ps = match r.real(&m, "measurement", "duration_s") {
            Some(s) if s.is_finite() && s >= 0.0 && s * 1e12 < u64::MAX as f64 => {
                Some((s * 1e12).round() as u64)
            }
            Some(s) => {
                r.problem(format!("measurement.duration_s: {s} must be >= 0"));
                None
            }
            None => {
                r.problem("measurement.duration_s: required".into());
                None
            }
        };
        let seed = r.seed(&m, "measurement");
        r.finish_section(&m, "measurement", &["xx_basis", "x_basis", "duration_s", "seed"]);

        let a = r.section(&root, "analysis");
        let ad = AnalysisConfig::default();
        let bin_ps = r.positive_integer(&a, "analysis", "bin_ps").unwrap_or(ad.bin_ps);
        let window_ps = match r.real(&a, "analysis", "window_ns") {
            Some(w) if w > 0.0 && w.is_finite() => (w * 1e3).round() as u64,
            Some(w) => {
                r.problem(format!("analysis.window_ns: {w} must be > 0"));
                ad.window_ps
            }
            None => ad.window_ps,
        };
        r.finish_section(&a, "analysis", &["bin_ps", "window_ns"]);

        let temperature = if root.contains_key("temperature") {
            let t = r.section(&root, "temperature");
            let rows = r.temperature_rows(&t);
            r.finish_section(&t, "temperature", &["rows"]);
            rows.and_then(|rows| match TemperatureModel::new(rows) {
                Ok(model) => Some(model),
                Err(e) => {
                    r.problem(format!("temperature.rows: {e}"));
                    None
                }
            })
        } else {
            None
        };

        let complete = xx_basis.is_some() && x_basis.is_some() && duration_ps.is_some() && seed.is_some();
        let scenario = Scenario {
            source: params,
            channels,
            xx_basis: xx_basis.unwrap_or(BasisLabel::HV),
            x_basis: x_basis.unwrap_or(BasisLabel::HV),
            duration_ps: duration_ps.unwrap_or(0),
            seed: seed.unwrap_or(0),
        };
        if let Err(Error::Config(p)) = scenario.validate() {
            r.problems.extend(p);
        }
        debug_assert!(complete || !r.problems.is_empty());
        r.into_result()?;
        Ok(Self {
            scenario,
            analysis: AnalysisConfig { bin_ps, window_ps },
            temperature,
        })
    }
}

/// Settings of `fss synth`: `[model]` holds the QWP model parameters,
/// `[series]` the sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct FssSynthConfig {
    pub model: QwpModelParams,
    pub points: usize,
    pub noise_sigma_ueV: f64,
    pub seed: u64,
}

impl FssSynthConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let root = parse_table(text)?;
        let mut r = Reader::default();
        r.allow_sections(&root, &["model", "series"]);
        let m = r.section(&root, "model");
        let required = |r: &mut Reader, key: &str| {
            r.real(&m, "model", key).unwrap_or_else(|| {
                r.problem(format!("model.{key}: required"));
                0.0
            })
        };
        let s_ueV = required(&mut r, "s_ueV");
        let theta_rad = required(&mut r, "theta_rad");
        let phi_rad = required(&mut r, "phi_rad");
        let p = r.real(&m, "model", "p").unwrap_or(0.0);
        if p.abs() > 1.0 {
            r.problem(format!("model.p: {p} outside [-1, 1]"));
        }
        let epsilon_ueV = r.real(&m, "model", "epsilon_ueV").unwrap_or(0.0);
        r.finish_section(&m, "model", &["s_ueV", "theta_rad", "phi_rad", "p", "epsilon_ueV"]);

        let s = r.section(&root, "series");
        let points = r.positive_integer(&s, "series", "points").unwrap_or(361) as usize;
        if points < 8 {
            r.problem(format!("series.points: {points} below 8"));
        }
        let noise_sigma_ueV = match r.real(&s, "series", "noise_sigma_ueV") {
            Some(v) if v > 0.0 && v.is_finite() => v,
            Some(v) => {
                r.problem(format!("series.noise_sigma_ueV: {v} must be > 0"));
                1.0
            }
            None => {
                r.problem("series.noise_sigma_ueV: required".into());
                1.0
            }
        };
        let seed = r.seed(&s, "series");
        r.finish_section(&s, "series", &["points", "noise_sigma_ueV", "seed"]);
        r.into_result()?;
        Ok(Self {
            model: QwpModelParams {
                s_ueV,
                theta_rad,
                phi_rad,
                p,
                epsilon_ueV,
            },
            points,
            noise_sigma_ueV,
            seed: seed.expect("checked"),
        })
    }
}

const SOURCE_KEYS: [&str; 7] = [
    "fss_ueV",
    "x_lifetime_ps",
    "xx_lifetime_ps",
    "cycle_rate_hz",
    "reexcitation_rate_hz",
    "background_fraction",
    "noise_mode",
];

const DETECTOR_KEYS: [&str; 5] = [
    "efficiency",
    "jitter_fwhm_ps",
    "dark_rate_hz",
    "dead_time_ps",
    "time_bin_ps",
];

fn read_text(path: &Path) -> Result<String> {
    let bytes = super::read_file(path)?;
    String::from_utf8(bytes).map_err(|e| Error::Config(vec![format!(
        "{}: not UTF-8 (byte {})",
        path.display(),
        e.utf8_error().valid_up_to()
    )]))
}

fn parse_table(text: &str) -> Result<Table> {
    text.parse::<Table>()
        .map_err(|e| Error::Config(vec![e.to_string().trim_end().to_string()]))
}

/// Typed access to a parsed table that records every problem instead of
/// stopping at the first.
#[derive(Default)]
struct Reader {
    problems: Vec<String>,
}

impl Reader {
    fn problem(&mut self, message: String) {
        self.problems.push(message);
    }

    fn into_result(self) -> Result<()> {
        if self.problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(self.problems))
        }
    }

    fn allow_sections(&mut self, root: &Table, allowed: &[&str]) {
        for key in root.keys() {
            if !allowed.contains(&key.as_str()) {
                self.problem(format!("{key}: unknown section or key"));
            }
        }
    }

    fn section(&mut self, root: &Table, name: &str) -> Table {
        match root.get(name) {
            None => Table::new(),
            Some(Value::Table(t)) => t.clone(),
            Some(_) => {
                self.problem(format!("{name}: expected a [{name}] section"));
                Table::new()
            }
        }
    }

    fn subsection(&mut self, parent: &Table, key: &str, name: &str) -> Table {
        match parent.get(key) {
            None => Table::new(),
            Some(Value::Table(t)) => t.clone(),
            Some(_) => {
                self.problem(format!("{name}: expected a [{name}] section"));
                Table::new()
            }
        }
    }

    fn finish_section(&mut self, table: &Table, name: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.problem(format!("{name}.{key}: unknown key"));
            }
        }
    }

    fn real(&mut self, table: &Table, section: &str, key: &str) -> Option<f64> {
        match table.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.problem(format!(
                    "{section}.{key}: expected a number, found {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn integer(&mut self, table: &Table, section: &str, key: &str) -> Option<i64> {
        match table.get(key)? {
            Value::Integer(i) => Some(*i),
            other => {
                self.problem(format!(
                    "{section}.{key}: expected an integer, found {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn positive_integer(&mut self, table: &Table, section: &str, key: &str) -> Option<u64> {
        match self.integer(table, section, key)? {
            i if i > 0 => Some(i as u64),
            i => {
                self.problem(format!("{section}.{key}: {i} must be > 0"));
                None
            }
        }
    }

    fn string(&mut self, table: &Table, section: &str, key: &str) -> Option<String> {
        match table.get(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.problem(format!(
                    "{section}.{key}: expected a quoted string, found {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn seed(&mut self, table: &Table, section: &str) -> Option<u64> {
        match self.integer(table, section, "seed") {
            Some(s) if s >= 0 => Some(s as u64),
            Some(s) => {
                self.problem(format!("{section}.seed: {s} must be >= 0"));
                None
            }
            None if table.contains_key("seed") => None,
            None => {
                self.problem(format!("{section}.seed: required"));
                None
            }
        }
    }

    fn detector(&mut self, table: &Table, section: &str, base: DetectorModel) -> DetectorModel {
        DetectorModel {
            efficiency: self.real(table, section, "efficiency").unwrap_or(base.efficiency),
            jitter_fwhm_ps: self
                .real(table, section, "jitter_fwhm_ps")
                .unwrap_or(base.jitter_fwhm_ps),
            dark_rate_hz: self.real(table, section, "dark_rate_hz").unwrap_or(base.dark_rate_hz),
            dead_time_ps: self.real(table, section, "dead_time_ps").unwrap_or(base.dead_time_ps),
            time_bin_ps: self.real(table, section, "time_bin_ps").unwrap_or(base.time_bin_ps),
        }
    }

    fn temperature_rows(&mut self, table: &Table) -> Option<Vec<TemperatureRow>> {
        let Some(value) = table.get("rows") else {
            self.problem("temperature.rows: required".into());
            return None;
        };
        let Value::Array(rows) = value else {
            self.problem("temperature.rows: expected an array of [T_K, x_lifetime_ps, background_fraction]".into());
            return None;
        };
        let mut out = Vec::new();
        let mut ok = true;
        for (i, row) in rows.iter().enumerate() {
            let nums: Option<Vec<f64>> = match row {
                Value::Array(cells) if cells.len() == 3 => cells
                    .iter()
                    .map(|c| match c {
                        Value::Float(f) => Some(*f),
                        Value::Integer(n) => Some(*n as f64),
                        _ => None,
                    })
                    .collect(),
                _ => None,
            };
            match nums {
                Some(v) => out.push(TemperatureRow {
                    temperature_k: v[0],
                    x_lifetime_ps: v[1],
                    background_fraction: v[2],
                }),
                None => {
                    ok = false;
                    self.problem(format!("temperature.rows[{i}]: expected three numbers"));
                }
            }
        }
        ok.then_some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
# 44 K operating point
[source]
fss_ueV = 17.7
x_lifetime_ps = 1000
background_fraction = 0.1
noise_mode = "classical"

[detector]
efficiency = 0.4
time_bin_ps = 32

[detector.x_minus]
channel = 7
jitter_fwhm_ps = 50

[measurement]
xx_basis = "DA"
x_basis = "ELD_ERA"
duration_s = 0.5
seed = 42

[analysis]
bin_ps = 16
window_ns = 5

[temperature]
rows = [[44, 1000, 0.1], [99, 400.0, 0.3]]
"#;

    #[test]
    fn parses_full_config() {
        let c = ScenarioConfig::parse(FULL).unwrap();
        let s = &c.scenario;
        assert_eq!(s.source.fss_ueV, 17.7);
        assert_eq!(s.source.noise_mode, NoiseMode::Classical);
        assert_eq!(s.xx_basis, BasisLabel::DA);
        assert_eq!(s.x_basis, BasisLabel::EldEra);
        assert_eq!(s.duration_ps, 500_000_000_000);
        assert_eq!(s.seed, 42);
        assert_eq!(s.channels.x_minus.channel, 7);
        assert_eq!(s.channels.x_minus.detector.jitter_fwhm_ps, 50.0);
        assert_eq!(s.channels.x_minus.detector.efficiency, 0.4);
        assert_eq!(s.channels.xx_plus.channel, 0);
        assert_eq!(c.analysis, AnalysisConfig { bin_ps: 16, window_ps: 5000 });
        assert_eq!(c.temperature.unwrap().rows().len(), 2);
    }

    #[test]
    fn lists_every_problem() {
        let text = r#"
[source]
fss_ueV = -1
bogus = 3
[detector.xx_plus]
efficiency = 2
[measurement]
xx_basis = "QQ"
duration_s = 1
"#;
        let Err(Error::Config(problems)) = ScenarioConfig::parse(text) else {
            panic!("expected config error");
        };
        let joined = problems.join("\n");
        for needle in ["source.bogus", "source: fss_ueV", "detector.xx_plus: efficiency", "measurement.xx_basis", "measurement.x_basis", "measurement.seed"] {
            assert!(joined.contains(needle), "{needle} missing from {joined}");
        }
    }

    #[test]
    fn duplicate_channels_rejected() {
        let text = r#"
[detector.x_plus]
channel = 0
[measurement]
xx_basis = "HV"
x_basis = "HV"
duration_s = 0
seed = 1
"#;
        assert!(matches!(ScenarioConfig::parse(text), Err(Error::Config(_))));
    }

    #[test]
    fn fss_synth_config() {
        let c = FssSynthConfig::parse(
            "[model]\ns_ueV = 17.7\ntheta_rad = 0.4\nphi_rad = 0.7\n[series]\nnoise_sigma_ueV = 0.3\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(c.points, 361);
        assert!(FssSynthConfig::parse("[model]\ns_ueV = 1\n").is_err());
    }
}
