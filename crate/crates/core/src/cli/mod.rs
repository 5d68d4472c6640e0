//! Workflows behind the `qled` binary.
//!
//! Exit codes: 0 success, 1 fidelity peak not at least 4σ above 0.5,
//! 2 configuration or usage error, 3 I/O or file-format error,
//! 4 analysis degenerate (fit failure, undefined estimator).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::correlator::{
    cross_correlation_segmented, fidelity_curve, fidelity_inputs, fit_gaussian_decay,
    normalize_g2, peak_fidelity, ChannelIds, CorrelationCurve, FidelityMode, PeakFidelity,
};
use crate::error::{Error, Result};
use crate::fss::{fit_fss, synth_qwp_series, FssFitOptions, FssOutcome};
use crate::io::{
    curve_to_csv, fss_fit_to_csv, qwp_series_to_csv, read_qtt_file, read_qwp_series_csv,
    tempsweep_to_csv, write_atomic, write_qtt_file, AnalysisConfig, FssSynthConfig, Manifest,
    ScenarioConfig, TempSweepRow,
};
use crate::polarization::BasisLabel;
use crate::sim::{basis_seed, simulate_basis_set, simulate_stream, ChannelPlan, Scenario, TimeTagStream};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_ABOVE_CLASSICAL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_DEGENERATE: u8 = 4;

/// Significance above 0.5 required for a successful `fidelity` run.
pub const CLASSICAL_SIGNIFICANCE: f64 = 4.0;

/// Extension of basis-run files written by `simulate --basis-set`.
pub const RUN_EXTENSION: &str = "qtt";

#[derive(Debug, Parser)]
#[command(name = "qled", version, about = "Entangled-LED cascade simulation and correlation analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a time-tag file (or the five-basis run set) from a config.
    Simulate(SimulateArgs),
    /// Normalised second-order correlation between two channels.
    G2(CorrelateArgs),
    /// Raw coincidence histogram between two channels.
    Xcorr(CorrelateArgs),
    /// Bell-state fidelity from a directory of five basis runs.
    Fidelity(FidelityArgs),
    /// Peak fidelity and decay width over a list of temperatures.
    Tempsweep(TempSweepArgs),
    /// Fine-structure splitting from quarter-wave-plate series.
    Fss {
        #[command(subcommand)]
        action: FssCommand,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output file, or output directory with `--basis-set`.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `measurement.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Interpolate source parameters from the `[temperature]` table.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Write the five co-basis runs `hv`, `da`, `lr`, `elderra`, `elaerd`.
    #[arg(long)]
    pub basis_set: bool,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub a: u16,
    #[arg(long)]
    pub b: u16,
    #[arg(long, default_value_t = 32)]
    pub bin_ps: u64,
    #[arg(long, default_value_t = 50.0)]
    pub window_ns: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FidelityArgs {
    #[arg(long)]
    pub in_dir: PathBuf,
    #[arg(long = "fss-ueV")]
    pub fss_ueV: f64,
    /// `evolving` or `chi=<radians>`.
    #[arg(long, default_value = "evolving", value_parser = parse_mode)]
    pub mode: FidelityMode,
    #[arg(long, default_value_t = 32)]
    pub bin_ps: u64,
    #[arg(long, default_value_t = 50.0)]
    pub window_ns: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TempSweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated temperatures in kelvin.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub temps: Vec<f64>,
    /// Overrides `measurement.seed`; temperature `i` uses `seed + i`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum FssCommand {
    /// Fit the QWP model to a `chi_rad,delta_e_ueV,sigma_ueV` series.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fit the state polarization instead of fixing it at zero.
        #[arg(long)]
        fit_p: bool,
    },
    /// Generate a noisy series from `[model]` and `[series]` settings.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_mode(s: &str) -> std::result::Result<FidelityMode, String> {
    if s == "evolving" {
        return Ok(FidelityMode::Evolving);
    }
    s.strip_prefix("chi=")
        .and_then(|v| v.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .map(FidelityMode::Static)
        .ok_or_else(|| format!("expected `evolving` or `chi=<radians>`, found {s:?}"))
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::OutOfRange { .. }
        | Error::TemperatureOutOfRange { .. }
        | Error::UnknownChannel(_) => EXIT_CONFIG,
        Error::Io { .. }
        | Error::Format { .. }
        | Error::Csv(_)
        | Error::MissingInput(_)
        | Error::UnsortedStream { .. } => EXIT_IO,
        Error::Degenerate(_)
        | Error::FitFailed { .. }
        | Error::Ambiguous(_)
        | Error::GridMismatch(_)
        | Error::InvalidState(_)
        | Error::Unphysical(_) => EXIT_DEGENERATE,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Messages go to stdout, errors to stderr.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Simulate(a) => simulate(&a).map(|_| EXIT_OK),
        Command::G2(a) => correlate(&a, true).map(|_| EXIT_OK),
        Command::Xcorr(a) => correlate(&a, false).map(|_| EXIT_OK),
        Command::Fidelity(a) => fidelity(&a),
        Command::Tempsweep(a) => tempsweep(&a).map(|_| EXIT_OK),
        Command::Fss { action } => fss(&action).map(|_| EXIT_OK),
    }
}

fn window_ps(window_ns: f64) -> Result<u64> {
    if !(window_ns.is_finite() && window_ns >= 0.0) {
        return Err(Error::range("window_ns", format!("{window_ns} must be >= 0")));
    }
    Ok((window_ns * 1e3).round() as u64)
}

/// `<path>.manifest`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest");
    path.with_file_name(name)
}

/// Scenario of `config` with the seed override and temperature
/// interpolation applied.
pub fn effective_scenario(
    config: &ScenarioConfig,
    seed: Option<u64>,
    temperature_k: Option<f64>,
) -> Result<Scenario> {
    let mut scenario = config.scenario.clone();
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if let Some(t) = temperature_k {
        let table = config.temperature.as_ref().ok_or_else(|| {
            Error::Config(vec!["temperature: a [temperature] table is required".into()])
        })?;
        scenario.source = table.params_at_temperature(t)?.apply(&scenario.source);
    }
    Ok(scenario)
}

/// Effective parameters of one run as key/value pairs.
pub fn scenario_manifest(scenario: &Scenario, temperature_k: Option<f64>, records: usize) -> Manifest {
    let mut m = Manifest::new();
    m.push("qled.version", env!("CARGO_PKG_VERSION"));
    if let Some(t) = temperature_k {
        m.push("temperature_K", t);
    }
    let s = &scenario.source;
    m.push("source.fss_ueV", s.fss_ueV);
    m.push("source.x_lifetime_ps", s.x_lifetime_ps);
    m.push("source.xx_lifetime_ps", s.xx_lifetime_ps);
    m.push("source.cycle_rate_hz", s.cycle_rate_hz);
    m.push("source.reexcitation_rate_hz", s.reexcitation_rate_hz);
    m.push("source.background_fraction", s.background_fraction);
    m.push("source.noise_mode", s.noise_mode);
    for (label, port) in scenario.channels.ports() {
        let d = &port.detector;
        m.push(format!("detector.{label}.channel"), port.channel);
        m.push(format!("detector.{label}.efficiency"), d.efficiency);
        m.push(format!("detector.{label}.jitter_fwhm_ps"), d.jitter_fwhm_ps);
        m.push(format!("detector.{label}.dark_rate_hz"), d.dark_rate_hz);
        m.push(format!("detector.{label}.dead_time_ps"), d.dead_time_ps);
        m.push(format!("detector.{label}.time_bin_ps"), d.time_bin_ps);
    }
    m.push("measurement.xx_basis", scenario.xx_basis);
    m.push("measurement.x_basis", scenario.x_basis);
    m.push("measurement.duration_ps", scenario.duration_ps);
    m.push("measurement.seed", scenario.seed);
    m.push("records", records);
    m
}

/// Channel assignment recorded in a run manifest.
pub fn channel_ids_from_manifest(m: &Manifest) -> Result<ChannelIds> {
    let get = |label: &str| -> Result<u16> {
        let key = format!("detector.{label}.channel");
        let raw = m
            .get(&key)
            .ok_or_else(|| Error::Config(vec![format!("manifest lacks {key}")]))?;
        raw.parse()
            .map_err(|_| Error::Config(vec![format!("manifest {key}: {raw:?} is not a channel")]))
    };
    let [a, b, c, d] = ChannelPlan::LABELS;
    Ok(ChannelIds {
        xx_plus: get(a)?,
        xx_minus: get(b)?,
        x_plus: get(c)?,
        x_minus: get(d)?,
    })
}

fn write_run(path: &Path, stream: &TimeTagStream, scenario: &Scenario, temperature_k: Option<f64>) -> Result<()> {
    write_qtt_file(path, stream)?;
    scenario_manifest(scenario, temperature_k, stream.len()).write(&manifest_path(path))
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let config = ScenarioConfig::load(&args.config)?;
    let scenario = effective_scenario(&config, args.seed, args.temperature)?;
    if args.basis_set {
        std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
        for (basis, stream) in simulate_basis_set(&scenario, scenario.seed)? {
            let run = Scenario {
                seed: basis_seed(scenario.seed, basis.index()),
                ..scenario.with_basis(basis)
            };
            let path = args.out.join(format!("{}.{RUN_EXTENSION}", basis.file_stem()));
            write_run(&path, &stream, &run, args.temperature)?;
            println!("{}: {} records", path.display(), stream.len());
        }
    } else {
        let stream = simulate_stream(&scenario)?;
        write_run(&args.out, &stream, &scenario, args.temperature)?;
        println!("{}: {} records", args.out.display(), stream.len());
    }
    Ok(())
}

pub fn correlate(args: &CorrelateArgs, normalize: bool) -> Result<()> {
    let stream = read_qtt_file(&args.input)?;
    let window = window_ps(args.window_ns)?;
    for ch in [args.a, args.b] {
        if !stream.channel_map().contains_key(&ch) {
            return Err(Error::UnknownChannel(ch));
        }
    }
    let value_column = "value";
    let bytes = if stream.is_empty() {
        format!("delay_ps,{value_column},sigma\n").into_bytes()
    } else {
        let segments = rayon::current_num_threads();
        let hist = cross_correlation_segmented(&stream, args.a, args.b, args.bin_ps, window, segments)?;
        let curve = if normalize {
            normalize_g2(&hist)?
        } else {
            CorrelationCurve::new(
                hist.delays_ps(),
                hist.counts.iter().map(|&c| Some(c as f64)).collect(),
                hist.counts.iter().map(|&c| (c as f64).sqrt()).collect(),
            )?
        };
        curve_to_csv(&curve, value_column)?
    };
    write_atomic(&args.out, &bytes)
}

/// Locates the five basis runs in `dir` (`<stem>.qtt` or bare `<stem>`).
pub fn find_basis_runs(dir: &Path) -> Result<Vec<(BasisLabel, PathBuf)>> {
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for basis in BasisLabel::ALL {
        let stem = basis.file_stem();
        let candidates = [dir.join(format!("{stem}.{RUN_EXTENSION}")), dir.join(stem)];
        match candidates.into_iter().find(|p| p.is_file()) {
            Some(p) => found.push((basis, p)),
            None => missing.push(stem),
        }
    }
    if missing.is_empty() {
        return Ok(found);
    }
    let mut present: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .collect();
    present.sort();
    let expected: Vec<&str> = BasisLabel::ALL.iter().map(|b| b.file_stem()).collect();
    Err(Error::MissingInput(format!(
        "{}: missing basis runs {}; expected {}; found [{}]",
        dir.display(),
        missing.join(", "),
        expected.join(", "),
        present.join(", ")
    )))
}

/// Fidelity curve and its peak from five co-basis runs.
pub fn analyze_basis_set(
    runs: &[(BasisLabel, &TimeTagStream)],
    ids: ChannelIds,
    fss_ueV: f64,
    mode: FidelityMode,
    analysis: AnalysisConfig,
) -> Result<(CorrelationCurve, PeakFidelity)> {
    let inputs = fidelity_inputs(runs, ids, fss_ueV, analysis.bin_ps, analysis.window_ps)?;
    let curve = fidelity_curve(&inputs, mode)?;
    let peak = peak_fidelity(&curve)?;
    Ok((curve, peak))
}

pub fn fidelity(args: &FidelityArgs) -> Result<u8> {
    let runs = find_basis_runs(&args.in_dir)?;
    let mut ids: Option<ChannelIds> = None;
    let mut streams = Vec::new();
    for (basis, path) in &runs {
        let manifest = manifest_path(path);
        if manifest.is_file() {
            let these = channel_ids_from_manifest(&Manifest::read(&manifest)?)?;
            if ids.is_some_and(|i| i != these) {
                return Err(Error::Config(vec![format!(
                    "{}: channel plan differs from the other runs",
                    manifest.display()
                )]));
            }
            ids = Some(these);
        }
        streams.push((*basis, read_qtt_file(path)?));
    }
    let refs: Vec<(BasisLabel, &TimeTagStream)> = streams.iter().map(|(b, s)| (*b, s)).collect();
    let analysis = AnalysisConfig {
        bin_ps: args.bin_ps,
        window_ps: window_ps(args.window_ns)?,
    };
    let (curve, peak) = analyze_basis_set(&refs, ids.unwrap_or_default(), args.fss_ueV, args.mode, analysis)?;
    write_atomic(&args.out, &curve_to_csv(&curve, "fidelity")?)?;
    let significance = peak.significance_above_classical();
    println!(
        "peak fidelity {:.4} +/- {:.4} at {} ps ({:.1} sigma above 0.5)",
        peak.value, peak.sigma, peak.delay_ps, significance
    );
    Ok(if significance >= CLASSICAL_SIGNIFICANCE {
        EXIT_OK
    } else {
        EXIT_NOT_ABOVE_CLASSICAL
    })
}

/// One summary row per temperature. Temperature `i` is simulated with seed
/// `seed + i`, so a single-temperature sweep matches
/// `simulate --basis-set --temperature` with the same seed.
pub fn temperature_sweep(config: &ScenarioConfig, seed: u64, temps: &[f64]) -> Result<Vec<TempSweepRow>> {
    if temps.is_empty() {
        return Err(Error::Config(vec!["temps: at least one temperature is required".into()]));
    }
    let ids = config.scenario.channels.ids();
    temps
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let run_seed = seed.wrapping_add(i as u64);
            let scenario = effective_scenario(config, Some(run_seed), Some(t))?;
            let runs = simulate_basis_set(&scenario, run_seed)?;
            let refs: Vec<(BasisLabel, &TimeTagStream)> = runs.iter().map(|(b, s)| (*b, s)).collect();
            let (curve, peak) = analyze_basis_set(
                &refs,
                ids,
                scenario.source.fss_ueV,
                FidelityMode::Evolving,
                config.analysis,
            )?;
            let hwhm_ps = fit_gaussian_decay(&curve, 0.25)
                .ok()
                .filter(|f| !f.degenerate)
                .map(|f| f.hwhm_ps);
            Ok(TempSweepRow {
                temperature_k: t,
                peak_fidelity: peak.value,
                sigma: peak.sigma,
                hwhm_ps,
                x_lifetime_ps: scenario.source.x_lifetime_ps,
            })
        })
        .collect()
}

pub fn tempsweep(args: &TempSweepArgs) -> Result<()> {
    let config = ScenarioConfig::load(&args.config)?;
    let seed = args.seed.unwrap_or(config.scenario.seed);
    let rows = temperature_sweep(&config, seed, &args.temps)?;
    for r in &rows {
        println!(
            "{} K: peak fidelity {:.4} +/- {:.4}, hwhm {}",
            r.temperature_k,
            r.peak_fidelity,
            r.sigma,
            r.hwhm_ps.map_or("n/a".to_string(), |h| format!("{h:.1} ps"))
        );
    }
    write_atomic(&args.out, &tempsweep_to_csv(&rows)?)
}

pub fn fss(command: &FssCommand) -> Result<()> {
    match command {
        FssCommand::Fit { input, out, fit_p } => {
            let bytes = crate::io::read_file(input)?;
            let series = read_qwp_series_csv(&bytes)?;
            let options = FssFitOptions {
                fit_p: *fit_p,
                ..FssFitOptions::default()
            };
            let outcome = fit_fss(&series, &options)?;
            match &outcome {
                FssOutcome::Resolved(f) => println!(
                    "s = {:.4} +/- {:.4} ueV",
                    f.params.s_ueV,
                    f.s_sigma_ueV().unwrap_or(f64::NAN)
                ),
                FssOutcome::Unresolved { upper_bound_ueV, .. } => {
                    println!("FSS unresolved: |s| < {upper_bound_ueV:.4} ueV")
                }
            }
            write_atomic(out, &fss_fit_to_csv(&outcome)?)
        }
        FssCommand::Synth { config, out } => {
            let c = FssSynthConfig::load(config)?;
            let series = synth_qwp_series(&c.model, c.points, c.noise_sigma_ueV, Some(c.seed))?;
            write_atomic(out, &qwp_series_to_csv(&series)?)
        }
    }
}
