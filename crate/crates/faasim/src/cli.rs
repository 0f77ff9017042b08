//! The `faasim` command-line interface.
//!
//! Commands: `simulate`, `energy`, `synth`, `integrate`, `stats`. Every
//! file-producing run also writes a [`RunManifest`] next to its outputs with
//! the resolved parameters, input digests, tool version, and runtime, so a
//! result directory is always reproducible from its manifest.
//!
//! Exit codes: 0 success, 1 usage, 2 data validation, 3 I/O.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::energy::{self, effective_profiles, integrate_power, read_power_csv, EnergyError};
use crate::report::{self, ReportError};
use crate::simcore::{self, simulate, KeepAlivePolicy, SimConfig, SimError};
use crate::trace::{self, parse_trace, DurationModel, SynthSpec, TraceError, TraceFormat};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// A CLI failure: a one-line diagnostic plus the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn data(message: impl Into<String>) -> Self {
        CliError { code: EXIT_DATA, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        CliError { code: EXIT_IO, message: message.into() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Io(_) => CliError::io(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io(_) => CliError::io(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<EnergyError> for CliError {
    fn from(e: EnergyError) -> Self {
        match e {
            EnergyError::Io(_) => CliError::io(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io(_) => CliError::io(e.to_string()),
            _ => CliError::data(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    /// `t,function,count,duration_ms` rows.
    Canonical,
    /// Wide per-second request matrix (one column per function).
    Huawei,
}

#[derive(Debug, Parser)]
#[command(
    name = "faasim",
    version,
    about = "Replay serverless invocation traces through worker pools and account excess energy"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a trace and write per-timestep worker metrics.
    Simulate {
        /// Input trace file.
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Canonical)]
        format: FormatArg,
        /// Execution duration per invocation for the huawei format, in ms.
        #[arg(long, default_value_t = 1000)]
        huawei_duration_ms: u64,
        /// Keep-alive policy: `fixed:<seconds>`, `halving:<seconds>`, or none.
        #[arg(long, default_value = "fixed:900")]
        keepalive: KeepAlivePolicy,
        /// Directory for metrics.csv and manifest.json (created if absent).
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Price simulated occupancy under isolation profiles.
    Energy {
        /// metrics.csv produced by `simulate`.
        #[arg(long)]
        metrics: PathBuf,
        /// Optional JSON profile definitions overriding/extending the built-ins.
        #[arg(long)]
        profiles: Option<PathBuf>,
        /// Fleet capacity for reserve accounting; defaults to the observed peak.
        #[arg(long)]
        capacity: Option<u64>,
        /// Profile reductions are reported against.
        #[arg(long, default_value = "uvm")]
        baseline: String,
        /// Also extrapolate per-profile power deltas to this request rate.
        #[arg(long)]
        extrapolate_rps: Option<f64>,
        /// Directory for energy.csv, summary.json, and manifest.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Generate a synthetic diurnal trace.
    Synth {
        #[arg(long, default_value_t = 200)]
        functions: u32,
        #[arg(long, default_value_t = 86_400)]
        horizon_s: u64,
        /// Mean total request rate across all functions.
        #[arg(long, default_value_t = 500.0)]
        base_rps: f64,
        /// Sinusoidal swing of the rate over a 24 h period, 0 to 1.
        #[arg(long, default_value_t = 0.5)]
        diurnal_amplitude: f64,
        /// Expected load spikes per hour.
        #[arg(long, default_value_t = 2.0)]
        spike_rate: f64,
        /// Rate multiplier inside a spike window.
        #[arg(long, default_value_t = 5.0)]
        spike_magnitude: f64,
        /// Duration model: `fixed:<ms>` or `lognormal:<mu>,<sigma>`.
        #[arg(long, default_value = "lognormal:6.2,0.6")]
        duration: DurationArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output trace path; a manifest is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate power-meter samples over a window and print joules.
    Integrate {
        /// CSV of samples with header t_s,power_w.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        t0: f64,
        #[arg(long)]
        t1: f64,
    },
    /// Print summary statistics of a trace.
    Stats {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Canonical)]
        format: FormatArg,
        #[arg(long, default_value_t = 1000)]
        huawei_duration_ms: u64,
    },
}

/// Newtype so clap can parse `fixed:<ms>` / `lognormal:<mu>,<sigma>` flags.
#[derive(Debug, Clone, Copy)]
pub struct DurationArg(pub DurationModel);

impl std::str::FromStr for DurationArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| format!("expected fixed:<ms> or lognormal:<mu>,<sigma>, got {s:?}"))?;
        match kind {
            "fixed" => {
                let ms: u64 = value
                    .parse()
                    .map_err(|_| format!("{value:?} is not a whole number of milliseconds"))?;
                Ok(DurationArg(DurationModel::FixedMs(ms)))
            }
            "lognormal" => {
                let (mu, sigma) = value
                    .split_once(',')
                    .ok_or_else(|| format!("expected lognormal:<mu>,<sigma>, got {s:?}"))?;
                let mu: f64 = mu.parse().map_err(|_| format!("{mu:?} is not a number"))?;
                let sigma: f64 = sigma.parse().map_err(|_| format!("{sigma:?} is not a number"))?;
                Ok(DurationArg(DurationModel::LogNormal { mu, sigma }))
            }
            other => Err(format!("unknown duration model {other:?}")),
        }
    }
}

impl std::fmt::Display for DurationArg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            DurationModel::FixedMs(ms) => write!(f, "fixed:{ms}"),
            DurationModel::LogNormal { mu, sigma } => write!(f, "lognormal:{mu},{sigma}"),
        }
    }
}

/// Everything needed to re-run a command exactly, written alongside outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub results: serde_json::Value,
    pub runtime_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Runs a parsed command; the binary maps errors to exit codes.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { trace, format, huawei_duration_ms, keepalive, out_dir } => {
            cmd_simulate(&trace, format, huawei_duration_ms, keepalive, &out_dir)
        }
        Command::Energy { metrics, profiles, capacity, baseline, extrapolate_rps, out_dir } => {
            cmd_energy(&metrics, profiles.as_deref(), capacity, &baseline, extrapolate_rps, &out_dir)
        }
        Command::Synth {
            functions,
            horizon_s,
            base_rps,
            diurnal_amplitude,
            spike_rate,
            spike_magnitude,
            duration,
            seed,
            out,
        } => {
            let spec = SynthSpec {
                functions,
                horizon_s,
                base_rps,
                diurnal_amplitude,
                spike_rate_per_hour: spike_rate,
                spike_magnitude,
                duration: duration.0,
            };
            cmd_synth(&spec, seed, &out)
        }
        Command::Integrate { samples, t0, t1 } => cmd_integrate(&samples, t0, t1),
        Command::Stats { trace, format, huawei_duration_ms } => {
            cmd_stats(&trace, format, huawei_duration_ms)
        }
    }
}

fn trace_format(format: FormatArg, huawei_duration_ms: u64) -> TraceFormat {
    match format {
        FormatArg::Canonical => TraceFormat::Canonical,
        FormatArg::Huawei => TraceFormat::Huawei { duration_ms: huawei_duration_ms },
    }
}

fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(format!("cannot open {}: {e}", path.display())))
}

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("cannot create {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create directory {}: {e}", dir.display())))
}

fn sha256_of(path: &Path) -> Result<String, CliError> {
    let mut reader = open_input(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader
            .read(&mut buf)
            .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

fn input_digest(path: &Path) -> Result<InputDigest, CliError> {
    Ok(InputDigest { path: path.display().to_string(), sha256: sha256_of(path)? })
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let mut out = create_output(path)?;
    serde_json::to_writer_pretty(&mut out, manifest)
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    writeln!(out).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

fn json_params<const N: usize>(pairs: [(&str, serde_json::Value); N]) -> BTreeMap<String, serde_json::Value> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn cmd_simulate(
    trace_path: &Path,
    format: FormatArg,
    huawei_duration_ms: u64,
    keepalive: KeepAlivePolicy,
    out_dir: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let trace = parse_trace(open_input(trace_path)?, trace_format(format, huawei_duration_ms))?;
    let config = SimConfig::with_keepalive(keepalive);
    let result = simulate(&trace, &config)?;

    ensure_dir(out_dir)?;
    let metrics_path = out_dir.join("metrics.csv");
    simcore::write_metrics_csv(&result, create_output(&metrics_path)?)?;

    let totals = &result.totals;
    let manifest = RunManifest {
        command: "simulate".to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        parameters: json_params([
            ("trace", trace_path.display().to_string().into()),
            ("format", format!("{format:?}").to_lowercase().into()),
            ("huawei_duration_ms", huawei_duration_ms.into()),
            ("keepalive", keepalive.to_string().into()),
            ("out_dir", out_dir.display().to_string().into()),
        ]),
        inputs: vec![input_digest(trace_path)?],
        outputs: vec!["metrics.csv".to_string()],
        results: serde_json::json!({
            "horizon_s": trace.horizon_s,
            "requests": totals.requests,
            "cold_starts": totals.cold_starts,
            "warm_starts": totals.warm_starts,
            "evictions": totals.evictions,
            "idle_worker_seconds": totals.idle_worker_seconds,
            "busy_worker_seconds": totals.busy_worker_seconds,
            "peak_total_workers": totals.peak_total_workers,
        }),
        runtime_seconds: started.elapsed().as_secs_f64(),
    };
    write_manifest(&out_dir.join("manifest.json"), &manifest)
}

fn cmd_energy(
    metrics_path: &Path,
    profiles_path: Option<&Path>,
    capacity: Option<u64>,
    baseline: &str,
    extrapolate_rps: Option<f64>,
    out_dir: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let result = simcore::read_metrics_csv(open_input(metrics_path)?)?;
    let profiles = match profiles_path {
        Some(path) => effective_profiles::<f64, _>(Some(open_input(path)?))?,
        None => effective_profiles::<f64, BufReader<File>>(None)?,
    };
    let fleet_capacity = match capacity {
        Some(c) => c,
        None => result.min_capacity()?,
    };

    let mut series = Vec::with_capacity(profiles.len());
    for profile in &profiles {
        series.push(energy::excess_energy(&result, profile, Some(fleet_capacity))?);
    }

    let wall_time_s = result.series.len() as f64;
    let summary = report::compare(&series, baseline, wall_time_s)?;

    let mut extrapolations = Vec::new();
    if let Some(target_rps) = extrapolate_rps {
        let base_rps = result.totals.requests as f64 / wall_time_s;
        let baseline_power = summary
            .rows
            .iter()
            .find(|r| r.profile == baseline)
            .expect("baseline validated by compare")
            .avg_excess_power_w;
        for row in &summary.rows {
            if row.profile == baseline {
                continue;
            }
            let delta = baseline_power - row.avg_excess_power_w;
            extrapolations.push((
                row.profile.clone(),
                report::extrapolate_power(delta, base_rps, target_rps)?,
            ));
        }
    }

    ensure_dir(out_dir)?;
    let energy_path = out_dir.join("energy.csv");
    report::write_energy_csv(&series, create_output(&energy_path)?)?;
    let summary_path = out_dir.join("summary.json");
    let doc = report::summary_doc(&summary, &extrapolations);
    report::write_summary_json(&doc, create_output(&summary_path)?)?;

    let mut inputs = vec![input_digest(metrics_path)?];
    if let Some(path) = profiles_path {
        inputs.push(input_digest(path)?);
    }
    let manifest = RunManifest {
        command: "energy".to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        parameters: json_params([
            ("metrics", metrics_path.display().to_string().into()),
            (
                "profiles",
                profiles_path.map_or(serde_json::Value::Null, |p| p.display().to_string().into()),
            ),
            ("capacity", fleet_capacity.into()),
            ("baseline", baseline.into()),
            (
                "extrapolate_rps",
                extrapolate_rps.map_or(serde_json::Value::Null, Into::into),
            ),
            ("out_dir", out_dir.display().to_string().into()),
        ]),
        inputs,
        outputs: vec!["energy.csv".to_string(), "summary.json".to_string()],
        results: serde_json::json!({
            "wall_time_s": wall_time_s,
            "totals_j": doc
                .rows
                .iter()
                .map(|r| (r.profile.clone(), r.total_j))
                .collect::<BTreeMap<_, _>>(),
        }),
        runtime_seconds: started.elapsed().as_secs_f64(),
    };
    write_manifest(&out_dir.join("manifest.json"), &manifest)
}

fn cmd_synth(spec: &SynthSpec, seed: u64, out: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let trace = trace::generate_synthetic(spec, seed)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    trace::emit_trace_csv(&trace, create_output(out)?)?;

    let stats = trace.stats();
    let duration = match spec.duration {
        DurationModel::FixedMs(ms) => format!("fixed:{ms}"),
        DurationModel::LogNormal { mu, sigma } => format!("lognormal:{mu},{sigma}"),
    };
    let manifest = RunManifest {
        command: "synth".to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        parameters: json_params([
            ("functions", spec.functions.into()),
            ("horizon_s", spec.horizon_s.into()),
            ("base_rps", spec.base_rps.into()),
            ("diurnal_amplitude", spec.diurnal_amplitude.into()),
            ("spike_rate", spec.spike_rate_per_hour.into()),
            ("spike_magnitude", spec.spike_magnitude.into()),
            ("duration", duration.into()),
            ("seed", seed.into()),
            ("out", out.display().to_string().into()),
        ]),
        inputs: vec![],
        outputs: vec![out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| out.display().to_string())],
        results: serde_json::json!({
            "records": trace.records.len(),
            "total_requests": stats.total_requests,
            "avg_rps": stats.avg_rps,
        }),
        runtime_seconds: started.elapsed().as_secs_f64(),
    };
    write_manifest(&out.with_extension("manifest.json"), &manifest)
}

fn cmd_integrate(samples_path: &Path, t0: f64, t1: f64) -> Result<(), CliError> {
    let samples = read_power_csv::<f64, _>(open_input(samples_path)?)?;
    let joules = integrate_power(&samples, t0, t1)?;
    println!("{} J", format_significant(joules, 6));
    Ok(())
}

fn cmd_stats(trace_path: &Path, format: FormatArg, huawei_duration_ms: u64) -> Result<(), CliError> {
    let trace = parse_trace(open_input(trace_path)?, trace_format(format, huawei_duration_ms))?;
    let stats = trace.stats();
    println!("horizon_s: {}", trace.horizon_s);
    println!("total_requests: {}", stats.total_requests);
    println!("avg_rps: {}", stats.avg_rps);
    println!("function_count: {}", stats.function_count);
    println!("max_per_second_arrivals: {}", stats.max_per_second_arrivals);
    Ok(())
}

/// Formats with `sig` significant digits (fixed notation).
fn format_significant(value: f64, sig: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value:.prec$}", prec = sig - 1);
    }
    let exponent = value.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exponent).max(0) as usize;
    format!("{value:.decimals$}")
}
