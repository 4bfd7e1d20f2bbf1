//! The `fbsim` command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::engine::{run, write_trace_csv};
use crate::error::{ConfigError, ParseError, ScenarioError};
use crate::fluid::{
    alpha_h_for_burst, alpha_l_for_burst, alpha_l_for_zero_transient, analyze, burst_absorption_curve,
    estimate_t1, multi_priority_alpha_h, omega_vector, parse_rational, scenario_fluid, steady_state, to_f64,
    write_curve_csv, CurveConfig, Extended, IntegrationOptions,
};
use crate::metrics::{compute, write_metrics_csv, RunMetrics};
use crate::policy::{FbaPeriod, PolicyKind};
use crate::workload::{load_scenario, preset, serialize_scenario, sweep, ScenarioConfig, SweepAxis, PRESETS};

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fbsim",
    version,
    about = "Shared-buffer switch simulator and fluid analyzer"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print progress to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one scenario.
    Run(RunArgs),
    /// Simulate one scenario per value of an axis.
    Sweep(SweepArgs),
    /// Steady state, transient case and burst tolerance from the fluid model.
    Analyze(AnalyzeArgs),
    /// α bounds for absorbing a burst of rate r and duration t.
    ConfigureAlpha(AlphaArgs),
    /// List built-in scenarios.
    PresetList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
struct ScenarioSource {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Built-in scenario name (see `preset-list`).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct Overrides {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Switch the policy to FBA with this controller period; 0 recomputes
    /// α before every admission.
    #[arg(long)]
    fba_period: Option<f64>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[command(flatten)]
    overrides: Overrides,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: ScenarioSource,
    #[command(flatten)]
    overrides: Overrides,
    /// load, burst_size, n_low_queues or r.
    #[arg(long)]
    axis: SweepAxis,
    /// Comma-separated axis values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: ScenarioSource,
    /// Emit the burst-absorption table instead of analysing a scenario.
    #[arg(long)]
    curve: bool,
    #[arg(long, default_value = "1/2")]
    alpha_low: String,
    #[arg(long, default_value = "20")]
    alpha_high: String,
    /// Buffer for the curve, in packets.
    #[arg(long)]
    buffer: Option<String>,
    /// Comma-separated burst rates for the curve.
    #[arg(long, value_delimiter = ',')]
    rates: Vec<String>,
    /// Comma-separated pre-occupied queue counts for the curve.
    #[arg(long, value_delimiter = ',')]
    counts: Vec<usize>,
    /// Integrator step; the integrator runs only when this is given.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Also write the result into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AlphaArgs {
    /// Buffer in packets.
    #[arg(long)]
    buffer: String,
    /// Burst rate, normalized to the port rate.
    #[arg(long)]
    rate: String,
    /// Burst duration.
    #[arg(long)]
    duration: String,
    /// Number of congested low-priority ports.
    #[arg(long, default_value_t = 1)]
    num: u32,
    /// Low-priority α to size the high-priority α against.
    #[arg(long)]
    alpha_low: Option<String>,
    /// α_max of every lower priority, comma-separated.
    #[arg(long, value_delimiter = ',')]
    lower_alphas: Vec<String>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Parse(p) => p.into(),
            ScenarioError::Config(c) => c.into(),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::new(EXIT_PARSE, format!("parse error: {e}"))
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_VALIDATION, format!("invalid scenario: {e}"))
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(1, format!("io: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(1, format!("csv: {e}"))
    }
}

fn rational(name: &str, text: &str) -> Result<BigRational, Failure> {
    parse_rational(text).map_err(|m| Failure::new(EXIT_PARSE, format!("--{name}: {m}")))
}

fn load(src: &ScenarioSource, ov: Option<&Overrides>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match (&src.scenario, &src.preset) {
        (Some(path), None) => load_scenario(path)?,
        (None, Some(name)) => preset(name)?,
        _ => return Err(Failure::new(EXIT_PARSE, "give --scenario PATH or --preset NAME")),
    };
    if let Some(ov) = ov {
        if let Some(seed) = ov.seed {
            cfg.seed = seed;
        }
        if let Some(p) = ov.fba_period {
            cfg.policy = PolicyKind::Fba(if p == 0.0 {
                FbaPeriod::PerEvent
            } else {
                FbaPeriod::Every(p)
            });
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(1, e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Run one scenario and write `scenario.lock`, `trace.csv` and
/// `metrics.json` (plus `metrics.csv` with `--format csv`) into `dir`.
fn run_into(cfg: &ScenarioConfig, dir: &Path, format: Format) -> Result<RunMetrics, Failure> {
    fs::create_dir_all(dir)?;
    let trace = run(cfg)?;
    let metrics = compute(&trace, cfg);
    fs::write(dir.join("scenario.lock"), serialize_scenario(cfg))?;
    write_trace_csv(
        &trace,
        io::BufWriter::new(fs::File::create(dir.join("trace.csv"))?),
    )?;
    write_json(&dir.join("metrics.json"), &metrics)?;
    if format == Format::Csv {
        write_metrics_csv(&metrics, fs::File::create(dir.join("metrics.csv"))?)?;
    }
    Ok(metrics)
}

fn cmd_run(a: &RunArgs, verbose: u8) -> Result<(), Failure> {
    let cfg = load(&a.source, Some(&a.overrides))?;
    if verbose > 0 {
        eprintln!("running {} ({}) into {}", cfg.name, cfg.policy, a.out.display());
    }
    let m = run_into(&cfg, &a.out, a.format)?;
    let stdout = io::stdout();
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(stdout.lock(), &m).map_err(|e| Failure::new(1, e.to_string()))?;
            println!();
        }
        Format::Csv => write_metrics_csv(&m, stdout.lock())?,
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, verbose: u8) -> Result<(), Failure> {
    let base = load(&a.source, Some(&a.overrides))?;
    let configs =
        sweep(&base, a.axis, &a.values).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    fs::create_dir_all(&a.out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.parallel.max(1))
        .build()
        .map_err(|e| Failure::new(1, e.to_string()))?;
    let results: Vec<Result<RunMetrics, Failure>> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| {
                if verbose > 0 {
                    eprintln!("{} = {}", a.axis, a.values[i]);
                }
                run_into(cfg, &a.out.join(format!("run-{i:03}")), a.format)
            })
            .collect()
    });
    let mut w = csv::Writer::from_writer(fs::File::create(a.out.join("index.csv"))?);
    w.write_record([
        "index",
        "axis",
        "value",
        "dir",
        "drops",
        "first_drop_time",
        "burst_admitted_fraction",
        "occupancy_mean",
        "occupancy_p99",
    ])?;
    for (i, res) in results.into_iter().enumerate() {
        let m = res?;
        let drops: u64 = m.queues.iter().map(|q| q.dropped).sum();
        w.write_record([
            i.to_string(),
            a.axis.to_string(),
            a.values[i].to_string(),
            format!("run-{i:03}"),
            drops.to_string(),
            if m.first_drop_time.is_finite() {
                m.first_drop_time.to_string()
            } else {
                "inf".into()
            },
            m.burst_admitted_fraction.to_string(),
            m.occupancy_mean.to_string(),
            m.occupancy_p99.to_string(),
        ])?;
    }
    w.flush()?;
    println!("{}", a.out.join("index.csv").display());
    Ok(())
}

fn exact(x: &BigRational) -> serde_json::Value {
    json!({ "exact": x.to_string(), "value": to_f64(x) })
}

fn extended(x: &Extended) -> serde_json::Value {
    match x {
        Extended::Finite(v) => exact(v),
        Extended::Infinite => json!({ "exact": "inf", "value": "inf" }),
    }
}

/// Flatten a JSON object into `key,value` rows.
fn flatten(prefix: &str, v: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match v {
        serde_json::Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), x, out);
            }
        }
        serde_json::Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn emit(value: &serde_json::Value, format: Format, out_file: Option<PathBuf>) -> Result<(), Failure> {
    let text = match format {
        Format::Json => {
            serde_json::to_string_pretty(value).map_err(|e| Failure::new(1, e.to_string()))? + "\n"
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", value, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["key", "value"])?;
            for (k, v) in rows {
                w.write_record([k, v])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure::new(1, e.to_string()))?)
                .expect("csv output is utf-8")
        }
    };
    if let Some(path) = out_file {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, &text)?;
    }
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    if a.curve {
        let mut cfg = CurveConfig {
            alpha_low: rational("alpha-low", &a.alpha_low)?,
            alpha_high: rational("alpha-high", &a.alpha_high)?,
            ..CurveConfig::default()
        };
        if let Some(b) = &a.buffer {
            cfg.buffer = rational("buffer", b)?;
        }
        if !a.rates.is_empty() {
            cfg.rates = a
                .rates
                .iter()
                .map(|r| rational("rates", r))
                .collect::<Result<_, _>>()?;
        }
        if !a.counts.is_empty() {
            cfg.counts = a.counts.clone();
        }
        let rows = burst_absorption_curve(&cfg).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
        let mut buf = Vec::new();
        write_curve_csv(&rows, &mut buf)?;
        if let Some(dir) = &a.out {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("curve.csv"), &buf)?;
        }
        io::stdout().write_all(&buf)?;
        return Ok(());
    }

    let cfg = load(&a.source, None)?;
    let fluid = scenario_fluid(&cfg).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
    let ss = steady_state(&omega_vector(fluid.policy, &fluid.old), &fluid.buffer);
    let thresholds: serde_json::Map<String, serde_json::Value> = ss
        .thresholds
        .iter()
        .map(|(id, t)| (id.to_string(), exact(t)))
        .collect();
    let mut report = json!({
        "scenario": cfg.name,
        "policy": cfg.policy.to_string(),
        "steady": {
            "occupancy": exact(&ss.occupancy),
            "remaining": exact(&ss.remaining),
            "thresholds": thresholds,
        },
    });
    if let Some(ts) = fluid.transient() {
        let res = analyze(&ts).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
        let per_queue: serde_json::Map<String, serde_json::Value> = res
            .per_queue_t1
            .iter()
            .map(|(id, t)| (id.to_string(), extended(t)))
            .collect();
        let after: serde_json::Map<String, serde_json::Value> = res
            .steady
            .thresholds
            .iter()
            .map(|(id, t)| (id.to_string(), exact(t)))
            .collect();
        let mut transient = json!({
            "rate": exact(&ts.rate),
            "case": res.case.to_string(),
            "feasible": res.feasible,
            "t1": res.t1.as_ref().map(extended),
            "burst_tolerance": res.burst_tolerance.as_ref().map(extended),
            "per_queue_t1": per_queue,
            "steady_after": {
                "occupancy": exact(&res.steady.occupancy),
                "remaining": exact(&res.steady.remaining),
                "thresholds": after,
            },
        });
        if let Some(step) = a.step {
            let opts = IntegrationOptions {
                step: Some(step),
                ..IntegrationOptions::default()
            };
            let traj = estimate_t1(&ts, &opts).map_err(|e| Failure::new(EXIT_VALIDATION, e.to_string()))?;
            transient["integrator"] = json!({
                "t1": traj.first_crossing.map_or(json!("inf"), |t| json!(t)),
                "step": traj.step,
                "warnings": traj.warnings,
            });
        }
        report["transient"] = transient;
    }
    let file = a
        .out
        .as_ref()
        .map(|d| d.join(format!("analysis.{}", ext(a.format))));
    emit(&report, a.format, file)
}

fn cmd_configure_alpha(a: &AlphaArgs) -> Result<(), Failure> {
    let b = rational("buffer", &a.buffer)?;
    let r = rational("rate", &a.rate)?;
    let t = rational("duration", &a.duration)?;
    let invalid = |e: crate::error::FluidError| Failure::new(EXIT_VALIDATION, e.to_string());
    let zero = alpha_l_for_zero_transient(&r, a.num).map_err(invalid)?;
    let burst = alpha_l_for_burst(&b, &r, &t).map_err(invalid)?;
    let mut report = json!({
        "buffer": exact(&b),
        "rate": exact(&r),
        "duration": exact(&t),
        "num": a.num,
        "alpha_low_zero_transient": zero.to_string(),
        "alpha_low_burst": burst.to_string(),
    });
    if !a.lower_alphas.is_empty() {
        let lower = a
            .lower_alphas
            .iter()
            .map(|x| rational("lower-alphas", x))
            .collect::<Result<Vec<_>, _>>()?;
        let h = multi_priority_alpha_h(&lower, &b, &r, &t).map_err(invalid)?;
        report["alpha_high"] = json!(h.to_string());
    } else if let Some(al) = &a.alpha_low {
        let al = rational("alpha-low", al)?;
        let h = alpha_h_for_burst(&b, &r, &t, &al).map_err(invalid)?;
        report["alpha_low"] = exact(&al);
        report["alpha_high"] = json!(h.to_string());
    }
    emit(&report, a.format, None)
}

fn cmd_preset_list() -> Result<(), Failure> {
    for (name, about) in PRESETS {
        println!("{name:<12} {about}");
    }
    Ok(())
}

/// Parse arguments, dispatch, and map failures to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(a) => cmd_run(a, cli.verbose),
        Command::Sweep(a) => cmd_sweep(a, cli.verbose),
        Command::Analyze(a) => cmd_analyze(a),
        Command::ConfigureAlpha(a) => cmd_configure_alpha(a),
        Command::PresetList => cmd_preset_list(),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fbsim: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
