//! `dmdp` command line: run, sweep, report, list-envs, adversary-mock.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.

mod report;

use std::io::{BufReader, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::adversary::{serve_mock, MockMode};
use crate::envs::{build_env, EnvOptions, ENV_IDS};
use crate::error::ConfigError;
use crate::harness::artifacts::write_artifacts;
use crate::harness::config::{parse_table, read_config, set_dotted};
use crate::harness::experiment::SUMMARY_COLUMNS;
use crate::harness::{run_experiment, HarnessError, RunConfig};

pub use report::{cmd_report, ReportRow};

pub const SEED_ENV: &str = "ROBUST_SEED";
pub const SWEEP_SUMMARY: &str = "sweep_summary.csv";
pub const SWEEP_POINT: &str = "sweep_point.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(c) => CliError::Config(c),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dmdp", version, about = "Disrupted-MDP robustness experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunOpts {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `harness.out_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated seeds replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    pub seed_override: Option<Vec<u64>>,
    /// Upper bound on parallel seed workers.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its artifacts.
    Run(RunOpts),
    /// Run one experiment per value of a dotted configuration key.
    Sweep {
        #[command(flatten)]
        run: RunOpts,
        /// Dotted key, e.g. `disruptor.0.noise.std`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
    },
    /// Collect a metric from result directories into a plot-ready table.
    Report {
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "mean_return")]
        metric: String,
        /// Long-format CSV destination.
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
    /// List registered environments and their parameters.
    ListEnvs,
    /// Scripted external adversary speaking the line protocol.
    AdversaryMock {
        /// echo, constant, region-high, region-low, malformed, garbage or silent.
        #[arg(long, default_value = "echo")]
        mode: String,
        /// Reply for `constant`, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        value: Option<Vec<f64>>,
        /// Serve TCP on this address instead of stdin/stdout.
        #[arg(long)]
        listen: Option<String>,
    },
}

fn parse_seed_list(text: &str) -> Result<Vec<u64>, ConfigError> {
    text.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|_| ConfigError::new(SEED_ENV, format!("`{s}` is not a seed"))))
        .collect()
}

/// Seed precedence: `--seed-override`, then `ROBUST_SEED`, then the file.
fn apply_overrides(cfg: &mut RunConfig, opts: &RunOpts) -> Result<(), ConfigError> {
    if let Some(seeds) = &opts.seed_override {
        cfg.harness.seeds = seeds.clone();
    } else if let Ok(text) = std::env::var(SEED_ENV) {
        if !text.trim().is_empty() {
            cfg.harness.seeds = parse_seed_list(&text)?;
        }
    }
    if let Some(w) = opts.workers {
        cfg.harness.workers = Some(w);
    }
    cfg.validate()
}

fn out_dir(cfg: &RunConfig, opts: &RunOpts) -> Result<PathBuf, ConfigError> {
    match (&opts.out, &cfg.harness.out_dir) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(d)) => Ok(PathBuf::from(d)),
        (None, None) => Err(ConfigError::new("harness.out_dir", "no output directory (use --out)")),
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

pub fn cmd_run(opts: &RunOpts) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&opts.config)?;
    apply_overrides(&mut cfg, opts)?;
    let dir = out_dir(&cfg, opts)?;
    let result = run_experiment(&cfg)?;
    write_artifacts(&result, &dir)?;
    let a = &result.aggregate;
    let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), fmt);
    println!(
        "seeds={} episodes={} mean_return={} ci95={} min_return={} cvar_return={} nominal_return={} worst_case_return={} total_cost={} fired={} clamps={}",
        result.seeds.len(),
        a.episodes,
        fmt(a.mean_return),
        fmt(a.ci95),
        fmt(a.min_return),
        fmt(a.cvar_return),
        fmt(a.nominal_return),
        opt(a.worst_case_return),
        fmt(a.total_cost),
        a.fired_count,
        a.clamp_count
    );
    Ok(())
}

fn sanitize(value: &str) -> String {
    value.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

pub fn cmd_sweep(opts: &RunOpts, param: &str, values: &[String]) -> Result<(), CliError> {
    let values: Vec<&str> = values.iter().map(|v| v.trim()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(CliError::Usage("--values needs at least one value".into()));
    }
    let text = read_config(&opts.config)?;
    let base = parse_table(&text)?;
    // Resolve the template once so errors in the base file surface first.
    let template = RunConfig::from_value(base.clone(), opts.config.parent())?;
    let root = out_dir(&template, opts)?;
    let mut configs = Vec::with_capacity(values.len());
    for v in &values {
        let mut table = base.clone();
        let parsed = set_dotted(&mut table, param, v)?;
        let mut cfg = RunConfig::from_value(table, opts.config.parent())?;
        apply_overrides(&mut cfg, opts)?;
        configs.push((v.to_string(), parsed, cfg));
    }
    std::fs::create_dir_all(&root).map_err(|e| CliError::Runtime(format!("{}: {e}", root.display())))?;
    let mut summary = format!("param,value,{}\n", SUMMARY_COLUMNS[1..].join(","));
    for (i, (raw, parsed, cfg)) in configs.iter().enumerate() {
        let dir = root.join(format!("{i:02}_{}", sanitize(raw)));
        let result = run_experiment(cfg)?;
        write_artifacts(&result, &dir)?;
        let point = serde_json::json!({ "param": param, "value": raw, "x": parsed.as_float().or(parsed.as_integer().map(|i| i as f64)) });
        std::fs::write(dir.join(SWEEP_POINT), format!("{point}\n"))
            .map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        let row = result.aggregate.csv_row();
        let rest = row.split_once(',').map_or("", |(_, r)| r);
        summary.push_str(&format!("{param},{raw},{rest}\n"));
        println!("{param}={raw}: mean_return={} ci95={}", fmt(result.aggregate.mean_return), fmt(result.aggregate.ci95));
    }
    let path = root.join(SWEEP_SUMMARY);
    std::fs::write(&path, summary).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn cmd_list_envs(out: &mut dyn Write) -> std::io::Result<()> {
    for (id, about) in ENV_IDS {
        writeln!(out, "{id:<16} {about}")?;
        if let Ok(env) = build_env(&EnvOptions::new(id), None) {
            writeln!(out, "{:<16} state {}  action {}  horizon {}", "", env.state_space(), env.action_space(), env.horizon().steps())?;
            for (name, p) in env.params().iter() {
                writeln!(out, "{:<16} param {name} = {} in [{}, {}]", "", p.nominal, p.low, p.high)?;
            }
        }
    }
    Ok(())
}

pub fn cmd_adversary_mock(mode: &str, value: Option<&[f64]>, listen: Option<&str>) -> Result<(), CliError> {
    let mode = MockMode::parse(mode, value).map_err(CliError::Usage)?;
    match listen {
        None => {
            let stdin = std::io::stdin();
            serve_mock(&mode, stdin.lock(), std::io::stdout().lock()).map_err(|e| CliError::Runtime(e.to_string()))
        }
        Some(addr) => {
            let listener = TcpListener::bind(addr).map_err(|e| CliError::Runtime(format!("{addr}: {e}")))?;
            for stream in listener.incoming() {
                let stream = stream.map_err(|e| CliError::Runtime(e.to_string()))?;
                let reader = BufReader::new(stream.try_clone().map_err(|e| CliError::Runtime(e.to_string()))?);
                let _ = serve_mock(&mode, reader, stream);
            }
            Ok(())
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(opts) => cmd_run(&opts),
        Command::Sweep { run, param, values } => cmd_sweep(&run, &param, &values),
        Command::Report { inputs, metric, out } => cmd_report(&inputs, &metric, &out, &mut std::io::stdout()),
        Command::ListEnvs => cmd_list_envs(&mut std::io::stdout()).map_err(|e| CliError::Runtime(e.to_string())),
        Command::AdversaryMock { mode, value, listen } => cmd_adversary_mock(&mode, value.as_deref(), listen.as_deref()),
    }
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) fn display(p: &Path) -> String {
    p.display().to_string()
}
