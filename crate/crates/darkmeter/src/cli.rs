//! Batch command-line front end.
//!
//! Every command reads its inputs, writes its outputs, and drops a manifest
//! next to the primary output recording the command, arguments, input and
//! output fingerprints, and the seed, so any report can be traced back to
//! exactly what produced it and re-run bit-for-bit.
//!
//! Exit codes: 0 success, 2 input error, 3 convergence or numeric warning
//! (reports are still written in that case).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::bayes::{
    default_f_grid, derive_priors, powerlaw_fit, sample_posterior, sensitivity_sweep,
    summarize_posterior, ChainDiagnostics, McmcConfig, PosteriorSummary, PriorSpec,
    SufficientStats,
};
use crate::budget::{
    dark_hdi_length, flash_corrected, flash_sweep, retina_scaling, FlashModelInput,
    GaussianEstimate,
};
use crate::ea::{attenuation, ea_estimate, solve_ls_weighted, AttenuationSystem, Uncertain,
                WeightMode};
use crate::jzs::{jzs_bf01, TTestInput, TestSide};
use crate::math::fnv1a64;
use crate::protocol::{build_differences, summarize, CountSeries, ShutterProtocol};
use crate::simulate::{simulate_campaign, SimConfig};

pub const SEED_ENV_VAR: &str = "DARKMETER_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Debug)]
pub enum CliError {
    /// Malformed inputs, files, or flags. Exit code 2.
    Input(String),
    /// Numeric or convergence trouble after outputs were written. Exit code 3.
    Numeric(String),
}

impl From<crate::protocol::ProtocolError> for CliError {
    fn from(e: crate::protocol::ProtocolError) -> Self {
        CliError::Input(e.to_string())
    }
}
impl From<crate::simulate::SimError> for CliError {
    fn from(e: crate::simulate::SimError) -> Self {
        CliError::Input(e.to_string())
    }
}
impl From<crate::bayes::BayesError> for CliError {
    fn from(e: crate::bayes::BayesError) -> Self {
        CliError::Input(e.to_string())
    }
}
impl From<crate::ea::EaError> for CliError {
    fn from(e: crate::ea::EaError) -> Self {
        CliError::Input(e.to_string())
    }
}
impl From<crate::budget::BudgetError> for CliError {
    fn from(e: crate::budget::BudgetError) -> Self {
        CliError::Input(e.to_string())
    }
}
impl From<crate::jzs::JzsError> for CliError {
    fn from(e: crate::jzs::JzsError) -> Self {
        match e {
            crate::jzs::JzsError::Quadrature(msg) => CliError::Numeric(msg),
            other => CliError::Input(other.to_string()),
        }
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("I/O error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "darkmeter", version, about = "Shutter-differenced photon-count darkness analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic shuttered campaign and write it as CSV
    Simulate {
        /// JSON simulation config
        #[arg(long)]
        config: PathBuf,
        /// Output count-series CSV
        #[arg(long)]
        out: PathBuf,
        /// Seed override (beats DARKMETER_SEED and the config file)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full Bayesian analysis of a campaign or of summary statistics
    Analyze {
        /// Count-series CSV to ingest
        #[arg(long, conflicts_with = "summary_stats")]
        data: Option<PathBuf>,
        /// Bypass ingestion with `mean,variance,n`
        #[arg(long, allow_hyphen_values = true)]
        summary_stats: Option<String>,
        /// Output report JSON
        #[arg(long)]
        out: PathBuf,
        /// Prior broadening factor
        #[arg(long, default_value_t = 10.0)]
        f: f64,
        /// HDI probability mass
        #[arg(long, default_value_t = 0.95)]
        mass: f64,
        #[arg(long, default_value_t = 4)]
        chains: usize,
        #[arg(long, default_value_t = 1500)]
        warmup: usize,
        /// Kept draws per chain
        #[arg(long, default_value_t = 15000)]
        draws: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Also export the raw draws as CSV `mu,sigma_sq`
        #[arg(long)]
        draws_out: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        block_len: usize,
        #[arg(long, default_value_t = 1)]
        interval_len: u32,
        /// Keep the first interval of each block instead of discarding it
        #[arg(long)]
        keep_first: bool,
    },
    /// Prior-broadening sensitivity sweep with a power-law fit
    Sweep {
        #[arg(long, conflicts_with = "summary_stats")]
        data: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        summary_stats: Option<String>,
        /// Output sweep CSV; the fit lands next to it as `<out>.fit.json`
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated broadening factors (default: built-in grid)
        #[arg(long)]
        f_grid: Option<String>,
        /// Only factors at or above this enter the power-law fit
        #[arg(long, default_value_t = 10.0)]
        fit_threshold: f64,
        #[arg(long, default_value_t = 0.95)]
        mass: f64,
        #[arg(long, default_value_t = 4)]
        chains: usize,
        #[arg(long, default_value_t = 1500)]
        warmup: usize,
        #[arg(long, default_value_t = 15000)]
        draws: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10)]
        block_len: usize,
        #[arg(long, default_value_t = 1)]
        interval_len: u32,
        #[arg(long)]
        keep_first: bool,
    },
    /// Solve a filter-stack calibration table; optionally chain into the
    /// attenuation and darkness estimates
    Ea {
        /// Input CSV `led,f1..fn,log10_rate,log10_sd`
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Rows brighter than this (linear cnt/s) are dropped
        #[arg(long, default_value_t = 1e6)]
        saturation_cutoff: f64,
        /// Weight rows by inverse variance (sensitivity check)
        #[arg(long)]
        weighted: bool,
        /// Closed-chamber rate `mean,sd`; enables the attenuation estimate
        #[arg(long, allow_hyphen_values = true)]
        closed_rate: Option<String>,
        /// Ambient rate `mean,sd`; with --closed-rate, enables the darkness estimate
        #[arg(long, allow_hyphen_values = true)]
        lab_rate: Option<String>,
    },
    /// Cauchy-prior one-sample Bayes factor for the point null
    Jzs {
        /// Summary statistics `mean,variance,n`; the t statistic is recomputed
        #[arg(long, allow_hyphen_values = true)]
        summary_stats: String,
        #[arg(long, default_value_t = crate::jzs::DEFAULT_CAUCHY_SCALE)]
        scale: f64,
        /// `two-sided` or `positive`
        #[arg(long, default_value = "positive")]
        side: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derived-quantity calculators
    Budget {
        #[command(subcommand)]
        budget: BudgetCmd,
    },
}

#[derive(Debug, Subcommand)]
enum BudgetCmd {
    /// Flash-reflection corrected light level
    Flash {
        /// Absorbing-face difference posterior `mean,sd`
        #[arg(long, allow_hyphen_values = true)]
        delta_b: String,
        /// Reflective-face difference posterior `mean,sd`
        #[arg(long, allow_hyphen_values = true)]
        delta_m: String,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        rho_ratio: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Corrected light level over a log grid of reflectivity ratios (CSV)
    FlashSweep {
        #[arg(long, allow_hyphen_values = true)]
        delta_b: String,
        #[arg(long, allow_hyphen_values = true)]
        delta_m: String,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 1e-6)]
        rho_min: f64,
        #[arg(long, default_value_t = 0.5)]
        rho_max: f64,
        #[arg(long, default_value_t = 60)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predicted 0.95-HDI length for a truly dark run
    HdiLength {
        /// Per-interval dark-rate variance, (cnt/s)^2
        #[arg(long)]
        var_rd: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Scale an upper limit to a retinal spot diameter
    Retina {
        #[arg(long)]
        upper: f64,
        #[arg(long)]
        diameter_mm: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parse argv and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().collect();
    match dispatch(cli.command, &argv) {
        Ok(()) => 0,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("warning: {msg}");
            3
        }
    }
}

// ---------------------------------------------------------------------------
// Manifest plumbing
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct FileStamp {
    path: String,
    fnv1a64: String,
}

#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    argv: &'a [String],
    config: serde_json::Value,
    inputs: Vec<FileStamp>,
    outputs: Vec<FileStamp>,
    seed: Option<u64>,
    artifact_version: &'a str,
    duration_s: f64,
}

fn stamp_file(path: &Path) -> Result<FileStamp, CliError> {
    let bytes = fs::read(path)?;
    Ok(FileStamp {
        path: path.display().to_string(),
        fnv1a64: format!("{:016x}", fnv1a64(&bytes)),
    })
}

fn stamp_inline(label: &str, content: &str) -> FileStamp {
    FileStamp {
        path: format!("inline:{label}"),
        fnv1a64: format!("{:016x}", fnv1a64(content.as_bytes())),
    }
}

struct ManifestBuilder {
    command: &'static str,
    argv: Vec<String>,
    config: serde_json::Value,
    inputs: Vec<FileStamp>,
    output_paths: Vec<PathBuf>,
    seed: Option<u64>,
    started: Instant,
}

impl ManifestBuilder {
    fn new(command: &'static str, argv: &[String]) -> Self {
        ManifestBuilder {
            command,
            argv: argv.to_vec(),
            config: serde_json::Value::Null,
            inputs: Vec::new(),
            output_paths: Vec::new(),
            seed: None,
            started: Instant::now(),
        }
    }

    fn config<T: Serialize>(&mut self, cfg: &T) -> &mut Self {
        self.config = serde_json::to_value(cfg).unwrap_or(serde_json::Value::Null);
        self
    }

    fn input_file(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        self.inputs.push(stamp_file(path)?);
        Ok(self)
    }

    fn input_inline(&mut self, label: &str, content: &str) -> &mut Self {
        self.inputs.push(stamp_inline(label, content));
        self
    }

    fn output(&mut self, path: &Path) -> &mut Self {
        self.output_paths.push(path.to_path_buf());
        self
    }

    fn seed(&mut self, seed: u64) -> &mut Self {
        self.seed = Some(seed);
        self
    }

    /// Hash all outputs and write `<primary_out>.manifest.json`.
    fn write(&self, primary_out: &Path) -> Result<(), CliError> {
        let outputs = self
            .output_paths
            .iter()
            .map(|p| stamp_file(p))
            .collect::<Result<Vec<_>, _>>()?;
        let manifest = RunManifest {
            command: self.command,
            argv: &self.argv,
            config: self.config.clone(),
            inputs: self
                .inputs
                .iter()
                .map(|s| FileStamp {
                    path: s.path.clone(),
                    fnv1a64: s.fnv1a64.clone(),
                })
                .collect(),
            outputs,
            seed: self.seed,
            artifact_version: env!("CARGO_PKG_VERSION"),
            duration_s: self.started.elapsed().as_secs_f64(),
        };
        let path = manifest_path(primary_out);
        fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap() + "\n")?;
        Ok(())
    }
}

/// Manifest file name for a given primary output.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

// ---------------------------------------------------------------------------
// Flag parsing helpers
// ---------------------------------------------------------------------------

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!(
            "{what} expects `mean,sd`, got `{s}`"
        )));
    }
    let a = parts[0].trim().parse().map_err(|_| {
        CliError::Input(format!("{what}: invalid number `{}`", parts[0]))
    })?;
    let b = parts[1].trim().parse().map_err(|_| {
        CliError::Input(format!("{what}: invalid number `{}`", parts[1]))
    })?;
    Ok((a, b))
}

fn parse_stats(s: &str) -> Result<SufficientStats, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!(
            "--summary-stats expects `mean,variance,n`, got `{s}`"
        )));
    }
    let mean: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("invalid mean `{}`", parts[0])))?;
    let variance: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("invalid variance `{}`", parts[1])))?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("invalid n `{}`", parts[2])))?;
    Ok(SufficientStats::new(n, mean, variance))
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let mut grid = Vec::new();
    for part in s.split(',') {
        grid.push(part.trim().parse().map_err(|_| {
            CliError::Input(format!("invalid grid value `{part}`"))
        })?);
    }
    if grid.is_empty() {
        return Err(CliError::Input("empty f grid".into()));
    }
    Ok(grid)
}

fn resolve_seed(flag: Option<u64>, fallback: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(v) = std::env::var(SEED_ENV_VAR) {
        return v.parse().map_err(|_| {
            CliError::Input(format!("{SEED_ENV_VAR} must be an unsigned integer, got `{v}`"))
        });
    }
    Ok(fallback.unwrap_or(DEFAULT_SEED))
}

fn stats_from_flags(
    data: &Option<PathBuf>,
    summary_stats: &Option<String>,
    protocol: &ShutterProtocol,
    manifest: &mut ManifestBuilder,
) -> Result<SufficientStats, CliError> {
    match (data, summary_stats) {
        (Some(path), None) => {
            manifest.input_file(path)?;
            let series = CountSeries::read_csv_file(path)?;
            let diff = build_differences(&series, protocol)?;
            let summary = summarize(&diff)?;
            Ok(SufficientStats::from(&summary))
        }
        (None, Some(s)) => {
            manifest.input_inline("summary-stats", s);
            parse_stats(s)
        }
        _ => Err(CliError::Input(
            "exactly one of --data or --summary-stats is required".into(),
        )),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, serde_json::to_string_pretty(value).unwrap() + "\n")?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Command handlers
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
struct StatsEcho {
    n: usize,
    mean: f64,
    variance: f64,
}

impl From<&SufficientStats> for StatsEcho {
    fn from(s: &SufficientStats) -> Self {
        StatsEcho {
            n: s.n,
            mean: s.mean,
            variance: s.variance,
        }
    }
}

#[derive(Debug, Serialize)]
struct AnalysisReport<'a> {
    input: StatsEcho,
    f: f64,
    mass: f64,
    seed: u64,
    prior: &'a PriorSpec,
    posterior: &'a PosteriorSummary,
    diagnostics: &'a ChainDiagnostics,
    draws_file: Option<String>,
}

fn dispatch(command: Command, argv: &[String]) -> Result<(), CliError> {
    match command {
        Command::Simulate { config, out, seed } => cmd_simulate(&config, &out, seed, argv),
        Command::Analyze {
            data,
            summary_stats,
            out,
            f,
            mass,
            chains,
            warmup,
            draws,
            seed,
            draws_out,
            block_len,
            interval_len,
            keep_first,
        } => {
            let protocol = ShutterProtocol {
                block_len,
                interval_len,
                discard_first: !keep_first,
            };
            cmd_analyze(CmdAnalyze {
                data,
                summary_stats,
                out,
                f,
                mass,
                chains,
                warmup,
                draws,
                seed,
                draws_out,
                protocol,
                argv,
            })
        }
        Command::Sweep {
            data,
            summary_stats,
            out,
            f_grid,
            fit_threshold,
            mass,
            chains,
            warmup,
            draws,
            seed,
            block_len,
            interval_len,
            keep_first,
        } => {
            let protocol = ShutterProtocol {
                block_len,
                interval_len,
                discard_first: !keep_first,
            };
            cmd_sweep(CmdSweep {
                data,
                summary_stats,
                out,
                f_grid,
                fit_threshold,
                mass,
                chains,
                warmup,
                draws,
                seed,
                protocol,
                argv,
            })
        }
        Command::Ea {
            table,
            out,
            saturation_cutoff,
            weighted,
            closed_rate,
            lab_rate,
        } => cmd_ea(
            &table,
            &out,
            saturation_cutoff,
            weighted,
            closed_rate.as_deref(),
            lab_rate.as_deref(),
            argv,
        ),
        Command::Jzs {
            summary_stats,
            scale,
            side,
            out,
        } => cmd_jzs(&summary_stats, scale, &side, &out, argv),
        Command::Budget { budget } => cmd_budget(budget, argv),
    }
}

fn cmd_simulate(
    config_path: &Path,
    out: &Path,
    seed_flag: Option<u64>,
    argv: &[String],
) -> Result<(), CliError> {
    let mut manifest = ManifestBuilder::new("simulate", argv);
    manifest.input_file(config_path)?;
    let text = fs::read_to_string(config_path)?;
    let mut config: SimConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", config_path.display())))?;
    config.seed = resolve_seed(seed_flag, Some(config.seed))?;
    config
        .validate()
        .map_err(|e| CliError::Input(e.to_string()))?;

    let series = simulate_campaign(&config)?;
    series.write_csv_file(out)?;

    manifest
        .config(&config)
        .seed(config.seed)
        .output(out)
        .write(out)?;
    println!(
        "simulate: wrote {} intervals to {}",
        series.intervals.len(),
        out.display()
    );
    Ok(())
}

struct CmdAnalyze<'a> {
    data: Option<PathBuf>,
    summary_stats: Option<String>,
    out: PathBuf,
    f: f64,
    mass: f64,
    chains: usize,
    warmup: usize,
    draws: usize,
    seed: Option<u64>,
    draws_out: Option<PathBuf>,
    protocol: ShutterProtocol,
    argv: &'a [String],
}

fn cmd_analyze(args: CmdAnalyze<'_>) -> Result<(), CliError> {
    let mut manifest = ManifestBuilder::new("analyze", args.argv);
    let stats = stats_from_flags(&args.data, &args.summary_stats, &args.protocol, &mut manifest)?;
    let seed = resolve_seed(args.seed, None)?;
    let cfg = McmcConfig {
        chains: args.chains,
        warmup_draws: args.warmup,
        kept_draws: args.draws,
        seed,
    };

    let prior = derive_priors(&stats, args.f, args.f)?;
    let samples = sample_posterior(&stats, &prior, &cfg)?;
    let posterior = summarize_posterior(&samples, &prior, args.mass)?;

    let draws_file = if let Some(path) = &args.draws_out {
        let mut buf = String::from("mu,sigma_sq\n");
        for (mu, s2) in samples.mu_draws.iter().zip(&samples.sigma_sq_draws) {
            buf.push_str(&format!("{mu},{s2}\n"));
        }
        fs::write(path, buf)?;
        manifest.output(path);
        Some(path.display().to_string())
    } else {
        None
    };

    let report = AnalysisReport {
        input: StatsEcho::from(&stats),
        f: args.f,
        mass: args.mass,
        seed,
        prior: &prior,
        posterior: &posterior,
        diagnostics: &samples.diagnostics,
        draws_file,
    };
    write_json(&args.out, &report)?;
    manifest
        .config(&cfg)
        .seed(seed)
        .output(&args.out)
        .write(&args.out)?;

    println!(
        "analyze: mean {:.6e} sd {:.6e} pd+ {:.4} -> {}",
        posterior.mean,
        posterior.sd,
        posterior.pd_plus,
        args.out.display()
    );
    if !samples.diagnostics.converged {
        return Err(CliError::Numeric(format!(
            "chains not converged (mu rhat {:.4}, ess {:.0}; sigma_sq rhat {:.4}, ess {:.0}); report written with flag",
            samples.diagnostics.mu_rhat,
            samples.diagnostics.mu_ess,
            samples.diagnostics.sigma_sq_rhat,
            samples.diagnostics.sigma_sq_ess
        )));
    }
    Ok(())
}

struct CmdSweep<'a> {
    data: Option<PathBuf>,
    summary_stats: Option<String>,
    out: PathBuf,
    f_grid: Option<String>,
    fit_threshold: f64,
    mass: f64,
    chains: usize,
    warmup: usize,
    draws: usize,
    seed: Option<u64>,
    protocol: ShutterProtocol,
    argv: &'a [String],
}

#[derive(Debug, Serialize)]
struct PowerLawReport {
    a: f64,
    b: f64,
}

#[derive(Debug, Serialize)]
struct SweepFitReport {
    fit_threshold: f64,
    points_used: usize,
    full: PowerLawReport,
    positive: Option<PowerLawReport>,
}

fn cmd_sweep(args: CmdSweep<'_>) -> Result<(), CliError> {
    let mut manifest = ManifestBuilder::new("sweep", args.argv);
    let stats = stats_from_flags(&args.data, &args.summary_stats, &args.protocol, &mut manifest)?;
    let seed = resolve_seed(args.seed, None)?;
    let cfg = McmcConfig {
        chains: args.chains,
        warmup_draws: args.warmup,
        kept_draws: args.draws,
        seed,
    };
    let grid = match &args.f_grid {
        Some(s) => {
            let mut g = parse_grid(s)?;
            g.sort_by(|a, b| a.total_cmp(b));
            g
        }
        None => default_f_grid(stats.n),
    };

    let rows = sensitivity_sweep(&stats, &grid, &cfg, args.mass)?;

    let mut csv = String::from("f,mean,sd,hdi_lo,hdi_hi,pos_upper,pd_plus,rsd_full,rsd_pos\n");
    for row in &rows {
        let s = &row.summary;
        let rsd_pos = s
            .sd_ratio_pos
            .map(|v| v.to_string())
            .unwrap_or_default();
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.f,
            s.mean,
            s.sd,
            s.hdi_full.0,
            s.hdi_full.1,
            s.hdi_pos_upper,
            s.pd_plus,
            s.sd_ratio_full,
            rsd_pos
        ));
    }
    fs::write(&args.out, &csv)?;

    let fit_points_full: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.f >= args.fit_threshold)
        .map(|r| (r.f, r.summary.sd_ratio_full))
        .collect();
    let fit_points_pos: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.f >= args.fit_threshold)
        .filter_map(|r| r.summary.sd_ratio_pos.map(|v| (r.f, v)))
        .collect();
    let (a_full, b_full) = powerlaw_fit(&fit_points_full)?;
    let fit_pos = powerlaw_fit(&fit_points_pos)
        .ok()
        .map(|(a, b)| PowerLawReport { a, b });

    let fit_path = {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".fit.json");
        args.out.with_file_name(name)
    };
    write_json(
        &fit_path,
        &SweepFitReport {
            fit_threshold: args.fit_threshold,
            points_used: fit_points_full.len(),
            full: PowerLawReport { a: a_full, b: b_full },
            positive: fit_pos,
        },
    )?;

    manifest
        .config(&cfg)
        .seed(seed)
        .output(&args.out)
        .output(&fit_path)
        .write(&args.out)?;

    println!(
        "sweep: {} factors, fitted exponent {:.3} -> {}",
        rows.len(),
        b_full,
        args.out.display()
    );
    if let Some(bad) = rows.iter().find(|r| !r.diagnostics.converged) {
        return Err(CliError::Numeric(format!(
            "sweep point f = {} not converged; outputs written with that caveat",
            bad.f
        )));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EaReport {
    solution: crate::ea::LsSolution,
    attenuation: Option<Uncertain>,
    darkness: Option<Uncertain>,
}

fn cmd_ea(
    table: &Path,
    out: &Path,
    saturation_cutoff: f64,
    weighted: bool,
    closed_rate: Option<&str>,
    lab_rate: Option<&str>,
    argv: &[String],
) -> Result<(), CliError> {
    let mut manifest = ManifestBuilder::new("ea", argv);
    manifest.input_file(table)?;
    let mut system = AttenuationSystem::read_csv_file(table)?;
    system.saturation_cutoff = saturation_cutoff;
    let mode = if weighted {
        WeightMode::InverseVariance
    } else {
        WeightMode::Unweighted
    };
    let solution = solve_ls_weighted(&system, mode)?;

    let att = closed_rate
        .map(|s| -> Result<Uncertain, CliError> {
            let (mean, sd) = parse_pair(s, "--closed-rate")?;
            Ok(attenuation(
                Uncertain::new(solution.log10_source, solution.log10_source_err),
                Uncertain::new(mean, sd),
            )?)
        })
        .transpose()?;
    let darkness = match (&att, lab_rate) {
        (Some(a), Some(s)) => {
            let (mean, sd) = parse_pair(s, "--lab-rate")?;
            Some(ea_estimate(Uncertain::new(mean, sd), *a)?)
        }
        (None, Some(_)) => {
            return Err(CliError::Input(
                "--lab-rate needs --closed-rate to form the attenuation first".into(),
            ))
        }
        _ => None,
    };

    let report = EaReport {
        solution,
        attenuation: att,
        darkness,
    };
    write_json(out, &report)?;
    manifest.output(out).write(out)?;
    println!(
        "ea: log10 source {:.3} ({} rows) -> {}",
        report.solution.log10_source,
        report.solution.rows_used,
        out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct JzsReport {
    t: f64,
    n: usize,
    scale: f64,
    side: String,
    bf01: f64,
}

fn cmd_jzs(
    summary_stats: &str,
    scale: f64,
    side: &str,
    out: &Path,
    argv: &[String],
) -> Result<(), CliError> {
    let mut manifest = ManifestBuilder::new("jzs", argv);
    manifest.input_inline("summary-stats", summary_stats);
    let stats = parse_stats(summary_stats)?;
    let side_enum = match side {
        "two-sided" => TestSide::TwoSided,
        "positive" => TestSide::PositiveOnly,
        other => {
            return Err(CliError::Input(format!(
                "--side must be `two-sided` or `positive`, got `{other}`"
            )))
        }
    };
    let input = TTestInput::from_stats(stats.mean, stats.variance, stats.n, scale, side_enum)?;
    let bf01 = jzs_bf01(&input)?;
    let report = JzsReport {
        t: input.t,
        n: input.n,
        scale,
        side: side.to_string(),
        bf01,
    };
    write_json(out, &report)?;
    manifest.output(out).write(out)?;
    println!("jzs: t {:.4} BF01 {:.4} -> {}", input.t, bf01, out.display());
    Ok(())
}

fn cmd_budget(cmd: BudgetCmd, argv: &[String]) -> Result<(), CliError> {
    match cmd {
        BudgetCmd::Flash {
            delta_b,
            delta_m,
            q,
            rho_ratio,
            out,
        } => {
            let mut manifest = ManifestBuilder::new("budget flash", argv);
            let (bm, bs) = parse_pair(&delta_b, "--delta-b")?;
            let (mm, ms) = parse_pair(&delta_m, "--delta-m")?;
            let input = FlashModelInput {
                delta_b: GaussianEstimate::new(bm, bs),
                delta_m: GaussianEstimate::new(mm, ms),
                q,
                rho_ratio,
            };
            #[derive(Serialize)]
            struct FlashReport {
                input: FlashModelInput,
                corrected: GaussianEstimate,
            }
            let corrected = flash_corrected(&input)?;
            write_json(&out, &FlashReport { input, corrected })?;
            manifest.config(&input).output(&out).write(&out)?;
            println!(
                "budget flash: corrected mean {:.6e} sd {:.6e} -> {}",
                corrected.mean,
                corrected.sd,
                out.display()
            );
            Ok(())
        }
        BudgetCmd::FlashSweep {
            delta_b,
            delta_m,
            q,
            rho_min,
            rho_max,
            points,
            out,
        } => {
            let mut manifest = ManifestBuilder::new("budget flash-sweep", argv);
            let grid_ok = rho_min.is_finite()
                && rho_max.is_finite()
                && rho_min > 0.0
                && rho_max > rho_min
                && points >= 2;
            if !grid_ok {
                return Err(CliError::Input(
                    "need 0 < rho_min < rho_max and at least 2 points".into(),
                ));
            }
            let (bm, bs) = parse_pair(&delta_b, "--delta-b")?;
            let (mm, ms) = parse_pair(&delta_m, "--delta-m")?;
            let input = FlashModelInput {
                delta_b: GaussianEstimate::new(bm, bs),
                delta_m: GaussianEstimate::new(mm, ms),
                q,
                rho_ratio: 0.0,
            };
            let log_step = (rho_max / rho_min).ln() / (points - 1) as f64;
            let grid: Vec<f64> = (0..points)
                .map(|i| rho_min * (log_step * i as f64).exp())
                .collect();
            let rows = flash_sweep(&input, &grid)?;
            let mut csv = String::from("rho_ratio,mean,sd\n");
            for (rho, g) in &rows {
                csv.push_str(&format!("{rho},{},{}\n", g.mean, g.sd));
            }
            fs::write(&out, csv)?;
            manifest.config(&input).output(&out).write(&out)?;
            println!("budget flash-sweep: {} points -> {}", rows.len(), out.display());
            Ok(())
        }
        BudgetCmd::HdiLength { var_rd, n, out } => {
            let mut manifest = ManifestBuilder::new("budget hdi-length", argv);
            #[derive(Serialize)]
            struct HdiLengthReport {
                var_rd: f64,
                n: usize,
                length: f64,
            }
            let length = dark_hdi_length(var_rd, n)?;
            write_json(&out, &HdiLengthReport { var_rd, n, length })?;
            manifest.output(&out).write(&out)?;
            println!("budget hdi-length: {length:.6e} -> {}", out.display());
            Ok(())
        }
        BudgetCmd::Retina {
            upper,
            diameter_mm,
            out,
        } => {
            let mut manifest = ManifestBuilder::new("budget retina", argv);
            #[derive(Serialize)]
            struct RetinaReport {
                upper_limit: f64,
                spot_diameter_mm: f64,
                scaled: f64,
            }
            let scaled = retina_scaling(upper, diameter_mm)?;
            write_json(
                &out,
                &RetinaReport {
                    upper_limit: upper,
                    spot_diameter_mm: diameter_mm,
                    scaled,
                },
            )?;
            manifest.output(&out).write(&out)?;
            println!("budget retina: {scaled:.6e} -> {}", out.display());
            Ok(())
        }
    }
}
