//! `mpd-sim`: command-line front end for the multiplane-diffraction simulator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use log::warn;
use serde_json::json;

use config::{diagnose, Analysis, Diagnostic, ScenarioConfig, Severity};
use error::CliError;

const THREADS_ENV: &str = "MPD_SIM_THREADS";
const DEFAULT_OUT: &str = "mpd-out";

#[derive(Parser)]
#[command(name = "mpd-sim", version, about = "Multiplane-diffraction path-integral simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario configuration (JSON).
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled scenario: sim1_fig5a or sim2_fig7.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory for the CSV, manifest.json and summary.txt.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to MPD_SIM_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Quadrature step T_s in µm, overriding the config.
    #[arg(long, global = true)]
    grid_step: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Leggett-Garg violation along D_s, σ₀ or a (β₁, β₂) grid.
    LgiSweep,
    /// Leggett-Garg quantities at the configured geometry.
    LgiPoint,
    /// Search for constructive/destructive slit positions.
    QpiSearch,
    /// Path-interference probabilities at the configured slit positions.
    QpiPoint,
    /// Coherence diameters against the setup extent.
    Coherence,
    /// History probabilities.
    Probabilities,
    /// Check a configuration without running it.
    Validate,
}

impl Command {
    fn analysis(self) -> Option<Analysis> {
        Some(match self {
            Command::LgiSweep => Analysis::LgiSweep,
            Command::LgiPoint => Analysis::LgiPoint,
            Command::QpiSearch => Analysis::QpiSearch,
            Command::QpiPoint => Analysis::QpiPoint,
            Command::Coherence => Analysis::Coherence,
            Command::Probabilities => Analysis::Probabilities,
            Command::Validate => return None,
        })
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => config::load(path)?,
        (None, Some(name)) => config::preset(name)?,
        (None, None) => {
            return Err(CliError::Config(vec![Diagnostic::error("config", "pass --config <path> or --preset <name>")]))
        }
    };
    if let Some(step) = cli.grid_step {
        cfg.grid_step = step;
    }
    Ok(cfg)
}

fn thread_count(cli: &Cli) -> Result<Option<usize>, CliError> {
    if cli.threads.is_some() {
        return Ok(cli.threads);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            CliError::Config(vec![Diagnostic::error(THREADS_ENV, format!("expected a thread count, got {v:?}"))])
        }),
        Err(_) => Ok(None),
    }
}

fn validate(cli: &Cli, cfg: &ScenarioConfig) -> Result<ExitCode, CliError> {
    let diags = diagnose(cfg);
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    for d in &diags {
        println!("{d}");
    }
    println!("{errors} errors, {} warnings", diags.len() - errors);
    if let Some(dir) = &cli.out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("diagnostics.json"), serde_json::to_string_pretty(&diags).expect("serializable"))?;
    }
    Ok(if errors == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn write_outputs(
    dir: &Path,
    analysis: Analysis,
    cfg: &ScenarioConfig,
    artifact: &run::Artifact,
    warnings: &[Diagnostic],
    wall_time: f64,
) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(&artifact.csv_name), &artifact.csv)?;
    let manifest = json!({
        "tool": "mpd-sim",
        "version": env!("CARGO_PKG_VERSION"),
        "analysis": analysis.name(),
        "config": cfg,
        "threads": rayon::current_num_threads(),
        "wall_time_s": wall_time,
        "grid": { "step_um": cfg.grid_step, "bounds": "auto" },
        "results": { "csv": artifact.csv_name, "rows": artifact.rows },
        "warnings": warnings,
    });
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("serializable") + "\n")?;
    let mut summary = format!("mpd-sim {} ({})\n", analysis.name(), env!("CARGO_PKG_VERSION"));
    for line in &artifact.summary {
        summary.push_str(line);
        summary.push('\n');
    }
    fs::write(dir.join("summary.txt"), summary)?;
    Ok(())
}

fn execute(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(cli)?;
    let Some(analysis) = cli.command.analysis() else {
        return validate(cli, &cfg);
    };
    if let Some(n) = thread_count(cli)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let diags = diagnose(&cfg);
    let (errors, warnings): (Vec<Diagnostic>, Vec<Diagnostic>) =
        diags.into_iter().partition(|d| d.severity == Severity::Error);
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }
    for w in &warnings {
        warn!("{}: {}", w.field, w.message);
    }
    if cfg.analysis.is_some_and(|a| a != analysis) {
        warn!("config was written for {}, running {}", cfg.analysis.unwrap().name(), analysis.name());
    }
    let start = Instant::now();
    let artifact = run::run(analysis, &cfg)?;
    let wall_time = start.elapsed().as_secs_f64();
    let dir = cli.out.clone().or_else(|| cfg.out_dir.as_ref().map(PathBuf::from)).unwrap_or(PathBuf::from(DEFAULT_OUT));
    write_outputs(&dir, analysis, &cfg, &artifact, &warnings, wall_time)?;
    for line in &artifact.summary {
        println!("{line}");
    }
    println!("wrote {} ({} rows) to {}", artifact.csv_name, artifact.rows, dir.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            for line in e.report() {
                eprintln!("{line}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
