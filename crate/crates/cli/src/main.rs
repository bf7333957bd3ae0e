use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use jcrwave_cli::{validate, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "jcrwave", version, about = "Preamble schedule design for joint communication-radar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Difference co-waveform of one schedule.
    Coarray(Common),
    /// Radar/communication trade-off curves with convex hulls.
    Tradeoff(Common),
    /// Monte Carlo RMSE of MUSIC estimators against the bound.
    MusicRmse(Common),
    /// Weighted and constrained design problems.
    Optimize(Common),
    /// Check a configuration without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Dotted-key override, e.g. `tradeoff.m_max=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut overrides = self.set.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        Ok(ExperimentConfig::load(self.config.as_deref(), &overrides)?)
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let (kind, common) = match &cli.command {
        Command::Coarray(c) => (Some(Experiment::Coarray), c),
        Command::Tradeoff(c) => (Some(Experiment::Tradeoff), c),
        Command::MusicRmse(c) => (Some(Experiment::MusicRmse), c),
        Command::Optimize(c) => (Some(Experiment::Optimize), c),
        Command::Validate(c) => (None, c),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    let cfg = common.load()?;
    let Some(kind) = kind else {
        let report = validate(&cfg);
        if report.problems.is_empty() {
            println!("no problems found");
        }
        for p in &report.problems {
            println!("{p}");
        }
        return Ok(if report.has_errors() { ExitCode::FAILURE } else { ExitCode::SUCCESS });
    };
    let outputs = jcrwave_cli::run(kind, &cfg)?;
    for path in jcrwave_cli::write(&outputs, kind, &cfg, &common.out, common.svg)? {
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
