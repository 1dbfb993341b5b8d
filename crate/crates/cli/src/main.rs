use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use burst_sampling::harness::config::{parse_rule, Algorithm};
use burst_sampling::harness::{
    build_scenario, detect_events, emit_csv, emit_svg_plot, format_estimates_csv, format_shapes_csv, reproduce_figure,
    run_experiment, sweep_plot, AlgorithmChoice, ExperimentConfig, Quantity,
};
use burst_sampling::{direct_measurements, fourier_measurements, Error};
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_ACCEPTANCE: u8 = 3;

#[derive(Parser)]
#[command(name = "burstsim", version, about = "Simulate, detect and sweep burst-forcing recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat key = value experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Direct detector rule: proof or pseudocode.
    #[arg(long)]
    rule: Option<String>,
    /// direct, prony or both.
    #[arg(long)]
    algo: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write both measurement sets at the config's fixed (β, L, σ).
    Simulate(Common),
    /// Run the detectors at the config's fixed (β, L, σ).
    Detect(Common),
    /// Run the config's sweep and write CSV and SVG.
    Sweep(Common),
    /// Rerun the canned setup of figure N (1..=8).
    ReproduceFigure {
        n: u32,
        #[command(flatten)]
        common: Common,
    },
}

/// Errors that map to the configuration exit code.
#[derive(Debug)]
struct ConfigError(String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(e: impl std::fmt::Display) -> anyhow::Error {
    ConfigError(e.to_string()).into()
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            ExperimentConfig::parse(&text).map_err(config_err)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(rule) = &c.rule {
        cfg.rule = parse_rule(rule).map_err(config_err)?;
    }
    if let Some(algo) = &c.algo {
        cfg.algorithm = algo.parse::<AlgorithmChoice>().map_err(config_err)?;
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    Ok(&cfg.output_dir)
}

fn scenario(cfg: &ExperimentConfig) -> Result<burst_sampling::Scenario64> {
    build_scenario(cfg, cfg.beta, cfg.l, cfg.sigma).map_err(|e| match e {
        Error::Domain(_) | Error::Invalid(_) => config_err(e),
        other => other.into(),
    })
}

fn simulate(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let sc = scenario(&cfg)?;
    let dir = out_dir(&cfg)?;
    let steps = (cfg.t_end / cfg.beta).ceil() as usize;
    for algo in cfg.algorithm.algorithms() {
        let path = dir.join(format!("measurements_{algo}.csv"));
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let w = std::io::BufWriter::new(file);
        match algo {
            Algorithm::Direct => direct_measurements(&sc, steps + 2)?.write_csv(w)?,
            Algorithm::Prony => fourier_measurements(&sc, steps + 6)?.write_csv(w)?,
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn detect(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    let sc = scenario(&cfg)?;
    let dir = out_dir(&cfg)?;
    for algo in cfg.algorithm.algorithms() {
        let est = detect_events(&cfg, algo, &sc)?;
        fs::write(dir.join(format!("events_{algo}.csv")), format_estimates_csv(&est))?;
        fs::write(dir.join(format!("shapes_{algo}.csv")), format_shapes_csv(&est))?;
        println!("{algo}: {} events", est.len());
        for e in &est {
            println!("  t = {:.6}", e.t_est);
        }
    }
    Ok(())
}

fn sweep(c: &Common) -> Result<()> {
    let cfg = load_config(c)?;
    if cfg.sweep.is_none() {
        return Err(config_err("config has no sweep (set `sweep` and `values`)"));
    }
    let dir = out_dir(&cfg)?;
    let results = run_experiment(&cfg, c.workers)?;
    emit_csv(&results, &dir.join("sweep.csv"))?;
    emit_svg_plot(&sweep_plot(&results, Quantity::Time, "time error")?, &dir.join("sweep_time.svg"))?;
    for s in 0..results[0].ne_coeff.len() {
        let title = format!("coefficient error, g{}", s + 1);
        emit_svg_plot(&sweep_plot(&results, Quantity::Coeff(s), &title)?, &dir.join(format!("sweep_coeff_g{}.svg", s + 1)))?;
    }
    for p in &results {
        if let Some(why) = &p.inadmissible {
            eprintln!("warning: {} {} = {}: {why}", p.algorithm, p.var, p.value);
        }
    }
    println!("wrote {} points to {}", results.len(), dir.join("sweep.csv").display());
    Ok(())
}

fn reproduce(n: u32, c: &Common) -> Result<bool> {
    if !(1..=8).contains(&n) {
        return Err(config_err(format!("unknown figure {n}; expected 1..=8")));
    }
    let out = c.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let outcome = reproduce_figure(n, &out, c.seed.unwrap_or(0), c.workers)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    for v in &outcome.violations {
        eprintln!("violation: {v}");
    }
    Ok(outcome.violations.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c).map(|_| true),
        Command::Detect(c) => detect(c).map(|_| true),
        Command::Sweep(c) => sweep(c).map(|_| true),
        Command::ReproduceFigure { n, common } => reproduce(*n, common),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ACCEPTANCE),
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("config error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
