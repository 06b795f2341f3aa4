use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sqmc_core::experiment::{
    gain_table, load_or_simulate, oracle, read_failures, read_runs, run_experiment,
    simulate_dataset, write_dataset, write_failures, write_runs, EngineSpec, ExperimentConfig,
    Failure, Quantity, Summary,
};

#[derive(Parser)]
#[command(
    name = "sqmc",
    version,
    about = "SMC / SQMC particle filtering experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate observations from the configured model and write data.csv.
    Simulate(Common),
    /// Run all replications, then write runs.csv, report.csv and summary.json.
    Run(RunArgs),
    /// Recompute report.csv and summary.json from an existing runs.csv.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML). For `report`, defaults to <out>/config.toml.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config, default `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated engines, e.g. smc-guided,sqmc-guided.
    #[arg(long, value_delimiter = ',')]
    engines: Option<Vec<String>>,
    /// Comma-separated particle counts.
    #[arg(long, value_delimiter = ',')]
    particles: Option<Vec<usize>>,
    #[arg(long)]
    replications: Option<usize>,
}

fn load(common: &Common, fallback: Option<&Path>) -> Result<(ExperimentConfig, PathBuf)> {
    let path = match (&common.config, fallback) {
        (Some(p), _) => p.clone(),
        (None, Some(p)) => p.to_path_buf(),
        (None, None) => bail!("--config is required"),
    };
    let mut cfg =
        ExperimentConfig::load(&path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok((cfg, out))
}

fn report(
    cfg: &ExperimentConfig,
    out: &Path,
    failures: Vec<Failure>,
    wall_seconds: f64,
) -> Result<Summary> {
    let records = read_runs(&out.join("runs.csv")).context("reading runs.csv")?;
    let data = load_or_simulate(cfg)?;
    let truth = oracle(cfg, &data)?.map(|(mean, ll)| match cfg.quantity() {
        Quantity::MeanX1 => mean,
        Quantity::LogLikelihood => ll,
    });
    let table = gain_table(cfg, &records, truth.as_deref())?;
    table.write_csv(&out.join("report.csv"))?;
    let summary = Summary::new(cfg, &table, truth.is_some(), failures, wall_seconds);
    summary.write_json(&out.join("summary.json"))?;
    Ok(summary)
}

fn print_summary(summary: &Summary) {
    println!(
        "{} {} ({}), reference {}",
        summary.model, summary.quantity, summary.metric, summary.reference
    );
    for g in &summary.gains {
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "  {:<28} N={:<7} gain median {} [{}, {}]",
            g.engine,
            g.n,
            fmt(g.gain_median),
            fmt(g.gain_q25),
            fmt(g.gain_q75)
        );
    }
    if !summary.failures.is_empty() {
        println!(
            "  {} replications failed (see summary.json)",
            summary.failures.len()
        );
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(common) => {
            let (cfg, out) = load(&common, None)?;
            let data = simulate_dataset(&cfg)?;
            let path = out.join("data.csv");
            write_dataset(&path, &data)?;
            println!("wrote {}", path.display());
        }
        Command::Run(args) => {
            let (mut cfg, out) = load(&args.common, None)?;
            if let Some(engines) = args.engines {
                cfg.run.engines = engines
                    .iter()
                    .map(|e| e.parse::<EngineSpec>())
                    .collect::<Result<_, _>>()?;
                if cfg
                    .run
                    .reference
                    .is_some_and(|r| !cfg.run.engines.contains(&r))
                {
                    cfg.run.reference = None;
                }
            }
            if let Some(particles) = args.particles {
                cfg.run.particles = particles;
            }
            if let Some(r) = args.replications {
                cfg.run.replications = r;
            }
            cfg.out = Some(out.clone());
            cfg.validate()?;
            std::fs::write(out.join("config.toml"), cfg.to_toml()?)?;
            let data = load_or_simulate(&cfg)?;
            let result = run_experiment(&cfg, &data)?;
            write_runs(&out.join("runs.csv"), &result.records)?;
            write_failures(&out.join("failures.json"), &result.failures)?;
            let summary = report(&cfg, &out, result.failures, result.wall_seconds)?;
            print_summary(&summary);
        }
        Command::Report(common) => {
            let fallback = common.out.as_ref().map(|o| o.join("config.toml"));
            let (cfg, out) = load(&common, fallback.as_deref())?;
            let failures_path = out.join("failures.json");
            let failures = if failures_path.exists() {
                read_failures(&failures_path)?
            } else {
                Vec::new()
            };
            let summary = report(&cfg, &out, failures, 0.0)?;
            print_summary(&summary);
        }
    }
    Ok(())
}
