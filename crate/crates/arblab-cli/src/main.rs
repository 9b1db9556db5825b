//! Batch front end: reproducible pricing, hedging, funding, and
//! classification runs from declarative experiment configs.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, OutputFormat};

#[derive(Parser)]
#[command(name = "arblab", version, about = "diffusion market simulation and pricing laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment config (TOML or JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the time step (rebuilds the grid over the same horizon).
    #[arg(long)]
    dt: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// Thread count for batch parallelism (0 = default pool).
    #[arg(long)]
    threads: Option<usize>,
    /// Write the effective config (after overrides) to this path and exit.
    #[arg(long)]
    dump_config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Dump simulated paths as CSV.
    Simulate(CommonArgs),
    /// Monte Carlo or closed-form pricing.
    Price(CommonArgs),
    /// Run a strategy and verify superreplication.
    Hedge(CommonArgs),
    /// Share schedules and funding flows along a path.
    Fund(CommonArgs),
    /// No-arbitrage and bankruptcy classification.
    Classify(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Price(_) => "price",
            Command::Hedge(_) => "hedge",
            Command::Fund(_) => "fund",
            Command::Classify(_) => "classify",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::Simulate(a)
            | Command::Price(a)
            | Command::Hedge(a)
            | Command::Fund(a)
            | Command::Classify(a) => a,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            // validation problems exit 2, runtime/regime problems exit 1
            if is_validation_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn is_validation_error(err: &anyhow::Error) -> bool {
    if let Some(arb) = err.downcast_ref::<arblab::ArbError>() {
        return matches!(
            arb,
            arblab::ArbError::Parameter(_)
                | arblab::ArbError::Domain(_)
                | arblab::ArbError::Structural(_)
        );
    }
    let text = format!("{err:#}");
    text.contains("parsing")
        || text.contains("reading config")
        || text.contains("must be")
        || text.contains("needs")
        || text.contains("unknown")
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let args = cli.command.args();
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(paths) = args.paths {
        cfg.n_paths = paths;
    }
    if let Some(dt) = args.dt {
        if dt <= 0.0 {
            anyhow::bail!("--dt must be positive");
        }
        let horizon = cfg.grid.t_end - cfg.grid.t_start;
        cfg.grid.n_steps = (horizon / dt).round().max(1.0) as usize;
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    if let Some(fmt) = &args.format {
        cfg.output.format =
            if fmt == "csv" { OutputFormat::Csv } else { OutputFormat::Json };
    }
    if let Some(out) = &args.out {
        cfg.output.path = Some(out.display().to_string());
    }
    cfg.validate()?;

    if let Some(dump) = &args.dump_config {
        std::fs::write(dump, cfg.to_toml()?)?;
        return Ok(());
    }

    let name = cli.command.name();
    let report = if cfg.threads > 0 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
        pool.install(|| commands::run_command(name, &cfg))?
    } else {
        commands::run_command(name, &cfg)?
    };

    let rendered = commands::render_output(&report, &cfg.output.format)?;
    match &cfg.output.path {
        Some(path) => std::fs::write(path, rendered)?,
        None => println!("{rendered}"),
    }
    // human-readable classification table also goes to stderr for quick reads
    if name == "classify" {
        if let Some(table) = report.result.get("table").and_then(|v| v.as_str()) {
            eprintln!("{table}");
        }
    }
    Ok(())
}
