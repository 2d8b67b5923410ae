use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use crane::{run_plan, summarize, write_summary, write_trace, ExperimentPlan, RunOptions};

#[derive(Parser)]
#[command(name = "crane", version, about = "Transceiver design experiments for edge inference over Cloud-RAN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (trial, sweep value, scheme) cell of a plan and write the result CSV.
    Run {
        plan: PathBuf,
        /// Base seed; trial t uses seed + t. Defaults to the plan's rng_seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Result CSV, overriding the plan's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean and standard error per sweep value and scheme of a result CSV.
    Summarize {
        csv: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence trace of each scheme on one trial at the first sweep value.
    Trace {
        plan: PathBuf,
        #[arg(long)]
        trial: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { plan, seed, workers, out } => {
            let plan = ExperimentPlan::load(&plan)?;
            let mut opts = RunOptions::new(seed.unwrap_or(plan.base.rng_seed));
            opts.workers = workers;
            let out = out.unwrap_or_else(|| plan.output.clone());
            let outcome = run_plan(&plan, &out, &opts)?;
            eprintln!("{} rows, {} failed, written to {}", outcome.rows.len(), outcome.failures, out.display());
            Ok(outcome.failures == 0)
        }
        Command::Summarize { csv, out } => {
            let f = File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let rows = summarize(f).with_context(|| format!("in {}", csv.display()))?;
            let mut w = sink(out.as_ref())?;
            write_summary(&rows, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Trace { plan, trial, seed, out } => {
            let plan = ExperimentPlan::load(&plan)?;
            let opts = RunOptions::new(seed.unwrap_or(plan.base.rng_seed));
            let mut w = sink(out.as_ref())?;
            let ok = write_trace(&plan, trial, &opts, &mut w)?;
            w.flush()?;
            Ok(ok)
        }
    }
}
