use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tcs_bench::remote::run_plan_remote;
use tcs_bench::{build_report, emit_report, run_plan, BenchError, ExperimentPlan, Recording, RunResult};

/// Capacity tests against a simulated or a running cluster.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Args {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Runs a plan. Plans listing node addresses go to those nodes over
    /// RPC; others run on the simulated network.
    Run {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also store the raw samples for later replay.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Free-text note stored with the recording.
        #[arg(long, default_value = "")]
        note: String,
    },
    /// Recomputes the report of a recording.
    Replay {
        #[arg(long)]
        recording: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        grace: f64,
        #[arg(long, default_value_t = 5.0)]
        usable_factor: f64,
    },
}

fn report(preset: &str, runs: &[RunResult], grace: f64, factor: f64, out: &PathBuf) -> Result<(), BenchError> {
    let report = build_report(preset, runs, grace, factor)?;
    for f in emit_report(&report, out)? {
        println!("{}", f.display());
    }
    for c in &report.capacities {
        println!("{}: knee {} req/s, usable {} req/s", c.scheme, c.knee, c.usable);
    }
    for r in runs {
        if let Some(p) = &r.partial {
            eprintln!("warning: {} at {} req/s is partial: {p}", r.scheme, r.rate);
        }
    }
    Ok(())
}

fn run(args: Args) -> Result<(), BenchError> {
    match args.cmd {
        Cmd::Run {
            plan,
            out,
            record,
            note,
        } => {
            let plan = ExperimentPlan::load(&plan)?;
            let runs = if plan.nodes.is_empty() {
                run_plan(&plan)?
            } else {
                let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
                rt.block_on(run_plan_remote(&plan))?
            };
            if let Some(path) = record {
                Recording {
                    preset: plan.preset.clone(),
                    note,
                    runs: runs.clone(),
                }
                .save(&path)?;
            }
            report(&plan.preset, &runs, plan.grace, plan.usable_factor, &out)
        }
        Cmd::Replay {
            recording,
            out,
            grace,
            usable_factor,
        } => {
            let rec = Recording::load(&recording)?;
            report(&rec.preset, &rec.runs, grace, usable_factor, &out)
        }
    }
}

fn main() -> ExitCode {
    tcs_cli::init_logging();
    tcs_cli::finish(run(Args::parse()))
}
