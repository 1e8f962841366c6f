//! `wsnmac` command line: run a scenario file, reproduce an experiment
//! preset, or compare a scenario against the closed-form models.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid scenario or preset,
//! 3 runtime failure.

use std::fs;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use wsnmac::experiments::{self, ExperimentError, Preset, RunOptions};
use wsnmac::Scenario;

#[derive(Parser)]
#[command(name = "wsnmac", version, about = "Duty-cycled sensor MAC simulator (H-MAC / S-MAC)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario file and print pooled metrics as CSV.
    Run {
        scenario: PathBuf,
        /// Override the scenario's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's replication count.
        #[arg(long)]
        reps: Option<u32>,
        /// Write the event trace of the first replication here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment sweep (fig4 .. fig8) and write <name>.csv.
    Preset {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        reps: u32,
        /// Also write <name>.trace with the first replication of every point.
        #[arg(long)]
        trace: bool,
    },
    /// Simulate a scenario and set the results next to the formulas.
    Compare {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u32>,
    },
}

enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::UnknownPreset(_) | ExperimentError::Scenario(_) => Failure::Invalid(e.to_string()),
            ExperimentError::Metrics(_) => Failure::Runtime(e.to_string()),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path, seed: Option<u64>, reps: Option<u32>) -> Result<Scenario, Failure> {
    let mut sc = Scenario::load(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    if let Some(s) = seed {
        sc.seed = s;
    }
    if let Some(r) = reps {
        sc.replications = r;
    }
    sc.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(sc)
}

fn execute(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            scenario,
            seed,
            reps,
            trace,
            out,
        } => {
            let sc = load(&scenario, seed, reps)?;
            let opts = RunOptions {
                seed: sc.seed,
                replications: sc.replications,
                trace: trace.is_some(),
            };
            let (summary, tr) = experiments::run_scenario(&sc, opts)?;
            let csv = experiments::to_csv(&experiments::summary_rows(&sc, &summary));
            if let (Some(path), Some(tr)) = (trace, tr) {
                write(&path, &tr)?;
            }
            match out {
                Some(path) => write(&path, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Preset {
            name,
            out,
            seed,
            reps,
            trace,
        } => {
            let preset = Preset::from_name(&name)?;
            if reps == 0 {
                return Err(Failure::Invalid("--reps must be >= 1".into()));
            }
            fs::create_dir_all(&out).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", out.display())))?;
            let opts = RunOptions {
                seed,
                replications: reps,
                trace,
            };
            info!("running {name} with {reps} replications from seed {seed}");
            let result = experiments::run_preset(preset, opts)?;
            let csv_path = out.join(format!("{name}.csv"));
            write(&csv_path, &experiments::to_csv(&result.rows))?;
            if let Some(tr) = result.trace {
                write(&out.join(format!("{name}.trace")), &tr)?;
            }
            println!("{}", csv_path.display());
        }
        Command::Compare { scenario, seed, reps } => {
            let sc = load(&scenario, seed, reps)?;
            let report = experiments::compare(&sc)?;
            print!("{}", report.to_csv());
            for n in &report.notices {
                eprintln!("note: {n}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match panic::catch_unwind(|| execute(cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failure::Invalid(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Ok(Err(Failure::Runtime(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(_) => {
            eprintln!("error: internal assertion failed");
            ExitCode::from(3)
        }
    }
}
