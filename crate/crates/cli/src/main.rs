use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use punctual_core::engine::{self, RunConfig};
use punctual_core::trace::Trace;
use punctual_core::Error;

/// Run and verify the stage-based constructions.
#[derive(Parser)]
#[command(name = "punctual", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the engine selected by a config file and write its trace.
    Run {
        config: PathBuf,
        /// Override the configured horizon.
        #[arg(long)]
        horizon: Option<u64>,
        /// Trace destination; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the step profile (rpo-ptime) as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Replay a trace against every invariant suite of its engine.
    Verify {
        trace: PathBuf,
        /// Write the step profile CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// 2 for a breached invariant or an ill-formed structure, 3 for anything
/// wrong with the inputs themselves.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::Load { .. }
        | Error::Io(_)
        | Error::Unsupported(_)
        | Error::Precondition(_)
        | Error::BudgetExceeded { .. }
        | Error::OutOfFuel { .. } => 3,
        _ => 2,
    }
}

fn write(path: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(config: PathBuf, horizon: Option<u64>, out: Option<PathBuf>, csv: Option<PathBuf>) -> Result<(), Error> {
    let mut cfg = RunConfig::load(&config)?;
    if let Some(h) = horizon {
        if h == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        cfg.horizon = h;
    }
    let result = engine::run(&cfg)?;
    write(&out, &result.trace.to_text())?;
    if let (Some(path), Some(text)) = (&csv, &result.csv) {
        write(&Some(path.clone()), text)?;
    }
    for line in &result.summary {
        eprintln!("{line}");
    }
    Ok(())
}

fn verify(trace: PathBuf, out: Option<PathBuf>) -> Result<(), Error> {
    let text = fs::read_to_string(&trace).map_err(|e| Error::Io(format!("{}: {e}", trace.display())))?;
    let trace = Trace::parse(&text)?;
    let report = engine::verify(&trace)?;
    println!("engine: {}", report.engine);
    for line in &report.lines {
        println!("{line}");
    }
    if let Some(csv) = &report.csv {
        write(&out, csv)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, horizon, out, csv } => run(config, horizon, out, csv),
        Command::Verify { trace, out } => verify(trace, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
