//! Driver behind the `stpair` binary: argument parsing, configuration merging,
//! subcommand dispatch and report emission.
//!
//! Exit status is 0 when every check in the report passes, 1 when a check
//! fails, 2 for usage errors and 3 for runtime failures.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

pub use args::Cli;
pub use config::Params;
pub use error::{CliError, Result};
pub use report::{emit, Check, Format, Outcome, Report, Table};

/// A finished run and where its report goes.
#[derive(Debug)]
pub struct Run {
    pub report: Report,
    pub format: Format,
    pub output: Option<PathBuf>,
}

pub fn execute(cli: &Cli) -> Result<Run> {
    let mut p = Params::load(cli.config.as_deref())?;
    let threads: Option<usize> = p.get_opt("threads", cli.threads)?;
    let format = p.get("format", cli.format, Format::Json)?;
    let timing = p.get("timing", cli.timing.then_some(true), false)?;
    let output = p.get_unechoed::<PathBuf>("output", cli.output.clone())?;
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1", "pass e.g. --threads 1"));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let start = Instant::now();
    let outcome = commands::run(&cli.command, cli.seed, &mut p)?;
    let mut report = Report::from_outcome(commands::name(&cli.command), p.echo().clone(), outcome);
    if timing {
        report.wall_seconds = Some(start.elapsed().as_secs_f64());
    }
    Ok(Run { report, format, output })
}

/// Writes the encoded report to its destination.
pub fn deliver(run: &Run) -> Result<()> {
    let bytes = emit(&run.report, run.format)?;
    let written = match &run.output {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| (path.display().to_string(), e)),
        None => std::io::stdout()
            .lock()
            .write_all(&bytes)
            .map_err(|e| ("stdout".to_string(), e)),
    };
    written.map_err(|(dest, e)| {
        CliError::runtime(
            format!("cannot write report to {dest}: {e}"),
            "check that the --output directory exists and is writable",
        )
    })
}
