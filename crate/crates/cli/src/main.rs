use std::process::ExitCode;

use clap::Parser;

use stpair_cli::{deliver, execute, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = execute(&cli).and_then(|run| deliver(&run).map(|()| run.report));
    match outcome {
        Ok(report) => {
            if let Some(w) = report.wall_seconds {
                eprintln!("wall-clock: {w:.3} s");
            }
            let failed = report.failed_checks();
            for c in &failed {
                eprintln!("check failed: {} ({})", c.name, c.detail);
            }
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("hint: {}", e.hint);
            ExitCode::from(e.exit_code())
        }
    }
}
