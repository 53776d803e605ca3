use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use volkov_fp::{exit_code, execute, Scenario};

/// Run one verification scenario from a JSON config.
#[derive(Debug, Parser)]
#[command(name = "volkov-fp", version)]
struct Cli {
    scenario: Scenario,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config `output_dir`, else `out/<scenario>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: config `workers`, else $VOLKOV_FP_WORKERS, else all cores).
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.scenario, &cli.config, cli.out, cli.workers) {
        Ok(summary) => {
            for a in &summary.assertions {
                let tag = if a.passed { "ok  " } else { "FAIL" };
                println!("{tag} {:<32} {:>12.4e} {} {:e}", a.name, a.measured, comparison(a), a.tolerance);
            }
            if summary.passed {
                ExitCode::from(exit_code::PASS as u8)
            } else {
                ExitCode::from(exit_code::ASSERTION_FAILED as u8)
            }
        }
        Err(e) => {
            eprintln!("volkov-fp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn comparison(a: &volkov_fp::Assertion) -> &'static str {
    match a.comparison {
        volkov_fp::summary::Comparison::AtMost => "<=",
        volkov_fp::summary::Comparison::AtLeast => ">=",
        volkov_fp::summary::Comparison::Below => "<",
    }
}
