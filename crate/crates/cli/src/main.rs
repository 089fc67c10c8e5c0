use std::process::ExitCode;

use ale_cli::commands::{emit, execute, Cli};
use clap::Parser;

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("ale: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let var = std::env::var("ALE_NUM_THREADS").ok();
    match ale_cli::thread_limit(var.as_deref()) {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                return fail(e);
            }
        }
        Ok(None) => {}
        Err(e) => return fail(e),
    }
    let (report, out) = match execute(&cli) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    if let Err(e) = emit(&report, out.as_ref()) {
        return fail(e);
    }
    if !report.pass {
        for name in &report.summary.failed_names {
            eprintln!("ale: check failed: {name}");
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
