use std::process::ExitCode;

use binrate_cli::config::{Cli, RunConfig};
use binrate_cli::error::CliError;
use clap::Parser;

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(2)
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("BINRATE_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let msg = e.render().to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            return fail(&CliError::Usage(first.to_string()));
        }
    };
    let cfg = match RunConfig::new(cli.command, cli.common) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let out = match binrate_cli::execute(&cfg) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    match &cfg.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, out) {
                return fail(&CliError::Io {
                    path: path.clone(),
                    source: e,
                });
            }
        }
        None => print!("{out}"),
    }
    ExitCode::SUCCESS
}
