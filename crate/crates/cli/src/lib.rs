//! Command-line front end of the bipolar-signaling rate lab.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;

use std::fs;
use std::path::PathBuf;

use serde_json::json;

use cache::{Cache, DEFAULT_DIR};
use commands::{Progress, Report};
use config::{Format, RunConfig};
use error::{io_error, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Cache chosen by the flags and `BINRATE_CACHE_DIR`.
pub fn cache_for(cfg: &RunConfig) -> Cache {
    if cfg.common.no_cache {
        return Cache::disabled();
    }
    let dir = cfg
        .common
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os("BINRATE_CACHE_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR));
    Cache::at(dir)
}

fn csv_header(cfg: &RunConfig, schema: &str) -> String {
    format!(
        "# binrate {VERSION} {schema} config_sha256={}\n",
        cfg.digest()
    )
}

/// Renders a report in the requested format with the version and config digest.
pub fn render(cfg: &RunConfig, report: &Report) -> CliResult<String> {
    Ok(match cfg.common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json!({
                "schema": report.schema,
                "version": VERSION,
                "config_digest": cfg.digest(),
                "config": cfg,
                "result": report.json,
            }))?;
            s.push('\n');
            s
        }
        Format::Csv => csv_header(cfg, report.schema) + &report.csv,
        Format::Text => format!(
            "binrate {VERSION}  {}  config sha256 {}\n\n{}",
            report.schema,
            cfg.digest(),
            report.text
        ),
    })
}

/// Runs one configuration, writes side files, and returns the main output.
pub fn execute(cfg: &RunConfig) -> CliResult<String> {
    let progress = Progress {
        quiet: cfg.common.quiet,
    };
    let report = commands::run(cfg, &cache_for(cfg), progress)?;
    for (path, body) in &report.side_files {
        let text = csv_header(cfg, report.schema) + body;
        fs::write(path, text).map_err(io_error(path))?;
    }
    render(cfg, &report)
}
