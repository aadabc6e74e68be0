//! Command-line arguments and the serializable run configuration.

use std::path::PathBuf;

use binrate_core::entropy::TrialBudget;
use binrate_core::{ModulationParams, SchemeId};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "binrate",
    version,
    about = "Rate bounds for bipolar signaling over the bandlimited AWGN channel"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Debug, Args, Serialize, Deserialize)]
pub struct Common {
    /// Scheme to use; repeat for several (A, B, B1, C).
    #[arg(long = "scheme", global = true)]
    pub schemes: Vec<SchemeId>,
    /// Symbols per realization.
    #[arg(long = "n", global = true)]
    pub n: Option<usize>,
    /// Fixed trial count; without it entropy runs stop on a 1e-3 nats
    /// standard error between 200 and 2000 trials.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1, global = true)]
    pub seed: u64,
    /// SNR grid in dB, comma separated or repeated.
    #[arg(
        long = "snr-db",
        value_delimiter = ',',
        allow_hyphen_values = true,
        global = true
    )]
    pub snr_db: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Symbol period T in seconds.
    #[arg(long, default_value_t = 1.0, global = true)]
    pub period: f64,
    /// Transmit power P in watts.
    #[arg(long, default_value_t = 1.0, global = true)]
    pub power: f64,
    /// B1 guard interval as a fraction of T.
    #[arg(long, default_value_t = 0.2, global = true)]
    pub guard: f64,
    /// Use an open time axis instead of a cyclic one.
    #[arg(long, global = true)]
    pub open: bool,
    /// Directory of the estimate cache (default `.binrate-cache`, or
    /// `$BINRATE_CACHE_DIR`).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    #[serde(skip)]
    pub no_cache: bool,
    /// Suppress progress messages on standard error.
    #[arg(long, short, global = true)]
    #[serde(skip)]
    pub quiet: bool,
}

#[derive(Clone, Debug, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Draw one realization and its channel samples.
    Gen {
        /// Also sample the output derivative.
        #[arg(long)]
        derivative: bool,
    },
    /// Closed-form and simulated autocorrelations.
    Acf {
        #[arg(long, default_value_t = 3.0)]
        tau_max: f64,
        /// Symbols in the simulated waveform; 0 skips the simulation.
        #[arg(long, default_value_t = 100_000)]
        empirical_symbols: usize,
        #[arg(long, default_value_t = 32)]
        points_per_symbol: usize,
    },
    /// Continuous spectra, tones and high-SNR spectral bounds.
    Psd {
        #[arg(long, default_value_t = 4.0)]
        f_max: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        df: f64,
        /// Symbols simulated for the B1 Welch estimate.
        #[arg(long, default_value_t = 1 << 16)]
        welch_symbols: usize,
    },
    /// Jacobian entropy estimates.
    Hd {
        /// Write per-trial values to this CSV file.
        #[arg(long)]
        #[serde(skip)]
        dump_trials: Option<PathBuf>,
    },
    /// Sign information of scheme C and the derivative densities.
    SignMi {
        /// Total derivative samples.
        #[arg(long, default_value_t = 1_000_000)]
        symbols: usize,
        /// Fixed bin count instead of the Freedman-Diaconis rule.
        #[arg(long)]
        bins: Option<usize>,
        /// Write the three density curves to this CSV file.
        #[arg(long)]
        #[serde(skip)]
        densities: Option<PathBuf>,
    },
    /// Lower-bound curves over the SNR grid.
    Bounds,
    /// Summary tables.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
    },
}

/// Everything that determines a run's output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(flatten)]
    pub common: Common,
}

impl RunConfig {
    pub fn new(command: Command, common: Common) -> CliResult<Self> {
        let cfg = Self { command, common };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let c = &self.common;
        if !(c.period > 0.0) || !(c.power > 0.0) {
            return Err(CliError::Config("period and power must be positive".into()));
        }
        if !(0.0..1.0).contains(&c.guard) {
            return Err(CliError::Config(
                "guard must lie in [0, 1) as a fraction of T".into(),
            ));
        }
        if let Some(t) = c.trials {
            if t < 2 {
                return Err(CliError::Config("at least two trials are needed".into()));
            }
        }
        if matches!(self.command, Command::Bounds) && self.snr_grid().is_empty() {
            return Err(CliError::Config("SNR grid is empty".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn schemes(&self, default: &[SchemeId]) -> Vec<SchemeId> {
        if self.common.schemes.is_empty() {
            default.to_vec()
        } else {
            let mut out = Vec::new();
            for s in &self.common.schemes {
                if !out.contains(s) {
                    out.push(*s);
                }
            }
            out
        }
    }

    pub fn params(&self, default_n: usize) -> ModulationParams {
        let c = &self.common;
        ModulationParams {
            symbol_period: c.period,
            power: c.power,
            guard: c.guard * c.period,
            symbols: c.n.unwrap_or(default_n),
            cyclic: !c.open,
            seed: c.seed,
        }
    }

    pub fn budget(&self) -> TrialBudget {
        self.common
            .trials
            .map(TrialBudget::fixed)
            .unwrap_or_default()
    }

    pub fn snr_grid(&self) -> Vec<f64> {
        if self.common.snr_db.is_empty() {
            (-10..=60).step_by(2).map(|d| d as f64).collect()
        } else {
            self.common.snr_db.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        let cli = Cli::try_parse_from(std::iter::once("binrate").chain(args.iter().copied()))
            .expect("arguments parse");
        RunConfig::new(cli.command, cli.common).unwrap()
    }

    #[test]
    fn snr_grid_accepts_negative_lists() {
        let cfg = parse(&["bounds", "--snr-db", "-10,0,5.5"]);
        assert_eq!(cfg.snr_grid(), vec![-10.0, 0.0, 5.5]);
        assert_eq!(parse(&["bounds"]).snr_grid().len(), 36);
    }

    #[test]
    fn digest_ignores_output_location_only() {
        let a = parse(&["hd", "--seed", "7"]);
        let b = parse(&[
            "hd",
            "--seed",
            "7",
            "--out",
            "x.json",
            "--quiet",
            "--no-cache",
        ]);
        let c = parse(&["hd", "--seed", "8"]);
        assert_eq!(a.digest(), b.digest());
        assert_ne!(a.digest(), c.digest());
        assert_ne!(
            a.digest(),
            parse(&["hd", "--seed", "7", "--format", "json"]).digest()
        );
    }

    #[test]
    fn guard_is_a_fraction_of_the_period() {
        let p = parse(&["gen", "--period", "2", "--guard", "0.25"]).params(100);
        assert_eq!(p.guard, 0.5);
        assert!(p.cyclic);
        assert!(!parse(&["gen", "--open"]).params(100).cyclic);
    }

    #[test]
    fn repeated_schemes_collapse() {
        let cfg = parse(&["psd", "--scheme", "B", "--scheme", "b", "--scheme", "A"]);
        assert_eq!(cfg.schemes(&[SchemeId::C]), vec![SchemeId::B, SchemeId::A]);
        assert_eq!(parse(&["psd"]).schemes(&[SchemeId::C]), vec![SchemeId::C]);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let cli = Cli::try_parse_from(["binrate", "hd", "--trials", "1"]).unwrap();
        assert!(RunConfig::new(cli.command, cli.common).is_err());
        assert!(Cli::try_parse_from(["binrate", "table", "--which", "3"]).is_err());
    }
}
