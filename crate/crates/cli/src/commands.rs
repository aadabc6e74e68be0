//! Subcommand implementations. Each produces every output format at once;
//! the caller picks one and wraps it with the version and config digest.

use std::fmt::Write as _;
use std::path::PathBuf;

use binrate_core::bounds::{
    binary_bound_gap, bound_curves, build_table1, build_table2, gamma_to_delta, BoundReport,
    SignInformation, Table2Inputs,
};
use binrate_core::channel_sampling::{sample_noiseless, sample_with_derivative, PulseKernel};
use binrate_core::entropy::{estimate_b1, estimate_hd, B1Estimate, EntropyEstimate, TrialBudget};
use binrate_core::rng::{stream, Purpose};
use binrate_core::sign_mi::{
    collect_derivatives, estimate_sign_mi, shared_edges, Binning, SignDensities, SignMiReport,
};
use binrate_core::signal_model::{generate, sign_transition_rate};
use binrate_core::spectral::{
    empirical_autocorr, empirical_psd, psd, spectral_upper_bound, AutocorrelationModel, PsdModel,
    DEFAULT_DF, DEFAULT_F_MAX,
};
use binrate_core::{ModulationParams, SchemeId};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::Cache;
use crate::config::{Command, RunConfig};
use crate::error::{CliError, CliResult};

pub const DEFAULT_ENTROPY_SYMBOLS: usize = 500;
pub const DEFAULT_SIGN_SYMBOLS_PER_RUN: usize = 1000;
pub const DEFAULT_SIGN_SAMPLES: usize = 1_000_000;

/// Output of one command in every format.
#[derive(Debug)]
pub struct Report {
    pub schema: &'static str,
    pub json: Value,
    pub csv: String,
    pub text: String,
    /// Extra CSV files requested on the command line.
    pub side_files: Vec<(PathBuf, String)>,
}

/// Progress notes on standard error.
#[derive(Clone, Copy, Debug)]
pub struct Progress {
    pub quiet: bool,
}

impl Progress {
    pub fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("binrate: {}", msg.as_ref());
        }
    }
}

pub fn run(cfg: &RunConfig, cache: &Cache, progress: Progress) -> CliResult<Report> {
    match &cfg.command {
        Command::Gen { derivative } => cmd_gen(cfg, *derivative),
        Command::Acf {
            tau_max,
            empirical_symbols,
            points_per_symbol,
        } => cmd_acf(
            cfg,
            *tau_max,
            *empirical_symbols,
            *points_per_symbol,
            progress,
        ),
        Command::Psd {
            f_max,
            df,
            welch_symbols,
        } => cmd_psd(cfg, *f_max, *df, *welch_symbols, progress),
        Command::Hd { dump_trials } => cmd_hd(cfg, cache, dump_trials.clone(), progress),
        Command::SignMi {
            symbols,
            bins,
            densities,
        } => cmd_sign_mi(cfg, cache, *symbols, *bins, densities.clone(), progress),
        Command::Bounds => cmd_bounds(cfg, cache, progress),
        Command::Table { which } => cmd_table(cfg, cache, *which, progress),
    }
}

fn first_scheme(cfg: &RunConfig, default: SchemeId) -> SchemeId {
    cfg.schemes(&[default])[0]
}

fn cmd_gen(cfg: &RunConfig, derivative: bool) -> CliResult<Report> {
    let scheme = first_scheme(cfg, SchemeId::A);
    let params = cfg.params(DEFAULT_ENTROPY_SYMBOLS);
    let mut rng = stream(params.seed, Purpose::Realization, 0);
    let r = generate(scheme, &params, &mut rng)?;
    let kernel = PulseKernel::for_realization(&r);
    let sig = if derivative {
        sample_with_derivative(&r, &kernel)?
    } else {
        sample_noiseless(&r, &kernel)?
    };
    let rate = sign_transition_rate(&r);
    let json = json!({
        "record": r.to_record(),
        "epochs": r.epochs(),
        "windows": r.windows(),
        "sign_transition_rate": rate,
        "sample_times": sig.sample_times,
        "z": sig.z,
        "zdot": sig.zdot,
    });
    let mut text = String::new();
    writeln!(
        text,
        "scheme {scheme}, N = {}, {} time axis",
        params.symbols,
        axis(&params)
    )
    .ok();
    writeln!(text, "dither                 {:.6} s", r.dither()).ok();
    writeln!(text, "sign transitions       {}", r.transitions().len()).ok();
    writeln!(
        text,
        "transition rate        {rate:.6} /s = {:.4} B",
        rate / params.bandwidth()
    )
    .ok();
    writeln!(
        text,
        "waveform mean          {:.6}",
        r.mean_level() * params.amplitude()
    )
    .ok();
    writeln!(text, "sample power           {:.6}", sig.mean_power()).ok();
    Ok(Report {
        schema: "binrate.gen.v1",
        json,
        csv: sig.to_csv(),
        text,
        side_files: Vec::new(),
    })
}

fn axis(params: &ModulationParams) -> &'static str {
    if params.cyclic {
        "cyclic"
    } else {
        "open"
    }
}

fn scheme_index(s: SchemeId) -> u64 {
    SchemeId::ALL.iter().position(|&x| x == s).unwrap_or(0) as u64
}

#[derive(Serialize)]
struct AcfColumn {
    scheme: SchemeId,
    analytic: Option<Vec<f64>>,
    empirical: Option<Vec<f64>>,
    max_deviation: Option<f64>,
}

fn cmd_acf(
    cfg: &RunConfig,
    tau_max: f64,
    empirical_symbols: usize,
    pps: usize,
    progress: Progress,
) -> CliResult<Report> {
    if !(tau_max > 0.0) || pps == 0 {
        return Err(CliError::Config(
            "tau-max and points-per-symbol must be positive".into(),
        ));
    }
    let schemes = cfg.schemes(&[SchemeId::A, SchemeId::B, SchemeId::C]);
    let count = (tau_max * pps as f64).round() as usize + 1;
    let lags: Vec<f64> = (0..count).map(|k| k as f64 / pps as f64).collect();
    let mut cols = Vec::new();
    for &s in &schemes {
        let analytic = AutocorrelationModel::new(s)
            .ok()
            .map(|m| lags.iter().map(|&t| m.value(t)).collect::<Vec<_>>());
        let empirical = if empirical_symbols > 0 {
            progress.note(format!(
                "acf: simulating {empirical_symbols} symbols of scheme {s}"
            ));
            let params = cfg
                .params(empirical_symbols)
                .with_symbols(empirical_symbols);
            let mut rng = stream(params.seed, Purpose::Waveform, scheme_index(s));
            let acf = empirical_autocorr(s, &params, tau_max, pps, &mut rng)?;
            Some(acf.values)
        } else {
            None
        };
        let max_deviation = match (&analytic, &empirical) {
            (Some(a), Some(e)) => Some(
                a.iter()
                    .zip(e)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            ),
            _ => None,
        };
        cols.push(AcfColumn {
            scheme: s,
            analytic,
            empirical,
            max_deviation,
        });
    }

    let mut csv = String::from("tau");
    for c in &cols {
        write!(csv, ",R_{0},Rhat_{0}", c.scheme).ok();
    }
    csv.push('\n');
    for (k, t) in lags.iter().enumerate() {
        write!(csv, "{t:.6}").ok();
        for c in &cols {
            let a = c
                .analytic
                .as_ref()
                .map(|v| format!("{:.12e}", v[k]))
                .unwrap_or_default();
            let e = c
                .empirical
                .as_ref()
                .map(|v| format!("{:.12e}", v[k]))
                .unwrap_or_default();
            write!(csv, ",{a},{e}").ok();
        }
        csv.push('\n');
    }

    let mut text = String::from("lags in units of T, values normalized to P = 1\n\n");
    writeln!(
        text,
        "{:<7} {:>10} {:>10} {:>10} {:>10} {:>12}",
        "scheme", "R(0)", "R(0.5T)", "R(T)", "R(1.5T)", "max |dev|"
    )
    .ok();
    for c in &cols {
        let at = |t: f64| {
            AutocorrelationModel::new(c.scheme)
                .map(|m| format!("{:.6}", m.value(t)))
                .unwrap_or_else(|_| "-".into())
        };
        let dev = c
            .max_deviation
            .map(|d| format!("{d:.2e}"))
            .unwrap_or_else(|| "-".into());
        writeln!(
            text,
            "{:<7} {:>10} {:>10} {:>10} {:>10} {:>12}",
            c.scheme.to_string(),
            at(0.0),
            at(0.5),
            at(1.0),
            at(1.5),
            dev
        )
        .ok();
    }
    Ok(Report {
        schema: "binrate.acf.v1",
        json: json!({ "lags": lags, "schemes": cols }),
        csv,
        text,
        side_files: Vec::new(),
    })
}

#[derive(Serialize)]
struct PsdColumn {
    scheme: SchemeId,
    source: &'static str,
    density: Vec<f64>,
    tones: Vec<binrate_core::spectral::Tone>,
    /// Density integral over the fine default grid plus all tones there.
    total_power: f64,
    tone_power: f64,
    gamma: f64,
    delta: f64,
}

fn cmd_psd(
    cfg: &RunConfig,
    f_max: f64,
    df: f64,
    welch_symbols: usize,
    progress: Progress,
) -> CliResult<Report> {
    let schemes = cfg.schemes(&[SchemeId::A, SchemeId::B, SchemeId::C]);
    let mut grid = Vec::new();
    let mut cols = Vec::new();
    for &s in &schemes {
        let (model, full): (PsdModel, PsdModel) = if s == SchemeId::B1 {
            progress.note(format!(
                "psd: Welch estimate of scheme B1 from {welch_symbols} symbols"
            ));
            let params = cfg.params(welch_symbols).with_symbols(welch_symbols);
            let mut rng = stream(params.seed, Purpose::Waveform, scheme_index(s));
            let m = empirical_psd(s, &params, 32, 64, &mut rng)?;
            (m.clone(), m)
        } else {
            (psd(s, f_max, df)?, psd(s, DEFAULT_F_MAX, DEFAULT_DF)?)
        };
        let this_grid = binrate_core::spectral::psd(SchemeId::C, f_max, df)?.grid;
        let density: Vec<f64> = this_grid.iter().map(|&f| model.density_at(f)).collect();
        grid = this_grid;
        let (gamma, delta) = spectral_upper_bound(&model, 0.5);
        cols.push(PsdColumn {
            scheme: s,
            source: if s == SchemeId::B1 {
                "welch"
            } else {
                "closed form"
            },
            density,
            tones: model.tones.clone(),
            total_power: full.total_power,
            tone_power: full.tone_power(),
            gamma,
            delta,
        });
    }

    let mut csv = String::from("f");
    for c in &cols {
        write!(csv, ",S_{}", c.scheme).ok();
    }
    csv.push('\n');
    for (k, f) in grid.iter().enumerate() {
        write!(csv, "{f:.8}").ok();
        for c in &cols {
            write!(csv, ",{:.12e}", c.density[k]).ok();
        }
        csv.push('\n');
    }
    let mut tones_csv = String::from("scheme,f,power\n");
    for c in &cols {
        for t in &c.tones {
            writeln!(
                tones_csv,
                "{},{:.8},{:.12e}",
                c.scheme, t.frequency, t.power
            )
            .ok();
        }
    }
    let mut side_files = Vec::new();
    match &cfg.common.out {
        Some(out) => side_files.push((out.with_extension("tones.csv"), tones_csv)),
        None => {
            csv.push('\n');
            csv.push_str(&tones_csv);
        }
    }

    let mut text = String::from("frequencies in units of 1/T, one-sided densities for P = 1\n\n");
    writeln!(
        text,
        "{:<7} {:>12} {:>8} {:>12} {:>12} {:>9} {:>9}",
        "scheme", "S(0)", "tones", "tone power", "total power", "gamma", "Delta"
    )
    .ok();
    for c in &cols {
        writeln!(
            text,
            "{:<7} {:>12.6} {:>8} {:>12.6} {:>12.6} {:>9.4} {:>9.4}",
            c.scheme.to_string(),
            c.density.first().copied().unwrap_or(f64::NAN),
            c.tones.len(),
            c.tone_power,
            c.total_power,
            c.gamma,
            c.delta
        )
        .ok();
    }
    Ok(Report {
        schema: "binrate.psd.v1",
        json: json!({ "grid": grid, "schemes": cols }),
        csv,
        text,
        side_files,
    })
}

#[derive(Serialize)]
struct HdKey<'a> {
    what: &'static str,
    scheme: SchemeId,
    params: &'a ModulationParams,
    budget: &'a TrialBudget,
}

fn cached_hd(
    cache: &Cache,
    scheme: SchemeId,
    params: &ModulationParams,
    budget: &TrialBudget,
    progress: Progress,
) -> CliResult<EntropyEstimate> {
    let key = HdKey {
        what: "hd",
        scheme,
        params,
        budget,
    };
    cache.get_or_compute(&key, || {
        progress.note(format!("hd: scheme {scheme}, N = {}", params.symbols));
        Ok(estimate_hd(scheme, params, budget)?)
    })
}

fn cached_b1(
    cache: &Cache,
    params: &ModulationParams,
    budget: &TrialBudget,
    progress: Progress,
) -> CliResult<B1Estimate> {
    let key = HdKey {
        what: "b1",
        scheme: SchemeId::B1,
        params,
        budget,
    };
    cache.get_or_compute(&key, || {
        progress.note(format!("hd: scheme B1, N = {}", params.symbols));
        Ok(estimate_b1(params, budget)?)
    })
}

fn estimate_line(e: &EntropyEstimate) -> String {
    format!(
        "{:<6} {:<6} {:>6} {:>7} {:>11.6} {:>11.6} {:>9} {:>13}",
        e.scheme.to_string(),
        format!("{:?}", e.kind).to_lowercase(),
        e.symbols,
        e.trials,
        e.mean_nats,
        e.stderr_nats,
        e.excluded,
        e.near_singular
    )
}

fn cmd_hd(
    cfg: &RunConfig,
    cache: &Cache,
    dump: Option<PathBuf>,
    progress: Progress,
) -> CliResult<Report> {
    let schemes = cfg.schemes(&[SchemeId::A]);
    let params = cfg.params(DEFAULT_ENTROPY_SYMBOLS);
    let budget = cfg.budget();
    // Per-trial values are not cached; a dump forces a fresh run.
    let local = if dump.is_some() {
        Cache::disabled()
    } else {
        cache.clone()
    };
    let mut estimates: Vec<EntropyEstimate> = Vec::new();
    for &s in &schemes {
        match s {
            SchemeId::B1 => {
                let b = cached_b1(&local, &params, &budget, progress)?;
                estimates.extend([b.ha, b.hd, b.total]);
            }
            _ => estimates.push(cached_hd(&local, s, &params, &budget, progress)?),
        }
    }

    let mut csv =
        String::from("scheme,kind,N,trials,mean_nats,stderr_nats,excluded,near_singular\n");
    for e in &estimates {
        writeln!(
            csv,
            "{},{},{},{},{:.17e},{:.17e},{},{}",
            e.scheme,
            format!("{:?}", e.kind).to_lowercase(),
            e.symbols,
            e.trials,
            e.mean_nats,
            e.stderr_nats,
            e.excluded,
            e.near_singular
        )
        .ok();
    }
    let mut text = format!(
        "{:<6} {:<6} {:>6} {:>7} {:>11} {:>11} {:>9} {:>13}\n",
        "scheme", "term", "N", "trials", "nats", "stderr", "excluded", "near-singular"
    );
    for e in &estimates {
        text.push_str(&estimate_line(e));
        text.push('\n');
    }
    let mut side_files = Vec::new();
    if let Some(path) = dump {
        let mut body = String::from("scheme,kind,trial,value\n");
        for e in &estimates {
            for (i, v) in e.per_trial.iter().enumerate() {
                writeln!(
                    body,
                    "{},{},{i},{v:.17e}",
                    e.scheme,
                    format!("{:?}", e.kind).to_lowercase()
                )
                .ok();
            }
        }
        side_files.push((path, body));
    }
    Ok(Report {
        schema: "binrate.hd.v1",
        json: serde_json::to_value(&estimates)?,
        csv,
        text,
        side_files,
    })
}

#[derive(Serialize)]
struct SignKey<'a> {
    what: &'static str,
    params: &'a ModulationParams,
    samples: usize,
    binning: Binning,
}

fn sign_params(cfg: &RunConfig, override_n: bool) -> ModulationParams {
    let mut p = cfg.params(DEFAULT_SIGN_SYMBOLS_PER_RUN);
    if !override_n {
        p.symbols = DEFAULT_SIGN_SYMBOLS_PER_RUN;
    }
    p.cyclic = true;
    p
}

fn cached_sign_mi(
    cache: &Cache,
    params: &ModulationParams,
    samples: usize,
    binning: Binning,
    progress: Progress,
) -> CliResult<SignMiReport> {
    let key = SignKey {
        what: "sign_mi",
        params,
        samples,
        binning,
    };
    cache.get_or_compute(&key, || {
        progress.note(format!("sign-mi: {samples} derivative samples of scheme C"));
        let s = collect_derivatives(params, samples)?;
        Ok(estimate_sign_mi(&s, binning)?)
    })
}

fn cmd_sign_mi(
    cfg: &RunConfig,
    cache: &Cache,
    samples: usize,
    bins: Option<usize>,
    densities: Option<PathBuf>,
    progress: Progress,
) -> CliResult<Report> {
    let params = sign_params(cfg, true);
    let binning = bins
        .map(Binning::Count)
        .unwrap_or(Binning::FreedmanDiaconis);
    let mut side_files = Vec::new();
    let report = match densities {
        Some(path) => {
            progress.note(format!("sign-mi: {samples} derivative samples of scheme C"));
            let s = collect_derivatives(&params, samples)?;
            let report = estimate_sign_mi(&s, binning)?;
            let edges = shared_edges(&s, binning)?;
            side_files.push((path, SignDensities::new(&s, &edges).to_csv()));
            report
        }
        None => cached_sign_mi(cache, &params, samples, binning, progress)?,
    };
    let csv = format!(
        "samples,bins,mi_bits,stability_delta,overlap\n{},{},{:.17e},{:.17e},{:.17e}\n",
        report.samples, report.bins, report.mi_bits, report.stability_delta, report.overlap
    );
    let text = format!(
        "samples             {}\nbins                {}\nsign information    {:.5} bits/symbol\nbin-halving delta   {:.2e} bits\noverlap             {:.4}\npower gain          {:.4}\n",
        report.samples,
        report.bins,
        report.mi_bits,
        report.stability_delta,
        report.overlap,
        (2.0 * report.mi_bits).exp2()
    );
    Ok(Report {
        schema: "binrate.sign-mi.v1",
        json: serde_json::to_value(&report)?,
        csv,
        text,
        side_files,
    })
}

/// Entropy and sign-information inputs of the lower-bound table.
pub fn table2_inputs(
    cfg: &RunConfig,
    cache: &Cache,
    progress: Progress,
) -> CliResult<Table2Inputs> {
    let params = cfg.params(DEFAULT_ENTROPY_SYMBOLS);
    let budget = cfg.budget();
    let hd_ab = cached_hd(cache, SchemeId::A, &params, &budget, progress)?;
    let b1 = cached_b1(cache, &params, &budget, progress)?;
    let sp = sign_params(cfg, false);
    let si = cached_sign_mi(
        cache,
        &sp,
        DEFAULT_SIGN_SAMPLES,
        Binning::FreedmanDiaconis,
        progress,
    )?;
    Ok(Table2Inputs {
        hd_ab: Some(hd_ab),
        b1: Some(b1),
        sign_info: Some(SignInformation {
            bits: si.mi_bits,
            stability_delta: si.stability_delta,
            samples: si.samples,
        }),
    })
}

fn cmd_bounds(cfg: &RunConfig, cache: &Cache, progress: Progress) -> CliResult<Report> {
    let rows = build_table2(&table2_inputs(cfg, cache, progress)?)?;
    let grid = cfg.snr_grid();
    let curves = bound_curves(&rows, &grid)?;
    let mut csv = String::from("rho_db,awgn,owz");
    for (label, _) in &curves.schemes {
        write!(csv, ",\"{label}\"").ok();
    }
    csv.push('\n');
    for k in 0..grid.len() {
        write!(
            csv,
            "{},{:.12e},{:.12e}",
            grid[k], curves.awgn[k], curves.owz[k]
        )
        .ok();
        for (_, v) in &curves.schemes {
            write!(csv, ",{:.12e}", v[k]).ok();
        }
        csv.push('\n');
    }
    let mut text = format!("{:>8} {:>9} {:>9}", "SNR dB", "AWGN", "OWZ");
    let short = ["A/B", "B1", "C"];
    for (i, _) in curves.schemes.iter().enumerate() {
        write!(text, " {:>9}", short.get(i).copied().unwrap_or("?")).ok();
    }
    text.push_str("\n");
    for k in 0..grid.len() {
        write!(
            text,
            "{:>8.1} {:>9.4} {:>9.4}",
            grid[k], curves.awgn[k], curves.owz[k]
        )
        .ok();
        for (_, v) in &curves.schemes {
            write!(text, " {:>9.4}", v[k]).ok();
        }
        text.push('\n');
    }
    text.push_str("bits per Nyquist interval; the scheme C column repeats A/B below asymptotically high SNR\n");
    Ok(Report {
        schema: "binrate.bounds.v1",
        json: json!({ "rows": rows, "curves": curves }),
        csv,
        text,
        side_files: Vec::new(),
    })
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}"))
        .unwrap_or_else(|| "unavailable".into())
}

fn table_text(rows: &[BoundReport]) -> String {
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(10);
    let mut out = format!(
        "{:<width$}  {:>11}  {:>9}  {:>11}  {:>9}  {}\n",
        "Scheme", "gamma", "+-", "Delta", "+-", "provenance"
    );
    for r in rows {
        writeln!(
            out,
            "{:<width$}  {:>11}  {:>9}  {:>11}  {:>9}  {}",
            r.label,
            fmt_opt(r.gamma, 4),
            r.gamma_stderr
                .map(|s| format!("{s:.4}"))
                .unwrap_or_else(|| "-".into()),
            fmt_opt(r.delta, 4),
            r.delta_stderr
                .map(|s| format!("{s:.4}"))
                .unwrap_or_else(|| "-".into()),
            serde_json::to_value(r.provenance)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default()
        )
        .ok();
    }
    out
}

fn table_csv(rows: &[BoundReport]) -> String {
    let mut out = String::from("label,gamma,gamma_stderr,delta,delta_stderr,provenance,inputs\n");
    let cell = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "\"{}\",{},{},{},{},{},\"{}\"",
            r.label,
            cell(r.gamma),
            cell(r.gamma_stderr),
            cell(r.delta),
            cell(r.delta_stderr),
            serde_json::to_value(r.provenance)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            r.inputs.replace('"', "'")
        )
        .ok();
    }
    out
}

fn cmd_table(cfg: &RunConfig, cache: &Cache, which: u8, progress: Progress) -> CliResult<Report> {
    match which {
        1 => {
            let rows = build_table1()?;
            Ok(Report {
                schema: "binrate.table1.v1",
                json: json!({ "rows": rows }),
                csv: table_csv(&rows),
                text: format!(
                    "Upper bounds using Gaussian inputs with the scheme spectra (high SNR)\n\n{}",
                    table_text(&rows)
                ),
                side_files: Vec::new(),
            })
        }
        2 => {
            let rows = build_table2(&table2_inputs(cfg, cache, progress)?)?;
            let gap = binary_bound_gap(&rows);
            let upper_delta = gamma_to_delta(binrate_core::bounds::BINARY_UPPER_GAMMA)?;
            let mut text = format!(
                "Comparison of different approaches (high SNR)\n\n{}",
                table_text(&rows)
            );
            match gap {
                Some((g, se)) => writeln!(
                    text,
                    "\nGap between the binary upper bound and the best lower bound (B1): {g:.4} +- {} bits per Nyquist interval",
                    se.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into())
                ),
                None => writeln!(text, "\nGap: unavailable"),
            }
            .ok();
            let mut csv = table_csv(&rows);
            if let Some((g, se)) = gap {
                writeln!(
                    csv,
                    "\"Gap to the binary upper bound\",,,{g:.12e},{},derived,\"Delta(B1) - {upper_delta:.6}\"",
                    se.map(|s| format!("{s:.12e}")).unwrap_or_default()
                )
                .ok();
            }
            Ok(Report {
                schema: "binrate.table2.v1",
                json: json!({
                    "rows": rows,
                    "gap": gap.map(|(g, se)| json!({ "delta_bits": g, "stderr": se })),
                }),
                csv,
                text,
                side_files: Vec::new(),
            })
        }
        _ => Err(CliError::Config(format!("no table {which}; choose 1 or 2"))),
    }
}
