//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p binrate-cli --test acceptance`.

use std::process::{Command, ExitCode};
use std::time::Instant;

use binrate_core::bounds::{
    binary_bound_gap, build_table1, build_table2, delta_to_gamma, epi_gamma, gamma_to_delta,
    owz_bound, scheme_c_gamma, SignInformation, Table2Inputs, BINARY_UPPER_GAMMA,
    LABEL_AB_SPECTRUM, LABEL_B1, LABEL_C, LABEL_C_SPECTRUM, LABEL_FLAT, LABEL_OWZ, OWZ_GAMMA,
};
use binrate_core::entropy::{
    build_jacobian, estimate_b1, estimate_hd, finite_difference_column, verify_ab_equivalence,
    EntropyEstimate, TrialBudget,
};
use binrate_core::linalg::log_abs_det;
use binrate_core::rng::{stream, Purpose};
use binrate_core::sign_mi::{collect_derivatives, estimate_sign_mi, Binning};
use binrate_core::signal_model::{generate, sign_transition_rate};
use binrate_core::spectral::{
    closed_form_sc, empirical_autocorr, numeric_density, psd, AutocorrelationModel, DEFAULT_DF,
    DEFAULT_F_MAX,
};
use binrate_core::{ModulationParams, SchemeId};
use rand::Rng;

struct Suite {
    failed: usize,
}

impl Suite {
    fn check(&mut self, id: &str, what: &str, pass: bool, detail: String) {
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("{tag} [{id}] {what}: {detail}");
        if !pass {
            self.failed += 1;
        }
    }

    fn error(&mut self, id: &str, e: impl std::fmt::Display) {
        println!("FAIL [{id}] could not run: {e}");
        self.failed += 1;
    }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn params(n: usize) -> ModulationParams {
    ModulationParams::default().with_symbols(n)
}

fn timed<T>(label: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    println!("     ({label} took {:.1} s)", t.elapsed().as_secs_f64());
    out
}

struct Shared {
    hd_a: Option<EntropyEstimate>,
    b1: Option<binrate_core::entropy::B1Estimate>,
}

fn criterion_1(s: &mut Suite, shared: &mut Shared) {
    let run = timed("criterion 1", || -> binrate_core::Result<_> {
        let a500 = estimate_hd(SchemeId::A, &params(500), &TrialBudget::default())?;
        let a1000 = estimate_hd(SchemeId::A, &params(1000), &TrialBudget::default())?;
        Ok((a500, a1000))
    });
    match run {
        Ok((a500, a1000)) => {
            s.check(
                "1a",
                "h_d(A), cyclic N = 500, >= 200 trials, 0.5197 +- 0.005 nats",
                a500.trials >= 200 && within(a500.mean_nats, 0.5197, 0.005),
                format!(
                    "{:.5} +- {:.5} nats over {} trials",
                    a500.mean_nats, a500.stderr_nats, a500.trials
                ),
            );
            let combined = a500.stderr_nats.hypot(a1000.stderr_nats);
            let gap = (a1000.mean_nats - a500.mean_nats).abs();
            s.check(
                "1b",
                "h_d(A) at N = 1000 agrees with N = 500 within 2 combined stderr",
                gap <= 2.0 * combined,
                format!(
                    "N=1000: {:.5} +- {:.5}; gap {gap:.5} vs limit {:.5}",
                    a1000.mean_nats,
                    a1000.stderr_nats,
                    2.0 * combined
                ),
            );
            shared.hd_a = Some(a500);
        }
        Err(e) => s.error("1", e),
    }
}

fn criterion_2(s: &mut Suite, shared: &Shared) {
    let run = timed("criterion 2", || -> binrate_core::Result<_> {
        let paired = verify_ab_equivalence(&params(500), 200)?;
        // Independent seed for the aggregate comparison.
        let b = estimate_hd(
            SchemeId::B,
            &ModulationParams {
                seed: 2,
                ..params(500)
            },
            &TrialBudget::default(),
        )?;
        Ok((paired, b))
    });
    match (run, &shared.hd_a) {
        (Ok((paired, b)), Some(a)) => {
            s.check(
                "2a",
                "paired A/B |det J| equal to 1e-6 relative",
                paired.max_relative_gap <= 1e-6,
                format!(
                    "max relative gap {:.2e} over {} pairs",
                    paired.max_relative_gap, paired.trials
                ),
            );
            let gap = (a.mean_nats - b.mean_nats).abs();
            s.check(
                "2b",
                "aggregate h_d(A) - h_d(B) below 0.005 nats",
                gap < 0.005,
                format!(
                    "A {:.5}, B {:.5} (seed 2), gap {gap:.5}",
                    a.mean_nats, b.mean_nats
                ),
            );
        }
        (Err(e), _) => s.error("2", e),
        (_, None) => s.error("2", "h_d(A) unavailable"),
    }
}

fn criterion_3(s: &mut Suite, shared: &mut Shared) {
    match timed("criterion 3", || {
        estimate_b1(&params(500), &TrialBudget::default())
    }) {
        Ok(b1) => {
            let gamma = epi_gamma(b1.total.mean_nats);
            let delta = gamma_to_delta(gamma).unwrap_or(f64::NAN);
            s.check(
                "3a",
                "h_a(B1) = 0.4095 +- 0.005 nats",
                within(b1.ha.mean_nats, 0.4095, 0.005),
                format!("{:.5} +- {:.5} nats", b1.ha.mean_nats, b1.ha.stderr_nats),
            );
            s.check(
                "3b",
                "gamma(B1) = 0.2586 +- 0.005",
                within(gamma, 0.2586, 0.005),
                format!(
                    "{gamma:.5} from h_a + h_d = {:.5} + {:.5} nats",
                    b1.ha.mean_nats, b1.hd.mean_nats
                ),
            );
            s.check(
                "3c",
                "Delta(B1) = 0.976 +- 0.01 bits per interval",
                within(delta, 0.976, 0.01),
                format!("{delta:.5}"),
            );
            shared.b1 = Some(b1);
        }
        Err(e) => s.error("3", e),
    }
}

fn criterion_4(s: &mut Suite, shared: &Shared) -> Option<SignInformation> {
    let sp = params(1000);
    let run = timed("criterion 4", || -> binrate_core::Result<_> {
        let samples = collect_derivatives(&sp, 1_000_000)?;
        estimate_sign_mi(&samples, Binning::FreedmanDiaconis)
    });
    match (run, &shared.hd_a) {
        (Ok(report), Some(a)) => {
            s.check(
                "4a",
                "sign information of C = 0.136 +- 0.01 bits per symbol, 1e6 noiseless samples",
                report.samples == 1_000_000 && within(report.mi_bits, 0.136, 0.01),
                format!(
                    "{:.5} bits, {} bins, bin-halving change {:.1e}",
                    report.mi_bits, report.bins, report.stability_delta
                ),
            );
            let gamma_c = scheme_c_gamma(epi_gamma(a.mean_nats), report.mi_bits);
            s.check(
                "4b",
                "gamma(C) = 0.20 +- 0.005",
                within(gamma_c, 0.20, 0.005),
                format!("{gamma_c:.5}"),
            );
            Some(SignInformation {
                bits: report.mi_bits,
                stability_delta: report.stability_delta,
                samples: report.samples,
            })
        }
        (Err(e), _) => {
            s.error("4", e);
            None
        }
        (_, None) => {
            s.error("4", "h_d(A) unavailable");
            None
        }
    }
}

fn criterion_5(s: &mut Suite) {
    match timed("criterion 5", build_table1) {
        Ok(rows) => {
            let g = |label: &str| {
                rows.iter()
                    .find(|r| r.label == label)
                    .and_then(|r| r.gamma)
                    .unwrap_or(f64::NAN)
            };
            let (ab, c, flat) = (g(LABEL_AB_SPECTRUM), g(LABEL_C_SPECTRUM), g(LABEL_FLAT));
            s.check(
                "5a",
                "spectral gamma(A/B) = 0.30 +- 0.01",
                within(ab, 0.30, 0.01),
                format!("{ab:.5}"),
            );
            s.check(
                "5b",
                "spectral gamma(C) = 0.367 +- 0.005",
                within(c, 0.367, 0.005),
                format!("{c:.5}"),
            );
            s.check(
                "5c",
                "flat reference gamma = 1 exactly",
                flat == 1.0,
                format!("{flat}"),
            );
        }
        Err(e) => s.error("5", e),
    }
}

fn criterion_6(s: &mut Suite) {
    let delta = gamma_to_delta(OWZ_GAMMA).unwrap_or(f64::NAN);
    // High-SNR loss of the closed-form bound itself.
    let rho: f64 = 1e12;
    let delta_curve = 0.5 * (1.0 + rho).log2() - owz_bound(rho);
    s.check(
        "6a",
        "gamma(OWZ) = 2e/pi^3 = 0.1753 +- 1e-4",
        within(OWZ_GAMMA, 0.1753, 1e-4),
        format!("{OWZ_GAMMA:.6}"),
    );
    s.check(
        "6b",
        "Delta(OWZ) = 1.256 +- 1e-3",
        within(delta, 1.256, 1e-3) && within(delta_curve, 1.256, 1e-3),
        format!("{delta:.6} (curve at 120 dB: {delta_curve:.6})"),
    );
}

fn criterion_7(s: &mut Suite, shared: &Shared, sign: Option<SignInformation>) {
    let inputs = Table2Inputs {
        hd_ab: shared.hd_a.clone(),
        b1: shared.b1.clone(),
        sign_info: sign,
    };
    match build_table2(&inputs) {
        Ok(rows) => {
            let gap = binary_bound_gap(&rows);
            let b1 = rows
                .iter()
                .find(|r| r.label == LABEL_B1)
                .and_then(|r| r.delta);
            let upper = gamma_to_delta(BINARY_UPPER_GAMMA).unwrap_or(f64::NAN);
            match gap {
                Some((g, _)) => s.check(
                    "7",
                    "Delta(B1) - Delta(binary upper bound 0.9337) = 0.93 +- 0.01",
                    within(g, 0.93, 0.01),
                    format!("{:.5} - {upper:.5} = {g:.5}", b1.unwrap_or(f64::NAN)),
                ),
                None => s.error("7", "B1 row unavailable"),
            }
            let unavailable: Vec<_> = [LABEL_OWZ, LABEL_B1, LABEL_C]
                .iter()
                .filter(|l| !rows.iter().any(|r| r.label == **l && r.is_available()))
                .collect();
            if !unavailable.is_empty() {
                println!("     note: unavailable rows {unavailable:?}");
            }
        }
        Err(e) => s.error("7", e),
    }
}

fn criterion_8(s: &mut Suite) {
    let t = Instant::now();
    let c = match AutocorrelationModel::new(SchemeId::C) {
        Ok(m) => m,
        Err(e) => return s.error("8", e),
    };
    // [0, 4B] with B = 1/(2T).
    let mut worst = 0.0f64;
    for k in 0..=128 {
        let f = k as f64 / 64.0;
        worst = worst.max((closed_form_sc(f) - numeric_density(&c, f)).abs());
    }
    s.check(
        "8a",
        "closed-form S_C against numeric transform of R_C on [0, 4B] below 1e-3",
        worst < 1e-3,
        format!("max deviation {worst:.2e}"),
    );
    let s0 = closed_form_sc(0.0);
    s.check(
        "8b",
        "S_C(0) = 2/3 +- 1e-4",
        within(s0, 2.0 / 3.0, 1e-4),
        format!("{s0:.8}"),
    );
    for scheme in [SchemeId::A, SchemeId::B, SchemeId::C] {
        match psd(scheme, DEFAULT_F_MAX, DEFAULT_DF) {
            Ok(m) => s.check(
                &format!("8c-{scheme}"),
                &format!("total power of scheme {scheme} = 1 +- 1e-3"),
                within(m.total_power, 1.0, 1e-3),
                format!(
                    "{:.6} (continuous {:.6} + tones {:.6})",
                    m.total_power,
                    m.continuous_power(),
                    m.tone_power()
                ),
            ),
            Err(e) => s.error("8c", e),
        }
    }
    for (i, scheme) in [SchemeId::A, SchemeId::B, SchemeId::C]
        .into_iter()
        .enumerate()
    {
        let model = AutocorrelationModel::new(scheme).expect("closed form exists");
        let mut rng = stream(1, Purpose::Waveform, i as u64);
        match empirical_autocorr(scheme, &params(100_000), 3.0, 32, &mut rng) {
            Ok(acf) => {
                let dev = acf.max_deviation(|t| model.value(t), 3.0);
                s.check(
                    &format!("8d-{scheme}"),
                    &format!("analytic vs simulated R_{scheme} below 0.01 on [0, 3T]"),
                    dev < 0.01,
                    format!("max deviation {dev:.2e} from {} samples", acf.samples),
                );
            }
            Err(e) => s.error("8d", e),
        }
    }
    println!("     (criterion 8 took {:.1} s)", t.elapsed().as_secs_f64());
}

/// The antiperiodic B tail as printed in the closed-form listing, with
/// `-6 tau` where the derivation gives `-6 tau^2`.
fn printed_b_tail(tau: f64) -> f64 {
    let tn = tau.fract();
    let sign = if (tau.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    sign * (4.0 * tn.powi(3) - 6.0 * tn + 1.0) / 3.0
}

fn criterion_9(s: &mut Suite) {
    let model = AutocorrelationModel::new(SchemeId::B).expect("closed form exists");
    let mut rng = stream(9, Purpose::Waveform, 1);
    let acf = match timed("criterion 9", || {
        empirical_autocorr(SchemeId::B, &params(100_000), 3.0, 32, &mut rng)
    }) {
        Ok(a) => a,
        Err(e) => return s.error("9", e),
    };
    let dev = acf
        .lags
        .iter()
        .zip(&acf.values)
        .filter(|(t, _)| (1.0..=3.0).contains(*t))
        .map(|(&t, &v)| (v - model.value(t)).abs())
        .fold(0.0, f64::max);
    s.check(
        "9a",
        "adopted R_B tail matches simulation within 0.01 on [T, 3T]",
        dev < 0.01,
        format!("max deviation {dev:.2e}"),
    );
    let k = acf.lags.iter().position(|&t| (t - 1.5).abs() < 1e-12);
    match k {
        Some(k) => {
            let measured = acf.values[k];
            let printed = printed_b_tail(1.5);
            let off = (printed - measured).abs();
            s.check(
                "9b",
                "printed tail variant deviates by more than 0.05 at tau_n = 0.5",
                off > 0.05,
                format!(
                    "simulated {measured:.4}, adopted {:.4}, printed {printed:.4}",
                    model.value(1.5)
                ),
            );
        }
        None => s.error("9b", "lag 1.5T not on the grid"),
    }
}

fn criterion_10(s: &mut Suite) {
    let bandwidth = params(1).bandwidth();
    let mut rate = |scheme: SchemeId, n: usize| -> Option<f64> {
        let mut rng = stream(10, Purpose::Auxiliary, n as u64 + scheme as u64);
        match generate(scheme, &params(n), &mut rng) {
            Ok(r) => Some(sign_transition_rate(&r) / bandwidth),
            Err(e) => {
                s.error("10", e);
                None
            }
        }
    };
    let (a, b, b1, c) = (
        rate(SchemeId::A, 10_000),
        rate(SchemeId::B, 10_000),
        rate(SchemeId::B1, 10_000),
        rate(SchemeId::C, 400_000),
    );
    if let (Some(a), Some(b), Some(b1), Some(c)) = (a, b, b1, c) {
        s.check(
            "10a",
            "STR(A) = 4B",
            within(a, 4.0, 1e-9),
            format!("{a:.6} B"),
        );
        s.check(
            "10b",
            "STR(B) = 2B",
            within(b, 2.0, 1e-9),
            format!("{b:.6} B"),
        );
        s.check(
            "10c",
            "STR(B1) <= 2B",
            b1 <= 2.0 + 1e-12,
            format!("{b1:.6} B"),
        );
        s.check(
            "10d",
            "STR(C) = 3B +- 1%",
            within(c, 3.0, 0.03),
            format!("{c:.6} B"),
        );
    }
}

fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<f64>> = a[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][j] * cofactor_det(&minor)
        })
        .sum()
}

fn hd_json(workers: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_binrate"))
        .args([
            "hd",
            "--scheme",
            "A",
            "--scheme",
            "B1",
            "--n",
            "60",
            "--trials",
            "40",
            "--format",
            "json",
            "--no-cache",
            "--quiet",
        ])
        .env("BINRATE_WORKERS", workers)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn criterion_11(s: &mut Suite) {
    // Finite-difference Jacobian columns.
    let p = params(80);
    let mut worst = 0.0f64;
    for (k, scheme) in [SchemeId::A, SchemeId::B, SchemeId::B1]
        .into_iter()
        .enumerate()
    {
        let mut rng = stream(11, Purpose::Realization, k as u64);
        let r = generate(scheme, &p, &mut rng).expect("valid parameters");
        let jac = build_jacobian(&r).expect("Jacobian");
        for j in [0, 17, 79] {
            let fd = finite_difference_column(&r, j, 1e-6).expect("column");
            let exact = jac.column(j);
            let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = fd
                .iter()
                .zip(&exact)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            worst = worst.max(err / scale);
        }
    }
    s.check(
        "11a",
        "Jacobian columns against central finite differences within 1e-4 relative",
        worst < 1e-4,
        format!("worst relative error {worst:.2e}"),
    );

    let mut rng = stream(11, Purpose::Auxiliary, 0);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        for _ in 0..50 {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let oracle = cofactor_det(&rows).abs().ln();
            let mut flat: Vec<f64> = rows.concat();
            let ld = log_abs_det(&mut flat, n);
            worst = worst.max(((ld.log_abs - oracle) / oracle.abs().max(1.0)).abs());
        }
    }
    s.check(
        "11b",
        "LU log-determinant against cofactor expansion for N <= 6 within 1e-8 relative",
        worst < 1e-8,
        format!("worst relative error {worst:.2e}"),
    );

    let mut worst = 0.0f64;
    for k in 1..=1000 {
        let g = k as f64 / 1000.0;
        let d = gamma_to_delta(g).expect("positive gamma");
        worst = worst
            .max((delta_to_gamma(d) - g).abs())
            .max((d + 0.5 * g.log2()).abs());
    }
    s.check(
        "11c",
        "Delta = -0.5 log2 gamma round trip within 1e-9",
        worst < 1e-9,
        format!("worst error {worst:.2e}"),
    );

    let runs = (hd_json("1"), hd_json("1"), hd_json("3"));
    match runs {
        (Ok(a), Ok(b), Ok(c)) => s.check(
            "11d",
            "output bytes identical across reruns and worker counts",
            a == b && a == c && !a.is_empty(),
            format!(
                "{} bytes; rerun {}, 1 vs 3 workers {}",
                a.len(),
                if a == b { "equal" } else { "differs" },
                if a == c { "equal" } else { "differs" }
            ),
        ),
        (a, b, c) => {
            let e = [a.err(), b.err(), c.err()].into_iter().flatten().next();
            s.error("11d", e.unwrap_or_default());
        }
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut s = Suite { failed: 0 };
    let mut shared = Shared {
        hd_a: None,
        b1: None,
    };
    criterion_1(&mut s, &mut shared);
    criterion_2(&mut s, &shared);
    criterion_3(&mut s, &mut shared);
    let sign = criterion_4(&mut s, &shared);
    criterion_5(&mut s);
    criterion_6(&mut s);
    criterion_7(&mut s, &shared, sign);
    criterion_8(&mut s);
    criterion_9(&mut s);
    criterion_10(&mut s);
    criterion_11(&mut s);
    println!(
        "acceptance: {} failed, {:.0} s total",
        s.failed,
        start.elapsed().as_secs_f64()
    );
    if s.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
