//! Capacity baselines, entropy-power lower bounds and the summary tables.
//!
//! Rates are in bits per Nyquist interval. A scheme with equivalent power
//! factor `gamma` achieves `0.5 log2(1 + gamma rho)` and, at high SNR, loses
//! `Delta = -0.5 log2(gamma)` against the unconstrained Gaussian input.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::entropy::{B1Estimate, EntropyEstimate};
use crate::error::{Error, Result};
use crate::signal_model::SchemeId;
use crate::spectral::{flat_psd, psd, spectral_upper_bound, DEFAULT_DF};

/// `gamma` of the peak-limited uniform PAM baseline, `2e / pi^3`.
pub const OWZ_GAMMA: f64 = 2.0 * E / (PI * PI * PI);

/// Published upper bound on `gamma` for any binary input.
pub const BINARY_UPPER_GAMMA: f64 = 0.9337;

/// Published upper bound on `gamma` for the random telegraph signal.
pub const RTS_UPPER_GAMMA: f64 = 0.6271;

pub fn awgn_capacity(rho: f64) -> f64 {
    0.5 * (1.0 + rho).log2()
}

pub fn owz_bound(rho: f64) -> f64 {
    0.5 * (rho * OWZ_GAMMA + 1.0).log2()
}

/// Entropy power of `h` nats per sample relative to a unit-power Gaussian.
pub fn epi_gamma(h_total: f64) -> f64 {
    (2.0 * h_total).exp() / (2.0 * PI * E)
}

pub fn epi_lower_bound(h_total: f64, rho: f64) -> f64 {
    0.5 * (1.0 + rho * epi_gamma(h_total)).log2()
}

/// `gamma_ab * 2^(2 dI)`.
pub fn scheme_c_gamma(gamma_ab: f64, sign_info_bits: f64) -> f64 {
    gamma_ab * (2.0 * sign_info_bits).exp2()
}

pub fn gamma_to_delta(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::NonPositiveGamma(gamma));
    }
    Ok(-0.5 * gamma.log2() + 0.0)
}

pub fn delta_to_gamma(delta: f64) -> f64 {
    (-2.0 * delta).exp2()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rho_db: f64,
    pub bits: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Follows from a definition.
    Definition,
    /// Closed-form expression.
    ClosedForm,
    /// High-SNR spectral bound evaluated from the closed-form spectrum.
    Spectrum,
    /// Entropy-power bound on Monte-Carlo entropy estimates.
    EntropyEstimate,
    /// Entropy-power bound plus the estimated sign information.
    EntropyAndSignInformation,
    /// Published value imported as a constant; no uncertainty attached.
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub label: String,
    pub scheme: Option<SchemeId>,
    pub provenance: Provenance,
    /// `None` when a required estimate is missing.
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub gamma_stderr: Option<f64>,
    pub delta_stderr: Option<f64>,
    /// Free-form note on what fed the row.
    pub inputs: String,
}

impl BoundReport {
    fn from_gamma(
        label: &str,
        scheme: Option<SchemeId>,
        provenance: Provenance,
        gamma: f64,
        gamma_stderr: Option<f64>,
        inputs: String,
    ) -> Result<Self> {
        let delta = gamma_to_delta(gamma)?;
        // dDelta = dgamma / (2 gamma ln 2).
        let delta_stderr = gamma_stderr.map(|s| s / (2.0 * gamma * std::f64::consts::LN_2));
        Ok(Self {
            label: label.to_string(),
            scheme,
            provenance,
            gamma: Some(gamma),
            delta: Some(delta),
            gamma_stderr,
            delta_stderr,
            inputs,
        })
    }

    fn unavailable(
        label: &str,
        scheme: Option<SchemeId>,
        provenance: Provenance,
        why: &str,
    ) -> Self {
        Self {
            label: label.to_string(),
            scheme,
            provenance,
            gamma: None,
            delta: None,
            gamma_stderr: None,
            delta_stderr: None,
            inputs: format!("unavailable: {why}"),
        }
    }

    pub fn is_available(&self) -> bool {
        self.gamma.is_some()
    }

    /// `0.5 log2(1 + gamma rho)` over `rho_db`.
    pub fn curve(&self, rho_db: &[f64]) -> Option<Vec<CurvePoint>> {
        let g = self.gamma?;
        Some(
            rho_db
                .iter()
                .map(|&db| CurvePoint {
                    rho_db: db,
                    bits: 0.5 * (1.0 + g * db_to_linear(db)).log2(),
                })
                .collect(),
        )
    }
}

pub const LABEL_FLAT: &str = "Rectangular spectra 0 to B Hz";
pub const LABEL_GAUSSIAN: &str = "Gaussian signal with rectangular spectra 0 to B Hz";
pub const LABEL_OWZ: &str = "OWZ, achievable lower bound";
pub const LABEL_AB_SPECTRUM: &str = "Schemes A and B";
pub const LABEL_C_SPECTRUM: &str = "Scheme C";
pub const LABEL_AB: &str = "Schemes A and B, achievable lower bound";
pub const LABEL_B1: &str = "Scheme B1, achievable lower bound";
pub const LABEL_C: &str = "Scheme C, achievable lower bound";
pub const LABEL_BINARY_UPPER: &str = "Upper bound on binary schemes";
pub const LABEL_RTS_UPPER: &str = "Upper bound on the Random Telegraph signal";

fn external_rows() -> Result<Vec<BoundReport>> {
    Ok(vec![
        BoundReport::from_gamma(
            LABEL_BINARY_UPPER,
            None,
            Provenance::External,
            BINARY_UPPER_GAMMA,
            None,
            "published constant".into(),
        )?,
        BoundReport::from_gamma(
            LABEL_RTS_UPPER,
            None,
            Provenance::External,
            RTS_UPPER_GAMMA,
            None,
            "published constant".into(),
        )?,
    ])
}

/// High-SNR spectral bound of a closed-form scheme, in `(gamma, Delta)`.
pub fn spectral_gamma(scheme: SchemeId) -> Result<(f64, f64)> {
    let p = psd(scheme, 4.0, DEFAULT_DF)?;
    Ok(spectral_upper_bound(&p, 0.5))
}

/// Upper bounds from Gaussian inputs shaped like each scheme's spectrum.
pub fn build_table1() -> Result<Vec<BoundReport>> {
    let (flat, _) = spectral_upper_bound(&flat_psd(0.5, DEFAULT_DF)?, 0.5);
    let (ab, _) = spectral_gamma(SchemeId::A)?;
    let (c, _) = spectral_gamma(SchemeId::C)?;
    let mut rows = vec![
        BoundReport::from_gamma(
            LABEL_FLAT,
            None,
            Provenance::Definition,
            flat,
            None,
            "flat unit-power density on [0, B]".into(),
        )?,
        BoundReport::from_gamma(
            LABEL_AB_SPECTRUM,
            Some(SchemeId::A),
            Provenance::Spectrum,
            ab,
            None,
            "continuous spectrum of A (identical for B)".into(),
        )?,
        BoundReport::from_gamma(
            LABEL_C_SPECTRUM,
            Some(SchemeId::C),
            Provenance::Spectrum,
            c,
            None,
            "continuous spectrum of C".into(),
        )?,
    ];
    rows.extend(external_rows()?);
    Ok(rows)
}

/// Sign information feeding the scheme-C row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignInformation {
    pub bits: f64,
    /// Used as the uncertainty of `bits`.
    pub stability_delta: f64,
    pub samples: usize,
}

/// Inputs of the lower-bound table; missing entries produce unavailable rows.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table2Inputs {
    pub hd_ab: Option<EntropyEstimate>,
    pub b1: Option<B1Estimate>,
    pub sign_info: Option<SignInformation>,
}

pub fn build_table2(inputs: &Table2Inputs) -> Result<Vec<BoundReport>> {
    let mut rows = vec![
        BoundReport::from_gamma(
            LABEL_GAUSSIAN,
            None,
            Provenance::Definition,
            1.0,
            None,
            "reference input".into(),
        )?,
        BoundReport::from_gamma(
            LABEL_OWZ,
            None,
            Provenance::ClosedForm,
            OWZ_GAMMA,
            None,
            "2e/pi^3".into(),
        )?,
    ];

    let ab = match &inputs.hd_ab {
        Some(h) => {
            let g = epi_gamma(h.mean_nats);
            Some(BoundReport::from_gamma(
                LABEL_AB,
                Some(h.scheme),
                Provenance::EntropyEstimate,
                g,
                Some(2.0 * g * h.stderr_nats),
                format!(
                    "h_d = {:.5} +- {:.5} nats (scheme {}, N = {}, {} trials, seed {})",
                    h.mean_nats, h.stderr_nats, h.scheme, h.symbols, h.trials, h.seed
                ),
            )?)
        }
        None => None,
    };
    rows.push(ab.clone().unwrap_or_else(|| {
        BoundReport::unavailable(
            LABEL_AB,
            Some(SchemeId::A),
            Provenance::EntropyEstimate,
            "no h_d estimate",
        )
    }));

    rows.push(match &inputs.b1 {
        Some(b) => {
            let g = epi_gamma(b.total.mean_nats);
            BoundReport::from_gamma(
                LABEL_B1,
                Some(SchemeId::B1),
                Provenance::EntropyEstimate,
                g,
                Some(2.0 * g * b.total.stderr_nats),
                format!(
                    "h_a = {:.5} +- {:.5}, h_d = {:.5} +- {:.5} nats (N = {}, {} trials, seed {})",
                    b.ha.mean_nats,
                    b.ha.stderr_nats,
                    b.hd.mean_nats,
                    b.hd.stderr_nats,
                    b.total.symbols,
                    b.total.trials,
                    b.total.seed
                ),
            )?
        }
        None => BoundReport::unavailable(
            LABEL_B1,
            Some(SchemeId::B1),
            Provenance::EntropyEstimate,
            "no B1 entropy estimate",
        ),
    });

    rows.push(match (&ab, &inputs.sign_info, &inputs.hd_ab) {
        (Some(ab), Some(si), Some(h)) => {
            let g_ab = ab.gamma.unwrap_or(f64::NAN);
            let g = scheme_c_gamma(g_ab, si.bits);
            let rel = ((2.0 * h.stderr_nats).powi(2)
                + (2.0 * std::f64::consts::LN_2 * si.stability_delta).powi(2))
            .sqrt();
            BoundReport::from_gamma(
                LABEL_C,
                Some(SchemeId::C),
                Provenance::EntropyAndSignInformation,
                g,
                Some(g * rel),
                format!(
                    "A/B factor {:.5} times 2^(2 x {:.5} bits) from {} derivative samples; high SNR only",
                    g_ab, si.bits, si.samples
                ),
            )?
        }
        _ => BoundReport::unavailable(
            LABEL_C,
            Some(SchemeId::C),
            Provenance::EntropyAndSignInformation,
            "needs both the A/B entropy and the sign information",
        ),
    });

    rows.extend(external_rows()?);
    Ok(rows)
}

/// `Delta(B1) - Delta(binary upper bound)`, with the B1 uncertainty.
pub fn binary_bound_gap(rows: &[BoundReport]) -> Option<(f64, Option<f64>)> {
    let b1 = rows.iter().find(|r| r.label == LABEL_B1)?;
    let upper = gamma_to_delta(BINARY_UPPER_GAMMA).ok()?;
    Some((b1.delta? - upper, b1.delta_stderr))
}

/// Lower-bound curves over an SNR grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCurves {
    pub rho_db: Vec<f64>,
    pub awgn: Vec<f64>,
    pub owz: Vec<f64>,
    /// `(label, values)`; scheme C reuses the A/B curve because its sign
    /// term is only established at high SNR.
    pub schemes: Vec<(String, Vec<f64>)>,
}

pub fn bound_curves(rows: &[BoundReport], rho_db: &[f64]) -> Result<BoundCurves> {
    if rho_db.is_empty() {
        return Err(Error::InvalidParams("SNR grid is empty".into()));
    }
    let lin: Vec<f64> = rho_db.iter().map(|&d| db_to_linear(d)).collect();
    let find = |label: &str| rows.iter().find(|r| r.label == label && r.is_available());
    let mut schemes = Vec::new();
    for label in [LABEL_AB, LABEL_B1] {
        if let Some(row) = find(label) {
            let pts = row.curve(rho_db).unwrap_or_default();
            schemes.push((label.to_string(), pts.iter().map(|p| p.bits).collect()));
        }
    }
    if let (Some(_), Some(ab)) = (find(LABEL_C), find(LABEL_AB)) {
        let pts = ab.curve(rho_db).unwrap_or_default();
        schemes.push((LABEL_C.to_string(), pts.iter().map(|p| p.bits).collect()));
    }
    Ok(BoundCurves {
        rho_db: rho_db.to_vec(),
        awgn: lin.iter().map(|&r| awgn_capacity(r)).collect(),
        owz: lin.iter().map(|&r| owz_bound(r)).collect(),
        schemes,
    })
}
