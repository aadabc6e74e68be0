//! Autocorrelations and power spectra of the stationarized waveforms.
//!
//! Everything here is normalized to `P = 1` and `T = 1`: lags are in units
//! of `T`, frequencies in units of `1/T`, densities in units of `P T`.
//!
//! The closed-form schemes split as `R = c + tail`, where `tail` is the
//! periodic (A) or antiperiodic (B) continuation of the correlation beyond
//! one symbol and `c` is supported on `|tau| < 1`. The continuous spectrum
//! is the cosine transform of `c`, which is a cubic on `[0, 1]`, so it is
//! evaluated in closed form. The tail becomes a list of discrete tones.

use std::f64::consts::PI;

use rand::Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, GaussLegendre};
use crate::signal_model::{generate, ModulationParams, Realization, SchemeId};
use crate::special::{cos_pi, sin_pi};

/// Coarsest frequency step accepted by [`psd`], in units of `1/T`.
pub const MAX_FREQUENCY_STEP: f64 = 1.0 / 64.0;

/// Default grid used for spectra and power checks.
pub const DEFAULT_F_MAX: f64 = 2048.0;
pub const DEFAULT_DF: f64 = 1.0 / 64.0;

/// Cubic `p[0] + p[1] u + p[2] u^2 + p[3] u^3`.
pub type Cubic = [f64; 4];

fn eval(p: &Cubic, u: f64) -> f64 {
    ((p[3] * u + p[2]) * u + p[1]) * u + p[0]
}

fn derivative(p: &Cubic) -> Cubic {
    [p[1], 2.0 * p[2], 3.0 * p[3], 0.0]
}

fn sub(p: &Cubic, q: &Cubic) -> Cubic {
    [p[0] - q[0], p[1] - q[1], p[2] - q[2], p[3] - q[3]]
}

/// `int_0^1 p(u) cos(2 pi f u) du`, exact up to rounding.
pub fn cubic_cosine_integral(p: &Cubic, f: f64) -> f64 {
    let w = 2.0 * PI * f;
    if w.abs() < 4.0 {
        let gl = GaussLegendre::new(24);
        return gl.integrate(|u| eval(p, u) * cos_pi(2.0 * f * u), 0.0, 1.0, 1);
    }
    // Repeated integration by parts: the k-th derivative pairs with the
    // k-th antiderivative of the cosine, which cycles sin, cos, -sin, -cos.
    let antiderivative = |u: f64| {
        let (s, c) = (sin_pi(2.0 * f * u), cos_pi(2.0 * f * u));
        let mut d = *p;
        let mut acc = 0.0;
        let mut wk = w;
        for k in 0..4 {
            let trig = match k % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            acc += eval(&d, u) * trig / wk;
            d = derivative(&d);
            wk *= w;
        }
        acc
    };
    antiderivative(1.0) - antiderivative(0.0)
}

/// Continuation of the correlation beyond one symbol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    None,
    /// `g(tau mod 1)`.
    Periodic(Cubic),
    /// `g(tau mod 1) * (-1)^floor(tau)`.
    Antiperiodic(Cubic),
}

impl Tail {
    /// Value at lag `u >= 0`.
    pub fn value(&self, u: f64) -> f64 {
        match self {
            Tail::None => 0.0,
            Tail::Periodic(g) => eval(g, u - u.floor()),
            Tail::Antiperiodic(g) => {
                let n = u.floor();
                let v = eval(g, u - n);
                if n as i64 % 2 == 0 {
                    v
                } else {
                    -v
                }
            }
        }
    }

    fn polynomial(&self) -> Option<&Cubic> {
        match self {
            Tail::None => None,
            Tail::Periodic(g) | Tail::Antiperiodic(g) => Some(g),
        }
    }

    /// Tone frequencies up to `f_max`: integers for a periodic tail, odd
    /// multiples of one half for an antiperiodic one.
    fn tone_frequencies(&self, f_max: f64) -> Vec<f64> {
        match self {
            Tail::None => Vec::new(),
            Tail::Periodic(_) => (0..=f_max.floor() as usize).map(|k| k as f64).collect(),
            Tail::Antiperiodic(_) => (0..)
                .map(|m| m as f64 + 0.5)
                .take_while(|&f| f <= f_max)
                .collect(),
        }
    }
}

/// Closed-form stationarized autocorrelation of scheme A, B or C.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutocorrelationModel {
    pub scheme: SchemeId,
    /// `R` on `|tau| < 1`.
    pub compact: Cubic,
    pub tail: Tail,
}

impl AutocorrelationModel {
    pub fn new(scheme: SchemeId) -> Result<Self> {
        const THIRD: f64 = 1.0 / 3.0;
        let (compact, tail) = match scheme {
            SchemeId::A => (
                [1.0, -4.0, 4.0, -2.0 * THIRD],
                Tail::Periodic([THIRD, -2.0, 2.0, 0.0]),
            ),
            SchemeId::B => (
                [1.0, -2.0, 0.0, 2.0 * THIRD],
                Tail::Antiperiodic([THIRD, 0.0, -2.0, 4.0 * THIRD]),
            ),
            SchemeId::C => ([1.0, -3.0, 2.0, 0.0], Tail::None),
            SchemeId::B1 => {
                return Err(Error::Unsupported {
                    scheme,
                    operation: "closed-form autocorrelation",
                    hint: "use empirical_autocorr or empirical_psd",
                })
            }
        };
        Ok(Self {
            scheme,
            compact,
            tail,
        })
    }

    /// `R(tau)`.
    pub fn value(&self, tau: f64) -> f64 {
        let u = tau.abs();
        if u < 1.0 {
            eval(&self.compact, u)
        } else {
            self.tail.value(u)
        }
    }

    pub fn tail_value(&self, tau: f64) -> f64 {
        self.tail.value(tau.abs())
    }

    /// `R - tail` on `[0, 1]` as a cubic; it vanishes beyond.
    pub fn continuous_part(&self) -> Cubic {
        match self.tail.polynomial() {
            None => self.compact,
            Some(g) => sub(&self.compact, g),
        }
    }

    /// One-sided continuous density `4 int_0^1 c(u) cos(2 pi f u) du`.
    pub fn density(&self, f: f64) -> f64 {
        4.0 * cubic_cosine_integral(&self.continuous_part(), f)
    }

    /// Tones `(frequency, one-sided power)` up to `f_max`.
    pub fn tones(&self, f_max: f64) -> Vec<Tone> {
        let Some(g) = self.tail.polynomial() else {
            return Vec::new();
        };
        self.tail
            .tone_frequencies(f_max)
            .into_iter()
            .filter_map(|f| {
                // The mean of the tail is the DC line and carries weight 1.
                let weight = if f == 0.0 { 1.0 } else { 2.0 };
                let power = weight * cubic_cosine_integral(g, f);
                (power.abs() > 1e-15).then_some(Tone {
                    frequency: f,
                    power,
                })
            })
            .collect()
    }

    /// Total tone power, equal to the tail at zero lag.
    pub fn tone_power(&self) -> f64 {
        self.tail.value(0.0)
    }
}

/// `R(tau)` for scheme A, B or C.
pub fn autocorr(scheme: SchemeId, tau: f64) -> Result<f64> {
    Ok(AutocorrelationModel::new(scheme)?.value(tau))
}

/// One-sided continuous density of scheme C as a rational-trigonometric
/// expression in `f`.
pub fn closed_form_sc(f: f64) -> f64 {
    let x = PI * f;
    if x.abs() < 1e-2 {
        let x2 = x * x;
        return 2.0 / 3.0 + x2 * (2.0 / 15.0 - x2 * 4.0 / 105.0);
    }
    (3.0 * x - 2.0 * sin_pi(2.0 * f) + x * cos_pi(2.0 * f)) / (x * x * x)
}

/// Continuous density by direct quadrature of `R - tail` over `[0, 1]`
/// on panels of width `1e-4`.
pub fn numeric_density(model: &AutocorrelationModel, f: f64) -> f64 {
    let c = model.continuous_part();
    let gl = GaussLegendre::new(4);
    4.0 * gl.integrate(|u| eval(&c, u) * cos_pi(2.0 * f * u), 0.0, 1.0, 10_000)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency: f64,
    pub power: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PsdSource {
    /// Closed-form density of a scheme.
    Analytic(SchemeId),
    /// Flat unit-power density on `[0, band]`.
    Flat { band: f64 },
    /// Estimated from simulated waveforms; interpolated between grid points.
    Empirical(SchemeId),
}

/// One-sided spectrum: continuous density on a grid plus discrete tones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdModel {
    pub source: PsdSource,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub tones: Vec<Tone>,
    /// Trapezoid integral of the density over the grid plus tone power.
    pub total_power: f64,
    /// Multiplier applied to the continuous density.
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl PsdModel {
    pub fn density_at(&self, f: f64) -> f64 {
        let raw = match self.source {
            PsdSource::Analytic(scheme) => AutocorrelationModel::new(scheme)
                .map(|m| m.density(f))
                .unwrap_or(0.0),
            PsdSource::Flat { band } => {
                if (0.0..=band).contains(&f) {
                    1.0 / band
                } else {
                    0.0
                }
            }
            PsdSource::Empirical(_) => self.interpolate(f),
        };
        raw * self.scale
    }

    fn interpolate(&self, f: f64) -> f64 {
        let g = &self.grid;
        if g.is_empty() || f < g[0] || f > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&x| x <= f);
        if i == g.len() {
            return self.density[g.len() - 1];
        }
        let (f0, f1) = (g[i - 1], g[i]);
        let w = (f - f0) / (f1 - f0);
        self.density[i - 1] * (1.0 - w) + self.density[i] * w
    }

    pub fn tone_power(&self) -> f64 {
        self.tones.iter().map(|t| t.power).sum::<f64>() + 0.0
    }

    pub fn continuous_power(&self) -> f64 {
        trapezoid(&self.grid, &self.density) * self.scale
    }

    /// The same spectrum with its continuous density multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale *= factor;
        out.total_power = out.continuous_power() + out.tone_power();
        out
    }

    /// CSV with columns `f,density`.
    pub fn density_csv(&self) -> String {
        let mut out = String::from("f,density\n");
        for (f, d) in self.grid.iter().zip(&self.density) {
            out.push_str(&format!("{f:.10},{:.17e}\n", d * self.scale));
        }
        out
    }

    /// CSV with columns `f,power`.
    pub fn tones_csv(&self) -> String {
        let mut out = String::from("f,power\n");
        for t in &self.tones {
            out.push_str(&format!("{:.10},{:.17e}\n", t.frequency, t.power));
        }
        out
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

fn frequency_grid(f_max: f64, df: f64) -> Result<Vec<f64>> {
    if !(df > 0.0) || !(f_max > 0.0) {
        return Err(Error::InvalidParams(format!(
            "frequency grid needs positive f_max and step, got {f_max} and {df}"
        )));
    }
    if df > MAX_FREQUENCY_STEP * (1.0 + 1e-12) {
        return Err(Error::CoarseGrid {
            step: df,
            limit: MAX_FREQUENCY_STEP,
        });
    }
    let count = (f_max / df + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| k as f64 * df).collect())
}

/// Closed-form spectrum of scheme A, B or C on `[0, f_max]` with step `df`.
pub fn psd(scheme: SchemeId, f_max: f64, df: f64) -> Result<PsdModel> {
    let model = AutocorrelationModel::new(scheme).map_err(|_| Error::Unsupported {
        scheme,
        operation: "psd",
        hint: "use empirical_psd for scheme B1",
    })?;
    let grid = frequency_grid(f_max, df)?;
    let density: Vec<f64> = grid.iter().map(|&f| model.density(f)).collect();
    let tones = model.tones(f_max);
    let total_power = trapezoid(&grid, &density) + tones.iter().map(|t| t.power).sum::<f64>();
    Ok(PsdModel {
        source: PsdSource::Analytic(scheme),
        grid,
        density,
        tones,
        total_power,
        scale: 1.0,
    })
}

/// Unit-power density spread uniformly over `[0, band]`.
pub fn flat_psd(band: f64, df: f64) -> Result<PsdModel> {
    let grid = frequency_grid(band, df)?;
    let density = vec![1.0 / band; grid.len()];
    Ok(PsdModel {
        source: PsdSource::Flat { band },
        total_power: trapezoid(&grid, &density),
        grid,
        density,
        tones: Vec::new(),
        scale: 1.0,
    })
}

/// Equivalent power factor and information loss of a spectrum confined to
/// band `band` at high SNR:
/// `gamma = 2^{(1/B) int_0^B log2(S(f) B) df}`, `Delta = -log2(gamma)/2`.
///
/// Tones carry power but no in-band measure, so they never enter the
/// integral. A density vanishing inside the band gives `gamma = 0` and
/// `Delta = +inf`.
pub fn spectral_upper_bound(psd: &PsdModel, band: f64) -> (f64, f64) {
    // A density vanishing on a set of positive measure shows up on a fine
    // scan; isolated zeros are integrable and left to the quadrature.
    let scan = 4096;
    let zeros = (0..=scan)
        .filter(|&i| psd.density_at(band * i as f64 / scan as f64) <= 0.0)
        .count();
    if zeros > 1 {
        return (0.0, f64::INFINITY);
    }
    let log_density = |f: f64| {
        let s = psd.density_at(f);
        if s > 0.0 {
            (s * band).log2()
        } else {
            f64::NEG_INFINITY
        }
    };
    let mean_log = adaptive_simpson(log_density, 0.0, band, 1e-6) / band;
    if mean_log.is_nan() || mean_log == f64::NEG_INFINITY {
        return (0.0, f64::INFINITY);
    }
    let gamma = mean_log.exp2();
    (gamma, -0.5 * mean_log)
}

/// Time-averaged autocorrelation of one simulated waveform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalAcf {
    pub scheme: SchemeId,
    /// Lags in units of `T`.
    pub lags: Vec<f64>,
    pub values: Vec<f64>,
    pub samples: usize,
}

impl EmpiricalAcf {
    /// Largest `|R_hat - R|` against a reference over lags up to `max_lag`.
    pub fn max_deviation<F: Fn(f64) -> f64>(&self, reference: F, max_lag: f64) -> f64 {
        self.lags
            .iter()
            .zip(&self.values)
            .filter(|(l, _)| **l <= max_lag + 1e-12)
            .map(|(&l, &v)| (v - reference(l)).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,r\n");
        for (l, v) in self.lags.iter().zip(&self.values) {
            out.push_str(&format!("{l:.10},{v:.17e}\n"));
        }
        out
    }
}

fn dense_waveform<R: Rng + ?Sized>(
    scheme: SchemeId,
    params: &ModulationParams,
    points_per_symbol: usize,
    rng: &mut R,
) -> Result<(Realization, Vec<f64>)> {
    if points_per_symbol < 32 {
        return Err(Error::InvalidParams(format!(
            "dense sampling needs at least 32 points per symbol, got {points_per_symbol}"
        )));
    }
    let params = params.clone().with_cyclic(true);
    let r = generate(scheme, &params, rng)?;
    let step = params.symbol_period / points_per_symbol as f64;
    let start = r.span_start() + r.dither() + 0.5 * step;
    let x = r.dense_levels(start, step, params.symbols * points_per_symbol)?;
    Ok((r, x))
}

/// Circular time-average estimate of `R(tau)` at lags `k/m` for
/// `k = 0..=max_lag*m`, from one cyclic realization sampled at `m` points
/// per symbol.
pub fn empirical_autocorr<R: Rng + ?Sized>(
    scheme: SchemeId,
    params: &ModulationParams,
    max_lag: f64,
    points_per_symbol: usize,
    rng: &mut R,
) -> Result<EmpiricalAcf> {
    let (_, x) = dense_waveform(scheme, params, points_per_symbol, rng)?;
    let m = points_per_symbol;
    let len = x.len();
    let max_k = (max_lag * m as f64).round() as usize;
    if max_k >= len {
        return Err(Error::InsufficientData(format!(
            "lag {max_lag} exceeds the realization span"
        )));
    }
    let values = (0..=max_k)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..len - k {
                acc += x[i] * x[i + k];
            }
            for i in len - k..len {
                acc += x[i] * x[i + k - len];
            }
            acc / len as f64
        })
        .collect();
    Ok(EmpiricalAcf {
        scheme,
        lags: (0..=max_k).map(|k| k as f64 / m as f64).collect(),
        values,
        samples: len,
    })
}

/// Welch estimate of the one-sided density from one cyclic realization,
/// with Hann windows of `segment_symbols` symbols and half overlap.
pub fn empirical_psd<R: Rng + ?Sized>(
    scheme: SchemeId,
    params: &ModulationParams,
    points_per_symbol: usize,
    segment_symbols: usize,
    rng: &mut R,
) -> Result<PsdModel> {
    let (_, x) = dense_waveform(scheme, params, points_per_symbol, rng)?;
    let seg = segment_symbols * points_per_symbol;
    if segment_symbols < 64 || seg > x.len() {
        return Err(Error::InsufficientData(format!(
            "segments of {segment_symbols} symbols need at least 64 symbols and at most the realization length"
        )));
    }
    let fs = points_per_symbol as f64;
    let hop = seg / 2;
    let window: Vec<f64> = (0..seg)
        .map(|i| {
            let s = sin_pi(i as f64 / seg as f64);
            s * s
        })
        .collect();
    let energy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let half = seg / 2;
    let mut acc = vec![0.0; half + 1];
    let mut buf = vec![Complex::new(0.0, 0.0); seg];
    let mut segments = 0usize;
    let mut start = 0;
    while start + seg <= x.len() {
        for (b, (v, w)) in buf
            .iter_mut()
            .zip(x[start..start + seg].iter().zip(&window))
        {
            *b = Complex::new(v * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let norm = 1.0 / (segments as f64 * fs * energy);
    let density: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let one_sided = if k == 0 || k == half { 1.0 } else { 2.0 };
            a * norm * one_sided
        })
        .collect();
    let grid: Vec<f64> = (0..=half).map(|k| k as f64 * fs / seg as f64).collect();
    let total_power = trapezoid(&grid, &density);
    Ok(PsdModel {
        source: PsdSource::Empirical(scheme),
        grid,
        density,
        tones: Vec::new(),
        total_power,
        scale: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use crate::special::sinc;

    fn model(s: SchemeId) -> AutocorrelationModel {
        AutocorrelationModel::new(s).unwrap()
    }

    #[test]
    fn zero_lag_and_symmetry() {
        for s in [SchemeId::A, SchemeId::B, SchemeId::C] {
            let m = model(s);
            assert_eq!(m.value(0.0), 1.0);
            for &t in &[0.3, 1.2, 2.7, 5.5] {
                assert_eq!(m.value(t), m.value(-t));
            }
        }
    }

    #[test]
    fn reference_lags() {
        assert_eq!(autocorr(SchemeId::C, 0.5).unwrap(), 0.0);
        assert_eq!(autocorr(SchemeId::C, 1.0).unwrap(), 0.0);
        assert_eq!(autocorr(SchemeId::C, 4.2).unwrap(), 0.0);
        assert!((autocorr(SchemeId::A, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((autocorr(SchemeId::A, 1.5).unwrap() + 1.0 / 6.0).abs() < 1e-15);
        assert!(autocorr(SchemeId::B, 1.5).unwrap().abs() < 1e-15);
        assert!(autocorr(SchemeId::B1, 0.0).is_err());
    }

    #[test]
    fn continuous_across_symbol_edges() {
        for (s, at_one) in [(SchemeId::A, 1.0 / 3.0), (SchemeId::B, -1.0 / 3.0)] {
            let m = model(s);
            let below = eval(&m.compact, 1.0);
            assert!((below - at_one).abs() < 1e-12, "{s}");
            assert!((m.value(1.0) - at_one).abs() < 1e-12, "{s}");
            for k in 1..5 {
                let k = k as f64;
                let gap = (m.value(k - 1e-13) - m.value(k)).abs();
                assert!(gap < 1e-11, "{s} at {k}: {gap}");
            }
        }
    }

    #[test]
    fn a_and_b_share_the_continuous_part() {
        let (a, b) = (model(SchemeId::A), model(SchemeId::B));
        let (ca, cb) = (a.continuous_part(), b.continuous_part());
        for k in 0..4 {
            assert!((ca[k] - cb[k]).abs() < 1e-15);
        }
        for i in 0..500 {
            let f = i as f64 * 0.037;
            assert!((a.density(f) - b.density(f)).abs() < 1e-9);
        }
        // The continuous part closes smoothly at one symbol.
        assert!(eval(&ca, 1.0).abs() < 1e-15);
        assert!(eval(&derivative(&ca), 1.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_integral_matches_quadrature() {
        let p = [0.3, -1.1, 2.0, -0.7];
        let gl = GaussLegendre::new(16);
        for &f in &[0.0, 0.2, 0.63, 0.64, 1.7, 13.25, 400.1] {
            let reference =
                gl.integrate(|u| eval(&p, u) * (2.0 * PI * f * u).cos(), 0.0, 1.0, 2000);
            let v = cubic_cosine_integral(&p, f);
            assert!((v - reference).abs() < 1e-12, "f={f}: {v} vs {reference}");
        }
    }

    #[test]
    fn sc_closed_form_small_f_and_quadrature() {
        assert!((closed_form_sc(0.0) - 2.0 / 3.0).abs() < 1e-15);
        let m = model(SchemeId::C);
        for i in 0..=200 {
            let f = i as f64 * 0.01;
            let d = (closed_form_sc(f) - m.density(f)).abs();
            assert!(d < 1e-12, "f={f}: {d}");
        }
        // Series and direct form agree across the switch; the direct form
        // loses about five digits to cancellation there.
        for x in [0.99e-2, 1.01e-2] {
            let f = x / PI;
            assert!((closed_form_sc(f) - m.density(f)).abs() < 1e-10);
        }
    }

    #[test]
    fn a_tones_follow_inverse_square_law() {
        let m = model(SchemeId::A);
        let tones = m.tones(50.0);
        assert_eq!(tones.len(), 50);
        for t in &tones {
            let k = t.frequency;
            let expect = 2.0 / (PI * PI * k * k);
            assert!((t.power - expect).abs() < 1e-13, "k={k}");
        }
        assert!((m.tone_power() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn a_tail_parseval() {
        // Mean square of the tail over a period equals half the sum of
        // squared tone amplitudes.
        let m = model(SchemeId::A);
        let gl = GaussLegendre::new(8);
        let ms = gl.integrate(|u| m.tail_value(u).powi(2), 0.0, 1.0, 64);
        assert!((ms - 1.0 / 45.0).abs() < 1e-14);
        let half_sq: f64 = m
            .tones(4000.0)
            .iter()
            .map(|t| 0.5 * t.power * t.power)
            .sum();
        assert!((half_sq - ms).abs() < 1e-4);
    }

    #[test]
    fn b_tones_sit_at_odd_half_integers() {
        let m = model(SchemeId::B);
        let tones = m.tones(20.0);
        assert_eq!(tones.len(), 20);
        for t in &tones {
            assert!(((2.0 * t.frequency) as i64) % 2 == 1);
            assert!(t.power > 0.0);
        }
        let total: f64 = m.tones(2000.0).iter().map(|t| t.power).sum();
        assert!((total - 1.0 / 3.0).abs() < 1e-6, "{total}");
    }

    #[test]
    fn power_is_conserved() {
        for s in [SchemeId::A, SchemeId::B, SchemeId::C] {
            let p = psd(s, DEFAULT_F_MAX, DEFAULT_DF).unwrap();
            assert!((p.total_power - 1.0).abs() < 1e-3, "{s}: {}", p.total_power);
            assert!(p.density.iter().all(|&d| d >= 0.0), "{s}");
        }
        assert!(psd(SchemeId::C, 10.0, DEFAULT_DF).unwrap().tones.is_empty());
    }

    #[test]
    fn grid_limits() {
        assert!(matches!(
            psd(SchemeId::C, 10.0, 1.0 / 32.0),
            Err(Error::CoarseGrid { .. })
        ));
        assert!(psd(SchemeId::C, 10.0, 1.0 / 64.0).is_ok());
        assert!(matches!(
            psd(SchemeId::B1, 10.0, 1.0 / 64.0),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn flat_reference_is_lossless() {
        let p = flat_psd(0.5, DEFAULT_DF).unwrap();
        let (g, d) = spectral_upper_bound(&p, 0.5);
        assert_eq!(g, 1.0);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn gamma_decreases_with_wasted_power() {
        let p = psd(SchemeId::C, 8.0, DEFAULT_DF).unwrap();
        let (g0, _) = spectral_upper_bound(&p, 0.5);
        let (g1, _) = spectral_upper_bound(&p.scaled(0.9), 0.5);
        assert!(g1 < g0);
        assert!((g1 / g0 - 0.9).abs() < 1e-9);
    }

    #[test]
    fn vanishing_density_is_infinite_loss() {
        let mut p = flat_psd(0.25, DEFAULT_DF).unwrap();
        p.source = PsdSource::Empirical(SchemeId::C);
        let (g, d) = spectral_upper_bound(&p, 0.5);
        assert_eq!(g, 0.0);
        assert!(d.is_infinite());
    }

    #[test]
    fn table_one_values() {
        let band = 0.5;
        let (ga, _) = spectral_upper_bound(&psd(SchemeId::A, 4.0, DEFAULT_DF).unwrap(), band);
        let (gc, _) = spectral_upper_bound(&psd(SchemeId::C, 4.0, DEFAULT_DF).unwrap(), band);
        assert!((ga - 0.30).abs() < 0.01, "{ga}");
        assert!((gc - 0.367).abs() < 0.005, "{gc}");
    }

    #[test]
    fn empirical_acf_tracks_closed_form() {
        let params = ModulationParams::default().with_symbols(40_000);
        for (i, s) in [SchemeId::A, SchemeId::B, SchemeId::C]
            .into_iter()
            .enumerate()
        {
            let mut rng = stream(3, Purpose::Waveform, i as u64);
            let acf = empirical_autocorr(s, &params, 3.0, 32, &mut rng).unwrap();
            assert!((acf.values[0] - 1.0).abs() < 1e-12);
            let m = model(s);
            let dev = acf.max_deviation(|t| m.value(t), 3.0);
            assert!(dev < 0.02, "{s}: {dev}");
        }
    }

    #[test]
    fn welch_estimate_of_c() {
        let params = ModulationParams::default().with_symbols(1 << 15);
        let mut rng = stream(5, Purpose::Waveform, 0);
        let p = empirical_psd(SchemeId::C, &params, 32, 64, &mut rng).unwrap();
        assert!((p.total_power - 1.0).abs() < 0.01, "{}", p.total_power);
        for &f in &[0.25, 0.5, 1.0, 2.0] {
            let d = (p.density_at(f) - closed_form_sc(f)).abs();
            assert!(d < 0.05, "f={f}: {d}");
        }
    }

    #[test]
    fn triangle_gives_sinc_squared() {
        // Random-sign NRZ has a triangular correlation and density 2 sinc^2.
        let rect = [1.0, -1.0, 0.0, 0.0];
        for &f in &[0.3, 1.4, 7.9] {
            let v = 4.0 * cubic_cosine_integral(&rect, f);
            assert!((v - 2.0 * sinc(f).powi(2)).abs() < 1e-12);
        }
    }
}
