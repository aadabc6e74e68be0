//! Brick-wall channel: Nyquist-rate samples of the filtered waveform, their
//! time derivatives, and additive white Gaussian noise at sample level.
//!
//! The filtered signal is built by superposing the responses to each flip
//! of the waveform, so accuracy does not depend on any time grid. On a
//! cyclic realization the filter acts on the periodic extension and the
//! output is a trigonometric polynomial with harmonics up to `N/2`; the
//! harmonic exactly at the band edge carries half weight, which is what the
//! symmetric alias sum of the sinc impulse response produces.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signal_model::Realization;
use crate::special::{cos_pi, lowpass_step, periodic_sinc, sin_pi, sinc};

/// Shortest non-cyclic realization accepted for sampling.
pub const MIN_NON_CYCLIC_SYMBOLS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelForm {
    /// `h(t) = sinc(t/T) / T` on the real line.
    Plain,
    /// `h` summed over all shifts by `symbols * T`.
    Cyclic { symbols: usize },
}

/// Impulse response of the unity-gain low-pass filter with cutoff `1/(2T)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseKernel {
    pub symbol_period: f64,
    pub form: KernelForm,
}

impl PulseKernel {
    pub fn plain(symbol_period: f64) -> Self {
        Self {
            symbol_period,
            form: KernelForm::Plain,
        }
    }

    pub fn cyclic(symbol_period: f64, symbols: usize) -> Self {
        Self {
            symbol_period,
            form: KernelForm::Cyclic { symbols },
        }
    }

    /// The kernel matching a realization's time axis.
    pub fn for_realization(r: &Realization) -> Self {
        let t = r.params().symbol_period;
        if r.is_cyclic() {
            Self::cyclic(t, r.symbols())
        } else {
            Self::plain(t)
        }
    }

    /// `h(t)`.
    pub fn impulse(&self, t: f64) -> f64 {
        let x = t / self.symbol_period;
        let v = match self.form {
            KernelForm::Plain => sinc(x),
            KernelForm::Cyclic { symbols } => periodic_sinc(x, symbols),
        };
        v / self.symbol_period
    }

    /// `h'(t)`.
    pub fn impulse_derivative(&self, t: f64) -> f64 {
        let tp = self.symbol_period;
        let x = t / tp;
        let d = match self.form {
            KernelForm::Plain => {
                if x.abs() < 1e-4 {
                    -PI * PI * x / 3.0
                } else {
                    (cos_pi(x) - sinc(x)) / x
                }
            }
            KernelForm::Cyclic { symbols } => {
                let nf = symbols as f64;
                let r = x - nf * (x / nf).round();
                if r.abs() < 1e-4 {
                    let c = if symbols % 2 == 0 {
                        -PI * PI / 3.0 * (1.0 + 2.0 / (nf * nf))
                    } else {
                        -PI * PI / 3.0 * (1.0 - 1.0 / (nf * nf))
                    };
                    c * r
                } else {
                    let th = PI * r / nf;
                    let (s, c) = th.sin_cos();
                    let sp = sin_pi(r);
                    let cp = cos_pi(r);
                    if symbols % 2 == 0 {
                        (PI * cp * c / s - sp * (PI / nf) / (s * s)) / nf
                    } else {
                        (PI * cp / s - sp * (PI / nf) * c / (s * s)) / nf
                    }
                }
            }
        };
        d / (tp * tp)
    }

    /// Response to a unit upward step at time zero.
    ///
    /// Plain form: `1/2 + Si(pi t/T)/pi`. Cyclic form: the zero-mean
    /// periodic antiderivative of `h - 1/(N T)`; only differences of it
    /// across a closed set of flips are physically meaningful.
    pub fn step(&self, t: f64) -> f64 {
        let x = t / self.symbol_period;
        match self.form {
            KernelForm::Plain => lowpass_step(x),
            KernelForm::Cyclic { symbols } => {
                let nf = symbols as f64;
                let mut acc = 0.0;
                for k in 1..=symbols / 2 {
                    let w = harmonic_weight(k, symbols);
                    acc += w * (2.0 * PI * k as f64 * x / nf).sin() / (PI * k as f64);
                }
                acc
            }
        }
    }

    /// Truncated replica sum `sum_{|m| <= terms} h_plain(t + m N T)`; the
    /// cyclic [`Self::impulse`] is its limit as `terms` grows.
    pub fn alias_sum(&self, t: f64, terms: usize) -> f64 {
        match self.form {
            KernelForm::Plain => self.impulse(t),
            KernelForm::Cyclic { symbols } => {
                let x = t / self.symbol_period;
                let nf = symbols as f64;
                let mut s = sinc(x);
                for m in 1..=terms {
                    let shift = m as f64 * nf;
                    s += sinc(x + shift) + sinc(x - shift);
                }
                s / self.symbol_period
            }
        }
    }
}

fn harmonic_weight(k: usize, symbols: usize) -> f64 {
    if symbols % 2 == 0 && 2 * k == symbols {
        0.5
    } else {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledSignal {
    pub z: Vec<f64>,
    pub zdot: Option<Vec<f64>>,
    /// Absolute sample times `n T + dither`.
    pub sample_times: Vec<f64>,
    pub symbol_period: f64,
    /// Two-sided noise PSD `N0/2` of any noise added so far.
    pub noise_psd: f64,
}

impl SampledSignal {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        self.z.iter().map(|v| v * v).sum::<f64>() / self.z.len() as f64
    }

    /// CSV with columns `n,z,zdot` (empty `zdot` cells when absent).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,z,zdot\n");
        for (n, z) in self.z.iter().enumerate() {
            match &self.zdot {
                Some(d) => writeln!(out, "{n},{z:.17e},{:.17e}", d[n]),
                None => writeln!(out, "{n},{z:.17e},"),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }
}

fn check_kernel(r: &Realization, kernel: &PulseKernel) -> Result<()> {
    let expected = PulseKernel::for_realization(r);
    if expected.form != kernel.form || expected.symbol_period != kernel.symbol_period {
        return Err(Error::InvalidParams(format!(
            "kernel {:?} does not match the realization time axis ({:?})",
            kernel.form, expected.form
        )));
    }
    if !r.is_cyclic() && r.symbols() < MIN_NON_CYCLIC_SYMBOLS {
        return Err(Error::TooShort {
            symbols: r.symbols(),
            required: MIN_NON_CYCLIC_SYMBOLS,
        });
    }
    Ok(())
}

/// Noiseless filtered samples `z_n` at `n T + dither`.
pub fn sample_noiseless(r: &Realization, kernel: &PulseKernel) -> Result<SampledSignal> {
    check_kernel(r, kernel)?;
    let times = r.sample_times();
    let z = filtered_at(r, kernel, &times)?;
    Ok(SampledSignal {
        z,
        zdot: None,
        sample_times: times,
        symbol_period: r.params().symbol_period,
        noise_psd: 0.0,
    })
}

/// Noiseless samples together with their time derivatives.
pub fn sample_with_derivative(r: &Realization, kernel: &PulseKernel) -> Result<SampledSignal> {
    let mut sig = sample_noiseless(r, kernel)?;
    sig.zdot = Some(derivative_at(r, kernel, &sig.sample_times)?);
    Ok(sig)
}

/// Time derivatives `zdot_n` of the filtered waveform at the sample times.
pub fn sample_derivative(r: &Realization, kernel: &PulseKernel) -> Result<Vec<f64>> {
    check_kernel(r, kernel)?;
    derivative_at(r, kernel, &r.sample_times())
}

/// Filtered noiseless waveform at arbitrary absolute times.
pub fn filtered_at(r: &Realization, kernel: &PulseKernel, times: &[f64]) -> Result<Vec<f64>> {
    let amp = r.params().amplitude();
    let dither = r.dither();
    match kernel.form {
        KernelForm::Cyclic { symbols } => {
            let spectrum = FlipSpectrum::new(r, symbols);
            let mean = r.mean_level();
            Ok(times
                .iter()
                .map(|&t| amp * (mean + spectrum.step_sum(t - dither)))
                .collect())
        }
        KernelForm::Plain => {
            let tp = kernel.symbol_period;
            let init = r.initial_sign() as f64;
            Ok(times
                .iter()
                .map(|&t| {
                    let rel = t - dither;
                    let mut acc = init;
                    for tr in r.transitions() {
                        acc += tr.jump as f64 * lowpass_step((rel - tr.time) / tp);
                    }
                    amp * acc
                })
                .collect())
        }
    }
}

/// Time derivative of the filtered waveform at arbitrary absolute times.
pub fn derivative_at(r: &Realization, kernel: &PulseKernel, times: &[f64]) -> Result<Vec<f64>> {
    let amp = r.params().amplitude();
    let dither = r.dither();
    match kernel.form {
        KernelForm::Cyclic { symbols } => {
            let spectrum = FlipSpectrum::new(r, symbols);
            Ok(times
                .iter()
                .map(|&t| amp * spectrum.impulse_sum(t - dither) / kernel.symbol_period)
                .collect())
        }
        KernelForm::Plain => Ok(times
            .iter()
            .map(|&t| {
                let rel = t - dither;
                amp * r
                    .transitions()
                    .iter()
                    .map(|tr| tr.jump as f64 * kernel.impulse(rel - tr.time))
                    .sum::<f64>()
            })
            .collect()),
    }
}

/// In-band Fourier coefficients `C_k = sum_j jump_j exp(-2 pi i k t_j / L)`
/// of the flip train of a cyclic realization, `k = 1..=N/2`.
struct FlipSpectrum {
    re: Vec<f64>,
    im: Vec<f64>,
    weights: Vec<f64>,
    symbols: usize,
    span: f64,
}

impl FlipSpectrum {
    fn new(r: &Realization, symbols: usize) -> Self {
        let kmax = symbols / 2;
        let span = r.params().span();
        let mut re = vec![0.0; kmax];
        let mut im = vec![0.0; kmax];
        for tr in r.transitions() {
            let jump = tr.jump as f64;
            let u = tr.time / span;
            for_each_harmonic(-u, kmax, |k, c, s| {
                re[k] += jump * c;
                im[k] += jump * s;
            });
        }
        let weights = (1..=kmax).map(|k| harmonic_weight(k, symbols)).collect();
        Self {
            re,
            im,
            weights,
            symbols,
            span,
        }
    }

    /// `sum_k w_k Im(C_k e^{2 pi i k t / L}) / (pi k)`.
    fn step_sum(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for_each_harmonic(t / self.span, self.re.len(), |k, c, s| {
            let imag = self.re[k] * s + self.im[k] * c;
            acc += self.weights[k] * imag / (PI * (k + 1) as f64);
        });
        acc
    }

    /// `(2 / N) sum_k w_k Re(C_k e^{2 pi i k t / L})`; the DC term vanishes
    /// because the flips of a closed waveform sum to zero.
    fn impulse_sum(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for_each_harmonic(t / self.span, self.re.len(), |k, c, s| {
            acc += self.weights[k] * (self.re[k] * c - self.im[k] * s);
        });
        2.0 * acc / self.symbols as f64
    }
}

/// Calls `f(k - 1, cos(2 pi k u), sin(2 pi k u))` for `k = 1..=kmax`, using a
/// rotation recurrence re-anchored every 32 steps.
fn for_each_harmonic<F: FnMut(usize, f64, f64)>(u: f64, kmax: usize, mut f: F) {
    let frac = u - u.round();
    let (s1, c1) = (2.0 * PI * frac).sin_cos();
    let (mut c, mut s) = (c1, s1);
    for k in 1..=kmax {
        if k % 32 == 0 {
            let ph = (k as f64 * frac).fract();
            let (ss, cc) = (2.0 * PI * ph).sin_cos();
            c = cc;
            s = ss;
        }
        f(k - 1, c, s);
        let nc = c * c1 - s * s1;
        let ns = s * c1 + c * s1;
        c = nc;
        s = ns;
    }
}

/// Adds zero-mean Gaussian noise of variance `B N0` to every sample.
///
/// Nyquist-spaced samples of brick-wall filtered white noise are
/// uncorrelated, so the samples are drawn independently.
pub fn add_awgn<R: Rng + ?Sized>(
    sig: &SampledSignal,
    n0: f64,
    rng: &mut R,
) -> Result<SampledSignal> {
    if !(n0 >= 0.0) {
        return Err(Error::InvalidParams(
            "noise PSD N0 must be non-negative".into(),
        ));
    }
    let mut out = sig.clone();
    if n0 == 0.0 {
        return Ok(out);
    }
    let sigma = (n0 * 0.5 / sig.symbol_period).sqrt();
    for v in out.z.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *v += sigma * g;
    }
    out.noise_psd += 0.5 * n0;
    Ok(out)
}
