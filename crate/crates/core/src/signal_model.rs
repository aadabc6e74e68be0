//! Bipolar signaling schemes and their waveform realizations.
//!
//! Symbol `n` occupies `[(n - 1/2) T, (n + 1/2) T)` on the undithered axis.
//! Within it the waveform starts at `s_n sqrt(P)` and flips once, at the data
//! epoch `(n + a_n) T`, to `-s_n sqrt(P)`. Scheme A keeps `s_n = 1` and so
//! needs a second, information-free flip at every symbol boundary; scheme B
//! alternates `s_n` so the boundary flips vanish; scheme C draws `s_n` at
//! random and flips at a boundary only when the neighbouring levels differ.
//! Scheme B1 keeps the alternation of B but draws each epoch uniformly over
//! a window that opens `T_g` after the previous epoch and closes at the end
//! of its own symbol interval.
//!
//! A realization is shifted as a whole by a dither in `[0, T)`. Receiver
//! samples are taken at `n T + dither`, so the sampling geometry relative to
//! the symbols does not depend on the dither.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Burn-in symbols used to bring the B1 window chain to stationarity.
const B1_BURN_IN: usize = 64;
const B1_MAX_ATTEMPTS: usize = 10_000;
/// Slack allowed when re-validating B1 epochs recovered from a record.
const EPOCH_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeId {
    A,
    B,
    B1,
    C,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::A, SchemeId::B, SchemeId::B1, SchemeId::C];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::A => "A",
            SchemeId::B => "B",
            SchemeId::B1 => "B1",
            SchemeId::C => "C",
        }
    }

    /// Schemes whose sign pattern alternates deterministically.
    pub fn alternates(self) -> bool {
        matches!(self, SchemeId::B | SchemeId::B1)
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(SchemeId::A),
            "B" => Ok(SchemeId::B),
            "B1" => Ok(SchemeId::B1),
            "C" => Ok(SchemeId::C),
            other => Err(Error::InvalidParams(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    /// Symbol (Nyquist) interval `T` in seconds.
    pub symbol_period: f64,
    /// Transmit power `P` in watts.
    pub power: f64,
    /// Minimal inter-transition interval `T_g` of scheme B1, in seconds.
    pub guard: f64,
    /// Symbols per realization.
    pub symbols: usize,
    /// Wrap the time axis onto a circle of circumference `symbols * T`.
    pub cyclic: bool,
    pub seed: u64,
}

impl Default for ModulationParams {
    fn default() -> Self {
        Self {
            symbol_period: 1.0,
            power: 1.0,
            guard: 0.2,
            symbols: 500,
            cyclic: true,
            seed: 1,
        }
    }
}

impl ModulationParams {
    pub fn with_symbols(mut self, symbols: usize) -> Self {
        self.symbols = symbols;
        self
    }

    pub fn with_cyclic(mut self, cyclic: bool) -> Self {
        self.cyclic = cyclic;
        self
    }

    /// One-sided channel bandwidth `B = 1 / (2T)`.
    pub fn bandwidth(&self) -> f64 {
        0.5 / self.symbol_period
    }

    pub fn amplitude(&self) -> f64 {
        self.power.sqrt()
    }

    /// Duration covered by one realization.
    pub fn span(&self) -> f64 {
        self.symbols as f64 * self.symbol_period
    }

    pub fn validate(&self, scheme: SchemeId) -> Result<()> {
        if !(self.symbol_period > 0.0 && self.symbol_period.is_finite()) {
            return Err(Error::InvalidParams(
                "symbol period T must be positive".into(),
            ));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidParams("power P must be positive".into()));
        }
        if self.symbols < 2 {
            return Err(Error::InvalidParams(
                "at least 2 symbols are required".into(),
            ));
        }
        if !(self.guard >= 0.0) {
            return Err(Error::InvalidParams(
                "guard interval T_g must be non-negative".into(),
            ));
        }
        if scheme == SchemeId::B1 && self.guard >= self.symbol_period {
            return Err(Error::InvalidParams(format!(
                "B1 guard interval T_g = {} must be shorter than T = {}",
                self.guard, self.symbol_period
            )));
        }
        if self.cyclic && scheme.alternates() && self.symbols % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "cyclic scheme {scheme} needs an even symbol count, got {}",
                self.symbols
            )));
        }
        Ok(())
    }
}

/// A waveform sign flip: `jump` is in units of `sqrt(P)` and is `+2` or `-2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    /// Time on the undithered axis, seconds.
    pub time: f64,
    pub jump: i8,
}

/// Serialized form of a realization. Epochs are derived, never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub scheme: SchemeId,
    pub params: ModulationParams,
    pub a: Vec<f64>,
    pub s: Vec<i8>,
    pub dither: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    scheme: SchemeId,
    params: ModulationParams,
    a: Vec<f64>,
    s: Vec<i8>,
    dither: f64,
    /// Window width `W_s(n) / T` over which each data epoch was drawn.
    windows: Vec<f64>,
    /// Merged flips sorted by time, within `(t0, t0 + span]` (cyclic) or
    /// `[t0, t0 + span]` (non-cyclic), on the undithered axis.
    transitions: Vec<Transition>,
    /// Level in units of `sqrt(P)` on `[t0, first transition)`.
    initial_level: i8,
}

impl Realization {
    /// Assemble a realization from its information variables.
    ///
    /// `a` holds the data epoch offsets in units of `T` relative to the
    /// symbol centres; `s` the per-symbol leading sign.
    pub fn from_parts(
        scheme: SchemeId,
        params: ModulationParams,
        a: Vec<f64>,
        s: Vec<i8>,
        dither: f64,
    ) -> Result<Self> {
        params.validate(scheme)?;
        let n = params.symbols;
        if a.len() != n || s.len() != n {
            return Err(Error::InvalidRecord(format!(
                "expected {n} transition variables and signs, got {} and {}",
                a.len(),
                s.len()
            )));
        }
        if !(0.0..params.symbol_period).contains(&dither) {
            return Err(Error::InvalidRecord(format!(
                "dither {dither} outside [0, T)"
            )));
        }
        if s.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidRecord("signs must be +1 or -1".into()));
        }
        match scheme {
            SchemeId::A => {
                if s.iter().any(|&v| v != 1) {
                    return Err(Error::InvalidRecord("scheme A uses s_n = +1".into()));
                }
            }
            SchemeId::B | SchemeId::B1 => {
                if s.iter().enumerate().any(|(i, &v)| v != alternating_sign(i)) {
                    return Err(Error::InvalidRecord(format!(
                        "scheme {scheme} uses s_n = (-1)^n"
                    )));
                }
            }
            SchemeId::C => {}
        }
        let windows = match scheme {
            SchemeId::B1 => b1_windows(&params, &a)?,
            _ => {
                if a.iter().any(|v| !(-0.5..=0.5).contains(v)) {
                    return Err(Error::InvalidRecord(
                        "transition variables must lie in [-0.5, 0.5]".into(),
                    ));
                }
                vec![1.0; n]
            }
        };

        let (transitions, initial_level) = build_transitions(scheme, &params, &a, &s);
        Ok(Self {
            scheme,
            params,
            a,
            s,
            dither,
            windows,
            transitions,
            initial_level,
        })
    }

    pub fn from_record(record: RealizationRecord) -> Result<Self> {
        Self::from_parts(
            record.scheme,
            record.params,
            record.a,
            record.s,
            record.dither,
        )
    }

    pub fn to_record(&self) -> RealizationRecord {
        RealizationRecord {
            scheme: self.scheme,
            params: self.params.clone(),
            a: self.a.clone(),
            s: self.s.clone(),
            dither: self.dither,
        }
    }

    pub fn scheme(&self) -> SchemeId {
        self.scheme
    }

    pub fn params(&self) -> &ModulationParams {
        &self.params
    }

    pub fn symbols(&self) -> usize {
        self.params.symbols
    }

    pub fn transition_variables(&self) -> &[f64] {
        &self.a
    }

    pub fn signs(&self) -> &[i8] {
        &self.s
    }

    pub fn dither(&self) -> f64 {
        self.dither
    }

    pub fn is_cyclic(&self) -> bool {
        self.params.cyclic
    }

    /// Window widths `W_s(n) / T`; identically 1 outside scheme B1.
    pub fn windows(&self) -> &[f64] {
        &self.windows
    }

    /// Waveform value just after the span start.
    pub fn initial_sign(&self) -> i8 {
        self.initial_level
    }

    /// Merged flips on the undithered axis.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Absolute (dithered) flip times in increasing order.
    pub fn epochs(&self) -> Vec<f64> {
        self.transitions
            .iter()
            .map(|tr| tr.time + self.dither)
            .collect()
    }

    /// Data epoch of symbol `j` on the undithered axis (not wrapped).
    pub fn data_epoch(&self, j: usize) -> f64 {
        (j as f64 + self.a[j]) * self.params.symbol_period
    }

    /// Size of the data flip of symbol `j`, in units of `sqrt(P)`.
    pub fn data_jump(&self, j: usize) -> i8 {
        -2 * self.s[j]
    }

    /// Start of the span on the undithered axis.
    pub fn span_start(&self) -> f64 {
        -0.5 * self.params.symbol_period
    }

    /// Absolute receiver sample times `n T + dither`.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..self.params.symbols)
            .map(|n| n as f64 * self.params.symbol_period + self.dither)
            .collect()
    }

    /// Mean of the waveform over the span, in units of `sqrt(P)`.
    pub fn mean_level(&self) -> f64 {
        let t0 = self.span_start();
        let end = t0 + self.params.span();
        let mut level = self.initial_level as f64;
        let mut last = t0;
        let mut acc = 0.0;
        for tr in &self.transitions {
            acc += level * (tr.time - last);
            level += tr.jump as f64;
            last = tr.time;
        }
        acc += level * (end - last);
        acc / self.params.span()
    }

    /// Waveform value at absolute time `t`.
    pub fn waveform_value(&self, t: f64) -> Result<f64> {
        let level = self.level_at(t)?;
        Ok(level as f64 * self.params.amplitude())
    }

    fn level_at(&self, t: f64) -> Result<i8> {
        let t0 = self.span_start();
        let span = self.params.span();
        let mut rel = t - self.dither;
        if self.params.cyclic {
            rel = t0 + (rel - t0).rem_euclid(span);
        } else if rel < t0 || rel >= t0 + span {
            return Err(Error::OutOfSpan {
                t,
                start: t0 + self.dither,
                end: t0 + span + self.dither,
            });
        }
        let idx = self.transitions.partition_point(|tr| tr.time <= rel);
        let level: i32 = self.initial_level as i32
            + self.transitions[..idx]
                .iter()
                .map(|tr| tr.jump as i32)
                .sum::<i32>();
        Ok(level as i8)
    }

    /// Dense waveform samples at `t_k = start + k * step`, in units of
    /// `sqrt(P)`. Faster than repeated [`Self::waveform_value`] calls.
    pub fn dense_levels(&self, start: f64, step: f64, count: usize) -> Result<Vec<f64>> {
        let t0 = self.span_start();
        let span = self.params.span();
        let cyclic = self.params.cyclic;
        if !cyclic {
            self.level_at(start)?;
            self.level_at(start + step * count.saturating_sub(1) as f64)?;
        }
        let rel0 = if cyclic {
            t0 + (start - self.dither - t0).rem_euclid(span)
        } else {
            start - self.dither
        };
        let tr = &self.transitions;
        let mut idx = tr.partition_point(|x| x.time <= rel0);
        let mut level: i32 =
            self.initial_level as i32 + tr[..idx].iter().map(|x| x.jump as i32).sum::<i32>();
        let mut lap = 0.0;
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let mut rel = rel0 + k as f64 * step - lap;
            while cyclic && rel >= t0 + span {
                lap += span;
                rel -= span;
                idx = 0;
                level = self.initial_level as i32;
            }
            while idx < tr.len() && tr[idx].time <= rel {
                level += tr[idx].jump as i32;
                idx += 1;
            }
            out.push(level as f64);
        }
        Ok(out)
    }
}

pub(crate) fn alternating_sign(n: usize) -> i8 {
    if n % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Window widths in units of `T`: `W(n) = 3/2 - T_g/T - a_{n-1}`.
fn b1_windows(params: &ModulationParams, a: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let tg = params.guard / params.symbol_period;
    let mut windows = Vec::with_capacity(n);
    for (i, &ai) in a.iter().enumerate() {
        if ai > 0.5 + EPOCH_SLACK {
            return Err(Error::InvalidRecord(format!(
                "B1 epoch of symbol {i} lies after its interval end"
            )));
        }
        let w = if i > 0 {
            1.5 - tg - a[i - 1]
        } else if params.cyclic {
            1.5 - tg - a[n - 1]
        } else {
            1.0
        };
        let lo = 0.5 - w;
        if ai < lo - EPOCH_SLACK {
            return Err(Error::InvalidRecord(format!(
                "B1 epoch of symbol {i} lies before its window opens"
            )));
        }
        if w <= 0.0 {
            return Err(Error::EmptyWindow {
                symbol: i,
                width: w,
            });
        }
        windows.push(w);
    }
    Ok(windows)
}

fn build_transitions(
    scheme: SchemeId,
    params: &ModulationParams,
    a: &[f64],
    s: &[i8],
) -> (Vec<Transition>, i8) {
    let n = params.symbols;
    let period = params.symbol_period;
    let t0 = -0.5 * period;
    let span = params.span();

    let mut raw: Vec<Transition> = Vec::with_capacity(2 * n);
    for j in 0..n {
        raw.push(Transition {
            time: (j as f64 + a[j]) * period,
            jump: -2 * s[j],
        });
    }
    if matches!(scheme, SchemeId::A | SchemeId::C) {
        let last = if params.cyclic { n } else { n - 1 };
        for j in 0..last {
            let next = s[(j + 1) % n];
            let jump = next + s[j];
            if jump != 0 {
                raw.push(Transition {
                    time: (j as f64 + 0.5) * period,
                    jump,
                });
            }
        }
    }

    // Level before the first (unwrapped) data epoch is s_0.
    let mut initial = s[0] as i32;
    if params.cyclic {
        for tr in raw.iter_mut() {
            if tr.time < t0 {
                initial += tr.jump as i32;
                tr.time += span;
            }
        }
    }
    raw.sort_by(|x, y| x.time.total_cmp(&y.time));

    let mut merged: Vec<Transition> = Vec::with_capacity(raw.len());
    for tr in raw {
        match merged.last_mut() {
            Some(last) if last.time == tr.time => last.jump += tr.jump,
            _ => merged.push(tr),
        }
    }
    merged.retain(|tr| tr.jump != 0);
    // An epoch sitting exactly on the span start acts at t0 itself.
    (merged, initial as i8)
}

/// Draw a realization of `scheme`.
pub fn generate<R: Rng + ?Sized>(
    scheme: SchemeId,
    params: &ModulationParams,
    rng: &mut R,
) -> Result<Realization> {
    params.validate(scheme)?;
    let n = params.symbols;
    let dither = rng.random::<f64>() * params.symbol_period;
    let (a, s) = match scheme {
        SchemeId::A => (uniform_offsets(n, rng), vec![1; n]),
        SchemeId::B => (
            uniform_offsets(n, rng),
            (0..n).map(alternating_sign).collect(),
        ),
        SchemeId::C => {
            let a = uniform_offsets(n, rng);
            let s = (0..n)
                .map(|_| if rng.random::<bool>() { 1 } else { -1 })
                .collect();
            (a, s)
        }
        SchemeId::B1 => (
            b1_offsets(params, rng)?,
            (0..n).map(alternating_sign).collect(),
        ),
    };
    Realization::from_parts(scheme, params.clone(), a, s, dither)
}

fn uniform_offsets<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

/// Epoch offsets of the B1 window chain, in units of `T`.
///
/// Cyclic realizations are closed by rejection: the chain is restarted
/// until the first epoch also respects the guard after the wrapped last one.
fn b1_offsets<R: Rng + ?Sized>(params: &ModulationParams, rng: &mut R) -> Result<Vec<f64>> {
    let n = params.symbols;
    let tg = params.guard / params.symbol_period;
    for _ in 0..B1_MAX_ATTEMPTS {
        // Previous epoch relative to the centre of the current symbol.
        let mut prev_offset = if params.cyclic { -0.5 - tg } else { -1.5 - tg };
        if params.cyclic {
            for _ in 0..B1_BURN_IN {
                prev_offset = draw_b1(prev_offset, tg, rng) - 1.0;
            }
        } else {
            prev_offset += 1.0;
        }
        let mut a = Vec::with_capacity(n);
        for _ in 0..n {
            let offset = draw_b1(prev_offset, tg, rng);
            a.push(offset);
            prev_offset = offset - 1.0;
        }
        if !params.cyclic || a[0] >= a[n - 1] - 1.0 + tg {
            return Ok(a);
        }
    }
    Err(Error::InvalidParams(
        "could not close a cyclic B1 realization; guard interval too long".into(),
    ))
}

/// Epoch offset uniform over `[prev + T_g, 1/2]`, where `prev` is the
/// previous epoch measured from the current symbol centre.
fn draw_b1<R: Rng + ?Sized>(prev_offset: f64, tg: f64, rng: &mut R) -> f64 {
    let lo = prev_offset + tg;
    let width = 0.5 - lo;
    lo + rng.random::<f64>() * width
}

/// Average number of flips per second.
pub fn sign_transition_rate(r: &Realization) -> f64 {
    r.transitions.len() as f64 / r.params.span()
}

/// `a_n s_n` for schemes whose transition variables are uniform on
/// `[-1/2, 1/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxiliaryVector(pub Vec<f64>);

pub fn auxiliary_vector(r: &Realization) -> Result<AuxiliaryVector> {
    if r.scheme == SchemeId::B1 {
        return Err(Error::Unsupported {
            scheme: SchemeId::B1,
            operation: "auxiliary_vector",
            hint: "B1 transition variables are not uniform given the signs",
        });
    }
    Ok(AuxiliaryVector(
        r.a.iter().zip(&r.s).map(|(&a, &s)| a * s as f64).collect(),
    ))
}
