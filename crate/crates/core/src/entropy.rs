//! Monte-Carlo entropy terms from Jacobian log-determinants.
//!
//! For the bijective schemes the noiseless samples `z` are a smooth function
//! of the transition variables, so `h(z) = h(a) + E log |det dz/da|`. With
//! `a` uniform on unit windows `h(a) = 0` and only `h_d = E[(1/N) log|det J|]`
//! remains; for B1 the windows shrink and contribute
//! `h_a = E[(1/N) sum log W_n]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_sampling::{sample_noiseless, PulseKernel, MIN_NON_CYCLIC_SYMBOLS};
use crate::error::{Error, Result};
use crate::linalg::{log_abs_det, LogDet};
use crate::rng::{stream, Purpose};
use crate::signal_model::{generate, ModulationParams, Realization, SchemeId};

/// `dz_i / da_j` for one realization, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianMatrix {
    pub order: usize,
    pub entries: Vec<f64>,
}

impl JacobianMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.order).map(|i| self.get(i, j)).collect()
    }

    pub fn log_abs_det(&self) -> LogDet {
        log_abs_det(&mut self.entries.clone(), self.order)
    }
}

fn check_bijective(r: &Realization, operation: &'static str) -> Result<()> {
    if r.scheme() == SchemeId::C {
        return Err(Error::Unsupported {
            scheme: SchemeId::C,
            operation,
            hint: "random signs make the map from transition times to samples non-injective",
        });
    }
    if !r.is_cyclic() && r.symbols() < MIN_NON_CYCLIC_SYMBOLS {
        return Err(Error::TooShort {
            symbols: r.symbols(),
            required: MIN_NON_CYCLIC_SYMBOLS,
        });
    }
    Ok(())
}

/// Sensitivities of the samples at `iT + dither` to the data epoch offsets.
///
/// Only data flips depend on `a`. Moving flip `j` later by `T da_j` changes
/// sample `i` by `-jump_j sqrt(P) T h(t_i - t_j) da_j`; the dither cancels.
pub fn build_jacobian(r: &Realization) -> Result<JacobianMatrix> {
    check_bijective(r, "build_jacobian")?;
    let kernel = PulseKernel::for_realization(r);
    let n = r.symbols();
    let tp = r.params().symbol_period;
    let amp = r.params().amplitude();
    let mut entries = vec![0.0; n * n];
    for j in 0..n {
        let scale = -(r.data_jump(j) as f64) * amp * tp;
        let epoch = r.data_epoch(j);
        for i in 0..n {
            entries[i * n + j] = scale * kernel.impulse(i as f64 * tp - epoch);
        }
    }
    Ok(JacobianMatrix { order: n, entries })
}

/// Central difference of the noiseless samples with respect to `a_j`.
pub fn finite_difference_column(r: &Realization, j: usize, delta: f64) -> Result<Vec<f64>> {
    let kernel = PulseKernel::for_realization(r);
    let shifted = |d: f64| -> Result<Vec<f64>> {
        let mut a = r.transition_variables().to_vec();
        a[j] += d;
        let moved = Realization::from_parts(
            r.scheme(),
            r.params().clone(),
            a,
            r.signs().to_vec(),
            r.dither(),
        )?;
        Ok(sample_noiseless(&moved, &kernel)?.z)
    };
    let up = shifted(delta)?;
    let down = shifted(-delta)?;
    Ok(up
        .iter()
        .zip(&down)
        .map(|(u, d)| (u - d) / (2.0 * delta))
        .collect())
}

/// `(1/N) sum log(W_n / T)`.
pub fn window_entropy(r: &Realization) -> Result<f64> {
    let mut acc = 0.0;
    for (n, &w) in r.windows().iter().enumerate() {
        if !(w > 0.0) {
            return Err(Error::EmptyWindow {
                symbol: n,
                width: w,
            });
        }
        acc += w.ln();
    }
    Ok(acc / r.symbols() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    /// `E[(1/N) log|det J|]`.
    Hd,
    /// `E[(1/N) sum log W_n]`.
    Ha,
    /// Sum of the two.
    Total,
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Accumulator {
    pub count: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.count * other.count) as f64 / count as f64;
        Self { count, mean, m2 }
    }

    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.count - 1) as f64).sqrt()
    }

    pub fn stderr(&self) -> f64 {
        self.std_dev() / (self.count as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub kind: EntropyKind,
    pub scheme: SchemeId,
    #[serde(rename = "N")]
    pub symbols: usize,
    pub trials: usize,
    pub mean_nats: f64,
    pub stderr_nats: f64,
    /// Trials dropped because their Jacobian was exactly singular.
    pub excluded: usize,
    /// Trials kept although a pivot fell below the near-singular threshold.
    pub near_singular: usize,
    pub seed: u64,
    #[serde(skip)]
    pub per_trial: Vec<f64>,
}

impl EntropyEstimate {
    /// Per-trial values as CSV with columns `trial,value`.
    pub fn trials_csv(&self) -> String {
        let mut out = String::from("trial,value\n");
        for (i, v) in self.per_trial.iter().enumerate() {
            out.push_str(&format!("{i},{v:.17e}\n"));
        }
        out
    }
}

/// When to stop drawing trials.
///
/// Trials run in batches of fixed size; after each batch the run stops once
/// at least `min_trials` are in and the standard error is below `target`, or
/// when `max_trials` is reached. The stopping point depends only on the
/// values, never on scheduling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialBudget {
    pub min_trials: usize,
    pub max_trials: usize,
    pub target_stderr: f64,
    pub batch: usize,
}

impl Default for TrialBudget {
    fn default() -> Self {
        Self {
            min_trials: 200,
            max_trials: 2000,
            target_stderr: 1e-3,
            batch: 50,
        }
    }
}

impl TrialBudget {
    pub fn fixed(trials: usize) -> Self {
        Self {
            min_trials: trials,
            max_trials: trials,
            target_stderr: f64::INFINITY,
            batch: trials.clamp(1, 50),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_trials < 2 || self.max_trials < self.min_trials || self.batch == 0 {
            return Err(Error::InvalidParams(format!(
                "trial budget needs 2 <= min <= max and a positive batch, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Per-trial outcome: one value per tracked quantity, or `None` when the
/// trial is excluded.
struct TrialOutcome {
    values: Option<Vec<f64>>,
    near_singular: bool,
}

/// Runs trials in order-preserving parallel batches until `budget` is met
/// on the quantity at index `watch`.
fn run_trials<F>(
    budget: &TrialBudget,
    quantities: usize,
    watch: usize,
    trial: F,
) -> Result<(Vec<Accumulator>, Vec<Vec<f64>>, usize, usize)>
where
    F: Fn(u64) -> Result<TrialOutcome> + Sync,
{
    budget.validate()?;
    let mut acc = vec![Accumulator::default(); quantities];
    let mut values = vec![Vec::new(); quantities];
    let (mut excluded, mut near) = (0usize, 0usize);
    let mut next = 0u64;
    loop {
        let kept = acc[watch].count;
        if kept >= budget.max_trials
            || (kept >= budget.min_trials && acc[watch].stderr() < budget.target_stderr)
        {
            break;
        }
        let want = budget.batch.min(budget.max_trials - kept);
        let outcomes: Vec<Result<TrialOutcome>> = (next..next + want as u64)
            .into_par_iter()
            .map(&trial)
            .collect();
        next += want as u64;
        for outcome in outcomes {
            let outcome = outcome?;
            near += outcome.near_singular as usize;
            match outcome.values {
                Some(v) => {
                    for (k, x) in v.into_iter().enumerate() {
                        acc[k].push(x);
                        values[k].push(x);
                    }
                }
                None => excluded += 1,
            }
        }
        if excluded > 10 * budget.max_trials {
            return Err(Error::InsufficientData(format!(
                "{excluded} trials had singular Jacobians"
            )));
        }
    }
    Ok((acc, values, excluded, near))
}

fn estimate(
    kind: EntropyKind,
    scheme: SchemeId,
    params: &ModulationParams,
    acc: &Accumulator,
    per_trial: Vec<f64>,
    excluded: usize,
    near_singular: usize,
) -> EntropyEstimate {
    EntropyEstimate {
        kind,
        scheme,
        symbols: params.symbols,
        trials: acc.count,
        mean_nats: acc.mean,
        stderr_nats: acc.stderr(),
        excluded,
        near_singular,
        seed: params.seed,
        per_trial,
    }
}

fn hd_trial(scheme: SchemeId, params: &ModulationParams, index: u64) -> Result<(f64, f64, LogDet)> {
    let mut rng = stream(params.seed, Purpose::Realization, index);
    let r = generate(scheme, params, &mut rng)?;
    let ld = build_jacobian(&r)?.log_abs_det();
    let ha = window_entropy(&r)?;
    Ok((ld.log_abs / params.symbols as f64, ha, ld))
}

/// `h_d` for scheme A, B or B1.
///
/// Trial `k` draws its realization from stream `(seed, Realization, k)`.
pub fn estimate_hd(
    scheme: SchemeId,
    params: &ModulationParams,
    budget: &TrialBudget,
) -> Result<EntropyEstimate> {
    if scheme == SchemeId::C {
        return Err(Error::Unsupported {
            scheme,
            operation: "estimate_hd",
            hint: "scheme C is handled through the sign information term",
        });
    }
    params.validate(scheme)?;
    let (acc, mut values, excluded, near) = run_trials(budget, 1, 0, |k| {
        let (hd, _, ld) = hd_trial(scheme, params, k)?;
        Ok(TrialOutcome {
            values: (!ld.is_singular()).then(|| vec![hd]),
            near_singular: ld.near_singular(),
        })
    })?;
    Ok(estimate(
        EntropyKind::Hd,
        scheme,
        params,
        &acc[0],
        values.remove(0),
        excluded,
        near,
    ))
}

/// `h_a`; identically zero for the unit-window schemes.
pub fn estimate_ha(
    scheme: SchemeId,
    params: &ModulationParams,
    budget: &TrialBudget,
) -> Result<EntropyEstimate> {
    params.validate(scheme)?;
    let (acc, mut values, excluded, near) = run_trials(budget, 1, 0, |k| {
        let mut rng = stream(params.seed, Purpose::Realization, k);
        let r = generate(scheme, params, &mut rng)?;
        Ok(TrialOutcome {
            values: Some(vec![window_entropy(&r)?]),
            near_singular: false,
        })
    })?;
    Ok(estimate(
        EntropyKind::Ha,
        scheme,
        params,
        &acc[0],
        values.remove(0),
        excluded,
        near,
    ))
}

/// `h_a` of scheme B1.
pub fn estimate_ha_b1(params: &ModulationParams, budget: &TrialBudget) -> Result<EntropyEstimate> {
    estimate_ha(SchemeId::B1, params, budget)
}

/// Both B1 terms and their per-trial sum, from the same realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct B1Estimate {
    pub ha: EntropyEstimate,
    pub hd: EntropyEstimate,
    pub total: EntropyEstimate,
}

/// Joint B1 run; the budget is applied to the total.
pub fn estimate_b1(params: &ModulationParams, budget: &TrialBudget) -> Result<B1Estimate> {
    let scheme = SchemeId::B1;
    params.validate(scheme)?;
    let (acc, mut values, excluded, near) = run_trials(budget, 3, 2, |k| {
        let (hd, ha, ld) = hd_trial(scheme, params, k)?;
        Ok(TrialOutcome {
            values: (!ld.is_singular()).then(|| vec![ha, hd, ha + hd]),
            near_singular: ld.near_singular(),
        })
    })?;
    let total = values.pop().unwrap_or_default();
    let hd = values.pop().unwrap_or_default();
    let ha = values.pop().unwrap_or_default();
    Ok(B1Estimate {
        ha: estimate(EntropyKind::Ha, scheme, params, &acc[0], ha, excluded, near),
        hd: estimate(EntropyKind::Hd, scheme, params, &acc[1], hd, excluded, near),
        total: estimate(
            EntropyKind::Total,
            scheme,
            params,
            &acc[2],
            total,
            excluded,
            near,
        ),
    })
}

/// Paired comparison of A and B on identical transition variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub trials: usize,
    #[serde(rename = "N")]
    pub symbols: usize,
    /// Largest `| |det J_A| / |det J_B| - 1 |` over the trials.
    pub max_relative_gap: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub stderr_a: f64,
    pub stderr_b: f64,
}

pub fn verify_ab_equivalence(
    params: &ModulationParams,
    trials: usize,
) -> Result<EquivalenceReport> {
    params.validate(SchemeId::B)?;
    if trials < 2 {
        return Err(Error::InvalidParams(
            "need at least two paired trials".into(),
        ));
    }
    let n = params.symbols;
    let pairs: Vec<Result<(f64, f64)>> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(params.seed, Purpose::Realization, k);
            let ra = generate(SchemeId::A, params, &mut rng)?;
            let signs = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
            let rb = Realization::from_parts(
                SchemeId::B,
                params.clone(),
                ra.transition_variables().to_vec(),
                signs,
                ra.dither(),
            )?;
            let la = build_jacobian(&ra)?.log_abs_det().log_abs;
            let lb = build_jacobian(&rb)?.log_abs_det().log_abs;
            Ok((la, lb))
        })
        .collect();
    let (mut acc_a, mut acc_b) = (Accumulator::default(), Accumulator::default());
    let mut max_gap = 0.0f64;
    for pair in pairs {
        let (la, lb) = pair?;
        max_gap = max_gap.max((la - lb).exp_m1().abs());
        acc_a.push(la / n as f64);
        acc_b.push(lb / n as f64);
    }
    Ok(EquivalenceReport {
        trials,
        symbols: n,
        max_relative_gap: max_gap,
        mean_a: acc_a.mean,
        mean_b: acc_b.mean,
        stderr_a: acc_a.stderr(),
        stderr_b: acc_b.stderr(),
    })
}
