//! Information carried by the random signs of scheme C about the sampled
//! output derivative, `I(s_n; zdot_n)`, at the noiseless asymptote.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel_sampling::{sample_derivative, PulseKernel};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose};
use crate::signal_model::{generate, ModulationParams, SchemeId};

/// Minimum samples per conditional accepted by [`estimate_sign_mi`].
pub const MIN_CONDITIONAL_SAMPLES: usize = 100_000;

/// Derivative samples split by the sign of their symbol.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SignSamples {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl SignSamples {
    pub fn len(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pooled(&self) -> Vec<f64> {
        self.plus.iter().chain(&self.minus).copied().collect()
    }

    /// Copy with independent Gaussian noise of standard deviation `sigma`
    /// added to every sample.
    pub fn with_noise<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Self {
        let mut noisy = |v: &Vec<f64>| {
            v.iter()
                .map(|x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        let plus = noisy(&self.plus);
        let minus = noisy(&self.minus);
        Self { plus, minus }
    }
}

/// Noiseless derivative samples of scheme C, labelled by `s_n`.
///
/// Cyclic realizations of `params.symbols` symbols are drawn from streams
/// `(seed, SignInfo, k)` until `n_symbols` samples are collected.
pub fn collect_derivatives(params: &ModulationParams, n_symbols: usize) -> Result<SignSamples> {
    let params = params.clone().with_cyclic(true);
    params.validate(SchemeId::C)?;
    let per = params.symbols;
    let runs = n_symbols.div_ceil(per);
    let shards: Vec<Result<Vec<(i8, f64)>>> = (0..runs as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(params.seed, Purpose::SignInfo, k);
            let r = generate(SchemeId::C, &params, &mut rng)?;
            let zdot = sample_derivative(&r, &PulseKernel::for_realization(&r))?;
            Ok(r.signs().iter().copied().zip(zdot).collect())
        })
        .collect();
    let mut out = SignSamples::default();
    let mut taken = 0;
    for shard in shards {
        for (s, d) in shard? {
            if taken == n_symbols {
                break;
            }
            if s > 0 {
                out.plus.push(d);
            } else {
                out.minus.push(d);
            }
            taken += 1;
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    /// Freedman-Diaconis width `2 IQR / n^(1/3)` on the pooled sample.
    FreedmanDiaconis,
    /// Fixed number of equal bins over the pooled range.
    Count(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    Plus,
    Minus,
    Marginal,
}

/// Histogram density on shared edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub label: Conditioning,
    pub bin_edges: Vec<f64>,
    /// Probability mass per bin; sums to one.
    pub mass: Vec<f64>,
}

impl DensityEstimate {
    pub fn density(&self) -> Vec<f64> {
        self.mass
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(m, e)| m / (e[1] - e[0]))
            .collect()
    }

    pub fn entropy_bits(&self) -> f64 {
        self.mass
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Equal-width edges covering the pooled sample.
pub fn shared_edges(samples: &SignSamples, binning: Binning) -> Result<Vec<f64>> {
    let mut pooled = samples.pooled();
    if pooled.len() < 2 {
        return Err(Error::InsufficientData("need at least two samples".into()));
    }
    pooled.sort_by(f64::total_cmp);
    let (lo, hi) = (pooled[0], pooled[pooled.len() - 1]);
    let range = hi - lo;
    let bins = match binning {
        Binning::Count(k) if k > 0 => k,
        Binning::Count(_) => return Err(Error::InvalidParams("bin count must be positive".into())),
        Binning::FreedmanDiaconis => {
            let iqr = quantile(&pooled, 0.75) - quantile(&pooled, 0.25);
            let width = 2.0 * iqr / (pooled.len() as f64).cbrt();
            if !(width > 0.0) || range == 0.0 {
                1
            } else {
                (range / width).ceil().max(1.0) as usize
            }
        }
    };
    let step = if range > 0.0 {
        range / bins as f64
    } else {
        1.0
    };
    let mut edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * step).collect();
    edges[bins] = if range > 0.0 { hi } else { lo + 1.0 };
    Ok(edges)
}

fn histogram(values: &[f64], edges: &[f64], label: Conditioning) -> DensityEstimate {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut counts = vec![0u64; bins];
    for &v in values {
        let k = (((v - lo) / (hi - lo)) * bins as f64).floor();
        let k = (k.max(0.0) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = values.len().max(1) as f64;
    DensityEstimate {
        label,
        bin_edges: edges.to_vec(),
        mass: counts.iter().map(|&c| c as f64 / total).collect(),
    }
}

/// The two conditionals and their equal-weight mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignDensities {
    pub plus: DensityEstimate,
    pub minus: DensityEstimate,
    pub marginal: DensityEstimate,
}

impl SignDensities {
    pub fn new(samples: &SignSamples, edges: &[f64]) -> Self {
        let plus = histogram(&samples.plus, edges, Conditioning::Plus);
        let minus = histogram(&samples.minus, edges, Conditioning::Minus);
        let marginal = DensityEstimate {
            label: Conditioning::Marginal,
            bin_edges: edges.to_vec(),
            mass: plus
                .mass
                .iter()
                .zip(&minus.mass)
                .map(|(p, m)| 0.5 * (p + m))
                .collect(),
        };
        Self {
            plus,
            minus,
            marginal,
        }
    }

    /// `H(marginal) - H(plus)/2 - H(minus)/2`, in bits.
    pub fn mutual_information(&self) -> f64 {
        let mi = self.marginal.entropy_bits()
            - 0.5 * self.plus.entropy_bits()
            - 0.5 * self.minus.entropy_bits();
        mi.max(0.0)
    }

    /// `sum min(p_plus, p_minus)` over bins.
    pub fn overlap(&self) -> f64 {
        self.plus
            .mass
            .iter()
            .zip(&self.minus.mass)
            .map(|(a, b)| a.min(*b))
            .sum()
    }

    /// CSV with columns `zdot,p_plus,p_minus,p_marginal` at bin centres.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("zdot,p_plus,p_minus,p_marginal\n");
        let (dp, dm, dx) = (
            self.plus.density(),
            self.minus.density(),
            self.marginal.density(),
        );
        for (k, e) in self.plus.bin_edges.windows(2).enumerate() {
            let c = 0.5 * (e[0] + e[1]);
            out.push_str(&format!(
                "{c:.10e},{:.10e},{:.10e},{:.10e}\n",
                dp[k], dm[k], dx[k]
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignMiReport {
    pub samples: usize,
    pub bins: usize,
    pub mi_bits: f64,
    /// `|I(bins) - I(bin width halved)|`.
    pub stability_delta: f64,
    pub overlap: f64,
}

/// Plug-in estimate of `I(s; zdot)` with equiprobable signs.
pub fn estimate_sign_mi(samples: &SignSamples, binning: Binning) -> Result<SignMiReport> {
    let fewest = samples.plus.len().min(samples.minus.len());
    if fewest < MIN_CONDITIONAL_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{fewest} samples in the smaller conditional, need {MIN_CONDITIONAL_SAMPLES}"
        )));
    }
    mi_unchecked(samples, binning)
}

/// As [`estimate_sign_mi`] without the sample-size floor.
pub fn mi_unchecked(samples: &SignSamples, binning: Binning) -> Result<SignMiReport> {
    let edges = shared_edges(samples, binning)?;
    let bins = edges.len() - 1;
    let dens = SignDensities::new(samples, &edges);
    let fine_edges = shared_edges(samples, Binning::Count(2 * bins))?;
    let fine = SignDensities::new(samples, &fine_edges).mutual_information();
    let mi = dens.mutual_information();
    Ok(SignMiReport {
        samples: samples.len(),
        bins,
        mi_bits: mi,
        stability_delta: (mi - fine).abs(),
        overlap: dens.overlap(),
    })
}
