//! Born-rule sampling of repeated measurements and plug-in estimation.
//!
//! Outcomes are drawn by inverse-CDF sampling from [`ChaCha20Rng`] seeded
//! with `seed_from_u64(seed)` on stream 0. Bootstrap replica `r` uses the same
//! key on stream `r + 1`, so replicas are independent of each other, of the
//! sampling stream and of the thread schedule.
//!
//! The plug-in estimate of a nonlinear effective number is biased at finite
//! `T`; the bootstrap standard error is reported, the bias is not corrected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::counting::{effnum, weights_from_probs, CountingFunction, ProbabilityVector};
use crate::error::{Error, Result};
use crate::state::{subspace_probs, OrthogonalDecomposition, OrthonormalBasis, PureState};
use crate::sum::fsum;

/// Generator identification embedded in simulation output.
pub const GENERATOR: &str = "ChaCha20Rng (rand_chacha 0.9.0; seed_from_u64, stream 0 sampling, stream r+1 bootstrap replica r)";
/// Smallest trial count accepted by [`plugin_mu_estimate`].
pub const MIN_TRIALS: usize = 100;
/// Smallest bootstrap resample count.
pub const MIN_RESAMPLES: usize = 200;

/// Outcome indices (0-based subspace indices) of `T` trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSequence {
    trials: Vec<usize>,
    m_count: usize,
    seed: u64,
}

impl OutcomeSequence {
    /// Wraps recorded outcomes; every index must be below `m_count`.
    pub fn new(trials: Vec<usize>, m_count: usize, seed: u64) -> Result<Self> {
        if trials.is_empty() || m_count == 0 {
            return Err(Error::Empty);
        }
        if let Some(i) = trials.iter().position(|&m| m >= m_count) {
            return Err(Error::Invalid(format!(
                "trial {i} has outcome {} outside 0..{m_count}",
                trials[i]
            )));
        }
        Ok(Self {
            trials,
            m_count,
            seed,
        })
    }

    pub fn trials(&self) -> &[usize] {
        &self.trials
    }

    pub fn t_count(&self) -> usize {
        self.trials.len()
    }

    pub fn m_count(&self) -> usize {
        self.m_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Occurrences of each outcome.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.m_count];
        for &m in &self.trials {
            counts[m] += 1;
        }
        counts
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `t` i.i.d. outcomes from `p`.
pub fn sample_from_probs(p: &ProbabilityVector, t: usize, seed: u64) -> Result<OutcomeSequence> {
    if t == 0 {
        return Err(Error::TooFew { need: 1, got: 0 });
    }
    let probs = p.as_slice();
    let mut acc = Vec::with_capacity(probs.len());
    let cdf: Vec<f64> = probs
        .iter()
        .map(|&x| {
            acc.push(x);
            fsum(acc.iter().copied())
        })
        .collect();
    let last = probs
        .iter()
        .rposition(|&x| x > 0.0)
        .ok_or_else(|| Error::Invalid("probability vector has no mass".into()))?;
    let mut rng = stream_rng(seed, 0);
    let trials = (0..t)
        .map(|_| {
            let u: f64 = rng.random();
            cdf.partition_point(|&x| x <= u).min(last)
        })
        .collect();
    OutcomeSequence::new(trials, probs.len(), seed)
}

/// Repeated measurement of `psi` in the blocks of `dec` (relative to `basis`).
pub fn sample_outcomes(
    psi: &PureState,
    dec: &OrthogonalDecomposition,
    basis: &OrthonormalBasis,
    t: usize,
    seed: u64,
) -> Result<OutcomeSequence> {
    sample_from_probs(&subspace_probs(psi, dec, basis)?, t, seed)
}

/// `count_i / T`, with the last nonzero entry adjusted so that the exactly
/// rounded sum is `1`.
fn probs_from_counts(counts: &[u64], t: u64) -> ProbabilityVector {
    let tf = t as f64;
    let mut p: Vec<f64> = counts.iter().map(|&k| k as f64 / tf).collect();
    if let Some(last) = counts.iter().rposition(|&k| k > 0) {
        for _ in 0..4 {
            let total = fsum(p.iter().copied());
            if total == 1.0 {
                break;
            }
            p[last] += 1.0 - total;
        }
    }
    ProbabilityVector::from_raw(p)
}

/// Relative outcome frequencies over the `m_count` blocks.
pub fn empirical_probs(seq: &OutcomeSequence) -> ProbabilityVector {
    probs_from_counts(&seq.counts(), seq.t_count() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PluginEstimate {
    pub estimate: f64,
    /// Sample standard deviation of the bootstrap replicas.
    pub stderr: f64,
    pub resamples: usize,
}

/// Multinomial resample of `t` trials with cell probabilities `p`.
fn multinomial<R: Rng>(rng: &mut R, t: u64, p: &[f64]) -> Vec<u64> {
    let mut out = vec![0u64; p.len()];
    let mut left = t;
    let mut mass = 1.0;
    let last = p.iter().rposition(|&x| x > 0.0).unwrap_or(0);
    for (i, &pi) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i == last {
            out[i] = left;
            break;
        }
        if pi <= 0.0 {
            continue;
        }
        let q = (pi / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).map_or(0, |b| b.sample(rng)).min(left);
        out[i] = k;
        left -= k;
        mass -= pi;
    }
    out
}

/// Plug-in effective number of the empirical frequencies, with a bootstrap
/// standard error from `resamples` multinomial resamples of the counts.
pub fn plugin_mu_estimate(
    seq: &OutcomeSequence,
    c: &CountingFunction,
    resamples: usize,
) -> Result<PluginEstimate> {
    if seq.t_count() < MIN_TRIALS {
        return Err(Error::TooFew {
            need: MIN_TRIALS,
            got: seq.t_count(),
        });
    }
    if resamples < MIN_RESAMPLES {
        return Err(Error::TooFew {
            need: MIN_RESAMPLES,
            got: resamples,
        });
    }
    let t = seq.t_count() as u64;
    let p_hat = empirical_probs(seq);
    let estimate = effnum(&weights_from_probs(&p_hat), c);

    let replicas: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seq.seed, r + 1);
            let counts = multinomial(&mut rng, t, p_hat.as_slice());
            effnum(&weights_from_probs(&probs_from_counts(&counts, t)), c)
        })
        .collect();
    let b = replicas.len() as f64;
    let mean = fsum(replicas.iter().copied()) / b;
    let var = fsum(replicas.iter().map(|x| (x - mean) * (x - mean))) / (b - 1.0);
    Ok(PluginEstimate {
        estimate,
        stderr: var.sqrt(),
        resamples,
    })
}

/// Estimates at one trial count across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub t: usize,
    /// One entry per seed, in seed order.
    pub estimates: Vec<PluginEstimate>,
    pub median_abs_error: f64,
    pub mean_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceScan {
    pub exact: f64,
    pub rows: Vec<ConvergenceRow>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Plug-in estimates for every `(t, seed)` pair against the exact value.
pub fn convergence_scan(
    p: &ProbabilityVector,
    c: &CountingFunction,
    t_values: &[usize],
    seeds: &[u64],
    resamples: usize,
) -> Result<ConvergenceScan> {
    if seeds.is_empty() || t_values.is_empty() {
        return Err(Error::Empty);
    }
    let exact = effnum(&weights_from_probs(p), c);
    let rows = t_values
        .iter()
        .map(|&t| {
            let estimates = seeds
                .par_iter()
                .map(|&seed| plugin_mu_estimate(&sample_from_probs(p, t, seed)?, c, resamples))
                .collect::<Result<Vec<_>>>()?;
            let median_abs_error = median(estimates.iter().map(|e| (e.estimate - exact).abs()).collect());
            let mean_estimate = fsum(estimates.iter().map(|e| e.estimate)) / estimates.len() as f64;
            Ok(ConvergenceRow {
                t,
                estimates,
                median_abs_error,
                mean_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceScan { exact, rows })
}
