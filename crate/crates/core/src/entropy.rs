//! μ-entropies and equivalent degrees of freedom.
//!
//! The μ-entropy of a distribution is the logarithm of its effective number,
//! `𝒮[P] = log 𝒩[N P]`. All logarithms here are natural; the degree of
//! freedom density is a ratio of logarithms and so base-independent.

use rayon::prelude::*;

use crate::counting::{
    effnum, effnum_min, product, weights_from_probs, CountingFunction, ProbabilityVector,
};
use crate::error::{Error, Result};
use crate::fit::linear_fit;

/// `log 𝒩[N P]`, in `[0, log N]`.
pub fn mu_entropy(p: &ProbabilityVector, c: &CountingFunction) -> f64 {
    effnum(&weights_from_probs(p), c).ln()
}

/// `𝒮⋆[P] = log Σ min{N p_i, 1}`.
pub fn mu_entropy_min(p: &ProbabilityVector) -> f64 {
    effnum_min(&weights_from_probs(p)).ln()
}

/// `𝒮_α[P] = log Σ min{(N p_i)^α, 1}`, `0 < α ≤ 1`.
pub fn mu_entropy_alpha(p: &ProbabilityVector, alpha: f64) -> Result<f64> {
    Ok(mu_entropy(p, &CountingFunction::canonical(alpha)?))
}

/// `𝒮_α[P ⊠ Q] − 𝒮_α[P] − 𝒮_α[Q]`; never negative beyond rounding.
pub fn superadditivity_gap(p: &ProbabilityVector, q: &ProbabilityVector, alpha: f64) -> Result<f64> {
    let c = CountingFunction::canonical(alpha)?;
    let joint = mu_entropy(&product(p, q), &c);
    Ok(joint - mu_entropy(p, &c) - mu_entropy(q, &c))
}

/// `K` degrees of freedom with `κ` states each; `N = κ^K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofModel {
    kappa: u64,
    k_count: u32,
    n: usize,
}

impl DofModel {
    pub fn new(kappa: u64, k_count: u32) -> Result<Self> {
        if kappa < 2 {
            return Err(Error::Invalid(format!("kappa must be at least 2, got {kappa}")));
        }
        if k_count == 0 {
            return Err(Error::Invalid("need at least one degree of freedom".into()));
        }
        let n = kappa
            .checked_pow(k_count)
            .and_then(|n| usize::try_from(n).ok())
            .ok_or(Error::Overflow {
                kappa,
                k: k_count,
            })?;
        Ok(Self { kappa, k_count, n })
    }

    pub fn kappa(&self) -> u64 {
        self.kappa
    }

    pub fn k_count(&self) -> u32 {
        self.k_count
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

fn check_model(p: &ProbabilityVector, model: &DofModel) -> Result<()> {
    if p.n() != model.n {
        return Err(Error::DimensionMismatch {
            expected: model.n,
            found: p.n(),
        });
    }
    Ok(())
}

/// Degree-of-freedom equivalent `K_eq = log_κ 𝒩`, in `[0, K]`.
pub fn k_equivalent(p: &ProbabilityVector, model: &DofModel, c: &CountingFunction) -> Result<f64> {
    check_model(p, model)?;
    Ok(mu_entropy(p, c) / (model.kappa as f64).ln())
}

/// Degree-of-freedom density `k_eq = K_eq / K`, in `[0, 1]`.
pub fn dfd(p: &ProbabilityVector, model: &DofModel, c: &CountingFunction) -> Result<f64> {
    Ok(k_equivalent(p, model, c)? / model.k_count as f64)
}

/// One member of a [`dfd_gamma_scan`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScanStep {
    pub n: usize,
    pub effnum: f64,
    /// `𝔉 = 𝒩 / N`.
    pub fraction: f64,
    /// `1 + log 𝔉 / log N`.
    pub k_eq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaScan {
    pub steps: Vec<ScanStep>,
    /// Decay exponent from `𝔉 ∝ N^{−γ}`.
    pub gamma: f64,
    /// RMS residual of the log–log fit.
    pub residual: f64,
    /// Number of trailing steps the fit used.
    pub fitted: usize,
}

/// Estimates `γ` in `𝔉[P_N] ∝ N^{−γ}` along a family of growing size by a
/// least-squares fit of `log 𝔉` against `log N`.
///
/// `fit_last` selects how many trailing members enter the fit; `None` uses
/// the last ⌈len/2⌉ (at least two) to suppress small-`N` transients.
pub fn dfd_gamma_scan(
    family: &[ProbabilityVector],
    c: &CountingFunction,
    fit_last: Option<usize>,
) -> Result<GammaScan> {
    if family.len() < 3 {
        return Err(Error::TooFew {
            need: 3,
            got: family.len(),
        });
    }
    for (k, p) in family.iter().enumerate() {
        if p.n() < 2 {
            return Err(Error::Invalid(format!("family member {k} has N < 2")));
        }
        if k > 0 && p.n() <= family[k - 1].n() {
            return Err(Error::Invalid(format!(
                "family sizes must increase strictly (member {k})"
            )));
        }
    }

    let steps: Vec<ScanStep> = family
        .par_iter()
        .map(|p| {
            let n = p.n();
            let e = effnum(&weights_from_probs(p), c);
            let fraction = e / n as f64;
            ScanStep {
                n,
                effnum: e,
                fraction,
                k_eq: 1.0 + fraction.ln() / (n as f64).ln(),
            }
        })
        .collect();

    let len = steps.len();
    let fitted = fit_last.unwrap_or(len.div_ceil(2)).clamp(2, len);
    let tail = &steps[len - fitted..];
    let xs: Vec<f64> = tail.iter().map(|s| (s.n as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|s| s.fraction.ln()).collect();
    let line = linear_fit(&xs, &ys).ok_or_else(|| Error::Invalid("degenerate fit".into()))?;
    Ok(GammaScan {
        steps,
        gamma: 0.0 - line.slope,
        residual: line.residual,
        fitted,
    })
}
