//! Counting functions, counting-weight vectors and effective number functions.
//!
//! An effective number function assigns to `N` objects with probabilities
//! `p_i` the count `Σ c(N p_i)`, where `c` is its counting function. The
//! minimal counting function `c⋆(w) = min{w, 1}` yields the smallest count
//! among all admissible ones; the canonical family `c_α(w) = min{w^α, 1}`,
//! `0 < α ≤ 1`, interpolates between it (`α = 1`) and the nominal count.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sum::fsum;

/// Tolerance on `Σ p_i = 1`.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Tolerance on `Σ w_i = n`, per unit of `n`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

fn check_entries(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Empty);
    }
    for (index, &value) in xs.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if value < 0.0 {
            return Err(Error::NegativeEntry { index, value });
        }
    }
    Ok(())
}

/// Probabilities `(p_1, …, p_N)` of `N` objects.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    p: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(p, PROB_SUM_TOL)
    }

    pub fn with_tolerance(p: Vec<f64>, tol: f64) -> Result<Self> {
        check_entries(&p)?;
        let sum = fsum(p.iter().copied());
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { p })
    }

    /// Uniform distribution over `n` objects.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            p: vec![1.0 / n as f64; n],
        })
    }

    /// Uniform over the first `support` of `n` objects, zero elsewhere.
    pub fn uniform_on(n: usize, support: usize) -> Result<Self> {
        if support == 0 || support > n {
            return Err(Error::Invalid(format!(
                "support size {support} must lie in [1, {n}]"
            )));
        }
        let mut p = vec![0.0; n];
        p[..support].fill(1.0 / support as f64);
        Ok(Self { p })
    }

    /// All probability on object `index`.
    pub fn certain(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: index + 1,
            });
        }
        let mut p = vec![0.0; n];
        p[index] = 1.0;
        Ok(Self { p })
    }

    /// Builds a vector known to be normalized by construction.
    pub(crate) fn from_raw(p: Vec<f64>) -> Self {
        debug_assert!(!p.is_empty());
        Self { p }
    }

    /// Nominal count `N`.
    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }
}

/// Counting weights `w_i = N p_i`, summing to `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    w: Vec<f64>,
}

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        check_entries(&w)?;
        let n = w.len();
        let sum = fsum(w.iter().copied());
        if (sum - n as f64).abs() > WEIGHT_SUM_TOL * n as f64 {
            return Err(Error::WeightSum { n, sum });
        }
        Ok(Self { w })
    }

    /// Wraps weights that sum to `n` by construction.
    pub(crate) fn from_raw(w: Vec<f64>) -> Self {
        Self { w }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }
}

/// `w_i = N p_i`.
pub fn weights_from_probs(p: &ProbabilityVector) -> WeightVector {
    let n = p.n() as f64;
    WeightVector {
        w: p.as_slice().iter().map(|&x| n * x).collect(),
    }
}

/// Exponent of the canonical counting function, validated to `0 < α ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 1.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// User-supplied kernel. Only necessary conditions can be checked, see
/// [`validate_counting_function`].
#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

/// The per-object kernel `c(w)` of an effective number function.
#[derive(Clone)]
pub enum CountingFunction {
    /// `c⋆(w) = min{w, 1}`.
    Minimal,
    /// `c_α(w) = min{w^α, 1}`.
    Canonical(Alpha),
    Custom(CustomKernel),
}

impl CountingFunction {
    pub fn minimal() -> Self {
        CountingFunction::Minimal
    }

    pub fn canonical(alpha: f64) -> Result<Self> {
        Ok(CountingFunction::Canonical(Alpha::new(alpha)?))
    }

    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        CountingFunction::Custom(CustomKernel {
            name: name.into(),
            f: Arc::new(f),
        })
    }

    #[inline]
    pub fn eval(&self, w: f64) -> f64 {
        match self {
            CountingFunction::Minimal => w.min(1.0),
            CountingFunction::Canonical(a) => {
                if a.0 == 1.0 || w >= 1.0 {
                    w.min(1.0)
                } else {
                    w.powf(a.0)
                }
            }
            CountingFunction::Custom(k) => (k.f)(w),
        }
    }

    /// Short selector string: `star`, `alpha=<x>` or the custom name.
    pub fn label(&self) -> String {
        match self {
            CountingFunction::Minimal => "star".to_string(),
            CountingFunction::Canonical(a) => format!("alpha={}", a.0),
            CountingFunction::Custom(k) => k.name.clone(),
        }
    }
}

impl fmt::Debug for CountingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountingFunction::Minimal => f.write_str("Minimal"),
            CountingFunction::Canonical(a) => f.debug_tuple("Canonical").field(&a.0).finish(),
            CountingFunction::Custom(k) => f.debug_tuple("Custom").field(&k.name).finish(),
        }
    }
}

impl FromStr for CountingFunction {
    type Err = Error;

    /// Parses `star` or `alpha=<x>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("star") || s.eq_ignore_ascii_case("min") {
            return Ok(CountingFunction::Minimal);
        }
        if let Some(rest) = s.strip_prefix("alpha=") {
            let alpha: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("cannot parse alpha from {rest:?}")))?;
            return CountingFunction::canonical(alpha);
        }
        Err(Error::Invalid(format!(
            "unknown counting function {s:?}; expected `star` or `alpha=<x>`"
        )))
    }
}

/// `𝒩[W] = Σ c(w_i)`.
pub fn effnum(w: &WeightVector, c: &CountingFunction) -> f64 {
    fsum(w.w.iter().map(|&x| c.eval(x)))
}

/// `𝒩⋆[W] = Σ min{w_i, 1}`.
pub fn effnum_min(w: &WeightVector) -> f64 {
    fsum(w.w.iter().map(|&x| x.min(1.0)))
}

/// Tuple concatenation `W₁ ⊞ W₂`.
pub fn concat(w1: &WeightVector, w2: &WeightVector) -> WeightVector {
    let mut w = Vec::with_capacity(w1.n() + w2.n());
    w.extend_from_slice(&w1.w);
    w.extend_from_slice(&w2.w);
    WeightVector { w }
}

/// Product distribution `P ⊠ Q`, entries `p_i q_j` in row-major order.
pub fn product(p: &ProbabilityVector, q: &ProbabilityVector) -> ProbabilityVector {
    let mut out = Vec::with_capacity(p.n() * q.n());
    for &pi in &p.p {
        out.extend(q.p.iter().map(|&qj| pi * qj));
    }
    ProbabilityVector::from_raw(out)
}

/// Outcome of one necessary-condition check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Report of [`validate_counting_function`].
#[derive(Debug, Clone, PartialEq)]
pub struct CountingFunctionReport {
    pub label: String,
    pub checks: Vec<ConditionCheck>,
}

impl CountingFunctionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Uniform grid of `points` samples on `[0, w_max]`.
pub fn uniform_grid(w_max: f64, points: usize) -> Vec<f64> {
    let points = points.max(2);
    let h = w_max / (points - 1) as f64;
    (0..points).map(|k| k as f64 * h).collect()
}

const CHECK_TOL: f64 = 1e-12;
const LIPSCHITZ_FACTOR: f64 = 10.0;
const BISECTIONS: usize = 50;

/// Checks the necessary conditions on a counting function over `grid`:
/// `c(0) = 0`, `c(1) = 1`, `0 ≤ c ≤ 1`, `c ≥ c⋆` and sampled continuity.
///
/// The continuity check is a heuristic. Adjacent samples whose difference
/// exceeds ten times their spacing are bisected; a jump that survives the
/// bisection (residual above half the original difference) is reported as a
/// discontinuity. Kernels steeper than `w^0.02` near a point are flagged too.
pub fn validate_counting_function(c: &CountingFunction, grid: &[f64]) -> CountingFunctionReport {
    let mut grid: Vec<f64> = grid.iter().copied().filter(|x| x.is_finite()).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut checks = Vec::with_capacity(5);

    let c0 = c.eval(0.0);
    checks.push(ConditionCheck {
        name: "c(0)=0",
        passed: c0.abs() <= CHECK_TOL,
        detail: format!("c(0) = {c0}"),
    });

    let c1 = c.eval(1.0);
    checks.push(ConditionCheck {
        name: "c(1)=1",
        passed: (c1 - 1.0).abs() <= CHECK_TOL,
        detail: format!("c(1) = {c1}"),
    });

    let values: Vec<f64> = grid.iter().map(|&w| c.eval(w)).collect();

    let bad_bound = grid
        .iter()
        .zip(&values)
        .find(|(_, &v)| !(-CHECK_TOL..=1.0 + CHECK_TOL).contains(&v));
    checks.push(ConditionCheck {
        name: "0<=c<=1",
        passed: bad_bound.is_none(),
        detail: match bad_bound {
            Some((w, v)) => format!("c({w}) = {v}"),
            None => format!("{} samples in range", grid.len()),
        },
    });

    let bad_min = grid
        .iter()
        .zip(&values)
        .find(|(&w, &v)| !(v >= w.min(1.0) - CHECK_TOL));
    checks.push(ConditionCheck {
        name: "c>=c_star",
        passed: bad_min.is_none(),
        detail: match bad_min {
            Some((w, v)) => format!("c({w}) = {v} < min(w, 1)"),
            None => format!("{} samples dominate min(w, 1)", grid.len()),
        },
    });

    let jump = find_jump(c, &grid, &values);
    checks.push(ConditionCheck {
        name: "continuity",
        passed: jump.is_none(),
        detail: match jump {
            Some((w, size)) => format!("jump of {size:e} near w = {w}"),
            None => "no surviving jumps".to_string(),
        },
    });

    CountingFunctionReport {
        label: c.label(),
        checks,
    }
}

fn find_jump(c: &CountingFunction, grid: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    for k in 1..grid.len() {
        let (a, b) = (grid[k - 1], grid[k]);
        let d = (values[k] - values[k - 1]).abs();
        if !d.is_finite() {
            return Some((a, d));
        }
        if d <= LIPSCHITZ_FACTOR * (b - a) {
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        let (mut clo, mut chi) = (values[k - 1], values[k]);
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let cm = c.eval(mid);
            if (cm - clo).abs() >= (chi - cm).abs() {
                hi = mid;
                chi = cm;
            } else {
                lo = mid;
                clo = cm;
            }
        }
        let residual = (chi - clo).abs();
        if !(residual <= 0.5 * d) {
            return Some((lo, residual));
        }
    }
    None
}
