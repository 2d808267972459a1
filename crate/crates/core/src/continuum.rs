//! Continuum limits by midpoint Riemann sums.
//!
//! Every integral in this module is a cell sum `Σ vol_i · g(x_i)` with `x_i`
//! the cell centre, accumulated with [`fsum`]. Identities that hold cell by
//! cell (partition additivity, sector splitting) therefore hold at finite
//! resolution up to rounding of the individual terms.

use num_complex::Complex64;

use crate::counting::{effnum, CountingFunction, WeightVector};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::sum::fsum;

/// Highest grid dimension handled by [`Grid`].
pub const MAX_GRID_DIM: usize = 3;
/// Tolerance on Riemann-sum normalization of densities and wave functions.
pub const DENSITY_NORM_TOL: f64 = 1e-8;
/// Cells with `η < SUPPORT_REL_TOL · max η` lie outside the spectral support.
pub const SUPPORT_REL_TOL: f64 = 1e-14;
/// Largest `P` tolerated outside the spectral support.
pub const OFF_SUPPORT_TOL: f64 = 1e-12;
/// Fractional-index distance below which interpolation snaps to a node.
const SNAP_TOL: f64 = 1e-9;

/// Regular hypercubic grid of `D ≤ 3` dimensions, cells enumerated row-major
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl Grid {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        let d = shape.len();
        if d == 0 || d > MAX_GRID_DIM {
            return Err(Error::Invalid(format!(
                "grid dimension must be 1..={MAX_GRID_DIM}, got {d}"
            )));
        }
        if spacing.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: spacing.len(),
            });
        }
        if origin.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: origin.len(),
            });
        }
        if shape.contains(&0) {
            return Err(Error::Invalid("grid shape has an empty axis".into()));
        }
        if let Some(k) = spacing.iter().position(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::Invalid(format!("spacing on axis {k} must be positive")));
        }
        if let Some(k) = origin.iter().position(|o| !o.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        if shape.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).is_none() {
            return Err(Error::Invalid("grid has too many cells".into()));
        }
        Ok(Self {
            shape,
            spacing,
            origin,
        })
    }

    /// `cells` equal cells covering `[lo, hi]`.
    pub fn line(cells: usize, lo: f64, hi: f64) -> Result<Self> {
        if cells == 0 {
            return Err(Error::Empty);
        }
        Self::new(vec![cells], vec![(hi - lo) / cells as f64], vec![lo])
    }

    pub fn d(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn cells(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// `V = Π shape_k · spacing_k`.
    pub fn volume(&self) -> f64 {
        self.shape
            .iter()
            .zip(&self.spacing)
            .map(|(&s, h)| s as f64 * h)
            .product()
    }

    /// Centre of cell `index`.
    pub fn center(&self, index: usize) -> Vec<f64> {
        let mut rest = index;
        let mut x = vec![0.0; self.d()];
        for k in (0..self.d()).rev() {
            let i = rest % self.shape[k];
            rest /= self.shape[k];
            x[k] = self.origin[k] + (i as f64 + 0.5) * self.spacing[k];
        }
        x
    }

    /// All cell centres in cell order.
    pub fn centers(&self) -> Vec<Vec<f64>> {
        (0..self.cells()).map(|i| self.center(i)).collect()
    }

    /// Per-cell volumes (all equal).
    pub fn cell_volumes(&self) -> Vec<f64> {
        vec![self.cell_volume(); self.cells()]
    }
}

/// Wave function sampled at cell centres, `Σ |ψ|² · vol = 1`.
#[derive(Debug, Clone)]
pub struct GridWaveFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridWaveFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::DimensionMismatch {
                expected: grid.cells(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite(i));
        }
        let norm = fsum(values.iter().map(|z| z.norm_sqr())) * grid.cell_volume();
        if (norm - 1.0).abs() > DENSITY_NORM_TOL {
            return Err(Error::NotNormalized { sum: norm });
        }
        Ok(Self { grid, values })
    }

    /// Rescales `values` to unit Riemann norm.
    pub fn normalized(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        let norm = fsum(values.iter().map(|z| z.norm_sqr())) * grid.cell_volume();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { sum: norm });
        }
        let s = norm.sqrt().recip();
        Self::new(grid, values.into_iter().map(|z| z * s).collect())
    }

    /// Samples `f` at the cell centres and normalizes.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Result<Self> {
        let values = grid.centers().iter().map(|x| f(x)).collect();
        Self::normalized(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `|ψ|²` per cell.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// `Σ vol · c(V |ψ|²)`, in `(0, V]`.
pub fn effective_volume(psi: &GridWaveFunction, c: &CountingFunction) -> f64 {
    let v = psi.grid.volume();
    let vol = psi.grid.cell_volume();
    fsum(psi.values.iter().map(|z| vol * c.eval(v * z.norm_sqr())))
}

/// Minimal effective volume density `ν⋆ = min{V |ψ|², 1}` per cell.
pub fn effective_volume_density(psi: &GridWaveFunction) -> Vec<f64> {
    let v = psi.grid.volume();
    psi.values
        .iter()
        .map(|z| CountingFunction::Minimal.eval(v * z.norm_sqr()))
        .collect()
}

fn check_density(cell_volumes: &[f64], p: &[f64], what: &str) -> Result<()> {
    if p.len() != cell_volumes.len() {
        return Err(Error::DimensionMismatch {
            expected: cell_volumes.len(),
            found: p.len(),
        });
    }
    if let Some(i) = p.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if let Some(i) = p.iter().position(|&x| x < 0.0) {
        return Err(Error::NegativeEntry {
            index: i,
            value: p[i],
        });
    }
    let total = fsum(cell_volumes.iter().zip(p).map(|(v, x)| v * x));
    if (total - 1.0).abs() > DENSITY_NORM_TOL {
        return Err(Error::Invalid(format!("{what} integrates to {total}, expected 1")));
    }
    Ok(())
}

fn check_cells(cell_volumes: &[f64]) -> Result<()> {
    if cell_volumes.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(i) = cell_volumes.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Invalid(format!("cell {i} has non-positive volume")));
    }
    Ok(())
}

/// Effective Jordan content `Σ vol · c(V P)` of a region given as cells.
pub fn effective_jordan_content(
    cell_volumes: &[f64],
    p: &[f64],
    c: &CountingFunction,
) -> Result<f64> {
    check_cells(cell_volumes)?;
    check_density(cell_volumes, p, "P")?;
    let v = fsum(cell_volumes.iter().copied());
    Ok(fsum(cell_volumes.iter().zip(p).map(|(vol, x)| vol * c.eval(v * x))))
}

/// Support mask `η ≥ SUPPORT_REL_TOL · max η`; rejects `P` off the support.
fn support_mask(eta: &[f64], eta_max: f64, p: &[f64]) -> Result<Vec<bool>> {
    let threshold = SUPPORT_REL_TOL * eta_max;
    let support: Vec<bool> = eta.iter().map(|&e| e > 0.0 && e >= threshold).collect();
    for (cell, (&inside, &pv)) in support.iter().zip(p).enumerate() {
        if !inside && pv > OFF_SUPPORT_TOL {
            return Err(Error::InconsistentPair { cell, p: pv });
        }
    }
    Ok(support)
}

/// Sampled probability density `P` and spectral density `η` over cells.
#[derive(Debug, Clone)]
pub struct SpectralDensityPair {
    cell_volumes: Vec<f64>,
    p: Vec<f64>,
    eta: Vec<f64>,
    support: Vec<bool>,
    grid: Option<Grid>,
}

impl SpectralDensityPair {
    pub fn new(cell_volumes: Vec<f64>, p: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        check_cells(&cell_volumes)?;
        check_density(&cell_volumes, &p, "P")?;
        check_density(&cell_volumes, &eta, "eta")?;
        let eta_max = eta.iter().copied().fold(0.0, f64::max);
        let support = support_mask(&eta, eta_max, &p)?;
        Ok(Self {
            cell_volumes,
            p,
            eta,
            support,
            grid: None,
        })
    }

    pub fn on_grid(grid: Grid, p: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        let mut sd = Self::new(grid.cell_volumes(), p, eta)?;
        sd.grid = Some(grid);
        Ok(sd)
    }

    pub fn cells(&self) -> usize {
        self.cell_volumes.len()
    }

    pub fn cell_volumes(&self) -> &[f64] {
        &self.cell_volumes
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn support(&self) -> &[bool] {
        &self.support
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }
}

/// `η c(P/η)` with the convention that it vanishes off the support.
fn local_term(p: f64, eta: f64, c: &CountingFunction) -> f64 {
    eta * c.eval(p / eta)
}

/// Relative μ-uncertainty `𝔉 = Σ vol · η c(P/η)` over the support.
pub fn relative_mu_continuum(sd: &SpectralDensityPair, c: &CountingFunction) -> f64 {
    fsum((0..sd.cells())
        .filter(|&i| sd.support[i])
        .map(|i| sd.cell_volumes[i] * local_term(sd.p[i], sd.eta[i], c)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionAdditivity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// Spectral weights `F_i = ∫_{Ω_i} η`.
    pub f1: f64,
    pub f2: f64,
    /// Relative μ-uncertainties of the renormalized parts.
    pub part1: f64,
    pub part2: f64,
}

/// Compares `𝔉[P, η]` with `F₁ 𝔉[P₁, η₁] + F₂ 𝔉[P₂, η₂]`, where the cut
/// assigns `true` cells to `Ω₁` and `η_i = η/F_i`, `P_i = P/F_i` on `Ω_i`.
pub fn partition_additivity_check(
    sd: &SpectralDensityPair,
    cut: &[bool],
    c: &CountingFunction,
) -> Result<PartitionAdditivity> {
    if cut.len() != sd.cells() {
        return Err(Error::DimensionMismatch {
            expected: sd.cells(),
            found: cut.len(),
        });
    }
    let weight = |side: bool| {
        fsum((0..sd.cells())
            .filter(|&i| cut[i] == side && sd.support[i])
            .map(|i| sd.cell_volumes[i] * sd.eta[i]))
    };
    let f1 = weight(true);
    let f2 = weight(false);
    if f1 == 0.0 {
        return Err(Error::EmptyPart(1));
    }
    if f2 == 0.0 {
        return Err(Error::EmptyPart(2));
    }
    let part = |side: bool, f: f64| {
        fsum((0..sd.cells())
            .filter(|&i| cut[i] == side && sd.support[i])
            .map(|i| sd.cell_volumes[i] * local_term(sd.p[i] / f, sd.eta[i] / f, c)))
    };
    let part1 = part(true, f1);
    let part2 = part(false, f2);
    let lhs = relative_mu_continuum(sd, c);
    let rhs = fsum([f1 * part1, f2 * part2]);
    Ok(PartitionAdditivity {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        f1,
        f2,
        part1,
        part2,
    })
}

/// Sectors `(η_m, P_m)` sharing one continuous grid; `Σ_m ∫ η_m = 1` and
/// likewise for `P_m`.
#[derive(Debug, Clone)]
pub struct SectorFamily {
    cell_volumes: Vec<f64>,
    sectors: Vec<(Vec<f64>, Vec<f64>)>,
    support: Vec<Vec<bool>>,
}

impl SectorFamily {
    /// `sectors` holds `(eta_m, p_m)` pairs.
    pub fn new(cell_volumes: Vec<f64>, sectors: Vec<(Vec<f64>, Vec<f64>)>) -> Result<Self> {
        check_cells(&cell_volumes)?;
        if sectors.is_empty() {
            return Err(Error::Empty);
        }
        let n = cell_volumes.len();
        let mut eta_total = Vec::new();
        let mut p_total = Vec::new();
        for (eta, p) in &sectors {
            for s in [eta, p] {
                if s.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: s.len(),
                    });
                }
                if let Some(i) = s.iter().position(|x| !x.is_finite()) {
                    return Err(Error::NonFinite(i));
                }
                if let Some(i) = s.iter().position(|&x| x < 0.0) {
                    return Err(Error::NegativeEntry {
                        index: i,
                        value: s[i],
                    });
                }
            }
            eta_total.extend(cell_volumes.iter().zip(eta).map(|(v, x)| v * x));
            p_total.extend(cell_volumes.iter().zip(p).map(|(v, x)| v * x));
        }
        for (name, total) in [("eta", fsum(eta_total)), ("P", fsum(p_total))] {
            if (total - 1.0).abs() > DENSITY_NORM_TOL {
                return Err(Error::Invalid(format!(
                    "sector {name} densities integrate to {total}, expected 1"
                )));
            }
        }
        let eta_max = sectors
            .iter()
            .flat_map(|(eta, _)| eta.iter().copied())
            .fold(0.0, f64::max);
        let support = sectors
            .iter()
            .map(|(eta, p)| support_mask(eta, eta_max, p))
            .collect::<Result<_>>()?;
        Ok(Self {
            cell_volumes,
            sectors,
            support,
        })
    }

    pub fn m_count(&self) -> usize {
        self.sectors.len()
    }
}

/// `∫ Σ_m η_m c(P_m/η_m)` by Riemann sum.
pub fn mixed_relative_mu(sf: &SectorFamily, c: &CountingFunction) -> f64 {
    let terms = sf.sectors.iter().zip(&sf.support).flat_map(|((eta, p), sup)| {
        (0..sf.cell_volumes.len())
            .filter(|&i| sup[i])
            .map(move |i| sf.cell_volumes[i] * local_term(p[i], eta[i], c))
    });
    fsum(terms)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reparametrization {
    /// `𝔉` in the original variable.
    pub value: f64,
    /// `𝔉` in the relabelled variable.
    pub value_prime: f64,
    pub discrepancy: f64,
    /// Sum of the per-side quadrature error estimates.
    pub error_bound: f64,
}

/// Linear interpolation of cell-centre samples; snaps to nodes and is
/// constant within the outer half cells, zero beyond.
fn interpolate(values: &[f64], x0: f64, h: f64, x: f64) -> f64 {
    let n = values.len();
    let u = (x - x0) / h;
    let r = u.round();
    if (u - r).abs() <= SNAP_TOL && r >= 0.0 && r <= (n - 1) as f64 {
        return values[r as usize];
    }
    if u < 0.0 {
        return if u >= -0.5 { values[0] } else { 0.0 };
    }
    if u > (n - 1) as f64 {
        return if u <= n as f64 - 0.5 { values[n - 1] } else { 0.0 };
    }
    let i = u.floor() as usize;
    let t = u - i as f64;
    values[i] * (1.0 - t) + values[i + 1] * t
}

/// Error estimate of a cell sum: `|Σ_k (t_{2k} − t_{2k+1})|`, the gap between
/// the two interleaved rules of doubled spacing.
fn pair_error(terms: &[f64]) -> f64 {
    fsum(terms.chunks_exact(2).map(|pair| pair[0] - pair[1])).abs()
}

/// Evaluates `𝔉` in the original variable `λ` and in `λ′` with `λ = f(λ′)`,
/// `P′ = P(f) f′`, `η′ = η(f) f′`. `f` and `f′` are sampled at the cell
/// centres of the one-dimensional `prime` grid.
pub fn reparametrization_check(
    sd: &SpectralDensityPair,
    prime: &Grid,
    f: &[f64],
    fprime: &[f64],
    c: &CountingFunction,
) -> Result<Reparametrization> {
    let grid = sd
        .grid
        .as_ref()
        .ok_or_else(|| Error::Invalid("reparametrization needs a gridded pair".into()))?;
    if grid.d() != 1 || prime.d() != 1 {
        return Err(Error::Invalid("reparametrization is one-dimensional".into()));
    }
    for s in [f, fprime] {
        if s.len() != prime.cells() {
            return Err(Error::DimensionMismatch {
                expected: prime.cells(),
                found: s.len(),
            });
        }
        if let Some(i) = s.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    if let Some(i) = f.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotone(i + 1));
    }
    if let Some(i) = fprime.iter().position(|&d| d < 0.0) {
        return Err(Error::NonMonotone(i));
    }

    let terms: Vec<f64> = (0..sd.cells())
        .map(|i| {
            if sd.support[i] {
                sd.cell_volumes[i] * local_term(sd.p[i], sd.eta[i], c)
            } else {
                0.0
            }
        })
        .collect();

    let x0 = grid.origin[0] + 0.5 * grid.spacing[0];
    let h = grid.spacing[0];
    let threshold = SUPPORT_REL_TOL * sd.eta.iter().copied().fold(0.0, f64::max);
    let hp = prime.cell_volume();
    let terms_prime: Vec<f64> = f
        .iter()
        .zip(fprime)
        .map(|(&lambda, &df)| {
            let eta = interpolate(&sd.eta, x0, h, lambda);
            if eta <= 0.0 || eta < threshold {
                return 0.0;
            }
            let p = interpolate(&sd.p, x0, h, lambda);
            (hp * df) * local_term(p, eta, c)
        })
        .collect();

    let value = fsum(terms.iter().copied());
    let value_prime = fsum(terms_prime.iter().copied());
    Ok(Reparametrization {
        value,
        value_prime,
        discrepancy: (value - value_prime).abs(),
        error_bound: pair_error(&terms) + pair_error(&terms_prime),
    })
}

/// One discretization level: counting weights over `M_k` blocks and the
/// representative cell spacing `h_k`.
#[derive(Debug, Clone)]
pub struct RefinementLevel {
    pub weights: WeightVector,
    pub spacing: f64,
}

/// Supplies successively finer discretizations, `k = 0, 1, …`.
pub trait RefinableProblem {
    fn level(&self, k: usize) -> Result<RefinementLevel>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow {
    pub level: usize,
    pub m: usize,
    pub spacing: f64,
    pub effnum: f64,
    /// `𝒩_k / M_k`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementTable {
    pub rows: Vec<RefinementRow>,
    /// Fitted `F_∞` of `F_k = F_∞ + a h_k^order`.
    pub extrapolated: f64,
    pub slope: f64,
    /// RMS residual of the fit.
    pub residual: f64,
    pub order: f64,
    /// Number of trailing levels the fit used.
    pub fitted: usize,
}

/// Levels entering the extrapolation fit unless told otherwise.
pub const DEFAULT_FIT_LEVELS: usize = 3;

/// Evaluates `levels` discretizations and extrapolates `𝒩_k/M_k` to `h → 0`
/// from the finest `fit_last` levels (default [`DEFAULT_FIT_LEVELS`]).
pub fn refine_sequence<P: RefinableProblem + ?Sized>(
    problem: &P,
    levels: usize,
    c: &CountingFunction,
    order: f64,
    fit_last: Option<usize>,
) -> Result<RefinementTable> {
    if levels < 3 {
        return Err(Error::TooFew {
            need: 3,
            got: levels,
        });
    }
    if !(order.is_finite() && order > 0.0) {
        return Err(Error::Invalid(format!("extrapolation order must be positive, got {order}")));
    }
    let rows = (0..levels)
        .map(|k| {
            let lvl = problem.level(k)?;
            if !(lvl.spacing.is_finite() && lvl.spacing > 0.0) {
                return Err(Error::Invalid(format!("level {k} has non-positive spacing")));
            }
            let m = lvl.weights.n();
            let e = effnum(&lvl.weights, c);
            Ok(RefinementRow {
                level: k,
                m,
                spacing: lvl.spacing,
                effnum: e,
                ratio: e / m as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let first = rows[0].ratio;
    if rows.iter().all(|r| r.ratio == first) {
        return Ok(RefinementTable {
            rows,
            extrapolated: first,
            slope: 0.0,
            residual: 0.0,
            order,
            fitted: levels,
        });
    }
    let fitted = fit_last.unwrap_or(DEFAULT_FIT_LEVELS).clamp(2, levels);
    let tail = &rows[levels - fitted..];
    let xs: Vec<f64> = tail.iter().map(|r| r.spacing.powf(order)).collect();
    let ys: Vec<f64> = tail.iter().map(|r| r.ratio).collect();
    let fit = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::Invalid("levels share one spacing; cannot extrapolate".into()))?;
    Ok(RefinementTable {
        rows,
        extrapolated: fit.intercept,
        slope: fit.slope,
        residual: fit.residual,
        order,
        fitted,
    })
}

fn weights_from_density(p: &[f64]) -> Result<WeightVector> {
    let total = fsum(p.iter().copied());
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NotNormalized { sum: total });
    }
    let m = p.len() as f64;
    Ok(WeightVector::from_raw(p.iter().map(|x| m * x / total).collect()))
}

/// Gaussian wave packet `ψ ∝ exp(−(x−x₀)²/(4σ²))` in the box `[lo, hi]`,
/// `base_cells · 2^k` cells at level `k`, renormalized on each grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianInBox {
    pub lo: f64,
    pub hi: f64,
    pub center: f64,
    pub sigma: f64,
    pub base_cells: usize,
}

impl GaussianInBox {
    pub fn grid(&self, k: usize) -> Result<Grid> {
        Grid::line(self.base_cells << k, self.lo, self.hi)
    }

    /// Wave function on the level-`k` grid.
    pub fn wave_function(&self, k: usize) -> Result<GridWaveFunction> {
        let (x0, s) = (self.center, self.sigma);
        GridWaveFunction::from_fn(self.grid(k)?, |x| {
            let z = (x[0] - x0) / s;
            Complex64::new((-0.25 * z * z).exp(), 0.0)
        })
    }
}

impl RefinableProblem for GaussianInBox {
    fn level(&self, k: usize) -> Result<RefinementLevel> {
        if !(self.sigma > 0.0 && self.hi > self.lo) {
            return Err(Error::Invalid("gaussian needs sigma > 0 and hi > lo".into()));
        }
        let psi = self.wave_function(k)?;
        Ok(RefinementLevel {
            weights: weights_from_density(&psi.density())?,
            spacing: psi.grid().spacing()[0],
        })
    }
}

/// Uniform state on the left half of `[0, length]`; ratio `1/2` at every level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfBox {
    pub length: f64,
    pub base_cells: usize,
}

impl RefinableProblem for HalfBox {
    fn level(&self, k: usize) -> Result<RefinementLevel> {
        let m = self.base_cells << k;
        if m < 2 || !m.is_multiple_of(2) {
            return Err(Error::Invalid("half-box needs an even cell count".into()));
        }
        let w = (0..m).map(|i| if i < m / 2 { 2.0 } else { 0.0 }).collect();
        Ok(RefinementLevel {
            weights: WeightVector::new(w)?,
            spacing: self.length / m as f64,
        })
    }
}

/// Levels given explicitly.
#[derive(Debug, Clone)]
pub struct ExplicitLevels(pub Vec<RefinementLevel>);

impl RefinableProblem for ExplicitLevels {
    fn level(&self, k: usize) -> Result<RefinementLevel> {
        self.0.get(k).cloned().ok_or(Error::TooFew {
            need: k + 1,
            got: self.0.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn star() -> CountingFunction {
        CountingFunction::Minimal
    }

    fn half() -> CountingFunction {
        CountingFunction::canonical(0.5).unwrap()
    }

    fn normalize(vols: &[f64], mut f: Vec<f64>) -> Vec<f64> {
        let z = fsum(vols.iter().zip(&f).map(|(v, x)| v * x));
        f.iter_mut().for_each(|x| *x /= z);
        f
    }

    fn gaussian_box() -> GaussianInBox {
        GaussianInBox {
            lo: 0.0,
            hi: 1.0,
            center: 0.5,
            sigma: 0.1,
            base_cells: 64,
        }
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new(vec![2, 3], vec![0.5, 1.0], vec![0.0, -1.0]).unwrap();
        assert_eq!(g.cells(), 6);
        assert_eq!(g.volume(), 3.0);
        assert_eq!(g.cell_volume(), 0.5);
        assert_eq!(g.center(0), vec![0.25, -0.5]);
        assert_eq!(g.center(5), vec![0.75, 1.5]);
        assert!(Grid::new(vec![1; 4], vec![1.0; 4], vec![0.0; 4]).is_err());
        assert!(Grid::new(vec![2], vec![0.0], vec![0.0]).is_err());
        assert!(Grid::new(vec![0], vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn wave_function_validation() {
        let g = Grid::line(4, 0.0, 2.0).unwrap();
        let bad = vec![Complex64::new(1.0, 0.0); 4];
        assert!(matches!(
            GridWaveFunction::new(g.clone(), bad.clone()),
            Err(Error::NotNormalized { .. })
        ));
        assert!(GridWaveFunction::normalized(g.clone(), bad).is_ok());
        assert!(GridWaveFunction::new(g, vec![Complex64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn effective_volume_examples() {
        let g = Grid::new(vec![4, 5, 2], vec![0.5, 0.25, 1.0], vec![0.0; 3]).unwrap();
        let v = g.volume();
        let uniform = GridWaveFunction::normalized(g.clone(), vec![Complex64::new(1.0, 0.0); 40]).unwrap();
        for c in [star(), half()] {
            assert!((effective_volume(&uniform, &c) - v).abs() < 1e-12);
        }
        assert!(effective_volume_density(&uniform).iter().all(|&x| (x - 1.0).abs() < 1e-12));

        let g = Grid::line(10, 0.0, 3.0).unwrap();
        let vals = (0..10).map(|i| Complex64::new(if i < 5 { 1.0 } else { 0.0 }, 0.0)).collect();
        let half_box = GridWaveFunction::normalized(g, vals).unwrap();
        assert!((effective_volume(&half_box, &star()) - 1.5).abs() < 1e-12);
        let nu = effective_volume_density(&half_box);
        assert_eq!(nu, vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn volume_density_matches_effective_volume() {
        let psi = gaussian_box().wave_function(2).unwrap();
        let nu = effective_volume_density(&psi);
        let vol = psi.grid().cell_volume();
        assert_eq!(fsum(nu.iter().map(|x| vol * x)), effective_volume(&psi, &star()));
        let v = psi.grid().volume();
        for (i, z) in psi.values().iter().enumerate().step_by(17) {
            assert_eq!(nu[i], (v * z.norm_sqr()).min(1.0));
        }
        let e = effective_volume(&psi, &star());
        assert!(e > 0.0 && e <= v);
        assert!(effective_volume(&psi, &half()) >= e);
    }

    #[test]
    fn relative_mu_examples() {
        let g = Grid::line(50, 0.0, 1.0).unwrap();
        let vols = g.cell_volumes();
        let eta = vec![1.0; 50];
        let tri = normalize(&vols, g.centers().iter().map(|x| 1.0 - (2.0 * x[0] - 1.0).abs()).collect());

        let same = SpectralDensityPair::new(vols.clone(), tri.clone(), tri.clone()).unwrap();
        assert!((relative_mu_continuum(&same, &half()) - 1.0).abs() < 1e-14);

        let sd = SpectralDensityPair::on_grid(g.clone(), tri.clone(), eta).unwrap();
        let f = relative_mu_continuum(&sd, &star());
        assert!(f > 0.0 && f <= 1.0);
        // Uniform eta: relative value times volume is the effective Jordan content.
        let j = effective_jordan_content(&vols, &tri, &star()).unwrap();
        assert!((f * g.volume() - j).abs() <= 1e-15 * j);
        assert!(relative_mu_continuum(&sd, &half()) >= f - 1e-12);
    }

    #[test]
    fn inconsistent_pairs_rejected() {
        let vols = vec![0.25; 4];
        let eta = vec![2.0, 2.0, 0.0, 0.0];
        let p = vec![1.0, 1.0, 1.0, 1.0];
        assert!(matches!(
            SpectralDensityPair::new(vols.clone(), p, eta.clone()),
            Err(Error::InconsistentPair { cell: 2, .. })
        ));
        let p = vec![2.0, 2.0, 0.0, 0.0];
        assert!(SpectralDensityPair::new(vols.clone(), p.clone(), eta).is_ok());
        assert!(SpectralDensityPair::new(vols.clone(), p.clone(), vec![1.0; 4]).is_ok());
        assert!(SpectralDensityPair::new(vols, p, vec![0.5; 4]).is_err());
    }

    #[test]
    fn jordan_content_examples() {
        let vols = vec![0.1; 20];
        let uniform = vec![0.5; 20];
        for c in [star(), half()] {
            assert!((effective_jordan_content(&vols, &uniform, &c).unwrap() - 2.0).abs() < 1e-14);
        }
        let indicator: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { 0.0 }).collect();
        assert!((effective_jordan_content(&vols, &indicator, &star()).unwrap() - 1.0).abs() < 1e-14);
        assert!(effective_jordan_content(&vols, &[1.0; 20], &star()).is_err());
    }

    #[test]
    fn partition_examples() {
        let g = Grid::line(40, -1.0, 1.0).unwrap();
        let vols = g.cell_volumes();
        let p = normalize(&vols, g.centers().iter().map(|x| (-8.0 * x[0] * x[0]).exp()).collect());
        let eta = vec![0.5; 40];
        let sd = SpectralDensityPair::new(vols.clone(), p, eta.clone()).unwrap();
        let cut: Vec<bool> = (0..40).map(|i| i < 20).collect();
        let r = partition_additivity_check(&sd, &cut, &star()).unwrap();
        assert!(r.gap <= 1e-12);
        assert!((r.part1 - r.part2).abs() < 1e-14);
        assert!((r.f1 - 0.5).abs() < 1e-15);

        let p: Vec<f64> = normalize(&vols, (0..40).map(|i| if i < 20 { 1.0 + i as f64 } else { 0.0 }).collect());
        let sd = SpectralDensityPair::new(vols.clone(), p, eta).unwrap();
        let r = partition_additivity_check(&sd, &cut, &half()).unwrap();
        assert!(r.gap <= 1e-12);
        assert_eq!(r.part2, 0.0);

        assert!(matches!(
            partition_additivity_check(&sd, &[true; 40], &star()),
            Err(Error::EmptyPart(2))
        ));
    }

    #[test]
    fn partition_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let n = rng.random_range(2..60);
            let vols: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let eta = normalize(&vols, (0..n).map(|_| rng.random_range(0.01..1.0)).collect());
            let p = normalize(&vols, (0..n).map(|_| rng.random::<f64>().powi(3)).collect());
            let sd = SpectralDensityPair::new(vols, p, eta).unwrap();
            let mut cut: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            cut[0] = true;
            cut[n - 1] = false;
            let alpha = rng.random_range(0.05..=1.0);
            let r = partition_additivity_check(&sd, &cut, &CountingFunction::canonical(alpha).unwrap()).unwrap();
            assert!(r.gap <= 1e-12, "gap {}", r.gap);
        }
    }

    #[test]
    fn sectors_reduce_to_single_pair() {
        let g = Grid::line(30, 0.0, 1.0).unwrap();
        let vols = g.cell_volumes();
        let p = normalize(&vols, g.centers().iter().map(|x| x[0] * x[0]).collect());
        let eta = vec![1.0; 30];
        let sd = SpectralDensityPair::new(vols.clone(), p.clone(), eta.clone()).unwrap();
        let single = SectorFamily::new(vols.clone(), vec![(eta.clone(), p.clone())]).unwrap();
        for c in [star(), half()] {
            assert_eq!(mixed_relative_mu(&single, &c), relative_mu_continuum(&sd, &c));
        }
        let halves: Vec<f64> = p.iter().map(|x| x / 2.0).collect();
        let eta_halves: Vec<f64> = eta.iter().map(|x| x / 2.0).collect();
        let two = SectorFamily::new(
            vols.clone(),
            vec![(eta_halves.clone(), halves.clone()), (eta_halves, halves)],
        )
        .unwrap();
        assert_eq!(two.m_count(), 2);
        for c in [star(), half()] {
            assert_eq!(mixed_relative_mu(&two, &c), relative_mu_continuum(&sd, &c));
        }
        assert!(SectorFamily::new(vols, vec![(eta, p.clone()), (vec![0.0; 30], p)]).is_err());
    }

    #[test]
    fn reparametrization_identity_and_affine() {
        let n = 64;
        let g = Grid::line(n, 0.0, 2.0).unwrap();
        let vols = g.cell_volumes();
        let p = normalize(&vols, g.centers().iter().map(|x| (-(x[0] - 1.0).powi(2) * 10.0).exp()).collect());
        let eta = vec![0.5; n];
        let sd = SpectralDensityPair::on_grid(g.clone(), p, eta).unwrap();

        let centers: Vec<f64> = g.centers().iter().map(|x| x[0]).collect();
        let r = reparametrization_check(&sd, &g, &centers, &vec![1.0; n], &star()).unwrap();
        assert_eq!(r.discrepancy, 0.0);

        let prime = Grid::line(n, 0.0, 1.0).unwrap();
        let f: Vec<f64> = prime.centers().iter().map(|y| 2.0 * y[0]).collect();
        let r = reparametrization_check(&sd, &prime, &f, &vec![2.0; n], &half()).unwrap();
        assert!(r.discrepancy < 1e-10, "{r:?}");

        let mut bad = f.clone();
        bad.swap(3, 4);
        assert!(matches!(
            reparametrization_check(&sd, &prime, &bad, &vec![2.0; n], &star()),
            Err(Error::NonMonotone(_))
        ));
    }

    #[test]
    fn refinement_half_box_and_constant() {
        let t = refine_sequence(&HalfBox { length: 2.0, base_cells: 4 }, 5, &star(), 1.0, None).unwrap();
        assert!(t.rows.iter().all(|r| r.ratio == 0.5));
        assert_eq!(t.extrapolated, 0.5);

        let lvl = RefinementLevel {
            weights: WeightVector::new(vec![1.5, 0.5, 1.0]).unwrap(),
            spacing: 1.0,
        };
        let fixed = ExplicitLevels(vec![lvl.clone(), lvl.clone(), lvl]);
        let t = refine_sequence(&fixed, 3, &star(), 1.0, None).unwrap();
        assert_eq!(t.extrapolated, t.rows[0].ratio);
        assert!(matches!(refine_sequence(&fixed, 2, &star(), 1.0, None), Err(Error::TooFew { .. })));
        assert!(refine_sequence(&fixed, 4, &star(), 1.0, None).is_err());
    }

    #[test]
    fn refinement_fit_recovers_linear_model() {
        let levels = (0..4)
            .map(|k| {
                let h = 0.5f64.powi(k);
                let m = 8usize << k;
                let fraction = 0.3 + 0.1 * h;
                // Constant weights give ratio = min(w, 1) = fraction.
                RefinementLevel {
                    weights: WeightVector::from_raw(vec![fraction; m]),
                    spacing: h,
                }
            })
            .collect();
        let t = refine_sequence(&ExplicitLevels(levels), 4, &star(), 1.0, Some(4)).unwrap();
        assert!((t.extrapolated - 0.3).abs() < 1e-14);
        assert!((t.slope - 0.1).abs() < 1e-13);
        assert!(t.residual < 1e-15);
    }
}
