//! Pure states, orthonormal bases and orthogonal decompositions of the
//! Hilbert space, with the measure (μ-) and metric uncertainties of a state
//! relative to a decomposition.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::counting::{effnum, effnum_min, weights_from_probs, CountingFunction, ProbabilityVector};
use crate::error::{Error, Result};
use crate::sum::fsum;

/// Tolerance on `Σ |amps_i|² = 1`.
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise tolerance on `U†U = I`.
pub const UNITARY_TOL: f64 = 1e-10;

/// Normalized amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        Self::with_tolerance(amps, NORM_TOL)
    }

    pub fn with_tolerance(amps: Vec<Complex64>, tol: f64) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(i) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let norm = fsum(amps.iter().map(|a| a.norm_sqr()));
        if (norm - 1.0).abs() > tol {
            return Err(Error::NotNormalized { sum: norm });
        }
        Ok(Self { amps })
    }

    /// Normalizes `amps` before validating.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm = fsum(amps.iter().map(|a| a.norm_sqr())).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Invalid("cannot normalize a zero vector".into()));
        }
        Self::new(amps.into_iter().map(|a| a / norm).collect())
    }

    /// Basis state `|index⟩` of an `n`-dimensional space.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: index + 1,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// Equal-amplitude superposition of all `n` basis states.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let a = Complex64::new((1.0 / n as f64).sqrt(), 0.0);
        Ok(Self { amps: vec![a; n] })
    }

    pub(crate) fn from_raw(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    /// `|amps_i|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Orthonormal basis; column `i` of the matrix is the basis state `|i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    dim: usize,
    /// `None` stands for the computational (identity) basis.
    matrix: Option<DMatrix<Complex64>>,
}

impl OrthonormalBasis {
    pub fn identity(dim: usize) -> Self {
        Self { dim, matrix: None }
    }

    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 {
            return Err(Error::Empty);
        }
        if matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.ncols(),
            });
        }
        let gram = matrix.adjoint() * &matrix;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((gram[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        if !(dev <= UNITARY_TOL) {
            return Err(Error::NonUnitary(dev));
        }
        Ok(Self {
            dim: n,
            matrix: Some(matrix),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.is_none()
    }

    /// Basis matrix (columns are basis states).
    pub fn matrix(&self) -> DMatrix<Complex64> {
        match &self.matrix {
            Some(m) => m.clone(),
            None => DMatrix::identity(self.dim, self.dim),
        }
    }
}

/// Partition of the basis indices `{0, …, N−1}` into `M` non-empty blocks;
/// block `m` spans the subspace `H_m`. Blocks with several indices model
/// degenerate eigenspaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalDecomposition {
    n: usize,
    groups: Vec<Vec<usize>>,
}

impl OrthogonalDecomposition {
    pub fn new(groups: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidDecomposition("no blocks".into()));
        }
        let mut seen = vec![false; n];
        for (m, g) in groups.iter().enumerate() {
            if g.is_empty() {
                return Err(Error::InvalidDecomposition(format!("block {m} is empty")));
            }
            for &i in g {
                if i >= n {
                    return Err(Error::InvalidDecomposition(format!(
                        "index {i} in block {m} is out of range for dimension {n}"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidDecomposition(format!(
                        "index {i} appears more than once"
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidDecomposition(format!(
                "index {i} is not covered by any block"
            )));
        }
        Ok(Self { n, groups })
    }

    /// One block per basis state (`M = N`).
    pub fn singletons(n: usize) -> Self {
        Self {
            n,
            groups: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn m_count(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Coarsening: blocks `a` and `b` replaced by their union, placed at the
    /// position of the smaller index.
    pub fn merge(&self, a: usize, b: usize) -> Result<Self> {
        let m = self.m_count();
        if a >= m || b >= m || a == b {
            return Err(Error::InvalidDecomposition(format!(
                "cannot merge blocks {a} and {b} of {m}"
            )));
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let mut groups = self.groups.clone();
        let moved = groups.remove(hi);
        groups[lo].extend(moved);
        Ok(Self { n: self.n, groups })
    }
}

/// Distance function `ρ(a, b)` on eigenvalue tuples.
pub type MetricFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Metric on `R^D` for the metric uncertainty.
#[derive(Clone, Default)]
pub enum Metric {
    #[default]
    Euclidean,
    Custom(MetricFn),
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => fsum(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y))).sqrt(),
            Metric::Custom(f) => f(a, b),
        }
    }
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Euclidean => f.write_str("Euclidean"),
            Metric::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// A decomposition together with the eigenvalue tuple `λ_m ∈ R^D` labelling
/// each block.
#[derive(Debug, Clone)]
pub struct MeasurementSetup {
    decomposition: OrthogonalDecomposition,
    eigtuples: Vec<Vec<f64>>,
    metric: Metric,
}

impl MeasurementSetup {
    pub fn new(
        decomposition: OrthogonalDecomposition,
        eigtuples: Vec<Vec<f64>>,
        metric: Metric,
    ) -> Result<Self> {
        let m = decomposition.m_count();
        if eigtuples.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: eigtuples.len(),
            });
        }
        let d = eigtuples[0].len();
        if d == 0 {
            return Err(Error::Invalid("eigenvalue tuples must be non-empty".into()));
        }
        for t in &eigtuples {
            if t.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: t.len(),
                });
            }
            if t.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid("non-finite eigenvalue".into()));
            }
        }
        for a in 0..m {
            for b in a + 1..m {
                if eigtuples[a] == eigtuples[b] {
                    return Err(Error::DuplicateEigtuple(a, b));
                }
            }
        }
        Ok(Self {
            decomposition,
            eigtuples,
            metric,
        })
    }

    pub fn decomposition(&self) -> &OrthogonalDecomposition {
        &self.decomposition
    }

    pub fn eigtuples(&self) -> &[Vec<f64>] {
        &self.eigtuples
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Coordinates `⟨i|ψ⟩` of `psi` in `basis`.
pub fn basis_change(psi: &PureState, basis: &OrthonormalBasis) -> Result<PureState> {
    check_dim(basis.dim(), psi.dim())?;
    match &basis.matrix {
        None => Ok(psi.clone()),
        Some(u) => {
            let v = DVector::from_column_slice(&psi.amps);
            let coords = u.ad_mul(&v);
            Ok(PureState::from_raw(coords.iter().copied().collect()))
        }
    }
}

/// `p_m = Σ_{i ∈ block m} |⟨i|ψ⟩|²`.
pub fn subspace_probs(
    psi: &PureState,
    dec: &OrthogonalDecomposition,
    basis: &OrthonormalBasis,
) -> Result<ProbabilityVector> {
    check_dim(dec.dim(), psi.dim())?;
    let coords = basis_change(psi, basis)?;
    let p = dec
        .groups
        .iter()
        .map(|g| fsum(g.iter().map(|&i| coords.amps[i].norm_sqr())))
        .collect();
    Ok(ProbabilityVector::from_raw(p))
}

/// μ-uncertainty of `psi` with respect to `dec` and counting function `c`.
pub fn mu_uncertainty(
    psi: &PureState,
    dec: &OrthogonalDecomposition,
    basis: &OrthonormalBasis,
    c: &CountingFunction,
) -> Result<f64> {
    let p = subspace_probs(psi, dec, basis)?;
    Ok(effnum(&weights_from_probs(&p), c))
}

/// Minimal μ-uncertainty; a lower bound for every counting function.
pub fn mu_uncertainty_min(
    psi: &PureState,
    dec: &OrthogonalDecomposition,
    basis: &OrthonormalBasis,
) -> Result<f64> {
    let p = subspace_probs(psi, dec, basis)?;
    Ok(effnum_min(&weights_from_probs(&p)))
}

/// Standard-deviation style metric uncertainty
/// `Δ = sqrt(Σ_m p_m ρ²(λ_m, ⟨λ⟩))`, `⟨λ⟩ = Σ_m p_m λ_m`.
pub fn metric_uncertainty(
    psi: &PureState,
    setup: &MeasurementSetup,
    basis: &OrthonormalBasis,
) -> Result<f64> {
    let p = subspace_probs(psi, &setup.decomposition, basis)?;
    let p = p.as_slice();
    let d = setup.eigtuples[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|k| fsum(p.iter().zip(&setup.eigtuples).map(|(pm, t)| pm * t[k])))
        .collect();
    let var = fsum(p.iter().zip(&setup.eigtuples).map(|(pm, t)| {
        let r = setup.metric.distance(t, &mean);
        pm * r * r
    }));
    Ok(var.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn hadamard() -> OrthonormalBasis {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        OrthonormalBasis::new(DMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)])).unwrap()
    }

    #[test]
    fn subspace_prob_examples() {
        let id2 = OrthonormalBasis::identity(2);
        let psi = PureState::basis(2, 0).unwrap();
        let p = subspace_probs(&psi, &OrthogonalDecomposition::singletons(2), &id2).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.0]);

        let psi = PureState::uniform(4).unwrap();
        let dec = OrthogonalDecomposition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let p = subspace_probs(&psi, &dec, &OrthonormalBasis::identity(4)).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);

        let psi = PureState::new(vec![c(0.5f64.sqrt()), c(0.3f64.sqrt()), c(0.2f64.sqrt())])
            .unwrap();
        let dec = OrthogonalDecomposition::new(vec![vec![0], vec![1, 2]], 3).unwrap();
        let p = subspace_probs(&psi, &dec, &OrthonormalBasis::identity(3)).unwrap();
        assert!((p.as_slice()[0] - 0.5).abs() < 1e-15);
        assert!((p.as_slice()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mu_examples() {
        let id = OrthonormalBasis::identity(3);
        let singles = OrthogonalDecomposition::singletons(3);
        let psi = PureState::basis(3, 1).unwrap();
        assert_eq!(mu_uncertainty(&psi, &singles, &id, &CountingFunction::Minimal).unwrap(), 1.0);

        let psi = PureState::uniform(6).unwrap();
        let dec =
            OrthogonalDecomposition::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]], 6).unwrap();
        let half = CountingFunction::canonical(0.5).unwrap();
        let v = mu_uncertainty(&psi, &dec, &OrthonormalBasis::identity(6), &half).unwrap();
        assert!((v - 3.0).abs() < 1e-14);

        let psi = PureState::new(vec![c(0.5f64.sqrt()), c(0.5), c(0.5)]).unwrap();
        let v = mu_uncertainty(&psi, &singles, &id, &CountingFunction::Minimal).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn mu_min_examples() {
        let psi = PureState::basis(4, 2).unwrap();
        let v = mu_uncertainty_min(
            &psi,
            &OrthogonalDecomposition::singletons(4),
            &OrthonormalBasis::identity(4),
        )
        .unwrap();
        assert_eq!(v, 1.0);

        let psi = PureState::basis(2, 0).unwrap();
        let v = mu_uncertainty_min(&psi, &OrthogonalDecomposition::singletons(2), &hadamard())
            .unwrap();
        assert!((v - 2.0).abs() < 1e-15);

        let psi =
            PureState::new(vec![c(0.7f64.sqrt()), c(0.2f64.sqrt()), c(0.1f64.sqrt())]).unwrap();
        let v = mu_uncertainty_min(
            &psi,
            &OrthogonalDecomposition::singletons(3),
            &OrthonormalBasis::identity(3),
        )
        .unwrap();
        assert!((v - 1.9).abs() < 1e-14);
    }

    fn setup(labels: &[f64]) -> MeasurementSetup {
        MeasurementSetup::new(
            OrthogonalDecomposition::singletons(labels.len()),
            labels.iter().map(|&x| vec![x]).collect(),
            Metric::Euclidean,
        )
        .unwrap()
    }

    #[test]
    fn metric_examples() {
        let id2 = OrthonormalBasis::identity(2);
        let psi = PureState::uniform(2).unwrap();
        assert!((metric_uncertainty(&psi, &setup(&[0.0, 1.0]), &id2).unwrap() - 0.5).abs() < 1e-15);

        let psi = PureState::basis(2, 1).unwrap();
        assert_eq!(metric_uncertainty(&psi, &setup(&[0.0, 1.0]), &id2).unwrap(), 0.0);

        let psi = PureState::new(vec![c(0.5f64.sqrt()), c(0.5), c(0.5)]).unwrap();
        let d = metric_uncertainty(&psi, &setup(&[0.0, 1.0, 2.0]), &OrthonormalBasis::identity(3))
            .unwrap();
        // mean 0.75, variance 0.5*0.5625 + 0.25*0.0625 + 0.25*1.5625
        assert!((d - 0.6875f64.sqrt()).abs() < 1e-15);
        assert!((d - 0.8291562).abs() < 1e-7);
    }

    #[test]
    fn setup_validation() {
        let dec = OrthogonalDecomposition::singletons(2);
        assert!(matches!(
            MeasurementSetup::new(dec.clone(), vec![vec![1.0], vec![1.0]], Metric::Euclidean),
            Err(Error::DuplicateEigtuple(0, 1))
        ));
        assert!(MeasurementSetup::new(dec.clone(), vec![vec![1.0]], Metric::Euclidean).is_err());
        assert!(
            MeasurementSetup::new(dec, vec![vec![1.0], vec![1.0, 2.0]], Metric::Euclidean).is_err()
        );
    }

    #[test]
    fn decomposition_validation() {
        assert!(OrthogonalDecomposition::new(vec![vec![0], vec![0, 1]], 2).is_err());
        assert!(OrthogonalDecomposition::new(vec![vec![0]], 2).is_err());
        assert!(OrthogonalDecomposition::new(vec![vec![0, 2]], 2).is_err());
        assert!(OrthogonalDecomposition::new(vec![vec![], vec![0, 1]], 2).is_err());
        let psi = PureState::uniform(3).unwrap();
        let r = subspace_probs(
            &psi,
            &OrthogonalDecomposition::singletons(2),
            &OrthonormalBasis::identity(2),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn basis_change_examples() {
        let psi = PureState::new(vec![c(0.6), Complex64::new(0.0, 0.8)]).unwrap();
        assert_eq!(basis_change(&psi, &OrthonormalBasis::identity(2)).unwrap(), psi);

        // Rotation by pi/2: columns (0, 1) and (-1, 0).
        let rot = OrthonormalBasis::new(DMatrix::from_row_slice(
            2,
            2,
            &[c(0.0), c(-1.0), c(1.0), c(0.0)],
        ))
        .unwrap();
        let out = basis_change(&PureState::basis(2, 0).unwrap(), &rot).unwrap();
        assert!((out.amps()[0] - c(0.0)).norm() < 1e-15);
        assert!((out.amps()[1] - c(-1.0)).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random::unitary(&mut rng, 4);
        let psi = random::pure_state(&mut rng, 4);
        let basis = OrthonormalBasis::new(u.clone()).unwrap();
        let there = basis_change(&psi, &basis).unwrap();
        let norm = fsum(there.amps().iter().map(|a| a.norm_sqr()));
        assert!((norm - 1.0).abs() < 1e-10);
        let inverse = OrthonormalBasis::new(u.adjoint()).unwrap();
        let back = basis_change(&there, &inverse).unwrap();
        for (a, b) in back.amps().iter().zip(psi.amps()) {
            assert!((a - b).norm() < 1e-10);
        }

        let skew = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(OrthonormalBasis::new(skew), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn labels_do_not_affect_mu() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random::pure_state(&mut rng, 5);
        let id = OrthonormalBasis::identity(5);
        let a = setup(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let b = setup(&[4.0, 0.0, 30.0, -2.0, 1.5]);
        let mu_a = mu_uncertainty_min(&psi, a.decomposition(), &id).unwrap();
        let mu_b = mu_uncertainty_min(&psi, b.decomposition(), &id).unwrap();
        assert_eq!(mu_a, mu_b);
        let da = metric_uncertainty(&psi, &a, &id).unwrap();
        let db = metric_uncertainty(&psi, &b, &id).unwrap();
        assert!(da != db);
    }

    #[test]
    fn merging_sums_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random::pure_state(&mut rng, 6);
        let basis = OrthonormalBasis::new(random::unitary(&mut rng, 6)).unwrap();
        let dec = OrthogonalDecomposition::new(vec![vec![0], vec![1, 4], vec![2, 3], vec![5]], 6)
            .unwrap();
        let coarse = dec.merge(1, 3).unwrap();
        assert_eq!(coarse.m_count(), 3);
        let fine_p = subspace_probs(&psi, &dec, &basis).unwrap();
        let coarse_p = subspace_probs(&psi, &coarse, &basis).unwrap();
        let f = fine_p.as_slice();
        assert_eq!(coarse_p.as_slice()[0], f[0]);
        assert!((coarse_p.as_slice()[1] - (f[1] + f[3])).abs() <= f64::EPSILON);
        assert_eq!(coarse_p.as_slice()[2], f[2]);
    }

    #[test]
    fn random_bounds_and_minimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..200 {
            let n = 2 + trial % 9;
            let psi = random::pure_state(&mut rng, n);
            let basis = OrthonormalBasis::new(random::unitary(&mut rng, n)).unwrap();
            let dec = OrthogonalDecomposition::singletons(n);
            let m = dec.m_count() as f64;
            let min = mu_uncertainty_min(&psi, &dec, &basis).unwrap();
            for k in 1..=10 {
                let cf = CountingFunction::canonical(k as f64 / 10.0).unwrap();
                let v = mu_uncertainty(&psi, &dec, &basis, &cf).unwrap();
                assert!(min <= v + 1e-12);
                assert!(v >= 1.0 - 1e-12 && v <= m + 1e-12);
                // Equality at M only for the uniform split.
                assert!(v < m - 1e-9);
            }
        }
    }

    #[test]
    fn global_phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = random::pure_state(&mut rng, 5);
        let basis = OrthonormalBasis::identity(5);
        let dec = OrthogonalDecomposition::new(vec![vec![0, 3], vec![1], vec![2, 4]], 5).unwrap();
        let reference = mu_uncertainty_min(&psi, &dec, &basis).unwrap();
        // Multiplication by ±1, ±i is exact in floating point.
        for phase in [c(-1.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)] {
            let rotated = PureState::new(psi.amps().iter().map(|a| a * phase).collect()).unwrap();
            assert_eq!(mu_uncertainty_min(&rotated, &dec, &basis).unwrap(), reference);
        }
        let phase = Complex64::from_polar(1.0, 0.7);
        let rotated = PureState::new(psi.amps().iter().map(|a| a * phase).collect()).unwrap();
        assert!((mu_uncertainty_min(&rotated, &dec, &basis).unwrap() - reference).abs() < 1e-14);
    }
}
