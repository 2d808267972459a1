//! Density matrices and their quantum effective numbers.
//!
//! The quantum effective number of `ρ` with respect to a counting function
//! `c` is `𝔑[ρ, c] = Σ_i c(N ρ_i) = Tr c(Nρ)`, with `ρ_i` the eigenvalues. It
//! does not depend on any basis. For a bipartite pure state the μ-entanglement
//! is the quantum effective number of the reduced density matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::counting::{effnum, CountingFunction, WeightVector};
use crate::eigen::{hermitian_eigen_raw, reconstruction_error};
use crate::error::{Error, Result};
use crate::random::hermitize;
use crate::state::PureState;
use crate::sum::fsum;

/// Validation tolerances and size cap for density matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOptions {
    /// Entrywise bound on `|ρ_ij − conj(ρ_ji)|`.
    pub hermitian_tol: f64,
    pub trace_tol: f64,
    /// Eigenvalues in `[−psd_tol, 0)` are numerical zeros; below is an error.
    pub psd_tol: f64,
    pub max_dim: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            hermitian_tol: 1e-10,
            trace_tol: 1e-10,
            psd_tol: 1e-10,
            max_dim: 4096,
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        Self::with_options(mat, &DensityOptions::default())
    }

    pub fn with_options(mut mat: DMatrix<Complex64>, opts: &DensityOptions) -> Result<Self> {
        let n = mat.nrows();
        if n == 0 {
            return Err(Error::Empty);
        }
        if mat.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mat.ncols(),
            });
        }
        if n > opts.max_dim {
            return Err(Error::TooLarge {
                dim: n,
                cap: opts.max_dim,
            });
        }
        if let Some(i) = mat.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
            }
        }
        if dev > opts.hermitian_tol {
            return Err(Error::NotHermitian(dev));
        }
        let trace = fsum((0..n).map(|i| mat[(i, i)].re));
        if (trace - 1.0).abs() > opts.trace_tol {
            return Err(Error::InvalidTrace(trace));
        }
        hermitize(&mut mat);
        let min = hermitian_eigen_raw(&mat)?
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -opts.psd_tol {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { mat })
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &PureState) -> Self {
        let a = psi.amps();
        let n = a.len();
        let mut mat = DMatrix::from_fn(n, n, |i, j| a[i] * a[j].conj());
        hermitize(&mut mat);
        Self { mat }
    }

    /// Maximally mixed state `I/N`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        Ok(Self {
            mat: DMatrix::identity(n, n) * Complex64::new(1.0 / n as f64, 0.0),
        })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_raw(mat: DMatrix<Complex64>) -> Self {
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        fsum((0..self.dim()).map(|i| self.mat[(i, i)].re))
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, u: &DMatrix<Complex64>) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        let mut mat = u * &self.mat * u.adjoint();
        hermitize(&mut mat);
        Ok(Self { mat })
    }
}

/// Spectral decomposition of a density matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    /// Clamped, renormalized eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Eigenvalues as returned by the solver.
    pub raw_eigenvalues: Vec<f64>,
    /// Unitary; column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: DMatrix<Complex64>,
}

impl Eigensystem {
    /// `‖ρ − U diag(λ) U†‖_max` using the clamped spectrum.
    pub fn reconstruction_error(&self, rho: &DensityMatrix) -> f64 {
        reconstruction_error(rho.matrix(), &self.eigenvalues, &self.eigenvectors)
    }
}

/// Multiple of `N · ε` below which eigenvalues count as zero.
pub const ZERO_FLOOR: f64 = 8.0;

/// Eigen-decomposition with the default negativity tolerance.
pub fn hermitian_eigen(rho: &DensityMatrix) -> Result<Eigensystem> {
    hermitian_eigen_with(rho, DensityOptions::default().psd_tol)
}

/// Eigenvalues in `[−psd_tol, 0)` are set to zero and the spectrum is
/// renormalized to unit sum. Positive eigenvalues below the solver's
/// resolution `ZERO_FLOOR · N · ε` are zeroed as well, since counting
/// functions like `w^α` amplify rounding noise near zero.
pub fn hermitian_eigen_with(rho: &DensityMatrix, psd_tol: f64) -> Result<Eigensystem> {
    let raw = hermitian_eigen_raw(&rho.mat)?;
    let min = raw.eigenvalues.last().copied().unwrap_or(0.0);
    if min < -psd_tol {
        return Err(Error::NotPositive(min));
    }
    let floor = ZERO_FLOOR * rho.dim() as f64 * f64::EPSILON;
    let clamped: Vec<f64> = raw
        .eigenvalues
        .iter()
        .map(|&x| if x < floor { 0.0 } else { x })
        .collect();
    let total = fsum(clamped.iter().copied());
    let eigenvalues = clamped.iter().map(|&x| x / total).collect();
    Ok(Eigensystem {
        eigenvalues,
        raw_eigenvalues: raw.eigenvalues,
        eigenvectors: raw.eigenvectors,
    })
}

/// `ρ = Σ_j p_j |ψ_j⟩⟨ψ_j|`. The states need not be orthogonal or distinct.
pub fn density_from_ensemble(states: &[(f64, PureState)]) -> Result<DensityMatrix> {
    let Some((_, first)) = states.first() else {
        return Err(Error::Empty);
    };
    let n = first.dim();
    for (index, (p, psi)) in states.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::NonFinite(index));
        }
        if *p < 0.0 {
            return Err(Error::NegativeEntry { index, value: *p });
        }
        if psi.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: psi.dim(),
            });
        }
    }
    let total = fsum(states.iter().map(|(p, _)| *p));
    if (total - 1.0).abs() > crate::counting::PROB_SUM_TOL {
        return Err(Error::NotNormalized { sum: total });
    }
    let mat = DMatrix::from_fn(n, n, |i, j| {
        let terms: Vec<Complex64> = states
            .iter()
            .map(|(p, psi)| psi.amps()[i] * psi.amps()[j].conj() * *p)
            .collect();
        Complex64::new(
            fsum(terms.iter().map(|z| z.re)),
            fsum(terms.iter().map(|z| z.im)),
        )
    });
    let mut mat = mat;
    hermitize(&mut mat);
    Ok(DensityMatrix { mat })
}

/// `𝔑[ρ, c] = Σ_i c(N ρ_i)` on the clamped spectrum.
pub fn quantum_effnum(rho: &DensityMatrix, c: &CountingFunction) -> Result<f64> {
    let eig = hermitian_eigen(rho)?;
    Ok(effnum_of_spectrum(&eig.eigenvalues, c))
}

/// `𝔑⋆[ρ] = Σ_i min{N ρ_i, 1}`; a lower bound for every counting function.
pub fn quantum_effnum_min(rho: &DensityMatrix) -> Result<f64> {
    quantum_effnum(rho, &CountingFunction::Minimal)
}

/// `Σ_i c(N λ_i)` for a normalized spectrum of length `N`.
pub fn effnum_of_spectrum(spectrum: &[f64], c: &CountingFunction) -> f64 {
    let n = spectrum.len() as f64;
    effnum(&WeightVector::from_raw(spectrum.iter().map(|&x| n * x).collect()), c)
}

/// `log 𝔑[ρ, c]` (natural logarithm).
pub fn quantum_mu_entropy(rho: &DensityMatrix, c: &CountingFunction) -> Result<f64> {
    Ok(quantum_effnum(rho, c)?.ln())
}

/// `log 𝔑⋆[ρ]`.
pub fn quantum_mu_entropy_min(rho: &DensityMatrix) -> Result<f64> {
    Ok(quantum_effnum_min(rho)?.ln())
}

/// Which factor of `H_A ⊗ H_B` to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Factorization `N = dim_a · dim_b`, basis index `a · dim_b + b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BipartiteStructure {
    dim_a: usize,
    dim_b: usize,
}

impl BipartiteStructure {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Invalid("subsystem dimensions must be positive".into()));
        }
        Ok(Self { dim_a, dim_b })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: n,
            })
        }
    }
}

/// Partial trace over the factor not kept.
pub fn partial_trace(
    rho: &DensityMatrix,
    bp: &BipartiteStructure,
    keep: Side,
) -> Result<DensityMatrix> {
    bp.check(rho.dim())?;
    let (da, db) = (bp.dim_a, bp.dim_b);
    let m = &rho.mat;
    let sum = |terms: &mut dyn Iterator<Item = Complex64>| {
        let terms: Vec<Complex64> = terms.collect();
        Complex64::new(
            fsum(terms.iter().map(|z| z.re)),
            fsum(terms.iter().map(|z| z.im)),
        )
    };
    let mut out = match keep {
        Side::A => DMatrix::from_fn(da, da, |a, a2| {
            sum(&mut (0..db).map(|b| m[(a * db + b, a2 * db + b)]))
        }),
        Side::B => DMatrix::from_fn(db, db, |b, b2| {
            sum(&mut (0..da).map(|a| m[(a * db + b, a * db + b2)]))
        }),
    };
    hermitize(&mut out);
    Ok(DensityMatrix { mat: out })
}

/// Reduced density matrix of a bipartite pure state without forming `|ψ⟩⟨ψ|`.
pub fn reduced_density(
    psi: &PureState,
    bp: &BipartiteStructure,
    keep: Side,
) -> Result<DensityMatrix> {
    bp.check(psi.dim())?;
    let (da, db) = (bp.dim_a, bp.dim_b);
    let a = psi.amps();
    let sum = |terms: Vec<Complex64>| {
        Complex64::new(
            fsum(terms.iter().map(|z| z.re)),
            fsum(terms.iter().map(|z| z.im)),
        )
    };
    let mut out = match keep {
        Side::A => DMatrix::from_fn(da, da, |x, y| {
            sum((0..db).map(|b| a[x * db + b] * a[y * db + b].conj()).collect())
        }),
        Side::B => DMatrix::from_fn(db, db, |x, y| {
            sum((0..da).map(|k| a[k * db + x] * a[k * db + y].conj()).collect())
        }),
    };
    hermitize(&mut out);
    Ok(DensityMatrix { mat: out })
}

/// μ-entanglement: `𝔑[Tr_other |ψ⟩⟨ψ|, c]`, evaluated with the dimension of
/// the kept factor as the nominal count.
pub fn mu_entanglement(
    psi: &PureState,
    bp: &BipartiteStructure,
    c: &CountingFunction,
    side: Side,
) -> Result<f64> {
    quantum_effnum(&reduced_density(psi, bp, side)?, c)
}
