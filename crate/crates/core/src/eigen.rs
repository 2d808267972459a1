//! Dense Hermitian eigensolver (cyclic complex Jacobi).
//!
//! Each rotation first removes the phase of the pivot `a_pq` and then applies
//! the classical real Jacobi rotation, so the accumulated transform stays
//! exactly unitary up to rounding. Cost is `O(N³)` per sweep; convergence is
//! quadratic once the off-diagonal mass is small.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::random::hermitize;
use crate::sum::fsum;

/// Sweep cap before [`Error::NoConvergence`] is raised.
pub const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
///
/// Each eigenvector column is phase-fixed so that its first component of
/// modulus above `1e-12` is real and positive. Within a degenerate eigenspace
/// the basis is whatever the rotation sequence produced.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<Complex64>,
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    fsum((0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].norm_sqr()))
    .sqrt()
}

/// Eigen-decomposition of `m`, which is symmetrized (`(m + m†)/2`) first.
pub fn hermitian_eigen_raw(m: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    let n = m.nrows();
    if n == 0 {
        return Err(Error::Empty);
    }
    if m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }

    let mut a = m.clone();
    hermitize(&mut a);
    let mut v: DMatrix<Complex64> = DMatrix::identity(n, n);

    let scale = fsum(a.iter().map(|z| z.norm_sqr())).sqrt();
    let tol = (n as f64) * f64::EPSILON * scale;
    let mut sweeps = 0;
    while scale > 0.0 && off_diagonal_norm(&a) > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off: off_diagonal_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));

    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let phase = (0..n)
            .map(|i| v[(i, src)])
            .find(|z| z.norm() > 1e-12)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(Complex64::new(1.0, 0.0));
        for i in 0..n {
            eigenvectors[(i, col)] = v[(i, src)] * phase;
        }
    }
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi rotation `A ← J† A J`, `V ← V J` annihilating `a_pq`.
fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let abs = apq.norm();
    if abs == 0.0 {
        return;
    }
    let phase = apq / abs;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * abs);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // J = diag(1, e^{-iφ}) · R(c, s) restricted to the (p, q) plane.
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;
    let n = a.nrows();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * jqp;
        a[(k, q)] = akp * s + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * jqp.conj();
        a[(q, k)] = apk * s + aqk * jqq.conj();
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * jqp;
        v[(k, q)] = vkp * s + vkq * jqq;
    }
}

/// `max_ij |m − U diag(λ) U†|`.
pub fn reconstruction_error(
    m: &DMatrix<Complex64>,
    eigenvalues: &[f64],
    eigenvectors: &DMatrix<Complex64>,
) -> f64 {
    let n = m.nrows();
    let mut scaled = eigenvectors.clone();
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= lambda;
        }
    }
    let rebuilt = scaled * eigenvectors.adjoint();
    (m - rebuilt).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
