//! Random states, unitaries and density matrices for tests and benchmarks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::counting::ProbabilityVector;
use crate::density::DensityMatrix;
use crate::state::PureState;
use crate::sum::fsum;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform (Dirichlet(1, …, 1)) probability vector of length `n`.
pub fn probability_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProbabilityVector {
    let raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s = fsum(raw.iter().copied());
    ProbabilityVector::from_raw(raw.into_iter().map(|x| x / s).collect())
}

/// Probability vector with a random number of exact zeros and a random
/// concentration, for stress-testing edge behaviour.
pub fn sparse_probability_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProbabilityVector {
    let power: f64 = rng.random_range(0.2..4.0);
    let keep: f64 = rng.random_range(0.2..1.0);
    let mut raw: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < keep {
                rng.sample::<f64, _>(Exp1).powf(power)
            } else {
                0.0
            }
        })
        .collect();
    if raw.iter().all(|&x| x == 0.0) {
        raw[rng.random_range(0..n)] = 1.0;
    }
    let s = fsum(raw.iter().copied());
    ProbabilityVector::from_raw(raw.into_iter().map(|x| x / s).collect())
}

/// Haar-random pure state of dimension `n`.
pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PureState {
    let amps: Vec<Complex64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = fsum(amps.iter().map(|a| a.norm_sqr())).sqrt();
    PureState::from_raw(amps.into_iter().map(|a| a / norm).collect())
}

/// Haar-random `n × n` unitary (Gram–Schmidt on a complex Ginibre matrix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    for j in 0..n {
        // Two passes of modified Gram–Schmidt keep the columns orthonormal to
        // machine precision.
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..n).map(|i| m[(i, k)].conj() * m[(i, j)]).sum();
                for i in 0..n {
                    let v = m[(i, k)];
                    m[(i, j)] -= proj * v;
                }
            }
        }
        let norm = (0..n).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            m[(i, j)] /= norm;
        }
    }
    m
}

/// Random density matrix `G G† / Tr(G G†)` with `G` an `n × rank` Ginibre
/// matrix.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> DensityMatrix {
    let g = DMatrix::from_fn(n, rank.max(1), |_, _| gaussian(rng));
    let mut rho = &g * g.adjoint();
    let tr: f64 = (0..n).map(|i| rho[(i, i)].re).sum();
    rho /= Complex64::new(tr, 0.0);
    hermitize(&mut rho);
    DensityMatrix::from_raw(rho)
}

/// Random Hermitian matrix with unit trace; generally indefinite.
pub fn hermitian_trace_one<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let mut h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let tr: f64 = (0..n).map(|i| h[(i, i)].re).sum();
    let shift = (1.0 - tr) / n as f64;
    for i in 0..n {
        h[(i, i)] += Complex64::new(shift, 0.0);
    }
    hermitize(&mut h);
    h
}

pub(crate) fn hermitize(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in i + 1..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}
