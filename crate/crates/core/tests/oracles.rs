//! Library results checked against independent reference computations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mu_uncertainty::continuum::{
    effective_jordan_content, effective_volume, mixed_relative_mu, relative_mu_continuum,
    reparametrization_check, GaussianInBox, Grid, SectorFamily, SpectralDensityPair,
};
use mu_uncertainty::density::{hermitian_eigen, reduced_density};
use mu_uncertainty::eigen::hermitian_eigen_raw;
use mu_uncertainty::{
    mu_entanglement, partial_trace, quantum_effnum, random, BipartiteStructure, CountingFunction,
    DensityMatrix, PureState, Side,
};

fn cz(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Characteristic polynomial coefficients (Faddeev–LeVerrier), highest first.
fn char_poly(a: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = a.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut coeffs = vec![cz(1.0, 0.0)];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[k - 1];
        let am = a * &m;
        coeffs.push(-am.trace() / k as f64);
    }
    coeffs
}

/// Simultaneous root iteration on a monic polynomial.
fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(cz(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = cz(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let prev = roots.clone();
        for i in 0..n {
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(cz(1.0, 0.0), |acc, j| acc * (roots[i] - roots[j]));
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
        let moved = roots.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if moved < 1e-16 {
            break;
        }
    }
    roots
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let h = random::hermitian_trace_one(&mut rng, 4);
        let mut roots: Vec<f64> = durand_kerner(&char_poly(&h)).iter().map(|z| z.re).collect();
        roots.sort_by(|a, b| b.total_cmp(a));
        let e = hermitian_eigen_raw(&h).unwrap();
        for (a, b) in e.eigenvalues.iter().zip(&roots) {
            assert!((a - b).abs() < 1e-9, "{:?} vs {roots:?}", e.eigenvalues);
        }
    }
}

#[test]
fn eigenpairs_satisfy_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in [1, 2, 5, 9, 16] {
        let rho = random::density_matrix(&mut rng, n, n);
        let eig = hermitian_eigen(&rho).unwrap();
        for (k, &lambda) in eig.raw_eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(k);
            let residual = rho.matrix() * v - v * cz(lambda, 0.0);
            assert!(residual.norm() < 1e-13);
        }
        assert!(eig.reconstruction_error(&rho) < 1e-13);
    }
}

fn werner(p: f64) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = PureState::new(vec![cz(0.0, 0.0), cz(s, 0.0), cz(-s, 0.0), cz(0.0, 0.0)]).unwrap();
    let mut m = DensityMatrix::from_pure(&singlet).matrix() * cz(p, 0.0);
    for i in 0..4 {
        m[(i, i)] += cz((1.0 - p) / 4.0, 0.0);
    }
    DensityMatrix::new(m).unwrap()
}

#[test]
fn werner_family_matches_analytic_spectrum() {
    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let spectrum = [p + (1.0 - p) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0, (1.0 - p) / 4.0];
        for cf in [CountingFunction::Minimal, CountingFunction::canonical(0.5).unwrap()] {
            let expected: f64 = spectrum.iter().map(|&x| cf.eval(4.0 * x)).sum();
            let got = quantum_effnum(&werner(p), &cf).unwrap();
            assert!((got - expected).abs() < 1e-12, "p={p}: {got} vs {expected}");
        }
    }
}

#[test]
fn reduced_spectrum_matches_schmidt_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let da = rng.random_range(1..=8);
        let db = rng.random_range(1..=5);
        let bp = BipartiteStructure::new(da, db).unwrap();
        let psi = random::pure_state(&mut rng, da * db);
        let amps = DMatrix::from_fn(da, db, |a, b| psi.amps()[a * db + b]);
        let mut schmidt: Vec<f64> = amps.singular_values().iter().map(|s| s * s).collect();
        schmidt.sort_by(|a, b| b.total_cmp(a));

        for (side, d) in [(Side::A, da), (Side::B, db)] {
            let direct = reduced_density(&psi, &bp, side).unwrap();
            let traced = partial_trace(&DensityMatrix::from_pure(&psi), &bp, side).unwrap();
            assert!((direct.matrix() - traced.matrix()).norm() < 1e-13);
            let eig = hermitian_eigen(&direct).unwrap().eigenvalues;
            for k in 0..d {
                let expected = schmidt.get(k).copied().unwrap_or(0.0);
                assert!((eig[k] - expected).abs() < 1e-12);
            }
            let cf = CountingFunction::canonical(0.7).unwrap();
            let expected: f64 = schmidt.iter().map(|&x| cf.eval(d as f64 * x)).sum();
            let got = mu_entanglement(&psi, &bp, &cf, side).unwrap();
            assert!((got - expected).abs() < 1e-9);
        }
    }
}

/// Midpoint sum of `f` over `[lo, hi]` with `cells` cells.
fn midpoint(lo: f64, hi: f64, cells: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (hi - lo) / cells as f64;
    (0..cells).map(|i| f(lo + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

#[test]
fn gaussian_effective_volume_matches_fine_grid() {
    let problem = GaussianInBox {
        lo: -2.0,
        hi: 3.0,
        center: 0.3,
        sigma: 0.25,
        base_cells: 125,
    };
    let psi = problem.wave_function(5).unwrap();
    let cells = 10 * psi.grid().cells();
    let g = |x: f64| (-(x - 0.3f64).powi(2) / (2.0 * 0.25 * 0.25)).exp();
    let z = midpoint(-2.0, 3.0, cells, g);
    for cf in [CountingFunction::Minimal, CountingFunction::canonical(0.5).unwrap()] {
        let oracle = midpoint(-2.0, 3.0, cells, |x| cf.eval(5.0 * g(x) / z));
        let got = effective_volume(&psi, &cf);
        assert!((got - oracle).abs() / oracle < 1e-6, "{got} vs {oracle}");
    }
}

fn triangle(x: f64) -> f64 {
    4.0 * x.min(1.0 - x).max(0.0)
}

#[test]
fn triangular_relative_mu_matches_fine_grid() {
    let cells = 16_000;
    let grid = Grid::line(cells, 0.0, 1.0).unwrap();
    let p: Vec<f64> = grid.centers().iter().map(|x| triangle(x[0])).collect();
    let sd = SpectralDensityPair::on_grid(grid.clone(), p.clone(), vec![1.0; cells]).unwrap();
    for cf in [CountingFunction::Minimal, CountingFunction::canonical(0.5).unwrap()] {
        let oracle = midpoint(0.0, 1.0, 10 * cells, |x| cf.eval(triangle(x)));
        let got = relative_mu_continuum(&sd, &cf);
        assert!((got - oracle).abs() / oracle < 1e-6, "{}: {got} vs {oracle}", cf.label());
    }

    let star = effective_jordan_content(&grid.cell_volumes(), &p, &CountingFunction::Minimal).unwrap();
    let half =
        effective_jordan_content(&grid.cell_volumes(), &p, &CountingFunction::canonical(0.5).unwrap())
            .unwrap();
    assert!(half >= star);
    // min{4x, 1} on [0, 1/2]: 1/8 + 1/4, doubled by symmetry.
    assert!((star - 0.75).abs() < 1e-6);
    let oracle_half = midpoint(0.0, 1.0, 10 * cells, |x| triangle(x).sqrt().min(1.0));
    assert!((half - oracle_half).abs() / oracle_half < 1e-6);
}

#[test]
fn spin_half_sectors_match_fine_grid() {
    // Spin-up and spin-down components of a particle on [-1, 1] with spin
    // weights 0.7 / 0.3; each sector carries half of the spectral density.
    let (lo, hi) = (-1.0, 1.0);
    let up = |x: f64| (-(x + 0.2f64).powi(2) / 0.02).exp();
    let down = |x: f64| (-(x - 0.3f64).powi(2) / 0.08).exp();
    let cells = 4000;
    let grid = Grid::line(cells, lo, hi).unwrap();
    let xs: Vec<f64> = grid.centers().iter().map(|x| x[0]).collect();
    let h = grid.cell_volume();
    let zu: f64 = xs.iter().map(|&x| up(x)).sum::<f64>() * h;
    let zd: f64 = xs.iter().map(|&x| down(x)).sum::<f64>() * h;
    let p_up: Vec<f64> = xs.iter().map(|&x| 0.7 * up(x) / zu).collect();
    let p_down: Vec<f64> = xs.iter().map(|&x| 0.3 * down(x) / zd).collect();
    let eta = vec![0.25; cells];
    let sf = SectorFamily::new(grid.cell_volumes(), vec![(eta.clone(), p_up), (eta, p_down)]).unwrap();

    let fine = 10 * cells;
    let zu_f = midpoint(lo, hi, fine, up);
    let zd_f = midpoint(lo, hi, fine, down);
    for cf in [CountingFunction::Minimal, CountingFunction::canonical(0.5).unwrap()] {
        let oracle = midpoint(lo, hi, fine, |x| {
            0.25 * cf.eval(0.7 * up(x) / zu_f / 0.25) + 0.25 * cf.eval(0.3 * down(x) / zd_f / 0.25)
        });
        let got = mixed_relative_mu(&sf, &cf);
        assert!((got - oracle).abs() / oracle < 1e-6, "{got} vs {oracle}");
    }
}

#[test]
fn cubic_relabeling_agrees_with_fine_quadrature() {
    let cells = 2000;
    let grid = Grid::line(cells, -1.0, 1.0).unwrap();
    let g = |x: f64| (-(x - 0.1f64).powi(2) / 0.08).exp();
    let z = midpoint(-1.0, 1.0, cells, g);
    let p: Vec<f64> = grid.centers().iter().map(|x| g(x[0]) / z).collect();
    let sd = SpectralDensityPair::on_grid(grid.clone(), p, vec![0.5; cells]).unwrap();
    let ys: Vec<f64> = grid.centers().iter().map(|y| y[0]).collect();
    let f: Vec<f64> = ys.iter().map(|y| y.powi(3)).collect();
    let df: Vec<f64> = ys.iter().map(|y| 3.0 * y * y).collect();
    let cf = CountingFunction::Minimal;
    let r = reparametrization_check(&sd, &grid, &f, &df, &cf).unwrap();
    assert!(r.discrepancy <= r.error_bound, "{r:?}");

    // Both sides against the same integral evaluated on a fine grid.
    let zf = midpoint(-1.0, 1.0, 10 * cells, g);
    let oracle = midpoint(-1.0, 1.0, 10 * cells, |x| 0.5 * cf.eval(g(x) / zf / 0.5));
    let oracle_prime = midpoint(-1.0, 1.0, 10 * cells, |y| {
        3.0 * y * y * 0.5 * cf.eval(g(y.powi(3)) / zf / 0.5)
    });
    assert!((oracle - oracle_prime).abs() < 1e-7);
    assert!((r.value - oracle).abs() < 1e-6);
    assert!((r.value_prime - oracle_prime).abs() < 1e-5);
}
