//! Ordinary least-squares line fit.

use crate::sum::fsum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Fits `y = intercept + slope · x`. Returns `None` when fewer than two
/// points are given or all `x` coincide.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let xm = fsum(xs.iter().copied()) / nf;
    let ym = fsum(ys.iter().copied()) / nf;
    let sxx = fsum(xs.iter().map(|x| (x - xm) * (x - xm)));
    if sxx == 0.0 {
        return None;
    }
    let sxy = fsum(xs.iter().zip(ys).map(|(x, y)| (x - xm) * (y - ym)));
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let residual = (fsum(
        xs.iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2)),
    ) / nf)
        .sqrt();
    Some(LineFit {
        intercept,
        slope,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15);
        assert!((f.intercept - 3.0).abs() < 1e-15);
        assert!(f.residual < 1e-15);
    }

    #[test]
    fn degenerate() {
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
        assert!(linear_fit(&[2.0, 2.0], &[1.0, 3.0]).is_none());
    }
}
