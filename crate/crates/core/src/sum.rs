//! Correctly rounded floating-point summation.
//!
//! Every reduction in the crate goes through [`fsum`], so results do not depend
//! on the order of the terms: permuting a weight vector, or splitting a Riemann
//! sum across threads, gives bit-identical output.

/// Sum of `values`, correctly rounded to the nearest `f64`.
///
/// Shewchuk's adaptive-precision partials followed by the round-half-even
/// correction step. Non-finite inputs propagate through ordinary addition.
pub fn fsum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::with_capacity(8);
    let mut special = 0.0;
    for v in values {
        if !v.is_finite() {
            special += v;
            continue;
        }
        let mut x = v;
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    if special != 0.0 || special.is_nan() {
        return special;
    }

    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancels_exactly() {
        assert_eq!(fsum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(fsum([0.1; 10]), 1.0);
        assert_eq!(fsum(std::iter::empty()), 0.0);
    }

    #[test]
    fn order_independent() {
        let xs: Vec<f64> = (1..200).map(|k| 1.0 / k as f64).collect();
        let mut ys = xs.clone();
        ys.reverse();
        assert_eq!(fsum(xs.iter().copied()), fsum(ys));
    }

    #[test]
    fn propagates_non_finite() {
        assert!(fsum([1.0, f64::NAN]).is_nan());
        assert_eq!(fsum([1.0, f64::INFINITY]), f64::INFINITY);
    }
}
