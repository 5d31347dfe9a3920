//! Scalar root finding and grids.

use crate::error::{Error, Result};

/// `n` points spaced geometrically on `[lo, hi]`; both ends included.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let mut v: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    v[n - 1] = hi;
    v
}

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign.
/// Stops when the bracket is narrower than `xtol` or cannot shrink further.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(Error::numerical(
            "bisect",
            format!("no sign change on [{lo}, {hi}] (f = {flo}, {fhi})"),
        ));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() <= xtol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if !fm.is_finite() {
            return Err(Error::numerical(
                "bisect",
                format!("non-finite value at {mid} inside [{lo}, {hi}]"),
            ));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection for the switch point of a boolean predicate; `pred(lo) != pred(hi)`.
pub fn bisect_predicate<F: FnMut(f64) -> bool>(mut pred: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let plo = pred(lo);
    while (hi - lo).abs() > xtol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if pred(mid) == plo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adjacent grid intervals over which `values` changes sign.
/// Intervals touching a non-finite value are skipped.
pub fn sign_change_brackets(grid: &[f64], values: &[f64]) -> Vec<(usize, f64, f64)> {
    let mut out = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        let (a, b) = (values[i], values[i + 1]);
        if !(a.is_finite() && b.is_finite()) {
            continue;
        }
        if a == 0.0 || a.signum() != b.signum() && b != 0.0 {
            out.push((i, grid[i], grid[i + 1]));
        }
    }
    out
}

/// Real roots of `a x² + b x + c`, ascending, without cancellation.
/// A vanishing discriminant (relative to `b²` and `4ac`) gives one double root.
pub fn quadratic_roots(a: f64, b: f64, c: f64, rel_tol: f64) -> Vec<f64> {
    if a == 0.0 {
        return if b == 0.0 { vec![] } else { vec![-c / b] };
    }
    let disc = b * b - 4.0 * a * c;
    let scale = (b * b).max((4.0 * a * c).abs());
    if disc.abs() <= rel_tol * scale {
        return vec![-b / (2.0 * a)];
    }
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (b + b.signum_nonzero() * disc.sqrt());
    let r1 = q / a;
    let r2 = if q != 0.0 { c / q } else { 0.0 };
    if r1 <= r2 {
        vec![r1, r2]
    } else {
        vec![r2, r1]
    }
}

trait SignumNonzero {
    fn signum_nonzero(self) -> f64;
}

impl SignumNonzero for f64 {
    fn signum_nonzero(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}
