//! Quadrature and one-dimensional root/extremum search.
//!
//! Every integrand in this crate is piecewise smooth on a bounded interval,
//! so a plain adaptive Simpson rule is enough. Roots are bracketed and found
//! by bisection; the baseline program uses a golden-section pass to bracket
//! its maximizer before refining on the first-order condition.

use crate::error::{AgoraError, Result};

/// Absolute tolerance used by [`integrate`].
pub const QUAD_TOL: f64 = 1e-10;

/// Maximum recursion depth of the adaptive Simpson rule.
pub const QUAD_MAX_DEPTH: u32 = 40;

/// Number of initial panels. Splitting up front keeps the rule from
/// sampling a kinked integrand only at points where it happens to look flat.
const INITIAL_PANELS: usize = 4;

/// Integrate `f` over `[a, b]` to absolute tolerance [`QUAD_TOL`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    integrate_tol(f, a, b, QUAD_TOL)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
///
/// Reversed bounds give the negated integral; an empty interval gives zero.
pub fn integrate_tol<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate_tol(f, b, a, tol);
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let panel_tol = tol / INITIAL_PANELS as f64;
    let mut total = 0.0;
    for k in 0..INITIAL_PANELS {
        let lo = a + width * k as f64;
        let hi = if k + 1 == INITIAL_PANELS {
            b
        } else {
            lo + width
        };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = simpson(lo, hi, flo, fmid, fhi);
        total += simpson_rec(&f, lo, hi, flo, fmid, fhi, whole, panel_tol, QUAD_MAX_DEPTH);
    }
    total
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol || (b - a) < 1e-15 {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Find a root of `f` in `[lo, hi]` by bisection.
///
/// The endpoints must bracket a sign change (a zero at either endpoint is
/// accepted). Iterates until the bracket is narrower than `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(AgoraError::SolverFailure(format!(
            "no sign change on [{lo}, {hi}]: f = ({flo}, {fhi})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximizer of a unimodal `f` on `[lo, hi]`.
///
/// Returns the final bracket `(lo, hi)` once it is narrower than `tol`.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    (lo, hi)
}

/// Invert a continuous nondecreasing `cdf` on `[lo, hi]` at level `u`.
pub(crate) fn invert_cdf<F: Fn(f64) -> f64>(cdf: F, u: f64, lo: f64, hi: f64) -> f64 {
    if u <= 0.0 {
        return lo;
    }
    if u >= 1.0 {
        return hi;
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if cdf(m) < u {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Central finite difference with step `h`.
pub fn central_difference<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// `n` evenly spaced points strictly inside `[a, b]` (cell midpoints).
pub fn interior_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / n as f64;
    (0..n).map(|i| a + (i as f64 + 0.5) * step).collect()
}

/// `n >= 2` evenly spaced points including both endpoints.
pub fn closed_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "closed grid needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i + 1 == n { b } else { a + i as f64 * step })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomials_and_kinks() {
        assert!((integrate(|x| x * x, 0.0, 1.0) - 1.0 / 3.0).abs() < 1e-12);
        assert!((integrate(|x| (x - 0.3).abs(), 0.0, 1.0) - (0.045 + 0.245)).abs() < 1e-10);
        assert!((integrate(|x| x.sin(), 0.0, std::f64::consts::PI) - 2.0).abs() < 1e-10);
        assert_eq!(integrate(|x| x, 0.5, 0.5), 0.0);
        assert!((integrate(|x| x, 1.0, 0.0) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn golden_section_brackets_maximum() {
        let (lo, hi) = golden_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-9);
        assert!(lo <= 0.3 + 1e-8 && hi >= 0.3 - 1e-8);
    }

    #[test]
    fn grids() {
        let g = closed_grid(0.0, 1.0, 5);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = interior_grid(0.0, 1.0, 4);
        assert_eq!(g, vec![0.125, 0.375, 0.625, 0.875]);
    }
}
