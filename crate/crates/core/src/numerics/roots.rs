//! Bracketed scalar root finding.

use super::{Interval, SolverConfig};
use crate::error::{Error, Result};

/// Finds `x` in `interval` with `f(x) = target` by bisection.
///
/// `f(lo) - target` and `f(hi) - target` must differ in sign. Iteration stops
/// once the residual is within `cfg.abs_tol`, or when the bracket has shrunk
/// to adjacent floating-point values (in which case the endpoint with the
/// smaller residual is returned).
pub fn solve_scalar<F>(mut f: F, target: f64, interval: Interval, cfg: &SolverConfig) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut g = |x: f64| f(x) - target;
    let (mut lo, mut hi) = (interval.lo(), interval.hi());
    let (mut g_lo, g_hi) = (g(lo), g(hi));
    if g_lo.is_nan() || g_hi.is_nan() || g_lo.signum() == g_hi.signum() && g_lo != 0.0 && g_hi != 0.0 {
        return Err(Error::Bracket {
            lo,
            hi,
            f_lo: g_lo,
            f_hi: g_hi,
        });
    }
    if g_lo.abs() <= cfg.abs_tol {
        return Ok(lo);
    }
    if g_hi.abs() <= cfg.abs_tol {
        return Ok(hi);
    }

    let mut best = if g_lo.abs() < g_hi.abs() { (lo, g_lo) } else { (hi, g_hi) };
    for _ in 0..cfg.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(best.0);
        }
        let g_mid = g(mid);
        if g_mid.is_nan() {
            return Err(Error::Domain(format!("objective is NaN at {mid}")));
        }
        if g_mid.abs() < best.1.abs() {
            best = (mid, g_mid);
        }
        if g_mid.abs() <= cfg.abs_tol {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iter,
        context: "solve_scalar bisection",
    })
}

/// Scans `interval` on a uniform grid of `samples` points and returns the first
/// sub-interval across which `f` changes sign, or `None` if it never does.
pub fn find_sign_change<F>(mut f: F, interval: Interval, samples: usize) -> Option<Interval>
where
    F: FnMut(f64) -> f64,
{
    let n = samples.max(2);
    let step = interval.width() / (n - 1) as f64;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..n {
        let x = if k + 1 == n { interval.hi() } else { interval.lo() + k as f64 * step };
        let v = f(x);
        if !v.is_finite() {
            prev = None;
            continue;
        }
        if let Some((px, pv)) = prev {
            if pv == 0.0 {
                return Interval::new(px, x).ok();
            }
            if pv.signum() != v.signum() || v == 0.0 {
                return Interval::new(px, x).ok();
            }
        }
        prev = Some((x, v));
    }
    None
}
