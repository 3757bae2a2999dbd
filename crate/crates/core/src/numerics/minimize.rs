//! Box-constrained minimization for low-dimensional, smooth objectives.
//!
//! A uniform grid scan finds the basin, then golden-section search (one
//! dimension) or coordinate descent with golden-section line searches (several
//! dimensions) refines it. Objective values that are NaN or infinite are
//! treated as `+inf`, so callers can signal infeasible points by returning
//! `f64::INFINITY`. The returned value is never worse than the best grid
//! sample.

use super::{Interval, SolverConfig};
use crate::error::{Error, Result};

/// Grid pitch for one-dimensional scans.
pub const PITCH_1D: f64 = 1e-3;
/// Grid pitch per axis for two-dimensional scans.
pub const PITCH_MULTI: f64 = 1e-2;
/// Upper bound on grid samples for boxes of three or more dimensions.
pub const MAX_GRID_SAMPLES: usize = 200_000;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Golden-section search on `[a, b]`. Returns the best point visited.
pub fn golden_section<F>(mut f: F, a: f64, b: f64, cfg: &SolverConfig) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a.min(b), a.max(b));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sanitize(f(c));
    let mut fd = sanitize(f(d));
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for _ in 0..cfg.max_iter {
        if b - a <= cfg.abs_tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sanitize(f(c));
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sanitize(f(d));
            if fd < best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

fn grid_points(iv: Interval, pitch: f64) -> usize {
    ((iv.width() / pitch).ceil() as usize + 1).max(2)
}

fn grid_coord(iv: Interval, n: usize, k: usize) -> f64 {
    if k + 1 == n {
        iv.hi()
    } else {
        iv.lo() + iv.width() * k as f64 / (n - 1) as f64
    }
}

/// One-dimensional minimization over `interval`.
pub fn minimize_scalar<F>(mut f: F, interval: Interval, cfg: &SolverConfig) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let n = grid_points(interval, PITCH_1D);
    let mut best = (interval.lo(), f64::INFINITY);
    let mut best_k = 0;
    for k in 0..n {
        let x = grid_coord(interval, n, k);
        let v = sanitize(f(x));
        if v < best.1 {
            best = (x, v);
            best_k = k;
        }
    }
    let lo = grid_coord(interval, n, best_k.saturating_sub(1));
    let hi = grid_coord(interval, n, (best_k + 1).min(n - 1));
    let refined = golden_section(&mut f, lo, hi, cfg);
    if refined.1 < best.1 {
        refined
    } else {
        best
    }
}

/// Minimizes `f` over the axis-aligned box `bounds`.
///
/// One-dimensional boxes use a `1e-3` grid plus golden-section refinement.
/// Two-dimensional boxes use a `1e-2` grid per axis; higher dimensions use
/// the finest uniform grid with at most [`MAX_GRID_SAMPLES`] points. Both
/// are followed by coordinate descent.
pub fn minimize_box<F>(mut f: F, bounds: &[Interval], cfg: &SolverConfig) -> Result<(Vec<f64>, f64)>
where
    F: FnMut(&[f64]) -> f64,
{
    match bounds.len() {
        0 => Err(Error::Domain("minimize_box needs at least one axis".into())),
        1 => {
            let (x, v) = minimize_scalar(|x| f(&[x]), bounds[0], cfg);
            Ok((vec![x], v))
        }
        dims => Ok(minimize_multi(f, bounds, dims, cfg)),
    }
}

fn minimize_multi<F>(mut f: F, bounds: &[Interval], dims: usize, cfg: &SolverConfig) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let counts: Vec<usize> = if dims == 2 {
        bounds.iter().map(|&iv| grid_points(iv, PITCH_MULTI)).collect()
    } else {
        let per_axis = ((MAX_GRID_SAMPLES as f64).powf(1.0 / dims as f64).floor() as usize).max(3);
        vec![per_axis; dims]
    };

    let mut idx = vec![0usize; dims];
    let mut point: Vec<f64> = bounds.iter().map(|iv| iv.lo()).collect();
    let mut best = (point.clone(), f64::INFINITY);
    'grid: loop {
        for (axis, &k) in idx.iter().enumerate() {
            point[axis] = grid_coord(bounds[axis], counts[axis], k);
        }
        let v = sanitize(f(&point));
        if v < best.1 {
            best = (point.clone(), v);
        }
        for axis in 0..dims {
            idx[axis] += 1;
            if idx[axis] < counts[axis] {
                continue 'grid;
            }
            idx[axis] = 0;
        }
        break;
    }
    if !best.1.is_finite() {
        return best;
    }

    let (mut x, mut fx) = best;
    let mut steps: Vec<f64> = bounds
        .iter()
        .zip(&counts)
        .map(|(iv, &n)| iv.width() / (n - 1) as f64)
        .collect();
    for _ in 0..cfg.max_iter {
        let before = fx;
        for axis in 0..dims {
            let lo = (x[axis] - steps[axis]).max(bounds[axis].lo());
            let hi = (x[axis] + steps[axis]).min(bounds[axis].hi());
            let mut trial = x.clone();
            let (xa, va) = golden_section(
                |t| {
                    trial[axis] = t;
                    f(&trial)
                },
                lo,
                hi,
                cfg,
            );
            if va < fx {
                x[axis] = xa;
                fx = va;
            }
        }
        if before - fx <= cfg.abs_tol {
            for s in steps.iter_mut() {
                *s *= 0.5;
            }
            if steps.iter().all(|&s| s < 1e-9) {
                break;
            }
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn shifted_parabola() {
        let (x, v) = minimize_box(|p| (p[0] - 0.25).powi(2), &[unit()], &SolverConfig::default()).unwrap();
        assert!((x[0] - 0.25).abs() < 1e-7);
        assert!(v < 1e-14);
    }

    #[test]
    fn boundary_minimum_in_two_dimensions() {
        let (x, v) = minimize_box(|p| p[0] * p[0] + p[1] * p[1], &[unit(), unit()], &SolverConfig::default())
            .unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(x, vec![0.0, 0.0]);
    }

    #[test]
    fn infeasible_regions_are_skipped() {
        let f = |p: &[f64]| if p[0] < 0.6 { f64::NAN } else { (p[0] - 0.7).powi(2) };
        let (x, _) = minimize_box(f, &[unit()], &SolverConfig::default()).unwrap();
        assert!((x[0] - 0.7).abs() < 1e-7);
    }

    #[test]
    fn three_dimensional_bowl() {
        let f = |p: &[f64]| (p[0] - 0.3).powi(2) + (p[1] - 0.6).powi(2) + (p[2] - 0.1).powi(2);
        let (x, v) = minimize_box(f, &[unit(), unit(), unit()], &SolverConfig::default()).unwrap();
        assert!(v < 1e-12, "v={v} x={x:?}");
    }

    #[test]
    fn empty_box_is_an_error() {
        assert!(minimize_box(|_| 0.0, &[], &SolverConfig::default()).is_err());
    }
}
