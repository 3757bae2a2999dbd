//! Principal branch of the Lambert W function on the real line.
//!
//! `W0(x)` solves `w * e^w = x` with `w >= -1` for `x >= -1/e`. The erasure
//! models evaluate it arbitrarily close to the branch point as the storage
//! rate approaches one, so the branch offset `x + 1/e` is formed in
//! double-double arithmetic and a square-root series takes over in the last
//! `1e-6` before the branch point, where Halley's method loses its footing
//! (the derivative `e^w (w + 1)` vanishes there).

use super::SolverConfig;
use crate::error::{Error, Result};

/// `1/e` split into a leading double and its rounding remainder.
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

/// Width of the window above `-1/e` handled purely by the series.
const BRANCH_WINDOW: f64 = 1e-6;

/// Taylor coefficients of `W0` in `p = sqrt(2 (e x + 1))` about the branch point.
const BRANCH_SERIES: [f64; 9] = [
    -1.0,
    1.0,
    -1.0 / 3.0,
    11.0 / 72.0,
    -43.0 / 540.0,
    769.0 / 17280.0,
    -221.0 / 8505.0,
    680_863.0 / 43_545_600.0,
    -1963.0 / 204_120.0,
];

/// Principal-branch Lambert W with the default solver configuration.
pub fn lambert_w0(x: f64) -> Result<f64> {
    lambert_w0_with(x, &SolverConfig::default())
}

/// Offset of `x` above the branch point `-1/e`, computed without cancellation.
pub fn branch_offset(x: f64) -> f64 {
    (x + INV_E_HI) + INV_E_LO
}

pub fn lambert_w0_with(x: f64, cfg: &SolverConfig) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("lambert_w0 of non-finite value {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let offset = branch_offset(x);
    if offset < 0.0 {
        if offset < -cfg.abs_tol {
            return Err(Error::Domain(format!(
                "lambert_w0 argument {x} lies below -1/e"
            )));
        }
        return Ok(-1.0);
    }
    // p stays O(1e-3) inside the window, so nine terms leave ~1e-24 error.
    let p = (2.0 * std::f64::consts::E * offset).sqrt();
    if offset <= BRANCH_WINDOW {
        return Ok(branch_series(p, BRANCH_SERIES.len()));
    }

    let mut w = initial_guess(x, p);
    let tol = cfg.abs_tol * x.abs().max(1.0);
    for _ in 0..cfg.max_iter {
        let ew = w.exp();
        let residual = w * ew - x;
        if residual == 0.0 {
            break;
        }
        let w1 = w + 1.0;
        let step = residual / (ew * w1 - (w + 2.0) * residual / (2.0 * w1));
        let next = (w - step).max(-1.0);
        if next == w || step.abs() <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
            w = next;
            break;
        }
        w = next;
    }
    let residual = (w * w.exp() - x).abs();
    if residual <= tol {
        Ok(w)
    } else {
        Err(Error::NonConvergence {
            iterations: cfg.max_iter,
            context: "lambert_w0 Halley iteration",
        })
    }
}

fn branch_series(p: f64, terms: usize) -> f64 {
    BRANCH_SERIES[..terms]
        .iter()
        .rev()
        .fold(0.0, |acc, &c| acc * p + c)
}

fn initial_guess(x: f64, p: f64) -> f64 {
    if x < -0.32 {
        branch_series(p, 4)
    } else if x <= 3.0 {
        // Winitzki's approximation, good to a few percent on this range.
        let l = (1.0 + x).ln();
        0.665 * (1.0 + 0.0195 * l) * l + 0.04
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    /// Plain Newton on `w e^w - x`, independent of the Halley path above.
    fn newton_oracle(x: f64, mut w: f64) -> f64 {
        for _ in 0..200 {
            let ew = w.exp();
            let step = (w * ew - x) / (ew * (w + 1.0));
            w -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        w
    }

    #[test]
    fn trivial_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-14);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-7);
    }

    #[test]
    fn omega_constant() {
        let oracle = newton_oracle(1.0, 0.5);
        let w = lambert_w0(1.0).unwrap();
        assert!((oracle - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((w - oracle).abs() < 1e-14);
    }

    #[test]
    fn below_branch_point_is_domain_error() {
        assert!(matches!(lambert_w0(-0.37), Err(Error::Domain(_))));
        assert!(matches!(lambert_w0(f64::NAN), Err(Error::Domain(_))));
        // Within tolerance of the branch point snaps to -1.
        assert_eq!(lambert_w0(-1.0 / E - 1e-14).unwrap(), -1.0);
    }

    #[test]
    fn series_window_matches_newton() {
        for k in 1..=20 {
            let x = -INV_E_HI + k as f64 * 5e-8;
            let w = lambert_w0(x).unwrap();
            let oracle = newton_oracle(x, -1.0 + (2.0 * E * branch_offset(x)).sqrt());
            assert!((w - oracle).abs() < 1e-9, "x={x} w={w} oracle={oracle}");
            assert!(w >= -1.0);
        }
    }

    #[test]
    fn large_arguments() {
        for &x in &[10.0, 1e3, 1e6, 1e100] {
            let w = lambert_w0(x).unwrap();
            let r = (w * w.exp() - x).abs();
            assert!(r <= 1e-12 * x, "x={x} residual={r}");
        }
    }
}
