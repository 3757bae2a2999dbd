//! Scalar special functions, root finding and minimization shared by the
//! analytic models.
//!
//! Everything here is a pure function of its arguments.

mod entropy;
mod lambert;
mod minimize;
mod roots;

pub use entropy::{binary_entropy, inverse_binary_entropy};
pub use lambert::{branch_offset, lambert_w0, lambert_w0_with};
pub use minimize::{golden_section, minimize_box, minimize_scalar, MAX_GRID_SAMPLES, PITCH_1D, PITCH_MULTI};
pub use roots::{find_sign_change, solve_scalar};

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]` with finite endpoints and `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Tolerance and iteration budget for the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl SolverConfig {
    pub fn new(abs_tol: f64, max_iter: usize) -> Result<Self> {
        if abs_tol.is_nan() || abs_tol <= 0.0 || max_iter == 0 {
            return Err(Error::Config(format!(
                "solver needs abs_tol > 0 and max_iter >= 1 (got {abs_tol}, {max_iter})"
            )));
        }
        Ok(Self { abs_tol, max_iter })
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iter: 200,
        }
    }
}
