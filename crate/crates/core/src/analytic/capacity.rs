use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::inverse_binary_entropy;

/// Maximum sum-rate of a two-write fixed-rate WOM code.
pub const FIXED_RATE_TWO_WRITE_SUM: f64 = 1.54;
/// Per-write rate of the best two-write fixed-rate WOM code.
pub const FIXED_RATE_TWO_WRITE: f64 = 0.77;

const RATE_SLACK: f64 = 1e-12;

/// Whether `(r1, r2)` lies in the two-write binary WOM capacity region
/// `{(R1, R2) | exists p in [0, 1/2]: R1 <= h(p), R2 <= 1 - p}`.
pub fn capacity_contains(r1: f64, r2: f64) -> bool {
    if !(r1 >= 0.0 && r2 >= 0.0) || r1 > 1.0 + RATE_SLACK {
        return false;
    }
    // The tightest p for a given R1 is h^{-1}(R1).
    match inverse_binary_entropy(r1.min(1.0)) {
        Ok(p) => r2 <= 1.0 - p + RATE_SLACK,
        Err(_) => false,
    }
}

/// Maximum sum-rate of a binary `t`-write WOM code.
///
/// Variable-rate codes reach `log2(t + 1)`. For fixed-rate codes only the
/// one- and two-write values are known here; other `t` return `None`.
pub fn max_sum_rate(t: u32, fixed_rate: bool) -> Option<f64> {
    if t == 0 {
        return None;
    }
    if !fixed_rate {
        return Some(f64::from(t + 1).log2());
    }
    match t {
        1 => Some(1.0),
        2 => Some(FIXED_RATE_TWO_WRITE_SUM),
        _ => None,
    }
}

/// Write count and per-write rates of a WOM code (or an idealized one).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WomCodeSpec {
    rates: Vec<f64>,
    fixed_rate: bool,
}

impl WomCodeSpec {
    pub fn new(rates: Vec<f64>, fixed_rate: bool) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::Config("a WOM code needs at least one write".into()));
        }
        if let Some(r) = rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::Config(format!("WOM rates must be positive, got {r}")));
        }
        if fixed_rate && rates.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::Config(format!("fixed-rate code with unequal rates {rates:?}")));
        }
        let t = rates.len() as u32;
        let sum: f64 = rates.iter().sum();
        let bound = max_sum_rate(t, false).unwrap_or(f64::INFINITY);
        if sum > bound + RATE_SLACK {
            return Err(Error::Config(format!(
                "sum-rate {sum} exceeds the {t}-write maximum {bound}"
            )));
        }
        Ok(Self { rates, fixed_rate })
    }

    /// Fixed-rate code writing `t` times at `rate` each.
    pub fn fixed(t: u32, rate: f64) -> Result<Self> {
        Self::new(vec![rate; t as usize], true)
    }

    /// The `(1, 1/2)` two-write code assumed by the capacity-preserving scheme.
    pub fn capacity_preserving() -> Self {
        Self {
            rates: vec![1.0, 0.5],
            fixed_rate: false,
        }
    }

    pub fn t(&self) -> u32 {
        self.rates.len() as u32
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn is_fixed_rate(&self) -> bool {
        self.fixed_rate
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_membership() {
        assert!(capacity_contains(1.0, 0.5));
        assert!(capacity_contains(0.0, 1.0));
        assert!(!capacity_contains(1.0, 0.51));
        assert!(!capacity_contains(1.01, 0.0));
        assert!(!capacity_contains(-0.1, 0.2));
        // h(0.11) ~ 0.5, so R2 up to 0.89 is allowed there.
        assert!(capacity_contains(0.49, 0.885));
        assert!(!capacity_contains(0.5, 0.9));
    }

    #[test]
    fn sum_rates() {
        assert!((max_sum_rate(2, false).unwrap() - 3f64.log2()).abs() < 1e-15);
        assert!((max_sum_rate(2, false).unwrap() - 1.585).abs() < 1e-3);
        assert_eq!(max_sum_rate(2, true), Some(1.54));
        assert_eq!(max_sum_rate(3, true), None);
        assert_eq!(FIXED_RATE_TWO_WRITE, FIXED_RATE_TWO_WRITE_SUM / 2.0);
    }

    #[test]
    fn spec_validation() {
        assert!(WomCodeSpec::fixed(2, 0.77).is_ok());
        assert!(WomCodeSpec::fixed(2, 0.8).is_err());
        assert!(WomCodeSpec::new(vec![0.7, 0.8], true).is_err());
        assert!(WomCodeSpec::new(vec![1.0, 0.0], false).is_err());
        assert!(WomCodeSpec::new(vec![], false).is_err());
        assert_eq!(WomCodeSpec::capacity_preserving().sum_rate(), 1.5);
    }
}
