//! Closed-form erasure-factor models.
//!
//! Three systems are covered, all under uniform random page writes and greedy
//! garbage collection:
//!
//! * **baseline**: page-mapped FTL without rewriting codes;
//! * **naive WOM**: a fixed-rate `t`-write WOM code applied to each page,
//!   which shrinks the number of pages per block to `R * Z`;
//! * **CP WOM**: a capacity-preserving two-write scheme with rates `(1, 1/2)`
//!   whose garbage collector moves a first-write block to its second write
//!   when it holds at most `gamma1 * Z` valid pages.
//!
//! Each model returns an [`AnalyticResult`] carrying the erasure factor and
//! the internal solution variables that produced it.

mod baseline;
mod capacity;
mod cp;
mod naive;
mod params;

pub use baseline::{alpha_prime, ef_baseline, erase_occupancy};
pub use capacity::{
    capacity_contains, max_sum_rate, WomCodeSpec, FIXED_RATE_TWO_WRITE, FIXED_RATE_TWO_WRITE_SUM,
};
pub use cp::{cp_gamma2, ef_cp_given_gamma1, ef_cp_multiwrite, ef_cp_optimal, GAMMA_FLOOR};
pub use naive::{default_fixed_rate, ef_naive, naive_beats_baseline};
pub use params::SystemParams;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The three flash systems compared throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Baseline,
    NaiveWom,
    CpWom,
}

impl SystemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemKind::Baseline => "baseline",
            SystemKind::NaiveWom => "naive_wom",
            SystemKind::CpWom => "cp_wom",
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "baseline" | "base" => Ok(SystemKind::Baseline),
            "naive" | "naive_wom" => Ok(SystemKind::NaiveWom),
            "cp" | "cp_wom" => Ok(SystemKind::CpWom),
            other => Err(Error::Config(format!("unknown system '{other}'"))),
        }
    }
}

/// Erasure factor of one `(system, alpha, t)` point with its solution variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticResult {
    pub system: SystemKind,
    pub t: u32,
    pub alpha: f64,
    pub ef: f64,
    pub solution: BTreeMap<String, f64>,
}

impl AnalyticResult {
    fn new(system: SystemKind, t: u32, alpha: f64, ef: f64) -> Self {
        Self {
            system,
            t,
            alpha,
            ef,
            solution: BTreeMap::new(),
        }
    }

    fn with(mut self, key: impl Into<String>, value: f64) -> Self {
        self.solution.insert(key.into(), value);
        self
    }

    /// Looks up a solution variable such as `alpha_prime`, `beta_prime` or `gamma2`.
    pub fn var(&self, key: &str) -> Option<f64> {
        self.solution.get(key).copied()
    }
}

/// Rejects storage rates outside `(0, 1)`.
pub(crate) fn check_rate(name: &str, value: f64) -> crate::Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0,1), got {value}")))
    }
}
