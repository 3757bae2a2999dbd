//! Discrete page-mapped FTL simulator.
//!
//! Measures the empirical erasure factor `E / (L / Z)` under uniform random
//! page writes with greedy garbage collection for the baseline, naive-WOM and
//! capacity-preserving WOM systems. A run writes every logical page once in
//! order, then `warmup_writes` random writes, resets the counters, and
//! measures over `measured_writes` random writes.
//!
//! Naive-WOM blocks hold `Z' = round(R Z)` inflated pages, and the erasure
//! factor is normalized by those `Z'` pages per block.

mod histogram;
mod state;

pub use histogram::{AveragedHistogram, ValidityHistogram};
pub use state::{Counters, FtlState, GcPolicy, Layout};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{SystemKind, SystemParams, WomCodeSpec, FIXED_RATE_TWO_WRITE};
use crate::error::{Error, Result};
use crate::wom::ideal_codec;

pub const DEFAULT_PAGES_PER_BLOCK: u32 = 256;
pub const DEFAULT_BLOCKS: u64 = 2048;
pub const DEFAULT_MEASURED_WRITES: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub system: SystemKind,
    pub params: SystemParams,
    /// Per-write rate of the naive fixed-rate code.
    pub rate: f64,
    /// Writes per erase cycle of the naive code.
    pub t: u32,
    /// CP-WOM GC threshold as a fraction of `Z`.
    pub gamma1: f64,
    pub warmup_writes: u64,
    pub measured_writes: u64,
    pub seed: u64,
    /// Keep a time-averaged validity histogram over the measured phase.
    pub record_histogram: bool,
}

impl SimConfig {
    /// Default-sized run of `system` with `measured_writes` and a 2x warm-up.
    pub fn new(system: SystemKind, params: SystemParams, measured_writes: u64, seed: u64) -> Self {
        Self {
            system,
            params,
            rate: FIXED_RATE_TWO_WRITE,
            t: if system == SystemKind::Baseline { 1 } else { 2 },
            gamma1: 0.0,
            warmup_writes: (2 * measured_writes).max(params.logical_pages()),
            measured_writes,
            seed,
            record_histogram: false,
        }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn with_gamma1(mut self, gamma1: f64) -> Self {
        self.gamma1 = gamma1;
        self
    }

    pub fn with_histogram(mut self, on: bool) -> Self {
        self.record_histogram = on;
        self
    }

    /// Device layout and GC policy implied by this configuration.
    pub fn layout(&self) -> Result<(Layout, GcPolicy)> {
        let z = self.params.pages_per_block();
        let blocks = u32::try_from(self.params.blocks())
            .map_err(|_| Error::Config("too many blocks".into()))?;
        let logical = u32::try_from(self.params.logical_pages())
            .ok()
            .filter(|&u| u < u32::MAX - 1)
            .ok_or_else(|| Error::Config("too many logical pages".into()))?;
        if self.warmup_writes < self.params.logical_pages() {
            return Err(Error::Config(format!(
                "warm-up ({}) must cover every logical page at least once ({})",
                self.warmup_writes,
                self.params.logical_pages()
            )));
        }
        let (spec, policy) = match self.system {
            SystemKind::Baseline => (WomCodeSpec::new(vec![1.0], false)?, GcPolicy::Greedy),
            SystemKind::NaiveWom => {
                if !(self.rate > 0.0 && self.rate <= 1.0) {
                    return Err(Error::Config(format!("naive rate must lie in (0,1], got {}", self.rate)));
                }
                if self.t < 2 || self.t > u32::from(u8::MAX) {
                    return Err(Error::Config(format!("naive WOM needs t >= 2, got {}", self.t)));
                }
                (WomCodeSpec::fixed(self.t, self.rate)?, GcPolicy::GreedyRewrite)
            }
            SystemKind::CpWom => {
                if !(0.0..=1.0).contains(&self.gamma1) {
                    return Err(Error::Config(format!("gamma1 must lie in [0,1], got {}", self.gamma1)));
                }
                (
                    WomCodeSpec::capacity_preserving(),
                    GcPolicy::Threshold {
                        threshold_pages: self.gamma1 * f64::from(z),
                    },
                )
            }
        };
        let codec = ideal_codec(&spec)?;
        let slots_per_block = (f64::from(z) / codec.page_scale).round() as u32;
        if slots_per_block == 0 {
            return Err(Error::Config(format!("rate {} leaves no page per block", self.rate)));
        }
        if u64::from(logical) >= u64::from(blocks) * u64::from(slots_per_block) {
            return Err(Error::Config(format!(
                "{logical} logical pages do not fit in {blocks} blocks of {slots_per_block} pages (alpha >= R?)"
            )));
        }
        Ok((
            Layout {
                blocks,
                slots_per_block,
                logical_pages: logical,
                slot_span: codec.slot_span,
            },
            policy,
        ))
    }
}

/// Outcome of one simulation run, counters taken over the measured phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    /// `U / T` of the simulated geometry.
    pub alpha: f64,
    /// Pages per block used for the `L / Z` normalization (`Z'` for naive WOM).
    pub pages_per_block: u32,
    #[serde(rename = "E")]
    pub erasures: u64,
    #[serde(rename = "L")]
    pub logical_writes: u64,
    #[serde(rename = "P")]
    pub physical_writes: u64,
    pub copies: u64,
    pub promotions: u64,
    #[serde(rename = "EF")]
    pub ef: f64,
    /// `E / (L / Z)` with the logical block size; differs from `ef` only for naive WOM.
    pub ef_logical_block: f64,
    #[serde(rename = "WA")]
    pub wa: f64,
    /// Mean valid fraction of a block at physical erase.
    pub erase_valid_fraction: f64,
    /// CP-WOM only: the measured `gamma2`.
    pub gamma2_measured: Option<f64>,
    pub histogram: Option<AveragedHistogram>,
    pub final_histogram: ValidityHistogram,
    pub wall_time_seconds: f64,
}

impl SimReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Config(format!("serializing report: {e}")))
    }

    /// Same report with the wall-clock field zeroed, for determinism checks.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_seconds: 0.0,
            ..self.clone()
        }
    }
}

/// An FTL driven by a seeded uniform workload.
pub struct Simulation {
    state: FtlState,
    rng: ChaCha8Rng,
}

impl Simulation {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let (layout, policy) = cfg.layout()?;
        Ok(Self {
            state: FtlState::new(layout, policy)?,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }

    pub fn state(&self) -> &FtlState {
        &self.state
    }

    /// Writes every logical page once, in order.
    pub fn fill_sequential(&mut self) -> Result<()> {
        for logical in 0..self.state.layout().logical_pages {
            self.state.step_write(logical)?;
        }
        Ok(())
    }

    /// One uniformly random logical write.
    pub fn write_random(&mut self) -> Result<()> {
        let logical = self.rng.random_range(0..self.state.layout().logical_pages);
        self.state.step_write(logical)
    }

    pub fn write_random_n(&mut self, n: u64) -> Result<()> {
        for _ in 0..n {
            self.write_random()?;
        }
        Ok(())
    }

    pub fn reset_counters(&mut self) {
        self.state.reset_counters();
    }
}

fn require(cfg: &SimConfig, system: SystemKind) -> Result<()> {
    if cfg.system == system {
        Ok(())
    } else {
        Err(Error::Config(format!("expected a {system} configuration, got {}", cfg.system)))
    }
}

pub fn run_baseline(cfg: &SimConfig) -> Result<SimReport> {
    require(cfg, SystemKind::Baseline)?;
    run(cfg)
}

pub fn run_naive(cfg: &SimConfig) -> Result<SimReport> {
    require(cfg, SystemKind::NaiveWom)?;
    run(cfg)
}

pub fn run_cp_wom(cfg: &SimConfig) -> Result<SimReport> {
    require(cfg, SystemKind::CpWom)?;
    run(cfg)
}

/// Runs the system named by `cfg.system`.
pub fn run(cfg: &SimConfig) -> Result<SimReport> {
    let started = Instant::now();
    let mut sim = Simulation::new(cfg)?;
    sim.fill_sequential()?;
    sim.write_random_n(cfg.warmup_writes)?;
    sim.reset_counters();

    let layout = sim.state().layout().clone();
    let z = layout.slots_per_block;
    let mut averaged = cfg
        .record_histogram
        .then(|| AveragedHistogram::new(layout.stages() as usize, z as usize));
    let sample_every = u64::from(z).max(1);
    for k in 0..cfg.measured_writes {
        sim.write_random()?;
        if let Some(avg) = averaged.as_mut() {
            if (k + 1) % sample_every == 0 {
                avg.record(&sim.state().snapshot_histogram());
            }
        }
    }

    let c = sim.state().counters();
    let ef = if c.logical == 0 {
        0.0
    } else {
        c.erasures as f64 * f64::from(z) / c.logical as f64
    };
    let wa = if c.logical == 0 {
        0.0
    } else {
        c.physical as f64 / c.logical as f64
    };
    let erase_valid_fraction = if c.erasures == 0 {
        0.0
    } else {
        c.valid_at_erase as f64 / (c.erasures as f64 * f64::from(z))
    };
    Ok(SimReport {
        config: cfg.clone(),
        alpha: f64::from(layout.logical_pages) / (f64::from(layout.blocks) * f64::from(cfg.params.pages_per_block())),
        pages_per_block: z,
        erasures: c.erasures,
        logical_writes: c.logical,
        physical_writes: c.physical,
        copies: c.copies,
        promotions: c.promotions,
        ef,
        ef_logical_block: ef * f64::from(cfg.params.pages_per_block()) / f64::from(z),
        wa,
        erase_valid_fraction,
        gamma2_measured: (cfg.system == SystemKind::CpWom).then_some(erase_valid_fraction),
        histogram: averaged,
        final_histogram: sim.state().snapshot_histogram(),
        wall_time_seconds: started.elapsed().as_secs_f64(),
    })
}
