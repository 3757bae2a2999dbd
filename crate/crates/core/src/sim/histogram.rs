//! Block validity histograms.

use serde::{Deserialize, Serialize};

/// `N_s(i)`: number of stage-`s` blocks holding `i` valid pages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityHistogram {
    /// `counts[s - 1][i]` for stage `s` and `i` in `0..=pages_per_block`.
    pub counts: Vec<Vec<u64>>,
    pub free: u64,
}

impl ValidityHistogram {
    pub fn new(stages: usize, pages_per_block: usize) -> Self {
        Self {
            counts: vec![vec![0; pages_per_block + 1]; stages],
            free: 0,
        }
    }

    pub(crate) fn add(&mut self, stage: usize, valid: usize) {
        self.counts[stage - 1][valid] += 1;
    }

    pub(crate) fn set_free(&mut self, free: u64) {
        self.free = free;
    }

    pub fn stage(&self, stage: usize) -> &[u64] {
        &self.counts[stage - 1]
    }

    /// Blocks across all stages plus clean blocks; always the device's block count.
    pub fn total_blocks(&self) -> u64 {
        self.counts.iter().flatten().sum::<u64>() + self.free
    }

    /// Blocks, across stages, holding fewer than `pages` valid pages.
    pub fn blocks_below(&self, pages: f64) -> u64 {
        self.counts
            .iter()
            .flat_map(|c| c.iter().enumerate())
            .filter(|(i, _)| (*i as f64) < pages)
            .map(|(_, n)| n)
            .sum()
    }
}

/// Running mean of histogram snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedHistogram {
    pub samples: u64,
    /// Mean `N_s(i)`, same shape as [`ValidityHistogram::counts`].
    pub mean: Vec<Vec<f64>>,
}

impl AveragedHistogram {
    pub fn new(stages: usize, pages_per_block: usize) -> Self {
        Self {
            samples: 0,
            mean: vec![vec![0.0; pages_per_block + 1]; stages],
        }
    }

    pub fn record(&mut self, snapshot: &ValidityHistogram) {
        self.samples += 1;
        let w = 1.0 / self.samples as f64;
        for (m, c) in self.mean.iter_mut().zip(&snapshot.counts) {
            for (mi, &ci) in m.iter_mut().zip(c) {
                *mi += (ci as f64 - *mi) * w;
            }
        }
    }

    /// Relative standard deviation of `i * N_1(i)` over `i` in `(above, max]`.
    ///
    /// In steady state the baseline keeps `i * N(i)` roughly constant above
    /// the erase threshold; this is a soft diagnostic of that plateau.
    pub fn plateau_rel_std(&self, above: f64) -> Option<f64> {
        let stage = self.mean.first()?;
        let values: Vec<f64> = stage
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as f64 > above)
            .map(|(i, n)| i as f64 * n)
            .collect();
        if values.len() < 2 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        if mean == 0.0 {
            return None;
        }
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        Some(var.sqrt() / mean)
    }
}
