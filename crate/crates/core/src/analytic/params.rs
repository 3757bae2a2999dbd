use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and logical geometry of a flash device, in pages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemParams {
    pages_per_block: u32,
    physical_pages: u64,
    logical_pages: u64,
}

impl SystemParams {
    pub fn new(pages_per_block: u32, physical_pages: u64, logical_pages: u64) -> Result<Self> {
        let z = u64::from(pages_per_block);
        if z == 0 {
            return Err(Error::Config("pages per block must be at least 1".into()));
        }
        if !physical_pages.is_multiple_of(z) || !logical_pages.is_multiple_of(z) {
            return Err(Error::Config(format!(
                "physical ({physical_pages}) and logical ({logical_pages}) page counts must be multiples of {z}"
            )));
        }
        if logical_pages == 0 || logical_pages >= physical_pages {
            return Err(Error::Config(format!(
                "need 0 < logical pages < physical pages (got U={logical_pages}, T={physical_pages})"
            )));
        }
        Ok(Self {
            pages_per_block,
            physical_pages,
            logical_pages,
        })
    }

    /// Geometry with `blocks` physical blocks whose logical capacity is the
    /// whole number of blocks closest to `alpha * blocks`.
    pub fn from_storage_rate(blocks: u64, pages_per_block: u32, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("storage rate must lie in (0,1), got {alpha}")));
        }
        if blocks < 2 {
            return Err(Error::Config("need at least two blocks".into()));
        }
        let logical_blocks = ((alpha * blocks as f64).round() as u64).clamp(1, blocks - 1);
        let z = u64::from(pages_per_block);
        Self::new(pages_per_block, blocks * z, logical_blocks * z)
    }

    pub fn pages_per_block(&self) -> u32 {
        self.pages_per_block
    }

    pub fn physical_pages(&self) -> u64 {
        self.physical_pages
    }

    pub fn logical_pages(&self) -> u64 {
        self.logical_pages
    }

    pub fn blocks(&self) -> u64 {
        self.physical_pages / u64::from(self.pages_per_block)
    }

    /// `rho = (T - U) / U`.
    pub fn over_provisioning(&self) -> f64 {
        (self.physical_pages - self.logical_pages) as f64 / self.logical_pages as f64
    }

    /// `alpha = U / T = 1 / (rho + 1)`.
    pub fn storage_rate(&self) -> f64 {
        self.logical_pages as f64 / self.physical_pages as f64
    }
}
