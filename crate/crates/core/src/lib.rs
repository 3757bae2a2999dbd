//! Erasure-factor models for flash memories with and without write-once
//! memory (WOM) codes, a page-mapped FTL simulator that measures the same
//! quantity empirically, and the plumbing behind the `womlab` CLI.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod sim;
pub mod wom;

pub use error::{Error, Result};
