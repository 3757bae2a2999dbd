//! Binary write-once memory codecs.
//!
//! [`rs_encode`] / [`rs_decode`] implement the Rivest-Shamir code that stores
//! two bits twice in three cells. The simulator never carries payload bits;
//! it uses [`ideal_codec`] only to learn how many physical page slots a
//! logical page consumes on each write.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analytic::{capacity_contains, WomCodeSpec};
use crate::error::{Error, Result};

/// Programmed/unprogrammed state of `n` cells. Cells only move 0 -> 1 between erases.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellState {
    cells: Vec<bool>,
}

impl CellState {
    pub fn erased(n: usize) -> Self {
        Self { cells: vec![false; n] }
    }

    pub fn from_bits(cells: &[bool]) -> Self {
        Self { cells: cells.to_vec() }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn weight(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    /// True if every programmed cell of `self` is still programmed in `next`.
    pub fn can_become(&self, next: &CellState) -> bool {
        self.len() == next.len() && self.cells.iter().zip(&next.cells).all(|(&a, &b)| !a || b)
    }
}

impl fmt::Display for CellState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.cells {
            f.write_str(if c { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for CellState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Domain(format!("invalid cell character '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(|cells| Self { cells })
    }
}

/// First-write codewords indexed by message: 00, 01, 10, 11.
const RS_FIRST: [[bool; 3]; 4] = [
    [false, false, false],
    [true, false, false],
    [false, true, false],
    [false, false, true],
];

fn rs_first(message: u8) -> CellState {
    CellState::from_bits(&RS_FIRST[message as usize])
}

fn rs_second(message: u8) -> CellState {
    let bits = RS_FIRST[message as usize].map(|b| !b);
    CellState::from_bits(&bits)
}

fn check_rs(message: u8, state: &CellState) -> Result<()> {
    if message > 3 {
        return Err(Error::Domain(format!("Rivest-Shamir messages are 2 bits, got {message}")));
    }
    if state.len() != 3 {
        return Err(Error::Domain(format!("Rivest-Shamir codewords are 3 cells, got {}", state.len())));
    }
    Ok(())
}

/// Encodes a 2-bit `message` on write `write_index` (1 or 2) over `state`.
pub fn rs_encode(write_index: u8, message: u8, state: &CellState) -> Result<CellState> {
    check_rs(message, state)?;
    let next = match write_index {
        1 => {
            if state.weight() != 0 {
                return Err(Error::Constraint(format!("first write needs erased cells, found {state}")));
            }
            rs_first(message)
        }
        2 => {
            if state.weight() > 1 {
                return Err(Error::Constraint(format!("{state} is not a first-write codeword")));
            }
            if rs_decode(state)? == message {
                state.clone()
            } else {
                rs_second(message)
            }
        }
        other => return Err(Error::Domain(format!("Rivest-Shamir code has two writes, got write {other}"))),
    };
    if !state.can_become(&next) {
        return Err(Error::Constraint(format!("{state} -> {next} would clear a cell")));
    }
    Ok(next)
}

/// Decodes any 3-cell state: weight <= 1 by the first-write table, otherwise
/// by its complement.
pub fn rs_decode(state: &CellState) -> Result<u8> {
    check_rs(0, state)?;
    let c = state.cells();
    let pattern = if state.weight() <= 1 {
        [c[0], c[1], c[2]]
    } else {
        [!c[0], !c[1], !c[2]]
    };
    Ok(RS_FIRST.iter().position(|cw| *cw == pattern).expect("weight <= 1 patterns are all tabulated") as u8)
}

/// Cells per codeword assumed for idealized (rate-level) codes: one 4 KiB page.
pub const IDEAL_CODEWORD_CELLS: u32 = 4096 * 8;

/// Shape of a WOM code as seen by the FTL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodecDescriptor {
    /// Cells per codeword.
    pub n: u32,
    pub t: u32,
    /// `log2(M_i)` for each write.
    pub message_bits: Vec<f64>,
    /// Physical page slots one logical page occupies on each write.
    pub slot_span: Vec<u32>,
    /// Physical page size relative to a logical page.
    pub page_scale: f64,
}

impl CodecDescriptor {
    pub fn rates(&self) -> Vec<f64> {
        self.message_bits.iter().map(|b| b / f64::from(self.n)).collect()
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates().iter().sum()
    }
}

/// Descriptor of the three-cell Rivest-Shamir code.
pub fn rs_descriptor() -> CodecDescriptor {
    CodecDescriptor {
        n: 3,
        t: 2,
        message_bits: vec![2.0, 2.0],
        slot_span: vec![1, 1],
        page_scale: 1.0,
    }
}

/// Space-accounting descriptor for an ideal code with `spec`'s rates.
///
/// Fixed-rate codes keep one logical page per physical page and inflate the
/// physical page by `1/R`. Variable-rate codes keep the page size and spread a
/// write of rate `R_i` over `ceil(1/R_i)` page slots. Two-write rates outside
/// the capacity region are rejected.
pub fn ideal_codec(spec: &WomCodeSpec) -> Result<CodecDescriptor> {
    let rates = spec.rates();
    if spec.t() == 2 && !capacity_contains(rates[0], rates[1]) {
        return Err(Error::Config(format!(
            "rates ({}, {}) lie outside the two-write capacity region",
            rates[0], rates[1]
        )));
    }
    let n = IDEAL_CODEWORD_CELLS;
    let message_bits = rates.iter().map(|r| r * f64::from(n)).collect();
    let (slot_span, page_scale) = if spec.is_fixed_rate() {
        (vec![1; rates.len()], 1.0 / rates[0])
    } else {
        // Guard against 1/0.5 landing a hair above 2.
        let spans = rates.iter().map(|r| ((1.0 / r) - 1e-9).ceil().max(1.0) as u32).collect();
        (spans, 1.0)
    };
    Ok(CodecDescriptor {
        n,
        t: spec.t(),
        message_bits,
        slot_span,
        page_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(bits: &str) -> CellState {
        bits.parse().unwrap()
    }

    #[test]
    fn table_examples() {
        assert_eq!(rs_encode(1, 0b01, &s("000")).unwrap(), s("100"));
        assert_eq!(rs_encode(2, 0b01, &s("010")).unwrap(), s("011"));
        assert_eq!(rs_encode(2, 0b10, &s("010")).unwrap(), s("010"));
        assert_eq!(rs_decode(&s("000")).unwrap(), 0b00);
        assert_eq!(rs_decode(&s("001")).unwrap(), 0b11);
        assert_eq!(rs_decode(&s("110")).unwrap(), 0b11);
        assert_eq!(rs_decode(&s("111")).unwrap(), 0b00);
    }

    #[test]
    fn every_state_decodes() {
        for v in 0..8u8 {
            let st = CellState::from_bits(&[v & 4 != 0, v & 2 != 0, v & 1 != 0]);
            assert!(rs_decode(&st).unwrap() < 4);
        }
    }

    #[test]
    fn misuse_is_rejected() {
        assert!(matches!(rs_encode(1, 0, &s("100")), Err(Error::Constraint(_))));
        assert!(matches!(rs_encode(2, 0, &s("110")), Err(Error::Constraint(_))));
        assert!(rs_encode(3, 0, &s("000")).is_err());
        assert!(rs_encode(1, 4, &s("000")).is_err());
        assert!(rs_encode(1, 0, &s("0000")).is_err());
    }

    #[test]
    fn rs_sum_rate_below_bound() {
        let d = rs_descriptor();
        assert!((d.sum_rate() - 4.0 / 3.0).abs() < 1e-15);
        assert!(d.sum_rate() <= 3f64.log2());
    }

    #[test]
    fn capacity_preserving_slots() {
        let d = ideal_codec(&WomCodeSpec::capacity_preserving()).unwrap();
        assert_eq!(d.slot_span, vec![1, 2]);
        assert_eq!(d.page_scale, 1.0);
    }

    #[test]
    fn naive_fixed_rate_inflates_pages() {
        let d = ideal_codec(&WomCodeSpec::fixed(2, 0.77).unwrap()).unwrap();
        assert_eq!(d.slot_span, vec![1, 1]);
        assert!((d.page_scale - 1.0 / 0.77).abs() < 1e-15);
        assert!((d.rates()[0] - 0.77).abs() < 1e-12);
    }

    #[test]
    fn outside_region_is_rejected() {
        let spec = WomCodeSpec::new(vec![1.0, 0.51], false).unwrap();
        assert!(ideal_codec(&spec).is_err());
    }

    #[test]
    fn integer_reciprocals_are_exact() {
        let spec = WomCodeSpec::new(vec![0.5, 0.25, 0.25], false).unwrap();
        assert_eq!(ideal_codec(&spec).unwrap().slot_span, vec![2, 4, 4]);
    }
}
