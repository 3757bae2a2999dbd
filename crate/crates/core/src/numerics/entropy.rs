//! Binary entropy and its inverse on the lower half `[0, 0.5]`.

use crate::error::{Error, Result};

/// `h(p) = -p log2 p - (1-p) log2 (1-p)`, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("binary_entropy needs p in [0,1], got {p}")));
    }
    let term = |q: f64| if q == 0.0 { 0.0 } else { -q * q.log2() };
    Ok(term(p) + term(1.0 - p))
}

/// The unique `p` in `[0, 0.5]` with `binary_entropy(p) = h`.
pub fn inverse_binary_entropy(h: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::Domain(format!("inverse_binary_entropy needs h in [0,1], got {h}")));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    if h == 1.0 {
        return Ok(0.5);
    }
    // h is strictly increasing on [0, 0.5]; bisect to adjacent floats.
    let (mut lo, mut hi) = (0.0_f64, 0.5_f64);
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if binary_entropy(mid)? < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (h_lo, h_hi) = (binary_entropy(lo)?, binary_entropy(hi)?);
    Ok(if (h - h_lo).abs() <= (h_hi - h).abs() { lo } else { hi })
}
