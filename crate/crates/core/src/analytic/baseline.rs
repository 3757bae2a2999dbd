use super::{check_rate, AnalyticResult, SystemKind};
use crate::error::Result;
use crate::numerics::lambert_w0;

/// Fraction of valid pages in a block at erase time for occupancy `rate`:
/// the root in `(0,1)` of `rate = (x - 1) / ln x`, i.e.
/// `x = -rate * W0(-(1/rate) e^{-1/rate})`.
///
/// Shared by the baseline (`rate = alpha`) and the naive-WOM model
/// (`rate = beta`).
pub fn erase_occupancy(rate: f64) -> Result<f64> {
    check_rate("occupancy", rate)?;
    // -(1/r) e^{-1/r}, formed in log space so tiny rates underflow to zero cleanly.
    let arg = -(-1.0 / rate - rate.ln()).exp();
    Ok((-rate * lambert_w0(arg)?).clamp(0.0, 1.0))
}

/// `alpha'`: expected valid-page fraction of the baseline GC victim.
pub fn alpha_prime(alpha: f64) -> Result<f64> {
    check_rate("alpha", alpha)?;
    erase_occupancy(alpha)
}

/// Baseline erasure factor `1 / (1 - alpha')`, equal to the write amplification.
pub fn ef_baseline(alpha: f64) -> Result<AnalyticResult> {
    let ap = alpha_prime(alpha)?;
    Ok(AnalyticResult::new(SystemKind::Baseline, 1, alpha, 1.0 / (1.0 - ap)).with("alpha_prime", ap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{solve_scalar, Interval, SolverConfig};

    fn bisection_oracle(alpha: f64) -> f64 {
        let f = |x: f64| (x - 1.0) / x.ln();
        solve_scalar(f, alpha, Interval::new(1e-300, 1.0 - 1e-15).unwrap(), &SolverConfig::default()).unwrap()
    }

    #[test]
    fn half_rate_matches_bisection() {
        let oracle = bisection_oracle(0.5);
        assert!((oracle - 0.2032).abs() < 1e-4);
        let ap = alpha_prime(0.5).unwrap();
        assert!((ap - oracle).abs() < 1e-10);
        let ef = ef_baseline(0.5).unwrap().ef;
        assert!((ef - 1.0 / (1.0 - oracle)).abs() < 1e-9);
        assert!((ef - 1.2550).abs() < 1e-4);
    }

    #[test]
    fn limits() {
        assert!(alpha_prime(0.999).unwrap() > 0.95);
        assert!(alpha_prime(0.05).unwrap() < 1e-6);
        assert!((ef_baseline(0.05).unwrap().ef - 1.0).abs() < 1e-3);
    }

    #[test]
    fn relation_holds() {
        for k in 1..100 {
            let alpha = k as f64 / 100.0;
            let ap = alpha_prime(alpha).unwrap();
            let back = (ap - 1.0) / ap.ln();
            assert!((back - alpha).abs() < 1e-9, "alpha={alpha} ap={ap} back={back}");
        }
    }


    #[test]
    fn domain() {
        assert!(alpha_prime(0.0).is_err());
        assert!(alpha_prime(1.0).is_err());
        assert!(ef_baseline(-0.2).is_err());
    }
}
