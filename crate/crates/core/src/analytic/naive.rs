use super::baseline::{alpha_prime, erase_occupancy};
use super::{check_rate, AnalyticResult, SystemKind, FIXED_RATE_TWO_WRITE};
use crate::error::{Error, Result};

/// Built-in per-write rate for fixed-rate naive WOM. Only `t = 2` has one;
/// other write counts need an explicit rate.
pub fn default_fixed_rate(t: u32) -> Option<f64> {
    match t {
        1 => Some(1.0),
        2 => Some(FIXED_RATE_TWO_WRITE),
        _ => None,
    }
}

/// Naive-WOM erasure factor `1 / (t (1 - beta'))` with `beta = alpha / R`.
pub fn ef_naive(alpha: f64, rate: f64, t: u32) -> Result<AnalyticResult> {
    check_rate("alpha", alpha)?;
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Domain(format!("per-write rate must lie in (0,1], got {rate}")));
    }
    if t == 0 {
        return Err(Error::Domain("write count must be at least 1".into()));
    }
    if alpha >= rate {
        return Err(Error::Domain(format!(
            "naive WOM needs alpha < R (alpha={alpha}, R={rate})"
        )));
    }
    let beta = alpha / rate;
    let beta_prime = erase_occupancy(beta)?;
    let ef = 1.0 / (f64::from(t) * (1.0 - beta_prime));
    Ok(AnalyticResult::new(SystemKind::NaiveWom, t, alpha, ef)
        .with("R", rate)
        .with("beta", beta)
        .with("beta_prime", beta_prime))
}

/// Whether the two-write naive system erases no more than the baseline:
/// `1 + alpha W(-(1/alpha) e^{-1/alpha}) <= 2 (1 + (alpha/R) W(-(R/alpha) e^{-R/alpha}))`.
pub fn naive_beats_baseline(alpha: f64, rate: f64) -> Result<bool> {
    if !(alpha > 0.0 && alpha <= rate) {
        return Err(Error::Domain(format!("need alpha in (0, R], got alpha={alpha}, R={rate}")));
    }
    if alpha == rate {
        // beta = 1: the naive system has no spare space at all.
        return Ok(false);
    }
    let lhs = 1.0 - alpha_prime(alpha)?;
    let rhs = 2.0 * (1.0 - erase_occupancy(alpha / rate)?);
    Ok(lhs <= rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ef_baseline;
    use crate::numerics::{solve_scalar, Interval, SolverConfig};

    #[test]
    fn half_rate() {
        // Oracle: beta = 0.5/0.77, beta' by bisection on (x-1)/ln x = beta.
        let beta = 0.5 / 0.77;
        let f = |x: f64| (x - 1.0) / x.ln();
        let bp = solve_scalar(f, beta, Interval::new(1e-300, 1.0 - 1e-15).unwrap(), &SolverConfig::default())
            .unwrap();
        assert!((bp - 0.3922).abs() < 1e-4);
        let r = ef_naive(0.5, 0.77, 2).unwrap();
        assert!((r.ef - 1.0 / (2.0 * (1.0 - bp))).abs() < 1e-9);
        assert!((r.ef - 0.8226).abs() < 1e-4);
        assert!((r.var("beta").unwrap() - 0.6494).abs() < 1e-4);
    }

    #[test]
    fn small_alpha_tends_to_half() {
        assert!((ef_naive(0.05, 0.77, 2).unwrap().ef - 0.5).abs() < 1e-2);
        assert!((ef_naive(0.01, 0.5, 5).unwrap().ef - 0.2).abs() < 1e-6);
    }

    #[test]
    fn boundary_rate_is_domain_error() {
        assert!(ef_naive(0.77, 0.77, 2).is_err());
        assert!(ef_naive(0.8, 0.77, 3).is_err());
        assert!(ef_naive(0.5, 0.0, 2).is_err());
    }

    #[test]
    fn crossover_sides() {
        assert!(naive_beats_baseline(0.5, 0.77).unwrap());
        assert!(naive_beats_baseline(0.60, 0.77).unwrap());
        assert!(!naive_beats_baseline(0.70, 0.77).unwrap());
        // With R = 0.77 exactly the curves meet at 0.64441; at the rounded
        // 0.6442 they are 1.08e-3 apart in relative terms.
        let e1 = ef_baseline(0.6442).unwrap().ef;
        let e2 = ef_naive(0.6442, 0.77, 2).unwrap().ef;
        assert!((e1 - e2).abs() <= 1.1e-3 * e1, "e1={e1} e2={e2}");
        let e1 = ef_baseline(0.64441).unwrap().ef;
        let e2 = ef_naive(0.64441, 0.77, 2).unwrap().ef;
        assert!((e1 - e2).abs() <= 1e-5 * e1, "e1={e1} e2={e2}");
    }

    #[test]
    fn beats_matches_ef_comparison() {
        for k in 1..77 {
            let a = k as f64 / 100.0;
            let by_ef = ef_naive(a, 0.77, 2).unwrap().ef <= ef_baseline(a).unwrap().ef;
            assert_eq!(naive_beats_baseline(a, 0.77).unwrap(), by_ef, "alpha={a}");
        }
    }
}
