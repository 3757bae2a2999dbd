//! Capacity-preserving WOM system.
//!
//! Blocks are written once at rate 1 and, after garbage collection picks them
//! with at most `gamma1 * Z` valid pages, a second time at rate 1/2 into
//! their invalid pages. `gamma_j` is the valid fraction with which a block
//! leaves stage `j`; the last one, `gamma_t`, is the fraction copied out at
//! the physical erase.

use super::{check_rate, AnalyticResult, SystemKind};
use crate::error::{Error, Result};
use crate::numerics::{branch_offset, lambert_w0, minimize_box, solve_scalar, Interval, SolverConfig};

/// Thresholds below this are evaluated at this value; the `gamma -> 0` limit
/// has a divergent log term but a finite erasure factor.
pub const GAMMA_FLOOR: f64 = 1e-9;

/// Lower end of the bracket for the final-stage root.
const GAMMA_T_FLOOR: f64 = 1e-12;

fn check_threshold(gamma1: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma1) {
        return Err(Error::Domain(format!("gamma1 must lie in [0,1], got {gamma1}")));
    }
    Ok(gamma1.max(GAMMA_FLOOR))
}

/// `gamma2 = -alpha W0(-(1/alpha) e^{ln((1+g1)/(2 g1)) + (g1-3)/(2 alpha)})`.
///
/// Infeasible when the Lambert argument falls below `-1/e` or when the root
/// exceeds the second-write capacity `(1 + gamma1) / 2`.
pub fn cp_gamma2(alpha: f64, gamma1: f64) -> Result<f64> {
    check_rate("alpha", alpha)?;
    let g1 = check_threshold(gamma1)?;
    let log_mag = ((1.0 + g1) / (2.0 * g1)).ln() + (g1 - 3.0) / (2.0 * alpha) - alpha.ln();
    let arg = -log_mag.exp();
    if branch_offset(arg) < 0.0 {
        return Err(Error::Infeasible(format!(
            "no gamma2 for alpha={alpha}, gamma1={gamma1}: Lambert argument {arg} < -1/e"
        )));
    }
    let gamma2 = (-alpha * lambert_w0(arg)?).max(0.0);
    let cap = (1.0 + g1) / 2.0;
    if gamma2 > cap {
        return Err(Error::Infeasible(format!(
            "gamma2={gamma2} exceeds the second-write capacity {cap} (alpha={alpha}, gamma1={gamma1})"
        )));
    }
    Ok(gamma2)
}

/// `EF2'(alpha, gamma1) = 1 / (3/2 - gamma1/2 - gamma2)`.
pub fn ef_cp_given_gamma1(alpha: f64, gamma1: f64) -> Result<AnalyticResult> {
    let gamma2 = cp_gamma2(alpha, gamma1)?;
    let g1 = gamma1.max(GAMMA_FLOOR);
    let denom = 1.5 - g1 / 2.0 - gamma2;
    Ok(AnalyticResult::new(SystemKind::CpWom, 2, alpha, 1.0 / denom)
        .with("gamma1", gamma1)
        .with("gamma2", gamma2))
}

/// Erasure factor minimized over the threshold `gamma1 in [0, 1]`.
pub fn ef_cp_optimal(alpha: f64) -> Result<AnalyticResult> {
    check_rate("alpha", alpha)?;
    let cfg = SolverConfig::default();
    let objective = |p: &[f64]| ef_cp_given_gamma1(alpha, p[0]).map_or(f64::INFINITY, |r| r.ef);
    let (best, value) = minimize_box(objective, &[Interval::unit()], &cfg)?;
    if !value.is_finite() {
        return Err(Error::Infeasible(format!("no feasible gamma1 at alpha={alpha}")));
    }
    ef_cp_given_gamma1(alpha, best[0])
}

/// Erasure factor and final-stage fraction for `t` writes at fixed
/// thresholds `gammas = (gamma_1, ..., gamma_{t-1})`.
///
/// `gamma_t` is found by bisection on
/// `h(g) = alpha * S(g) - D(g)`, where `D` is the capacity term
/// `2 - 2^{1-t} - sum(gamma_j)/2 - g` and `S` the sum of stage log terms.
/// `h` is convex with its minimum at `g = alpha`, so the root on
/// `(0, min(alpha, cap)]` is unique.
fn multiwrite_point(alpha: f64, t: u32, gammas: &[f64]) -> Result<(f64, f64)> {
    debug_assert_eq!(gammas.len() + 1, t as usize);
    let mut log_sum = 0.0;
    let mut prev = 0.0;
    for (idx, &raw) in gammas.iter().enumerate() {
        let j = idx as i32 + 1;
        let g = raw.max(GAMMA_FLOOR);
        let term = ((1.0 + 2f64.powi(j - 2) * prev) / (2f64.powi(j - 1) * g)).ln();
        if term < 0.0 {
            return Err(Error::Infeasible(format!(
                "gamma{j}={raw} exceeds the stage-{j} capacity"
            )));
        }
        log_sum += term;
        prev = g;
    }
    let last = t as i32;
    let head = (1.0 + 2f64.powi(last - 2) * prev) / 2f64.powi(last - 1);
    let capacity = 2.0 - 2f64.powi(1 - last) - gammas.iter().map(|g| g.max(GAMMA_FLOOR)).sum::<f64>() / 2.0;
    let h = |g: f64| alpha * (log_sum + head.ln() - g.ln()) - (capacity - g);

    let upper = alpha.min(head);
    if upper <= GAMMA_T_FLOOR || h(upper) > 0.0 {
        return Err(Error::Infeasible(format!(
            "no gamma{t} root for alpha={alpha}, gammas={gammas:?}"
        )));
    }
    let gamma_t = if h(GAMMA_T_FLOOR) <= 0.0 {
        // The root sits below the bracket floor; gamma_t is numerically zero.
        0.0
    } else {
        let cfg = SolverConfig::new(1e-14, 400)?;
        let root = solve_scalar(h, 0.0, Interval::new(GAMMA_T_FLOOR, upper)?, &cfg)?;
        let denom = log_sum + (head / root).ln();
        let residual = alpha - (capacity - root) / denom;
        if residual.abs() > 1e-9 {
            return Err(Error::NonConvergence {
                iterations: cfg.max_iter,
                context: "final-stage gamma root failed its residual check",
            });
        }
        root
    };
    let denom = capacity - gamma_t;
    if denom <= 0.0 {
        return Err(Error::Infeasible(format!("non-positive capacity term {denom}")));
    }
    Ok((1.0 / denom, gamma_t))
}

/// CP-WOM erasure factor for `t >= 2` writes, minimized over the box
/// `[0, 1]^{t-1}` of intermediate thresholds.
pub fn ef_cp_multiwrite(alpha: f64, t: u32) -> Result<AnalyticResult> {
    check_rate("alpha", alpha)?;
    if t < 2 {
        return Err(Error::Domain(format!("CP-WOM needs t >= 2, got {t}")));
    }
    let cfg = SolverConfig::default();
    let bounds = vec![Interval::unit(); (t - 1) as usize];
    let objective = |g: &[f64]| multiwrite_point(alpha, t, g).map_or(f64::INFINITY, |(ef, _)| ef);
    let (best, value) = minimize_box(objective, &bounds, &cfg)?;
    if !value.is_finite() {
        return Err(Error::Infeasible(format!("no feasible thresholds at alpha={alpha}, t={t}")));
    }
    let (ef, gamma_t) = multiwrite_point(alpha, t, &best)?;
    let mut result = AnalyticResult::new(SystemKind::CpWom, t, alpha, ef);
    for (j, g) in best.iter().enumerate() {
        result = result.with(format!("gamma{}", j + 1), *g);
    }
    Ok(result.with(format!("gamma{t}"), gamma_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{ef_baseline, ef_naive};

    /// The alpha-relation from the steady-state derivation, before inverting it.
    fn alpha_relation(gamma1: f64, gamma2: f64) -> f64 {
        let g1 = gamma1.max(GAMMA_FLOOR);
        (1.5 - g1 / 2.0 - gamma2) / ((1.0 + g1) / (2.0 * g1 * gamma2)).ln()
    }

    /// Bisection on the alpha-relation, independent of the Lambert path.
    fn gamma2_oracle(alpha: f64, gamma1: f64) -> f64 {
        let h = |g: f64| alpha * ((1.0 + gamma1) / (2.0 * gamma1 * g)).ln() - (1.5 - gamma1 / 2.0 - g);
        let (mut lo, mut hi) = (1e-300_f64, alpha.min((1.0 + gamma1) / 2.0));
        for _ in 0..2000 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn small_alpha_keeps_gamma2_negligible() {
        assert!(cp_gamma2(0.05, 0.5).unwrap() < 1e-6);
    }

    #[test]
    fn gamma2_matches_oracle_and_relation() {
        for &(a, g1) in &[(0.8, 0.75), (0.6, 0.45), (0.5, 0.326), (0.9, 0.87), (0.3, 0.1)] {
            let g2 = cp_gamma2(a, g1).unwrap();
            let oracle = gamma2_oracle(a, g1);
            assert!((g2 - oracle).abs() < 1e-9, "a={a} g1={g1}: {g2} vs {oracle}");
            assert!((alpha_relation(g1, g2) - a).abs() < 1e-9);
            assert!(g2 <= (1.0 + g1) / 2.0);
        }
    }

    #[test]
    fn infeasible_pairs_are_flagged() {
        // Lambert argument is -0.393 < -1/e here: no gamma2 satisfies the relation.
        assert!(matches!(cp_gamma2(0.8, 0.5), Err(Error::Infeasible(_))));
        assert!(matches!(cp_gamma2(0.9, 0.1), Err(Error::Infeasible(_))));
        assert!(matches!(cp_gamma2(0.5, 1.2), Err(Error::Domain(_))));
    }

    #[test]
    fn threshold_one_is_the_baseline() {
        for &a in &[0.2, 0.5, 0.9] {
            let r = ef_cp_given_gamma1(a, 1.0).unwrap();
            let g2 = r.var("gamma2").unwrap();
            assert!((r.ef - 1.0 / (1.0 - g2)).abs() < 1e-12);
            assert!((r.ef - ef_baseline(a).unwrap().ef).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_threshold_limit() {
        let r = ef_cp_given_gamma1(0.05, 0.0).unwrap();
        assert!((r.ef - 2.0 / 3.0).abs() < 1e-4);
        assert!(r.ef > 2.0 / 3.0);
    }

    #[test]
    fn interior_case_consistent_with_oracle() {
        // (0.6, 0.3) sits outside the feasible region; 0.45 is next to the optimum.
        assert!(matches!(ef_cp_given_gamma1(0.6, 0.3), Err(Error::Infeasible(_))));
        let r = ef_cp_given_gamma1(0.6, 0.45).unwrap();
        let oracle = 1.0 / (1.5 - 0.225 - gamma2_oracle(0.6, 0.45));
        assert!((r.ef - oracle).abs() < 1e-9);
    }

    #[test]
    fn optimum_beats_baseline_and_tends_to_two_thirds() {
        let r = ef_cp_optimal(0.05).unwrap();
        assert!((r.ef - 2.0 / 3.0).abs() / (2.0 / 3.0) < 0.02);
        for k in 1..10 {
            let a = k as f64 / 10.0;
            assert!(ef_cp_optimal(a).unwrap().ef < ef_baseline(a).unwrap().ef, "alpha={a}");
        }
    }

    #[test]
    fn optimum_beats_dense_grid() {
        let r = ef_cp_optimal(0.9).unwrap();
        let grid_best = (0..=10_000)
            .map(|k| ef_cp_given_gamma1(0.9, k as f64 / 10_000.0).map_or(f64::INFINITY, |r| r.ef))
            .fold(f64::INFINITY, f64::min);
        assert!(r.ef <= grid_best + 1e-12);
        let g1 = r.var("gamma1").unwrap();
        assert!(g1 > 0.0 && g1 < 1.0);
        assert!(r.ef < ef_cp_given_gamma1(0.9, 1.0).unwrap().ef);
    }

    #[test]
    fn naive_wins_only_at_low_rates() {
        assert!(ef_naive(0.3, 0.77, 2).unwrap().ef < ef_cp_optimal(0.3).unwrap().ef);
        assert!(ef_naive(0.65, 0.77, 2).unwrap().ef > ef_cp_optimal(0.65).unwrap().ef);
    }

    #[test]
    fn multiwrite_reduces_to_two_writes() {
        for &a in &[0.2, 0.5, 0.8] {
            let two = ef_cp_multiwrite(a, 2).unwrap();
            let opt = ef_cp_optimal(a).unwrap();
            assert!((two.ef - opt.ef).abs() < 1e-6, "a={a}: {} vs {}", two.ef, opt.ef);
        }
    }

    #[test]
    fn more_writes_do_not_hurt_at_half_rate() {
        let two = ef_cp_multiwrite(0.5, 2).unwrap().ef;
        let three = ef_cp_multiwrite(0.5, 3).unwrap();
        assert!(three.ef <= two + 1e-9, "t=3 {} vs t=2 {}", three.ef, two);
        let denom = 1.0 / three.ef;
        assert!(denom > 0.0 && denom <= 2.0 - 0.25);
    }
}
