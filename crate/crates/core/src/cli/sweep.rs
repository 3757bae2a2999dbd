//! Sweeps over storage rate and system, analytic and simulated.

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{
    default_fixed_rate, ef_baseline, ef_cp_given_gamma1, ef_cp_multiwrite, ef_cp_optimal, ef_naive, AnalyticResult,
    SystemKind, SystemParams,
};
use crate::error::{Error, Result};
use crate::numerics::{find_sign_change, solve_scalar, Interval, SolverConfig};
use crate::sim::{self, SimConfig, DEFAULT_BLOCKS, DEFAULT_MEASURED_WRITES, DEFAULT_PAGES_PER_BLOCK};

/// One analytic erasure-factor curve: a system together with its code parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Curve {
    pub system: SystemKind,
    pub t: u32,
    /// Naive WOM only.
    pub rate: Option<f64>,
    /// CP WOM with `t = 2` only; `None` optimizes over it.
    pub gamma1: Option<f64>,
}

impl Curve {
    pub fn baseline() -> Self {
        Self {
            system: SystemKind::Baseline,
            t: 1,
            rate: None,
            gamma1: None,
        }
    }

    pub fn naive(t: u32, rate: f64) -> Self {
        Self {
            system: SystemKind::NaiveWom,
            t,
            rate: Some(rate),
            gamma1: None,
        }
    }

    pub fn cp(t: u32, gamma1: Option<f64>) -> Self {
        Self {
            system: SystemKind::CpWom,
            t,
            rate: None,
            gamma1,
        }
    }

    pub fn evaluate(&self, alpha: f64) -> Result<AnalyticResult> {
        match self.system {
            SystemKind::Baseline => ef_baseline(alpha),
            SystemKind::NaiveWom => ef_naive(alpha, self.rate.unwrap_or(f64::NAN), self.t),
            SystemKind::CpWom => match (self.t, self.gamma1) {
                (2, Some(g)) => ef_cp_given_gamma1(alpha, g),
                (2, None) => ef_cp_optimal(alpha),
                (t, None) => ef_cp_multiwrite(alpha, t),
                (t, Some(_)) => Err(Error::Config(format!("gamma1 applies to two-write CP only, got t={t}"))),
            },
        }
    }

    /// Storage rates on which the curve is defined.
    fn domain(&self) -> Result<Interval> {
        let hi = match self.rate {
            Some(r) => (r - 1e-9).min(0.999),
            None => 0.999,
        };
        Interval::new(1e-3, hi)
    }
}

/// What to evaluate: a storage-rate grid crossed with a set of curves.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    pub curves: Vec<Curve>,
    pub simulate: bool,
    pub blocks: u64,
    pub pages_per_block: u32,
    pub measured_writes: u64,
    /// `None` takes the simulator default.
    pub warmup_writes: Option<u64>,
    pub seed: u64,
}

impl SweepSpec {
    pub fn new(alphas: Vec<f64>, curves: Vec<Curve>) -> Self {
        Self {
            alphas,
            curves,
            simulate: false,
            blocks: DEFAULT_BLOCKS,
            pages_per_block: DEFAULT_PAGES_PER_BLOCK,
            measured_writes: DEFAULT_MEASURED_WRITES,
            warmup_writes: None,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.curves.is_empty() {
            return Err(Error::Config("nothing to evaluate".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(Error::Config(format!("storage rate {a} outside (0,1)")));
        }
        Ok(())
    }
}

/// Expands `start:stop:step` into an inclusive grid.
pub fn alpha_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && start <= stop && stop < 1.0 && step > 0.0) {
        return Err(Error::Config(format!(
            "sweep needs 0 < start <= stop < 1 and step > 0, got {start}:{stop}:{step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect())
}

/// Parses `start:stop:step`.
pub fn parse_sweep(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("expected start:stop:step, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    Ok((v[0], v[1], v[2]))
}

/// Builds the curve list from per-system flags.
pub fn build_curves(
    systems: &[SystemKind],
    t_list: &[u32],
    rates: &[f64],
    gamma1: Option<f64>,
) -> Result<Vec<Curve>> {
    if !rates.is_empty() && rates.len() != 1 && rates.len() != t_list.len() {
        return Err(Error::Config(format!(
            "--rate takes one value or one per --t value ({} given for {} t values)",
            rates.len(),
            t_list.len()
        )));
    }
    let rate_for = |k: usize, t: u32| -> Result<f64> {
        match rates.len() {
            0 => default_fixed_rate(t)
                .ok_or_else(|| Error::Config(format!("no default naive rate for t={t}; pass --rate"))),
            1 => Ok(rates[0]),
            _ => Ok(rates[k]),
        }
    };
    let mut curves = Vec::new();
    for &system in systems {
        match system {
            SystemKind::Baseline => curves.push(Curve::baseline()),
            SystemKind::NaiveWom | SystemKind::CpWom => {
                for (k, &t) in t_list.iter().enumerate() {
                    if t < 2 {
                        return Err(Error::Config(format!("{system} needs t >= 2, got {t}")));
                    }
                    curves.push(if system == SystemKind::NaiveWom {
                        Curve::naive(t, rate_for(k, t)?)
                    } else {
                        Curve::cp(t, if t == 2 { gamma1 } else { None })
                    });
                }
            }
        }
    }
    curves.sort_by_key(|c| (c.system, c.t));
    curves.dedup();
    Ok(curves)
}

/// One output line; `None` fields are empty in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub alpha: f64,
    pub system: SystemKind,
    pub t: u32,
    #[serde(rename = "R")]
    pub rate: Option<f64>,
    pub ef_analytic: Option<f64>,
    pub ef_sim: Option<f64>,
    pub rel_err: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub alpha_prime: Option<f64>,
    pub beta_prime: Option<f64>,
    pub feasible: bool,
    pub seed: Option<u64>,
}

impl Row {
    fn new(alpha: f64, curve: &Curve) -> Self {
        Self {
            alpha,
            system: curve.system,
            t: curve.t,
            rate: curve.rate,
            ef_analytic: None,
            ef_sim: None,
            rel_err: None,
            gamma1: None,
            gamma2: None,
            alpha_prime: None,
            beta_prime: None,
            feasible: false,
            seed: None,
        }
    }

    fn fill(&mut self, res: &AnalyticResult) {
        self.feasible = true;
        self.ef_analytic = Some(res.ef);
        self.alpha_prime = res.var("alpha_prime");
        self.beta_prime = res.var("beta_prime");
        self.gamma1 = res.var("gamma1");
        self.gamma2 = res.var(&format!("gamma{}", res.t.max(2)));
    }
}

fn analytic_row(alpha: f64, curve: &Curve) -> Result<Row> {
    let mut row = Row::new(alpha, curve);
    match curve.evaluate(alpha) {
        Ok(res) => row.fill(&res),
        Err(Error::Domain(_) | Error::Infeasible(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(row)
}

fn simulated_row(alpha: f64, curve: &Curve, spec: &SweepSpec) -> Result<Row> {
    let mut row = analytic_row(alpha, curve)?;
    if !row.feasible {
        return Ok(row);
    }
    if curve.system == SystemKind::CpWom && curve.t != 2 {
        return Err(Error::Config(format!("cp_wom simulation supports t=2 only, got t={}", curve.t)));
    }
    let params = SystemParams::from_storage_rate(spec.blocks, spec.pages_per_block, alpha)?;
    let mut cfg = SimConfig::new(curve.system, params, spec.measured_writes, spec.seed);
    cfg.t = curve.t;
    if let Some(r) = curve.rate {
        cfg.rate = r;
    }
    if let Some(g) = row.gamma1 {
        cfg.gamma1 = g;
    }
    if let Some(w) = spec.warmup_writes {
        cfg.warmup_writes = w;
    }
    let report = sim::run(&cfg)?;
    let analytic = row.ef_analytic.expect("feasible rows carry an analytic value");
    row.ef_sim = Some(report.ef);
    row.rel_err = Some((report.ef - analytic) / analytic);
    row.seed = Some(spec.seed);
    Ok(row)
}

/// Analytic table, one row per `(alpha, system, t)`; infeasible points are kept
/// with `feasible = false`.
pub fn cmd_analytic(spec: &SweepSpec) -> Result<Vec<Row>> {
    evaluate(spec, analytic_row)
}

/// Analytic table plus a simulation of every feasible point.
pub fn cmd_simulate(spec: &SweepSpec) -> Result<Vec<Row>> {
    evaluate(spec, |a, c| simulated_row(a, c, spec))
}

fn evaluate<F>(spec: &SweepSpec, point: F) -> Result<Vec<Row>>
where
    F: Fn(f64, &Curve) -> Result<Row> + Sync,
{
    spec.validate()?;
    let points: Vec<(f64, Curve)> = spec
        .alphas
        .iter()
        .flat_map(|&a| spec.curves.iter().map(move |c| (a, *c)))
        .collect();
    let mut rows = points
        .par_iter()
        .map(|(a, c)| point(*a, c))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|x, y| {
        x.alpha
            .total_cmp(&y.alpha)
            .then(x.system.cmp(&y.system))
            .then(x.t.cmp(&y.t))
    });
    Ok(rows)
}

/// Rows whose relative error exceeds `tol` in magnitude.
pub fn check_failures(rows: &[Row], tol: f64) -> Vec<&Row> {
    rows.iter()
        .filter(|r| r.rel_err.is_some_and(|e| e.is_nan() || e.abs() > tol))
        .collect()
}

/// Samples of the difference curve scanned for a sign change.
const CROSSOVER_SAMPLES: usize = 200;

/// Storage rate at which curves `a` and `b` have equal erasure factors.
pub fn cmd_crossover(a: &Curve, b: &Curve) -> Result<f64> {
    let (da, db) = (a.domain()?, b.domain()?);
    let domain = Interval::new(da.lo().max(db.lo()), da.hi().min(db.hi()))?;
    let diff = |x: f64| match (a.evaluate(x), b.evaluate(x)) {
        (Ok(ra), Ok(rb)) => ra.ef - rb.ef,
        _ => f64::NAN,
    };
    let bracket = find_sign_change(diff, domain, CROSSOVER_SAMPLES).ok_or_else(|| {
        Error::NoCrossover(format!(
            "{} and {} erasure factors do not cross on [{}, {}]",
            a.system,
            b.system,
            domain.lo(),
            domain.hi()
        ))
    })?;
    solve_scalar(diff, 0.0, bracket, &SolverConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_inclusive() {
        let g = alpha_grid(0.05, 0.95, 0.01).unwrap();
        assert_eq!(g.len(), 91);
        assert_eq!(g[0], 0.05);
        assert_eq!(*g.last().unwrap(), 0.95);
        assert_eq!(alpha_grid(0.5, 0.5, 0.1).unwrap(), vec![0.5]);
        assert!(alpha_grid(0.0, 0.5, 0.1).is_err());
        assert!(alpha_grid(0.5, 0.4, 0.1).is_err());
    }

    #[test]
    fn sweep_parsing() {
        assert_eq!(parse_sweep("0.1:0.9:0.2").unwrap(), (0.1, 0.9, 0.2));
        assert!(parse_sweep("0.1:0.9").is_err());
        assert!(parse_sweep("a:b:c").is_err());
    }

    #[test]
    fn curves_from_flags() {
        let all = [SystemKind::CpWom, SystemKind::Baseline, SystemKind::NaiveWom];
        let c = build_curves(&all, &[2, 3], &[0.77, 0.6], None).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c[0], Curve::baseline());
        assert_eq!(c[1], Curve::naive(2, 0.77));
        assert_eq!(c[2], Curve::naive(3, 0.6));
        assert!(build_curves(&[SystemKind::NaiveWom], &[3], &[], None).is_err());
        assert!(build_curves(&[SystemKind::NaiveWom], &[2, 3], &[0.7, 0.6, 0.5], None).is_err());
        assert!(build_curves(&[SystemKind::CpWom], &[1], &[], None).is_err());
    }

    #[test]
    fn infeasible_points_are_marked() {
        let spec = SweepSpec::new(vec![0.5, 0.8], vec![Curve::naive(2, 0.77)]);
        let rows = cmd_analytic(&spec).unwrap();
        assert!(rows[0].feasible && rows[0].ef_analytic.is_some());
        assert!(!rows[1].feasible && rows[1].ef_analytic.is_none());
    }

    #[test]
    fn rows_are_ordered() {
        let spec = SweepSpec::new(
            vec![0.3, 0.1],
            vec![Curve::cp(2, None), Curve::baseline(), Curve::naive(2, 0.77)],
        );
        let rows = cmd_analytic(&spec).unwrap();
        let keys: Vec<(f64, SystemKind)> = rows.iter().map(|r| (r.alpha, r.system)).collect();
        assert_eq!(keys[0], (0.1, SystemKind::Baseline));
        assert_eq!(keys[2], (0.1, SystemKind::CpWom));
        assert_eq!(keys[3], (0.3, SystemKind::Baseline));
    }

    #[test]
    fn crossover_with_baseline() {
        let x = cmd_crossover(&Curve::naive(2, 0.77), &Curve::baseline()).unwrap();
        let (n, b) = (ef_naive(x, 0.77, 2).unwrap().ef, ef_baseline(x).unwrap().ef);
        assert!((n - b).abs() < 1e-9);
        assert!(matches!(
            cmd_crossover(&Curve::cp(2, None), &Curve::baseline()),
            Err(Error::NoCrossover(_))
        ));
    }
}
