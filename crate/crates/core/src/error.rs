use thiserror::Error;

/// Errors raised by the numerics, models, codecs and simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations ({context})")]
    NonConvergence {
        iterations: usize,
        context: &'static str,
    },

    #[error("bracket [{lo}, {hi}] does not straddle the target (f(lo)-t = {f_lo}, f(hi)-t = {f_hi})")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("infeasible operating point: {0}")]
    Infeasible(String),

    #[error("write-once constraint violated: {0}")]
    Constraint(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("garbage collection deadlock: {0}")]
    Deadlock(String),

    #[error("no crossover: {0}")]
    NoCrossover(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
