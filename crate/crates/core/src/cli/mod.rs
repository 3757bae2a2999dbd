//! The `womlab` command line: analytic sweeps, simulated sweeps, crossovers.

mod config;
mod sweep;

pub use sweep::{
    alpha_grid, build_curves, check_failures, cmd_analytic, cmd_crossover, cmd_simulate, parse_sweep, Curve, Row,
    SweepSpec,
};

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::SystemKind;
use crate::error::{Error, Result};
use crate::sim::{DEFAULT_BLOCKS, DEFAULT_MEASURED_WRITES, DEFAULT_PAGES_PER_BLOCK};

#[derive(Debug, Parser)]
#[command(name = "womlab", version, about = "Erasure factors of flash with and without WOM codes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the closed-form erasure factors over a storage-rate sweep.
    Analytic(SweepArgs),
    /// Simulate every sweep point and compare against the closed forms.
    Simulate(SweepArgs),
    /// Find the storage rate where two systems' erasure factors cross.
    Crossover(CrossoverArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Systems to evaluate: baseline, naive, cp.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_value = "baseline,naive,cp", value_parser = parse_system)]
    pub system: Vec<SystemKind>,
    /// Explicit storage rates.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// Storage-rate grid `start:stop:step`, inclusive.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Writes per erase for naive and CP WOM.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', default_value = "2")]
    pub t: Vec<u32>,
    /// Naive fixed rate, one value or one per `--t`.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',')]
    pub rate: Vec<f64>,
    /// CP threshold; optimized when omitted.
    #[arg(long)]
    pub gamma1: Option<f64>,
    /// Also simulate each point.
    #[arg(long)]
    pub simulate: bool,
    /// Fail if any simulated point's relative error exceeds this.
    #[arg(long, value_name = "TOL")]
    pub check: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_BLOCKS)]
    pub blocks: u64,
    #[arg(long, default_value_t = DEFAULT_PAGES_PER_BLOCK)]
    pub pages_per_block: u32,
    /// Measured random writes per simulation.
    #[arg(long, default_value_t = DEFAULT_MEASURED_WRITES)]
    pub writes: u64,
    /// Random warm-up writes (default: twice `--writes`).
    #[arg(long)]
    pub warmup: Option<u64>,
    #[arg(long, env = "WOMLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub io: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    /// The two systems to compare, e.g. `naive,baseline`.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', num_args = 1.., required = true, value_parser = parse_system)]
    pub system: Vec<SystemKind>,
    #[arg(long, default_value_t = 2)]
    pub t: u32,
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[command(flatten)]
    pub io: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// `key = value` file of default flags; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_system(s: &str) -> std::result::Result<SystemKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

const DEFAULT_ANALYTIC_SWEEP: (f64, f64, f64) = (0.05, 0.95, 0.01);

fn command() -> clap::Command {
    Cli::command().args_override_self(true)
}

/// Parses `args`, splicing in the `--config` file's entries ahead of the
/// explicit flags so the latter take precedence.
pub fn parse_args<I, T>(args: I) -> std::result::Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::from_arg_matches(&command().try_get_matches_from(&args)?)?;
    let io = match &cli.command {
        Command::Analytic(a) | Command::Simulate(a) => &a.io,
        Command::Crossover(c) => &c.io,
    };
    let Some(path) = &io.config else {
        return Ok(cli);
    };
    let extra = config::load(path).map_err(|e| command().error(clap::error::ErrorKind::Io, e))?;
    let sub = args
        .iter()
        .position(|a| matches!(a.to_str(), Some("analytic" | "simulate" | "crossover")))
        .expect("a subcommand was parsed");
    let mut merged = args[..=sub].to_vec();
    merged.extend(extra.into_iter().map(OsString::from));
    merged.extend_from_slice(&args[sub + 1..]);
    Cli::from_arg_matches(&command().try_get_matches_from(&merged)?)
}

impl SweepArgs {
    pub fn to_spec(&self, simulate: bool) -> Result<SweepSpec> {
        let mut alphas = self.alpha.clone();
        if let Some(s) = &self.sweep {
            let (a, b, c) = parse_sweep(s)?;
            alphas.extend(alpha_grid(a, b, c)?);
        }
        if alphas.is_empty() {
            if simulate {
                return Err(Error::Config("simulation needs --alpha or --sweep".into()));
            }
            let (a, b, c) = DEFAULT_ANALYTIC_SWEEP;
            alphas = alpha_grid(a, b, c)?;
        }
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        let curves = build_curves(&self.system, &self.t, &self.rate, self.gamma1)?;
        Ok(SweepSpec {
            alphas,
            curves,
            simulate,
            blocks: self.blocks,
            pages_per_block: self.pages_per_block,
            measured_writes: self.writes,
            warmup_writes: self.warmup,
            seed: self.seed,
        })
    }
}

impl CrossoverArgs {
    pub fn curves(&self) -> Result<(Curve, Curve)> {
        let [a, b] = self.system[..] else {
            return Err(Error::Config(format!(
                "crossover needs exactly two systems, got {}",
                self.system.len()
            )));
        };
        let rate: Vec<f64> = self.rate.into_iter().collect();
        let one = |s: SystemKind| -> Result<Curve> {
            Ok(build_curves(&[s], &[self.t], &rate, self.gamma1)?[0])
        };
        Ok((one(a)?, one(b)?))
    }
}

fn open_output(io: &OutputArgs) -> Result<Box<dyn Write>> {
    Ok(match &io.output {
        Some(p) => Box::new(
            File::create(p).map_err(|e| Error::Config(format!("creating {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    })
}

fn io_error(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("writing output: {e}"))
}

/// Writes `rows` as CSV (with the fixed header) or a JSON array.
pub fn write_rows<W: Write>(out: W, rows: &[Row], format: Format) -> Result<()> {
    match format {
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows).map_err(io_error)?;
            writeln!(out).map_err(io_error)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if rows.is_empty() {
                w.write_record(CSV_HEADER).map_err(io_error)?;
            }
            for r in rows {
                w.serialize(r).map_err(io_error)?;
            }
            w.flush().map_err(io_error)
        }
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "alpha",
    "system",
    "t",
    "R",
    "ef_analytic",
    "ef_sim",
    "rel_err",
    "gamma1",
    "gamma2",
    "alpha_prime",
    "beta_prime",
    "feasible",
    "seed",
];

#[derive(Serialize)]
struct CrossoverOut {
    system_a: SystemKind,
    system_b: SystemKind,
    alpha: f64,
}

/// What a successful invocation produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// `--check` found this many points out of tolerance.
    CheckFailed(usize),
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Analytic(args) | Command::Simulate(args) => {
            let simulate = args.simulate || matches!(cli.command, Command::Simulate(_));
            if args.check.is_some() && !simulate {
                return Err(Error::Config("--check needs --simulate".into()));
            }
            let spec = args.to_spec(simulate)?;
            let rows = if simulate { cmd_simulate(&spec)? } else { cmd_analytic(&spec)? };
            write_rows(open_output(&args.io)?, &rows, args.io.format)?;
            match args.check {
                Some(tol) => {
                    let bad = check_failures(&rows, tol);
                    for r in &bad {
                        eprintln!(
                            "check failed: {} t={} alpha={} rel_err={:.4}",
                            r.system,
                            r.t,
                            r.alpha,
                            r.rel_err.unwrap_or(f64::NAN)
                        );
                    }
                    Ok(if bad.is_empty() { Outcome::Ok } else { Outcome::CheckFailed(bad.len()) })
                }
                None => Ok(Outcome::Ok),
            }
        }
        Command::Crossover(args) => {
            let (a, b) = args.curves()?;
            let alpha = cmd_crossover(&a, &b)?;
            let mut out = open_output(&args.io)?;
            match args.io.format {
                Format::Csv => writeln!(out, "{alpha:.4}").map_err(io_error)?,
                Format::Json => {
                    let rec = CrossoverOut {
                        system_a: a.system,
                        system_b: b.system,
                        alpha,
                    };
                    serde_json::to_writer(&mut out, &rec).map_err(io_error)?;
                    writeln!(out).map_err(io_error)?;
                }
            }
            Ok(Outcome::Ok)
        }
    }
}

/// Full program: parse, run, report; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match parse_args(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::CheckFailed(n)) => {
            eprintln!("womlab: {n} point(s) outside tolerance");
            1
        }
        Err(e) => {
            eprintln!("womlab: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_flags_override_earlier() {
        let cli = parse_args(["womlab", "analytic", "--system=baseline", "--system", "cp", "--t=3", "--t=2"]).unwrap();
        let Command::Analytic(a) = cli.command else { panic!() };
        assert_eq!(a.system, vec![SystemKind::CpWom]);
        assert_eq!(a.t, vec![2]);
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "system = naive\nrate = 0.7\nseed = 11\npages_per_block = 64\n").unwrap();
        let cli = parse_args([
            "womlab",
            "analytic",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "5",
        ])
        .unwrap();
        let Command::Analytic(a) = cli.command else { panic!() };
        assert_eq!(a.system, vec![SystemKind::NaiveWom]);
        assert_eq!(a.rate, vec![0.7]);
        assert_eq!(a.pages_per_block, 64);
        assert_eq!(a.seed, 5);
    }

    #[test]
    fn csv_header_is_stable() {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[], Format::Csv).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER.join(","));
        let spec = SweepSpec::new(vec![0.5], vec![Curve::baseline()]);
        let mut buf = Vec::new();
        write_rows(&mut buf, &cmd_analytic(&spec).unwrap(), Format::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 13);
        assert_eq!(fields[1], "baseline");
        assert_eq!(fields[3], "");
        assert_eq!(fields[11], "true");
    }

    #[test]
    fn crossover_needs_two_systems() {
        let cli = parse_args(["womlab", "crossover", "--system", "naive"]).unwrap();
        assert!(matches!(run(&cli), Err(Error::Config(_))));
    }
}
