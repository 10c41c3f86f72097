//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 usage or config error, 2 sieve, certification or
//! verification failure, 3 solver failure.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use super::config::RunConfig;
use super::pipeline::{solve, SolutionReport};
use super::sweeps::{probe, scaling_scan};
use super::verify::verify;
use crate::error::{Error, Result};
use crate::resonance::{sieve_interval, SieveCase};

#[derive(Debug, Parser)]
#[command(
    name = "resonant-waves",
    version,
    about = "Quasi-periodic solutions of the completely resonant forced wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CaseArg {
    A,
    B,
}

#[derive(Debug, clap::Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scans an ε interval with the divisor sieve and writes a CSV.
    Sieve {
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long, default_value_t = 1e-3)]
        gamma: f64,
        /// `lo,hi`
        #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
        interval: (f64, f64),
        #[arg(long, default_value_t = 50)]
        count: usize,
        /// Forcing frequency, case b.
        #[arg(long, default_value_t = 1.618_033_988_749_895)]
        omega1: f64,
        /// `ω₁ = n/m`, case a.
        #[arg(long, default_value_t = 1)]
        n: i32,
        #[arg(long, default_value_t = 1)]
        m: i32,
        #[arg(long, default_value_t = 256)]
        lmax: i32,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solves at the configured ε and writes the report, `u` and the residual ladder.
    Solve(ConfigArgs),
    /// Solves over `eps_grid` and fits the scaling exponents.
    Scan(ConfigArgs),
    /// Evaluates the even-power obstruction.
    Probe(ConfigArgs),
    /// Checks each stage without a full solve.
    Verify(ConfigArgs),
}

fn parse_interval(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo:?}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi:?}: {e}"))?;
    if !(lo < hi) {
        return Err(format!("empty interval [{lo}, {hi}]"));
    }
    Ok((lo, hi))
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn cli_run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli.command) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(args: &ConfigArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_path(&args.config)
        .map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// Columns `l1,l2,re,im`, one row per conjugate pair.
fn write_series_csv(path: &Path, report: &SolutionReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["l1", "l2", "re", "im"])?;
    for (l, c) in report.u.canonical() {
        w.serialize((l.0, l.1, c.re, c.im))?;
    }
    w.flush()?;
    Ok(())
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Sieve {
            case,
            gamma,
            interval,
            count,
            omega1,
            n,
            m,
            lmax,
            out,
        } => {
            let case = match case {
                CaseArg::A => SieveCase::A {
                    omega1: f64::from(n) / f64::from(m),
                },
                CaseArg::B => SieveCase::B { omega1 },
            };
            let scan = sieve_interval(case, interval, gamma, lmax, count)?;
            match out {
                Some(path) => scan.write_csv(File::create(path)?)?,
                None => scan.write_csv(io::stdout().lock())?,
            }
            eprintln!(
                "{} of {} points accepted",
                scan.accepted().count(),
                scan.points.len()
            );
            Ok(true)
        }
        Command::Solve(args) => {
            let cfg = load(&args)?;
            let report = solve(&cfg)?;
            write_json(&cfg.output_path("solution.json"), &report)?;
            write_series_csv(&cfg.output_path("u.csv"), &report)?;
            let mut w = csv::Writer::from_path(cfg.output_path("residuals.csv"))?;
            for r in &report.residuals {
                w.serialize(r)?;
            }
            w.flush()?;
            println!(
                "residual {:.3e} (target {:.0e}), |u| = {:.6e}, masses ({:.3e}, {:.3e}): {}",
                report.residual(),
                report.residual_target,
                report.amplitude,
                report.masses.m1,
                report.masses.m2,
                if report.pass { "pass" } else { "FAIL" }
            );
            Ok(report.pass)
        }
        Command::Scan(args) => {
            let cfg = load(&args)?;
            let report = scaling_scan(&cfg)?;
            write_json(&cfg.output_path("scan.json"), &report)?;
            report.write_csv(File::create(cfg.output_path("scan.csv"))?)?;
            println!(
                "amplitude slope {:.4} (expected {}), correction slope {:.4} (expected {}): {}",
                report.amplitude_slope,
                report.expected_amplitude,
                report.correction_slope,
                report.expected_correction,
                if report.pass { "pass" } else { "FAIL" }
            );
            Ok(report.pass)
        }
        Command::Probe(args) => {
            let cfg = load(&args)?;
            let summary = probe(&cfg)?;
            write_json(&cfg.output_path("probe.json"), &summary)?;
            summary.write_csv(File::create(cfg.output_path("probe.csv"))?)?;
            println!(
                "min h/(⟨a⟩ρ^D) = {:.4}, sign change: {}: {}",
                summary.report.min_relative,
                summary.report.sign_change,
                if summary.pass { "pass" } else { "FAIL" }
            );
            Ok(summary.pass)
        }
        Command::Verify(args) => {
            let cfg = load(&args)?;
            let report = verify(&cfg)?;
            write_json(&cfg.output_path("verify.json"), &report)?;
            for c in &report.checks {
                let rel = if c.above { ">" } else { "<" };
                println!(
                    "{:<44} {:>12.4e} {rel} {:<10.3e} {}",
                    c.name,
                    c.value,
                    c.threshold,
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
            Ok(report.pass)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_parsing() {
        assert_eq!(parse_interval("-1e-3,1e-3").unwrap(), (-1e-3, 1e-3));
        assert!(parse_interval("1,0").is_err());
        assert!(parse_interval("1").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(
            cli_run([
                "resonant-waves",
                "solve",
                "--config",
                "/nonexistent/missing.toml"
            ]),
            1
        );
        assert_eq!(cli_run(["resonant-waves", "frobnicate"]), 1);
        assert_eq!(
            cli_run([
                "resonant-waves",
                "sieve",
                "--case",
                "c",
                "--interval",
                "0,1"
            ]),
            1
        );
    }
}
