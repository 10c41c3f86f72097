//! Parameter sweeps: scaling exponents over an `ε` grid and the even-power probe.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{CaseTag, RunConfig};
use super::pipeline::{solve, SCHEMA};
use crate::bifurcation_b::{nonexistence_probe, ProbeOptions, ProbeReport};
use crate::error::{precondition, Error, Result, Stage};
use crate::numerics::linear_fit;
use crate::resonance::{check_b_gamma, check_c_gamma};

/// Tolerance on the fitted amplitude slope.
pub const AMPLITUDE_SLOPE_TOL: f64 = 0.05;
/// Tolerance on the fitted correction slope.
pub const CORRECTION_SLOPE_TOL: f64 = 0.1;

/// `(1/(2(d−1)), (2d−1)/(2(d−1)))`: amplitude `δ` and correction `δ|ε|`.
pub fn expected_exponents(d: u32) -> (f64, f64) {
    let k = 2.0 * (f64::from(d) - 1.0);
    (1.0 / k, (2.0 * f64::from(d) - 1.0) / k)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub eps: f64,
    pub delta: f64,
    pub accepted: bool,
    pub amplitude: f64,
    pub correction: f64,
    pub residual: f64,
    pub correction_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub schema: &'static str,
    pub case: CaseTag,
    pub d: u32,
    pub rows: Vec<ScanRow>,
    pub amplitude_slope: f64,
    pub correction_slope: f64,
    pub expected_amplitude: f64,
    pub expected_correction: f64,
    pub amplitude_pass: bool,
    pub correction_pass: bool,
    pub pass: bool,
}

impl ScanReport {
    /// Columns `eps,delta,accepted,amplitude,correction,residual,correction_ratio`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn accepted(cfg: &RunConfig, eps: f64) -> bool {
    match cfg.case {
        CaseTag::A => check_b_gamma(eps, cfg.gamma, cfg.sieve_lmax).accepted(),
        CaseTag::B => check_c_gamma(eps, cfg.omega1_value(), cfg.gamma, cfg.sieve_lmax).accepted(),
    }
}

/// Solves at every accepted `ε` of `eps_grid` and fits log-log slopes.
///
/// Points run on the rayon pool; rows keep the grid order. Needs at least
/// four accepted points spanning 1.5 decades.
pub fn scaling_scan(cfg: &RunConfig) -> Result<ScanReport> {
    let keep: Vec<f64> = cfg
        .eps_grid
        .iter()
        .copied()
        .filter(|&e| accepted(cfg, e))
        .collect();
    let (lo, hi) = keep.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| {
        (lo.min(e.abs()), hi.max(e.abs()))
    });
    if keep.len() < 4 || (hi / lo).log10() < 1.5 {
        return Err(precondition(format!(
            "scan needs ≥ 4 accepted ε spanning ≥ 1.5 decades; got {} of {}",
            keep.len(),
            cfg.eps_grid.len()
        ))
        .at(Stage::Sieve));
    }
    let solved: Vec<Result<ScanRow>> = cfg
        .eps_grid
        .par_iter()
        .map(|&eps| {
            if !accepted(cfg, eps) {
                return Ok(ScanRow {
                    eps,
                    delta: cfg.setup(eps).map(|s| s.delta(cfg.d)).unwrap_or(f64::NAN),
                    accepted: false,
                    amplitude: f64::NAN,
                    correction: f64::NAN,
                    residual: f64::NAN,
                    correction_ratio: f64::NAN,
                });
            }
            let r = solve(&cfg.with_eps(eps))?;
            Ok(ScanRow {
                eps,
                delta: r.delta,
                accepted: true,
                amplitude: r.amplitude,
                correction: r.correction,
                residual: r.residual(),
                correction_ratio: r.correction_ratio,
            })
        })
        .collect();
    let rows = solved.into_iter().collect::<Result<Vec<_>>>()?;

    let used: Vec<&ScanRow> = rows.iter().filter(|r| r.accepted).collect();
    let x: Vec<f64> = used.iter().map(|r| r.eps.abs().ln()).collect();
    let amp: Vec<f64> = used.iter().map(|r| r.amplitude.ln()).collect();
    let corr: Vec<f64> = used.iter().map(|r| r.correction.ln()).collect();
    let (amplitude_slope, _) = linear_fit(&x, &amp);
    let (correction_slope, _) = linear_fit(&x, &corr);
    let (expected_amplitude, expected_correction) = expected_exponents(cfg.d);
    let amplitude_pass = (amplitude_slope - expected_amplitude).abs() <= AMPLITUDE_SLOPE_TOL;
    let correction_pass = (correction_slope - expected_correction).abs() <= CORRECTION_SLOPE_TOL;
    Ok(ScanReport {
        schema: SCHEMA,
        case: cfg.case,
        d: cfg.d,
        rows,
        amplitude_slope,
        correction_slope,
        expected_amplitude,
        expected_correction,
        amplitude_pass,
        correction_pass,
        pass: amplitude_pass && correction_pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSummary {
    pub schema: &'static str,
    pub eps: Vec<f64>,
    pub report: ProbeReport,
    /// No root and no sign change of `h` on the grid.
    pub pass: bool,
}

impl ProbeSummary {
    /// Columns `eps,rho,h,ratio,w_norm,p_norm,iterations`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.report.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Default probe grid: nine log-spaced radii on `[1e−3, 1e−1]`.
pub fn default_rho_grid() -> Vec<f64> {
    (0..9)
        .map(|i| 10f64.powf(-3.0 + 0.25 * f64::from(i)))
        .collect()
}

/// Even-power obstruction `h(ρ)` at the accepted `probe_eps` (or `eps_grid`, or `eps`).
pub fn probe(cfg: &RunConfig) -> Result<ProbeSummary> {
    if cfg.case != CaseTag::B {
        return Err(Error::Config(
            "the probe runs on an irrational forcing frequency (case = \"b\")".into(),
        ));
    }
    let pool: Vec<f64> = if !cfg.probe_eps.is_empty() {
        cfg.probe_eps.clone()
    } else if !cfg.eps_grid.is_empty() {
        cfg.eps_grid.clone()
    } else {
        vec![cfg.eps()?]
    };
    let eps: Vec<f64> = pool
        .into_iter()
        .filter(|&e| accepted(cfg, e))
        .take(3)
        .collect();
    if eps.is_empty() {
        return Err(Error::SieveRejected("no probe ε passes the sieve".into()).at(Stage::Sieve));
    }
    let rho = if cfg.probe_rho.is_empty() {
        default_rho_grid()
    } else {
        cfg.probe_rho.clone()
    };
    let a = cfg.probe_coefficient()?;
    let setup = cfg.setup(eps[0]).map_err(|e| e.at(Stage::Config))?;
    let report = nonexistence_probe(
        &a,
        cfg.probe_power,
        setup,
        &rho,
        &eps,
        &ProbeOptions::default(),
    )
    .map_err(|e| e.at(Stage::Verification))?;
    Ok(ProbeSummary {
        schema: SCHEMA,
        pass: report.root_free && !report.sign_change,
        eps,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(expected_exponents(2), (0.5, 1.5));
        assert_eq!(expected_exponents(3), (0.25, 1.25));
    }

    #[test]
    fn rho_grid_spans_two_decades() {
        let g = default_rho_grid();
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[8] - 1e-1).abs() < 1e-15);
    }
}
