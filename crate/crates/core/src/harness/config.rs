//! Run configuration, a flat TOML file.
//!
//! ```toml
//! case = "b"                 # "a": ω₁ = n/m, "b": irrational ω₁
//! d = 2
//! omega1 = 1.6180339887      # case b; case a sets n and m instead
//! eps = 1e-4
//! gamma = 1e-3
//! # a_k(φ₁) rows [k, h, c, s] adding c·cos(hφ₁) + s·sin(hφ₁) to a_k
//! coefficients = [[3, 0, 1.0, 0.0], [3, 1, 1.0, 0.0]]
//! m1 = 6
//! m2 = 32
//! sigma = 0.1
//! s = 0.4
//! ```
//!
//! Every other key has a default; see [`RunConfig`]. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{coefficient_series, Harmonic, Nonlinearity, Series2D, SpaceWeights};
use crate::range_solver::RangeOptions;
use crate::resonance::{FrequencySetup, EPS0_DEFAULT, GAMMA_DEFAULT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    A,
    B,
}

fn default_radius() -> f64 {
    10.0
}
fn default_gamma() -> f64 {
    GAMMA_DEFAULT
}
fn default_eps0() -> f64 {
    EPS0_DEFAULT
}
fn default_regularity() -> f64 {
    f64::INFINITY
}
fn default_lmax() -> i32 {
    256
}
fn default_range_tol() -> f64 {
    1e-14
}
fn default_range_max_iter() -> usize {
    400
}
fn default_newton_tol() -> f64 {
    1e-11
}
fn default_search_tol() -> f64 {
    1e-10
}
fn default_seed() -> u64 {
    7
}
fn default_probe_power() -> u32 {
    2
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: CaseTag,
    pub d: u32,
    /// Analyticity radius of `f` in `u`.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Rows `(k, h, c, s)`: `a_k += c·cos(hφ₁) + s·sin(hφ₁)`.
    #[serde(default)]
    pub coefficients: Vec<(u32, i32, f64, f64)>,
    pub n: Option<i32>,
    pub m: Option<i32>,
    pub omega1: Option<f64>,
    pub eps: Option<f64>,
    /// `ε` values of a scaling scan.
    #[serde(default)]
    pub eps_grid: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_eps0")]
    pub eps0: f64,
    pub m1: i32,
    pub m2: i32,
    /// Galerkin cutoff `N`, case A only.
    pub n_cut: Option<i32>,
    pub sigma: f64,
    pub s: f64,
    /// Sobolev regularity of the coefficients; trigonometric tables are analytic.
    #[serde(default = "default_regularity")]
    pub coefficient_regularity: f64,
    #[serde(default = "default_lmax")]
    pub sieve_lmax: i32,
    #[serde(default = "default_range_tol")]
    pub range_tol: f64,
    #[serde(default = "default_range_max_iter")]
    pub range_max_iter: usize,
    /// Continuation Newton tolerance, case B.
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    /// Critical-point tolerance, case A.
    #[serde(default = "default_search_tol")]
    pub search_tol: f64,
    /// Pass threshold on the base-weight residual; defaults per case.
    pub residual_target: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_probe_power")]
    pub probe_power: u32,
    /// Rows `(h, c, s)` of the probe coefficient; defaults to the leading table.
    #[serde(default)]
    pub probe_coefficients: Vec<(i32, f64, f64)>,
    #[serde(default)]
    pub probe_eps: Vec<f64>,
    #[serde(default)]
    pub probe_rho: Vec<f64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        RunConfig::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-checks every precondition that does not depend on `ε` being accepted.
    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(bad(format!("d = {} must be at least 2", self.d)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0 / 6.0) {
            return Err(bad(format!("gamma = {} must lie in (0, 1/6)", self.gamma)));
        }
        if self.m1 < 1 || self.m2 < 1 || self.sieve_lmax < 1 {
            return Err(bad("m1, m2 and sieve_lmax must be positive"));
        }
        if !(self.sigma >= 0.0) || !(self.s >= 0.0) {
            return Err(bad("sigma and s must be nonnegative"));
        }
        if !(self.range_tol > 0.0 && self.newton_tol > 0.0 && self.search_tol > 0.0) {
            return Err(bad("tolerances must be positive"));
        }
        for &(k, h, c, s) in &self.coefficients {
            if k < 2 * self.d - 1 || h < 0 || !c.is_finite() || !s.is_finite() {
                return Err(bad(format!("bad coefficient row [{k}, {h}, {c}, {s}]")));
            }
        }
        match self.case {
            CaseTag::A => {
                let (n, m) = (
                    self.n.ok_or_else(|| bad("case a needs n"))?,
                    self.m.ok_or_else(|| bad("case a needs m"))?,
                );
                // Coprimality and positivity, independent of ε.
                FrequencySetup::case_a_with(n, m, 0.0, self.gamma, self.eps0)
                    .map_err(|e| bad(e.to_string()))?;
                let n_cut = self.n_cut.ok_or_else(|| bad("case a needs n_cut"))?;
                if n_cut < 1 {
                    return Err(bad("n_cut must be positive"));
                }
                if self.sigma * f64::from(n_cut) > 1.0 + 1e-12 {
                    return Err(bad(format!(
                        "sigma·N = {} exceeds 1",
                        self.sigma * f64::from(n_cut)
                    )));
                }
                if !(self.s > 0.0 && self.s < 0.5) {
                    return Err(bad(format!("case a needs 0 < s < 1/2, got {}", self.s)));
                }
            }
            CaseTag::B => {
                let w = self.omega1.ok_or_else(|| bad("case b needs omega1"))?;
                FrequencySetup::case_b_with(w, 0.0, self.gamma, self.eps0)
                    .map_err(|e| bad(e.to_string()))?;
                if !(self.s > 0.0 && self.s < self.coefficient_regularity - 0.5) {
                    return Err(bad(format!(
                        "case b needs 0 < s < coefficient_regularity − 1/2, got s = {}",
                        self.s
                    )));
                }
            }
        }
        self.nonlinearity()?;
        Ok(())
    }

    /// `ε` of a single solve.
    pub fn eps(&self) -> Result<f64> {
        self.eps.ok_or_else(|| bad("eps is not set"))
    }

    /// Same configuration at another `ε`.
    pub fn with_eps(&self, eps: f64) -> RunConfig {
        RunConfig {
            eps: Some(eps),
            ..self.clone()
        }
    }

    /// `f` from the coefficient rows; no rows, or a vanishing table, give `f ≡ 0`.
    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        let lead = 2 * self.d - 1;
        let top = self.coefficients.iter().map(|r| r.0).max().unwrap_or(lead);
        let tables: Vec<Vec<Harmonic>> = (lead..=top)
            .map(|k| {
                self.coefficients
                    .iter()
                    .filter(|r| r.0 == k)
                    .map(|r| Harmonic::new(r.1, r.2, r.3))
                    .collect()
            })
            .collect();
        let all_zero = tables
            .iter()
            .all(|t| t.iter().all(|h| h.cos_amp == 0.0 && h.sin_amp == 0.0));
        if all_zero {
            return Ok(Nonlinearity::zero(self.d));
        }
        Nonlinearity::from_tables(self.d, &tables, self.radius).map_err(|e| bad(e.to_string()))
    }

    /// Probe coefficient `a(φ₁)`.
    pub fn probe_coefficient(&self) -> Result<Series2D> {
        let rows: Vec<Harmonic> = if self.probe_coefficients.is_empty() {
            let lead = 2 * self.d - 1;
            self.coefficients
                .iter()
                .filter(|r| r.0 == lead)
                .map(|r| Harmonic::new(r.1, r.2, r.3))
                .collect()
        } else {
            self.probe_coefficients
                .iter()
                .map(|r| Harmonic::new(r.0, r.1, r.2))
                .collect()
        };
        coefficient_series(&rows)
    }

    pub fn weights(&self) -> SpaceWeights {
        SpaceWeights::new(self.sigma, self.s)
    }

    pub fn range_options(&self) -> RangeOptions {
        RangeOptions {
            weights: self.weights(),
            tol: self.range_tol,
            max_iter: self.range_max_iter,
            ball: None,
        }
    }

    /// `ω₁` as a number: `n/m` or the literal.
    pub fn omega1_value(&self) -> f64 {
        match self.case {
            CaseTag::A => f64::from(self.n.unwrap_or(1)) / f64::from(self.m.unwrap_or(1)),
            CaseTag::B => self.omega1.unwrap_or(f64::NAN),
        }
    }

    pub fn setup(&self, eps: f64) -> Result<FrequencySetup> {
        match self.case {
            CaseTag::A => FrequencySetup::case_a_with(
                self.n.unwrap_or(1),
                self.m.unwrap_or(1),
                eps,
                self.gamma,
                self.eps0,
            ),
            CaseTag::B => {
                FrequencySetup::case_b_with(self.omega1_value(), eps, self.gamma, self.eps0)
            }
        }
    }

    /// `1e-7` in case A, `1e-8` in case B unless set.
    pub fn residual_target(&self) -> f64 {
        self.residual_target.unwrap_or(match self.case {
            CaseTag::A => 1e-7,
            CaseTag::B => 1e-8,
        })
    }

    /// `<output_dir>/<stem>`.
    pub fn output_path(&self, stem: &str) -> PathBuf {
        self.output_dir.join(stem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE_B: &str = r#"
case = "b"
d = 2
omega1 = 1.6180339887
eps = 1e-4
coefficients = [[3, 0, 1.0, 0.0], [3, 1, 1.0, 0.0]]
m1 = 6
m2 = 32
sigma = 0.1
s = 0.4
"#;

    #[test]
    fn parses_and_builds() {
        let c = RunConfig::from_toml(CASE_B).unwrap();
        assert_eq!(c.case, CaseTag::B);
        assert_eq!(c.gamma, GAMMA_DEFAULT);
        let nl = c.nonlinearity().unwrap();
        assert_eq!(nl.mean_leading(), 1.0);
        assert!((nl.coefficient(3).evaluate(0.0, 0.0) - 2.0).abs() < 1e-15);
        assert_eq!(c.probe_coefficient().unwrap(), nl.coefficient(3));
    }

    #[test]
    fn rejections() {
        for (from, to) in [
            ("s = 0.4", "s = 0.0"),
            ("d = 2", "d = 1"),
            ("omega1 = 1.6180339887", "omega1 = 2.5"),
            ("m2 = 32", "m2 = 32\nbogus = 1"),
            ("[3, 1, 1.0, 0.0]", "[2, 1, 1.0, 0.0]"),
        ] {
            let text = CASE_B.replace(from, to);
            assert!(
                matches!(RunConfig::from_toml(&text), Err(Error::Config(_))),
                "{to}"
            );
        }
        let a = CASE_B
            .replace("case = \"b\"", "case = \"a\"\nn = 2\nm = 4\nn_cut = 4")
            .replace("omega1 = 1.6180339887\n", "");
        assert!(RunConfig::from_toml(&a).is_err(), "not coprime");
        let a = a
            .replace("n = 2\nm = 4", "n = 1\nm = 1")
            .replace("sigma = 0.1", "sigma = 0.5");
        assert!(RunConfig::from_toml(&a).is_err(), "σN > 1");
        assert!(RunConfig::from_toml(&a.replace("sigma = 0.5", "sigma = 0.25")).is_ok());
    }

    #[test]
    fn zero_table_is_the_zero_nonlinearity() {
        let c = RunConfig::from_toml(
            &CASE_B.replace("coefficients = [[3, 0, 1.0, 0.0], [3, 1, 1.0, 0.0]]", ""),
        )
        .unwrap();
        assert!(c.nonlinearity().unwrap().is_zero());
    }
}
