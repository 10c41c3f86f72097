//! Stage-by-stage verification without a full solve.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{CaseTag, RunConfig};
use super::pipeline::SCHEMA;
use crate::bifurcation_a::{
    verify_linking_geometry, LinkingGeometry, ReducedFunctional, SearchOptions,
};
use crate::bifurcation_b::{limit_orbit, monodromy, period, ENERGY_DRIFT_MAX};
use crate::error::{Result, Stage};
use crate::fourier::Series2D;
use crate::range_solver::RangeSolver;
use crate::resonance::{certify_bounds, check_b_gamma, check_c_gamma, Decomposition};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Pass iff `value < threshold`, or `value > threshold` when `above`.
    pub threshold: f64,
    pub above: bool,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            value,
            threshold,
            above: false,
            pass: value < threshold,
        }
    }

    fn above(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            value,
            threshold,
            above: true,
            pass: value > threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub case: CaseTag,
    pub eps: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// One central-difference comparison of the reduced gradient.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradientCheck {
    pub analytic: f64,
    pub difference: f64,
    /// `|analytic − difference| / max(|analytic|, 1)`.
    pub relative: f64,
}

/// Random `Q₁` element of `H¹` size `size`.
pub fn random_q1(rf: &ReducedFunctional, rng: &mut ChaCha8Rng, size: f64) -> Series2D {
    let x = DVector::from_fn(rf.dim(), |_, _| rng.random_range(-1.0..1.0));
    let q = rf.to_series(&x);
    q.scale(size / rf.h1_norm(&q))
}

/// Directional derivatives of `Φ` at `q` against central differences with step `1e−4`.
pub fn gradient_checks(
    rf: &ReducedFunctional,
    q: &Series2D,
    directions: usize,
    seed: u64,
) -> Result<Vec<GradientCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = rf.coordinate_gradient(&rf.evaluate(q)?);
    let x = rf.to_coords(q);
    let h = 1e-4;
    (0..directions)
        .map(|_| {
            let dir = DVector::from_fn(rf.dim(), |_, _| rng.random_range(-1.0..1.0));
            let dir = &dir / dir.norm();
            let plus = rf.evaluate(&rf.to_series(&(&x + &dir * h)))?.value;
            let minus = rf.evaluate(&rf.to_series(&(&x - &dir * h)))?.value;
            let difference = (plus - minus) / (2.0 * h);
            let analytic = g.dot(&dir);
            Ok(GradientCheck {
                analytic,
                difference,
                relative: (analytic - difference).abs() / analytic.abs().max(1.0),
            })
        })
        .collect()
}

/// Runs the sieve, certification and per-stage identities for `cfg` at its `ε`.
pub fn verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let eps = cfg.eps()?;
    let mut checks = Vec::new();
    let setup = cfg.setup(eps).map_err(|e| e.at(Stage::Config))?;
    let nl = cfg.nonlinearity()?;
    match cfg.case {
        CaseTag::A => {
            let accepted = check_b_gamma(eps, cfg.gamma, cfg.sieve_lmax).accepted();
            checks.push(Check::above("sieve", f64::from(u8::from(accepted)), 0.5));
            let dec = Decomposition::new(setup, cfg.m1, cfg.m2, cfg.n_cut.unwrap_or(1))?;
            let bounds = certify_bounds(&dec);
            checks.push(Check::above(
                "min |D| on P",
                bounds.min_abs_on_p,
                bounds.threshold,
            ));
            if !bounds.pass {
                return Ok(finish(cfg, eps, checks));
            }
            let rf = ReducedFunctional::new(&dec, &nl, cfg.range_options())
                .map_err(|e| e.at(Stage::Certify))?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let q = random_q1(&rf, &mut rng, 1.0);
            let range = rf
                .solver()
                .solve_q2_p(&q)
                .map_err(|e| e.at(Stage::Verification))?;
            checks.push(Check::below(
                "range contraction rate",
                range.contraction_rate,
                0.5,
            ));
            let worst = gradient_checks(&rf, &q, 5, cfg.seed ^ 1)?
                .iter()
                .map(|c| c.relative)
                .fold(0.0, f64::max);
            checks.push(Check::below("gradient vs differences", worst, 1e-6));
            let mut homogeneity = 0.0f64;
            for size in [0.5, 1.0, 1.5] {
                let q = random_q1(&rf, &mut rng, size);
                homogeneity = homogeneity.max(rf.homogeneity_residual(&q)?.0);
            }
            checks.push(Check::below("homogeneity identity", homogeneity, 1e-10));
            if !nl.is_zero() {
                let geom =
                    LinkingGeometry::defaults(&rf, SearchOptions::default().radius, cfg.seed)?;
                let link = verify_linking_geometry(&rf, &geom);
                checks.push(Check::above(
                    "linking: min on sphere − max on boundary",
                    link.min_on_sphere - link.max_on_boundary,
                    0.0,
                ));
            }
        }
        CaseTag::B => {
            let accepted = check_c_gamma(eps, setup.omega1(), cfg.gamma, cfg.sieve_lmax).accepted();
            checks.push(Check::above("sieve", f64::from(u8::from(accepted)), 0.5));
            let dec = Decomposition::case_b(setup, cfg.m1, cfg.m2)?;
            let bounds = certify_bounds(&dec);
            checks.push(Check::above(
                "min |D| on P",
                bounds.min_abs_on_p,
                bounds.threshold,
            ));
            let orbit = limit_orbit(cfg.d, nl.mean_leading(), eps, cfg.m2)
                .map_err(|e| e.at(Stage::Orbit))?;
            checks.push(Check::below(
                "|T(E*) − 2π|",
                (period(orbit.e_star, cfg.d)? - 2.0 * PI).abs(),
                1e-12,
            ));
            checks.push(Check::below(
                "orbit energy drift",
                orbit.energy_drift,
                ENERGY_DRIFT_MAX,
            ));
            let mono = monodromy(&orbit);
            checks.push(Check::below("|tr M − 2|", (mono.trace - 2.0).abs(), 1e-6));
            checks.push(Check::above("|M − I|", mono.distance_from_identity, 1e-3));
            checks.push(Check::below("Floquet defect", mono.floquet_defect, 1e-8));
            if !bounds.pass {
                return Ok(finish(cfg, eps, checks));
            }
            let solver = RangeSolver::new(&dec, &nl, cfg.range_options())
                .map_err(|e| e.at(Stage::Certify))?;
            let delta = setup.delta(cfg.d);
            let q = orbit.qbar_in(dec.m1, dec.m2);
            let range = solver
                .solve_p_eta(&q, delta)
                .map_err(|e| e.at(Stage::Verification))?;
            checks.push(Check::below(
                "range contraction rate",
                range.contraction_rate,
                0.5,
            ));
            let eq = solver
                .equivariance_check(&q, delta, 0.7)
                .map_err(|e| e.at(Stage::Verification))?;
            let scale = 1.0 + range.p.weighted_norm(cfg.weights());
            checks.push(Check::below(
                "equivariance defect",
                eq.difference,
                10.0 * cfg.range_tol * scale,
            ));
        }
    }
    Ok(finish(cfg, eps, checks))
}

fn finish(cfg: &RunConfig, eps: f64, checks: Vec<Check>) -> VerifyReport {
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport {
        schema: SCHEMA,
        case: cfg.case,
        eps,
        checks,
        pass,
    }
}
