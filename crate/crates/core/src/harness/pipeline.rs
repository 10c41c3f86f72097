//! End-to-end solves, from configuration to an assembled and checked `u`.

use serde::Serialize;

use super::config::{CaseTag, RunConfig};
use crate::bifurcation_a::{
    default_seeds, find_critical_point, verify_linking_geometry, LinkingReport, ReducedFunctional,
    SearchOptions, SeedTrace,
};
use crate::bifurcation_b::{
    continue_in_eta, limit_orbit, monodromy, ContinuationOptions, MonodromyReport,
};
use crate::error::{Error, Result, Stage};
use crate::fourier::{Nonlinearity, Series2D, SpaceWeights};
use crate::range_solver::BoundDiagnostics;
use crate::resonance::{
    certify_bounds, check_b_gamma, check_c_gamma, BoundReport, Decomposition, DiagonalOperator,
    FrequencySetup,
};

/// Version tag of every JSON report.
pub const SCHEMA: &str = "resonant-waves/1";

/// Relative mass threshold: both masses must exceed `QP_RELATIVE_TOL · δ`.
pub const QP_RELATIVE_TOL: f64 = 1e-4;

/// Weighted norm of `ω₁²∂²₁u + 2ω₁ω₂∂₁∂₂u + (ω₂²−1)∂²₂u + f(φ₁, u)` for the
/// unscaled `u`, with `f` evaluated on the full product box.
pub fn pde_residual(
    u: &Series2D,
    setup: &FrequencySetup,
    nl: &Nonlinearity,
    w: SpaceWeights,
) -> Result<f64> {
    let fu = nl.unscaled(u)?;
    let (m1, m2) = (fu.m1().max(u.m1()), fu.m2().max(u.m2()));
    let lu = DiagonalOperator::leps(setup.omega1(), setup.eps)
        .apply(u)
        .rebox(m1, m2);
    Ok((&lu + &fu.rebox(m1, m2)).weighted_norm(w))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub sigma: f64,
    pub s: f64,
    pub residual: f64,
}

/// `(σ, s)`, `(σ/2, s+1)`, `(σ/4, s+2)`.
pub fn weight_ladder(w: SpaceWeights) -> [SpaceWeights; 3] {
    [
        w,
        SpaceWeights::new(w.sigma / 2.0, w.s + 1.0),
        SpaceWeights::new(w.sigma / 4.0, w.s + 2.0),
    ]
}

pub fn residual_ladder(
    u: &Series2D,
    setup: &FrequencySetup,
    nl: &Nonlinearity,
    w: SpaceWeights,
) -> Result<Vec<ResidualEntry>> {
    weight_ladder(w)
        .iter()
        .map(|&v| {
            Ok(ResidualEntry {
                sigma: v.sigma,
                s: v.s,
                residual: pde_residual(u, setup, nl, v)?,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Masses {
    /// `Σ_{l₁≠0} |û_l|`.
    pub m1: f64,
    /// `Σ_{l₂≠0} |û_l|`.
    pub m2: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Passes iff `u` depends on both angles: `m₁ > tol` and `m₂ > tol`.
pub fn quasiperiodicity_check(u: &Series2D, tol: f64) -> Masses {
    let (mut m1, mut m2) = (0.0, 0.0);
    for (l, c) in u.iter() {
        if l.0 != 0 {
            m1 += c.norm();
        }
        if l.1 != 0 {
            m2 += c.norm();
        }
    }
    Masses {
        m1,
        m2,
        tol,
        pass: m1 > tol && m2 > tol,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseADiagnostics {
    pub bounds: BoundReport,
    pub value: f64,
    pub grad_norm: f64,
    pub h1_norm: f64,
    pub radius: f64,
    pub minimax_estimate: f64,
    /// Rescaled residual `|L_ε w + ε f(w, δ)|`.
    pub equation_residual: f64,
    pub seed_index: usize,
    pub orbit_seed: bool,
    pub traces: Vec<SeedTrace>,
    pub plus_norm: f64,
    pub range_iterations: usize,
    pub contraction_rate: f64,
    pub range_bounds: BoundDiagnostics,
    pub linking: LinkingReport,
    /// `|p|_{σ/4, s+2} · γω₁³ / (m²|ε|)`.
    pub p_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseBDiagnostics {
    pub bounds: BoundReport,
    pub e_star: f64,
    pub orbit_scale: f64,
    pub dt_de: f64,
    pub energy_drift: f64,
    pub decay_rate: f64,
    pub monodromy: MonodromyReport,
    pub ladder: Vec<f64>,
    pub newton_iterations: usize,
    pub continuation_residual: f64,
    pub mu: f64,
    /// `|q̄_η − q̄|` at `η = δ`.
    pub orbit_shift: f64,
    /// `|p| · γ / η^{2(d−1)}`.
    pub p_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "case", rename_all = "lowercase")]
pub enum Diagnostics {
    A(CaseADiagnostics),
    B(CaseBDiagnostics),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionReport {
    pub schema: &'static str,
    pub case: CaseTag,
    pub d: u32,
    pub eps: f64,
    pub delta: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub gamma: f64,
    pub weights: SpaceWeights,
    /// Unscaled solution.
    pub u: Series2D,
    pub residuals: Vec<ResidualEntry>,
    pub residual_target: f64,
    /// `|u|` in the base weights.
    pub amplitude: f64,
    /// `|u − δq̄|` in the base weights.
    pub correction: f64,
    /// `correction / (δ·|ε|/γ)`, times `m²/ω₁³` in case A.
    pub correction_ratio: f64,
    pub masses: Masses,
    pub pass: bool,
    pub diagnostics: Diagnostics,
}

impl SolutionReport {
    /// Residual in the base weights.
    pub fn residual(&self) -> f64 {
        self.residuals[0].residual
    }
}

pub fn solve(cfg: &RunConfig) -> Result<SolutionReport> {
    match cfg.case {
        CaseTag::A => solve_case_a(cfg),
        CaseTag::B => solve_case_b(cfg),
    }
}

struct Assembled {
    setup: FrequencySetup,
    nl: Nonlinearity,
    delta: f64,
    u: Series2D,
    qbar: Series2D,
    scale: f64,
}

fn finish(cfg: &RunConfig, a: Assembled, diagnostics: Diagnostics) -> Result<SolutionReport> {
    let w = cfg.weights();
    let residuals = residual_ladder(&a.u, &a.setup, &a.nl, w).map_err(|e| e.at(Stage::Assembly))?;
    let correction = (&a.u - &a.qbar.scale(a.delta)).weighted_norm(w);
    let masses = quasiperiodicity_check(&a.u, QP_RELATIVE_TOL * a.delta);
    let residual_target = cfg.residual_target();
    Ok(SolutionReport {
        schema: SCHEMA,
        case: cfg.case,
        d: cfg.d,
        eps: a.setup.eps,
        delta: a.delta,
        omega1: a.setup.omega1(),
        omega2: a.setup.omega2(),
        gamma: a.setup.gamma,
        weights: w,
        amplitude: a.u.weighted_norm(w),
        correction,
        correction_ratio: correction / (a.delta * a.scale),
        pass: residuals[0].residual < residual_target && masses.pass,
        residuals,
        residual_target,
        masses,
        u: a.u,
        diagnostics,
    })
}

fn sieve_error(what: &str, witness: Option<(i32, i32)>) -> Error {
    let at = witness
        .map(|l| format!(" (witness ({}, {}))", l.0, l.1))
        .unwrap_or_default();
    Error::SieveRejected(format!("{what}{at}")).at(Stage::Sieve)
}

/// Rational forcing frequency: variational critical point on `Q₁`.
pub fn solve_case_a(cfg: &RunConfig) -> Result<SolutionReport> {
    let eps = cfg.eps()?;
    let verdict = check_b_gamma(eps, cfg.gamma, cfg.sieve_lmax);
    if !verdict.accepted() {
        return Err(sieve_error(
            &format!("ε = {eps} fails the divisor condition"),
            verdict.witness(),
        ));
    }
    let setup = cfg.setup(eps).map_err(|e| e.at(Stage::Config))?;
    let nl = cfg.nonlinearity()?;
    let d = cfg.d;
    let delta = setup.delta(d);
    let n_cut = cfg.n_cut.unwrap_or(1);
    let dec = Decomposition::new(setup, cfg.m1, cfg.m2, n_cut).map_err(|e| e.at(Stage::Config))?;
    dec.check_weights(cfg.weights())
        .map_err(|e| e.at(Stage::Config))?;
    let bounds = certify_bounds(&dec);
    let rf =
        ReducedFunctional::new(&dec, &nl, cfg.range_options()).map_err(|e| e.at(Stage::Certify))?;

    let opts = SearchOptions {
        tol: cfg.search_tol,
        rng_seed: cfg.seed,
        ..SearchOptions::default()
    };
    let orbit = if nl.depends_on_phi1() || nl.is_zero() {
        None
    } else {
        limit_orbit(d, nl.mean_leading(), eps, cfg.m2).ok()
    };
    let seeds = default_seeds(&rf, &opts, orbit.as_ref());
    let cp = find_critical_point(&rf, &seeds, &opts).map_err(|e| e.at(Stage::Search))?;
    let linking = verify_linking_geometry(&rf, &cp.geometry);

    let kernel = &cp.q1 + &cp.range.q2;
    let u = (&kernel + &cp.range.p).scale(delta);
    let omega1 = setup.omega1();
    let m2 = f64::from(setup.m()).powi(2);
    let p_ratio =
        cp.range.p.weighted_norm(weight_ladder(cfg.weights())[2]) * setup.gamma * omega1.powi(3)
            / (m2 * eps.abs());
    let diagnostics = Diagnostics::A(CaseADiagnostics {
        bounds,
        value: cp.value,
        grad_norm: cp.grad_norm,
        h1_norm: cp.h1_norm,
        radius: cp.radius,
        minimax_estimate: cp.minimax_estimate,
        equation_residual: cp.equation_residual,
        seed_index: cp.seed_index,
        orbit_seed: orbit.is_some(),
        traces: cp.traces,
        plus_norm: cp.nontriviality.plus_norm,
        range_iterations: cp.range.iterations,
        contraction_rate: cp.range.contraction_rate,
        range_bounds: cp.range.bounds,
        linking,
        p_ratio,
    });
    let scale = m2 * eps.abs() / (setup.gamma * omega1.powi(3));
    finish(
        cfg,
        Assembled {
            setup,
            nl,
            delta,
            u,
            qbar: kernel,
            scale,
        },
        diagnostics,
    )
}

/// Irrational forcing frequency: continuation from the limit orbit to `η = δ`.
pub fn solve_case_b(cfg: &RunConfig) -> Result<SolutionReport> {
    let eps = cfg.eps()?;
    let omega1 = cfg.omega1_value();
    let verdict = check_c_gamma(eps, omega1, cfg.gamma, cfg.sieve_lmax);
    if !verdict.accepted() {
        return Err(sieve_error(
            &format!("(ε, ω₁) = ({eps}, {omega1}) fails the divisor condition"),
            verdict.witness(),
        ));
    }
    let setup = cfg.setup(eps).map_err(|e| e.at(Stage::Config))?;
    let nl = cfg.nonlinearity()?;
    let d = cfg.d;
    let delta = setup.delta(d);
    let dec = Decomposition::case_b(setup, cfg.m1, cfg.m2).map_err(|e| e.at(Stage::Config))?;
    let bounds = certify_bounds(&dec);
    if !bounds.pass {
        return Err(Error::Uncertified {
            mode: bounds.argmin,
            value: bounds.min_abs_on_p,
            threshold: bounds.threshold,
        }
        .at(Stage::Certify));
    }

    let orbit = limit_orbit(d, nl.mean_leading(), eps, cfg.m2).map_err(|e| e.at(Stage::Orbit))?;
    let mono = monodromy(&orbit);
    if !mono.nondegenerate {
        return Err(Error::Precondition(format!(
            "degenerate limit orbit: |tr M − 2| = {:.3e}, |M − I| = {:.3e}",
            (mono.trace - 2.0).abs(),
            mono.distance_from_identity
        ))
        .at(Stage::Monodromy));
    }
    let opts = ContinuationOptions {
        tol: cfg.newton_tol,
        weights: cfg.weights(),
        range: cfg.range_options(),
        ..ContinuationOptions::default()
    };
    let report = continue_in_eta(&dec, &nl, &orbit, &[delta], &opts)
        .map_err(|e| e.at(Stage::Continuation))?;
    let point = report
        .points
        .iter()
        .find(|p| p.eta == delta)
        .ok_or_else(|| Error::Continuation {
            eta: delta,
            reason: "target missing from the report".into(),
        })?
        .clone();

    let u = (&point.q + &point.p).scale(delta);
    let diagnostics = Diagnostics::B(CaseBDiagnostics {
        bounds,
        e_star: orbit.e_star,
        orbit_scale: orbit.scale,
        dt_de: orbit.dt_de,
        energy_drift: orbit.energy_drift,
        decay_rate: orbit.decay_rate,
        monodromy: mono,
        ladder: report.ladder,
        newton_iterations: point.newton_iterations,
        continuation_residual: point.residual,
        mu: point.mu,
        orbit_shift: point.distance,
        p_ratio: point.p.weighted_norm(cfg.weights()) * setup.gamma
            / delta.powi(2 * (d as i32 - 1)),
    });
    let scale = eps.abs() / setup.gamma;
    finish(
        cfg,
        Assembled {
            setup,
            nl,
            delta,
            u,
            qbar: report.qbar,
            scale,
        },
        diagnostics,
    )
}
