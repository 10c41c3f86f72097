//! Deflated Newton search for a nontrivial critical point of `Φ`.
//!
//! Newton steps use the exact Hessian, pseudo-inverted through its symmetric
//! eigendecomposition so the translation direction `∂φ₂q` is ignored. The
//! trivial root is removed by the deflation factor `M(q) = 1/|q|²_{H¹} + 1`:
//! the step is rescaled by `τ = 1/(1 − ∇M·Δ/M)` and backtracked on `M·|∇Φ|`.

use std::f64::consts::PI;

use nalgebra::{DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::functional::{ReducedEval, ReducedFunctional};
use super::linking::LinkingGeometry;
use crate::bifurcation_b::LimitOrbit;
use crate::error::{Error, Result};
use crate::fourier::Series2D;
use crate::numerics::golden_min;
use crate::range_solver::RangeSolution;
use crate::resonance::{Decomposition, Target};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchOptions {
    /// Target for the weighted norm of the Euler–Lagrange residual.
    pub tol: f64,
    pub max_newton: usize,
    /// Provisional cutoff radius; iterates stay inside `2R`, results inside `R`.
    pub radius: f64,
    /// Points of the log grid `t ∈ [0.25, 4]` for the seeds `t·e₊`.
    pub ray_seeds: usize,
    pub random_seeds: usize,
    pub rng_seed: u64,
    /// Relative eigenvalue cutoff of the Hessian pseudo-inverse.
    pub pinv_cutoff: f64,
    pub deflation_shift: f64,
    /// Smallest admissible `|Π_{Q₊}q₁*|_{H¹}`.
    pub mass_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            tol: 1e-10,
            max_newton: 60,
            radius: 4.0,
            ray_seeds: 8,
            random_seeds: 8,
            rng_seed: 7,
            pinv_cutoff: 1e-8,
            deflation_shift: 1.0,
            mass_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeedKind {
    Ray,
    Random,
    Orbit,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Seed {
    pub kind: SeedKind,
    pub q: Series2D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeedOutcome {
    Converged,
    /// Converged, but to a point without `Q₊` mass or outside `R`.
    Rejected,
    /// Left the ball of radius `2R`.
    Escaped,
    /// No acceptable line-search step, or the iteration budget ran out.
    Stalled,
    /// A range solve failed at the seed itself.
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedTrace {
    pub index: usize,
    pub kind: SeedKind,
    pub start_norm: f64,
    /// `|∇Φ|` before each Newton step.
    pub grad_norms: Vec<f64>,
    pub outcome: SeedOutcome,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NontrivialityReport {
    pub plus_norm: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub q1: Series2D,
    pub value: f64,
    pub grad_norm: f64,
    pub h1_norm: f64,
    /// `R = |q₁*|_{H¹} + 1`.
    pub radius: f64,
    /// `max Φ̃(t e₊)` over `t ∈ [0, r₂]`.
    pub minimax_estimate: f64,
    /// Weighted norm of `L_ε u + ε f(u, δ)` at `u = q₁* + q₂ + p`.
    pub equation_residual: f64,
    pub seed_index: usize,
    pub range: RangeSolution,
    pub nontriviality: NontrivialityReport,
    pub geometry: LinkingGeometry,
    pub traces: Vec<SeedTrace>,
}

/// `(θ, d)`: the `φ₂`-shift minimizing `d = |q − ref(·, · − θ)|_{H¹}`.
pub fn phase_align(q: &Series2D, reference: &Series2D, dec: &Decomposition) -> (f64, f64) {
    let dist = |theta: f64| {
        let diff = q - &reference.translate(0.0, theta);
        dec.h1_inner(&diff, &diff).max(0.0).sqrt()
    };
    let n = 64;
    let h = 2.0 * PI / n as f64;
    let best = (0..n)
        .map(|i| i as f64 * h)
        .min_by(|a, b| dist(*a).total_cmp(&dist(*b)))
        .unwrap_or(0.0);
    let theta = golden_min(dist, best - h, best + h, 1e-12);
    let theta = theta.rem_euclid(2.0 * PI);
    (theta, dist(theta))
}

/// The `Q₊` part of `q₁` must carry `H¹` mass above `tol`.
pub fn nontriviality_check(q1: &Series2D, dec: &Decomposition, tol: f64) -> NontrivialityReport {
    let plus = dec.project(q1, Target::QPlus);
    let plus_norm = dec.h1_inner(&plus, &plus).max(0.0).sqrt();
    NontrivialityReport {
        plus_norm,
        tol,
        pass: plus_norm > tol,
    }
}

/// `Π_{Q₁}` of the limit orbit, as a seed or a reference.
pub fn embed_orbit(orbit: &LimitOrbit, dec: &Decomposition) -> Series2D {
    dec.project(&orbit.qbar_in(dec.m1, dec.m2), Target::Q1)
}

/// Seeds in search order: `t·e₊` on a log grid, `ρ`-scaled random `Q₊`
/// directions, then the embedded orbit when one is supplied.
pub fn default_seeds(
    rf: &ReducedFunctional,
    opts: &SearchOptions,
    orbit: Option<&LimitOrbit>,
) -> Vec<Seed> {
    let dec = rf.decomposition();
    let e_plus = Series2D::cos_mode(dec.m1, dec.m2, (0, 1), 1.0);
    let mut seeds = Vec::new();
    let n = opts.ray_seeds;
    for i in 0..n {
        let s = if n > 1 {
            i as f64 / (n - 1) as f64
        } else {
            0.5
        };
        let t = 0.25 * 16f64.powf(s);
        seeds.push(Seed {
            kind: SeedKind::Ray,
            q: e_plus.scale(t),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed);
    let classes = rf.coordinate_classes();
    for _ in 0..opts.random_seeds {
        let x = DVector::from_fn(rf.dim(), |i, _| {
            let v: f64 = rng.random_range(-1.0..1.0);
            if classes[i] == crate::resonance::IndexClass::Plus {
                v
            } else {
                0.0
            }
        });
        let q = rf.to_series(&x);
        let norm = rf.h1_norm(&q);
        let rho: f64 = rng.random_range(0.5..2.0);
        seeds.push(Seed {
            kind: SeedKind::Random,
            q: q.scale(rho / norm),
        });
    }
    if let Some(o) = orbit {
        seeds.push(Seed {
            kind: SeedKind::Orbit,
            q: embed_orbit(o, dec),
        });
    }
    seeds
}

/// `max Φ̃(t e₊)` over `[0, r₂]`: 64 samples, then golden-section refinement.
///
/// Contraction slows near `|q| = 2R`, so range solves get ten times the budget.
pub fn minimax_estimate(rf: &ReducedFunctional, radius: f64, r2: f64) -> Result<f64> {
    let rf = &rf.with_range_budget(10 * rf.solver().options.max_iter);
    let dec = rf.decomposition();
    let e_plus = Series2D::cos_mode(dec.m1, dec.m2, (0, 1), 1.0);
    let phi = |t: f64| rf.extended(&e_plus.scale(t), radius);
    let n = 64;
    let h = r2 / n as f64;
    let values = (0..=n)
        .map(|i| phi(i as f64 * h))
        .collect::<Result<Vec<_>>>()?;
    let (k, _) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty grid");
    let lo = (k as f64 - 1.0).max(0.0) * h;
    let hi = (k as f64 + 1.0).min(n as f64) * h;
    let t = golden_min(
        |t| -phi(t).unwrap_or(f64::NEG_INFINITY),
        lo,
        hi,
        1e-10 * (1.0 + r2),
    );
    Ok(values[k].max(phi(t)?))
}

struct Newton<'a> {
    rf: &'a ReducedFunctional,
    opts: &'a SearchOptions,
    gram: DVector<f64>,
}

impl Newton<'_> {
    fn norm2(&self, x: &DVector<f64>) -> f64 {
        x.iter().zip(self.gram.iter()).map(|(v, g)| g * v * v).sum()
    }

    fn deflation(&self, x: &DVector<f64>) -> f64 {
        1.0 / self.norm2(x) + self.opts.deflation_shift
    }

    /// `−H⁺g` with eigenvalues below `cutoff·max|λ|` dropped.
    fn step(&self, q: &Series2D, eval: &ReducedEval) -> Result<DVector<f64>> {
        let g = self.rf.coordinate_gradient(eval);
        let eig = SymmetricEigen::new(self.rf.hessian(q, eval)?);
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut dx = DVector::zeros(g.len());
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam.abs() > self.opts.pinv_cutoff * top {
                let v = eig.eigenvectors.column(i);
                dx -= v * (v.dot(&g) / lam);
            }
        }
        Ok(dx)
    }

    fn run(&self, index: usize, seed: &Seed) -> (SeedTrace, Option<(Series2D, ReducedEval)>) {
        let rf = self.rf;
        let opts = self.opts;
        let mut trace = SeedTrace {
            index,
            kind: seed.kind,
            start_norm: rf.h1_norm(&seed.q),
            grad_norms: Vec::new(),
            outcome: SeedOutcome::Stalled,
            message: None,
        };
        let mut q = rf.decomposition().project(&seed.q, Target::Q1);
        let mut x = rf.to_coords(&q);
        let mut eval = match rf.evaluate(&q) {
            Ok(e) => e,
            Err(e) => {
                trace.outcome = SeedOutcome::Failed;
                trace.message = Some(e.to_string());
                return (trace, None);
            }
        };
        let ball = 2.0 * opts.radius;
        for _ in 0..opts.max_newton {
            trace.grad_norms.push(eval.grad_norm);
            if eval.grad_norm <= opts.tol {
                let nt = nontriviality_check(&q, rf.decomposition(), opts.mass_tol);
                let norm = rf.h1_norm(&q);
                if !nt.pass || norm > opts.radius {
                    trace.outcome = SeedOutcome::Rejected;
                    trace.message = Some(format!(
                        "|q|_H1 = {norm:.6e}, |Q+ part|_H1 = {:.3e}",
                        nt.plus_norm
                    ));
                    return (trace, None);
                }
                trace.outcome = SeedOutcome::Converged;
                return (trace, Some((q, eval)));
            }
            let dx = match self.step(&q, &eval) {
                Ok(dx) => dx,
                Err(e) => {
                    trace.message = Some(e.to_string());
                    return (trace, None);
                }
            };
            let m = self.deflation(&x);
            let grad_m = self.gram.component_mul(&x) * (-2.0 / self.norm2(&x).powi(2));
            let den = 1.0 - grad_m.dot(&dx) / m;
            let tau = if den > 0.1 { 1.0 / den } else { 1.0 };
            let merit = m * eval.grad_norm;
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..16 {
                let xn = &x + &dx * (alpha * tau);
                if self.norm2(&xn).sqrt() <= ball {
                    let qn = rf.to_series(&xn);
                    if let Ok(en) = rf.evaluate_from(&qn, &eval.range) {
                        if self.deflation(&xn) * en.grad_norm < (1.0 - 1e-4 * alpha) * merit {
                            accepted = Some((xn, qn, en));
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((xn, qn, en)) => {
                    x = xn;
                    q = qn;
                    eval = en;
                }
                None => {
                    let escaped = self.norm2(&(&x + &dx * tau)).sqrt() > ball;
                    trace.outcome = if escaped {
                        SeedOutcome::Escaped
                    } else {
                        SeedOutcome::Stalled
                    };
                    trace.message = Some("no acceptable step".into());
                    return (trace, None);
                }
            }
        }
        trace.grad_norms.push(eval.grad_norm);
        trace.message = Some(format!("iteration budget {} exhausted", opts.max_newton));
        (trace, None)
    }
}

/// Rescaled equation residual `|L_ε u + ε f(u, δ)|` in the functional's weights.
///
/// On `Q₁` this is `ε` times the Euler–Lagrange residual; on `Q₂ ⊕ P` it is
/// the range fixed-point defect times the operator.
pub fn equation_residual(
    rf: &ReducedFunctional,
    q1: &Series2D,
    range: &RangeSolution,
) -> Result<f64> {
    let dec = rf.decomposition();
    let u = (&(q1 + &range.q2) + &range.p).rebox(dec.m1, dec.m2);
    let f = rf
        .solver()
        .nonlinearity()
        .compose_f(&u, rf.solver().delta())?;
    let lu = rf.solver().operators().leps.apply(&u);
    Ok(lu
        .axpy(rf.eps(), &f)
        .rebox(dec.m1, dec.m2)
        .weighted_norm(rf.weights))
}

/// First nontrivial critical point by seed order.
///
/// Seeds run in parallel batches of the pool size; a batch is only started
/// when every earlier seed has failed, so the winner does not depend on timing.
pub fn find_critical_point(
    rf: &ReducedFunctional,
    seeds: &[Seed],
    opts: &SearchOptions,
) -> Result<CriticalPoint> {
    if seeds.is_empty() {
        return Err(crate::error::precondition(
            "the search needs at least one seed",
        ));
    }
    let newton = Newton {
        rf,
        opts,
        gram: rf.h1_gram(),
    };
    let batch = rayon::current_num_threads().max(1);
    let mut traces = Vec::new();
    for (b, chunk) in seeds.chunks(batch).enumerate() {
        let results: Vec<_> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, s)| newton.run(b * batch + i, s))
            .collect();
        let mut winner = None;
        for (trace, found) in results {
            traces.push(trace);
            if winner.is_none() {
                if let Some(hit) = found {
                    winner = Some((traces.len() - 1, hit));
                }
            }
        }
        if let Some((seed_index, (q1, eval))) = winner {
            let h1_norm = rf.h1_norm(&q1);
            let radius = h1_norm + 1.0;
            let geometry = LinkingGeometry::defaults(rf, radius, opts.rng_seed)?;
            let minimax = minimax_estimate(rf, radius, geometry.r2)?;
            let equation_residual = equation_residual(rf, &q1, &eval.range)?;
            return Ok(CriticalPoint {
                nontriviality: nontriviality_check(&q1, rf.decomposition(), opts.mass_tol),
                value: eval.value,
                grad_norm: eval.grad_norm,
                h1_norm,
                radius,
                minimax_estimate: minimax,
                equation_residual,
                seed_index,
                range: eval.range,
                geometry,
                traces,
                q1,
            });
        }
    }
    let summary = traces
        .iter()
        .map(|t| {
            format!(
                "seed {} ({:?}, |q|={:.3}): {:?} after {} steps, last |grad| = {:.3e}{}",
                t.index,
                t.kind,
                t.start_norm,
                t.outcome,
                t.grad_norms.len(),
                t.grad_norms.last().copied().unwrap_or(f64::NAN),
                t.message
                    .as_ref()
                    .map(|m| format!(" ({m})"))
                    .unwrap_or_default()
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    Err(Error::SearchFailure(summary))
}
