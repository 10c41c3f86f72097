//! Newton continuation of the `Q`-equation in the amplitude parameter `η`.
//!
//! Unknowns are the coordinates of `q(φ₂)` and a border multiplier `μ`:
//!
//! ```text
//! (2+ε)q̈ + Π_Q f(φ₁, q + p(η, q), η) + μ q̄′ = 0,    ⟨q − q̄, q̄′⟩ = 0
//! ```
//!
//! The phase row removes the translation kernel and `μ` keeps the system
//! square; at a solution `μ = 0` up to round-off.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::orbit::{monodromy, LimitOrbit};
use crate::error::{precondition, Error, Result};
use crate::fourier::{Axis, Nonlinearity, Series2D, SpaceWeights, Truncation};
use crate::range_solver::{RangeOptions, RangeSolver};
use crate::resonance::{Decomposition, Target};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuationOptions {
    /// Newton tolerance on the sup norm of the bordered residual.
    pub tol: f64,
    pub max_newton: usize,
    /// Ladder ratio between consecutive `η`.
    pub ratio: f64,
    /// First rung as a fraction of the smallest positive target.
    pub start_fraction: f64,
    /// Chord contraction above which the Jacobian is rebuilt by differences.
    pub chord_limit: f64,
    /// Norm in which `|q̄_η − q̄|` is reported.
    pub weights: SpaceWeights,
    pub range: RangeOptions,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions {
            tol: 1e-11,
            max_newton: 40,
            ratio: 2.0,
            start_fraction: 0.125,
            chord_limit: 0.25,
            weights: SpaceWeights::new(0.1, 0.4),
            range: RangeOptions {
                tol: 1e-14,
                max_iter: 400,
                ..RangeOptions::default()
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianKind {
    /// Analytic derivative with `p` frozen.
    FrozenChord,
    /// Forward differences through the range solve.
    Differences,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaPoint {
    pub eta: f64,
    pub q: Series2D,
    pub p: Series2D,
    pub mu: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    pub jacobian: JacobianKind,
    /// `|q̄_η − q̄|` in the reporting weights.
    pub distance: f64,
    /// `distance / η`.
    pub ratio_eta: f64,
    /// `distance / η^{2(d−1)}`.
    pub ratio_eta_power: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuationReport {
    /// `q̄` in the decomposition box.
    pub qbar: Series2D,
    /// Every `η` visited, targets included.
    pub ladder: Vec<f64>,
    /// One entry per requested target, in increasing `η`.
    pub points: Vec<EtaPoint>,
}

/// Geometric schedule through the increasing positive `targets`, ratio at most `ratio`.
pub fn eta_ladder(targets: &[f64], start_fraction: f64, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut current = match targets.iter().copied().find(|&t| t > 0.0) {
        Some(t) => t * start_fraction,
        None => return out,
    };
    out.push(current);
    for &t in targets {
        if t <= current {
            continue;
        }
        let steps = ((t / current).ln() / ratio.ln()).ceil().max(1.0) as i32;
        let r = (t / current).powf(1.0 / f64::from(steps));
        for k in 1..steps {
            out.push(current * r.powi(k));
        }
        out.push(t);
        current = t;
    }
    out
}

struct System<'a> {
    solver: RangeSolver,
    dec: &'a Decomposition,
    qbar: Series2D,
    dqbar: Series2D,
    eps: f64,
    k: i32,
}

impl System<'_> {
    fn dim(&self) -> usize {
        2 * self.k as usize + 1
    }

    fn to_series(&self, x: &DVector<f64>) -> Series2D {
        let mut q = Series2D::zero(self.dec.m1, self.dec.m2);
        q.set((0, 0), Complex64::new(x[0], 0.0));
        for j in 1..=self.k {
            let i = 2 * j as usize - 1;
            q.set((0, j), Complex64::new(x[i], x[i + 1]));
        }
        q
    }

    fn to_coords(&self, q: &Series2D) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        x[0] = q.get((0, 0)).re;
        for j in 1..=self.k {
            let c = q.get((0, j));
            let i = 2 * j as usize - 1;
            x[i] = c.re;
            x[i + 1] = c.im;
        }
        x
    }

    fn basis(&self, i: usize) -> Series2D {
        let mut h = Series2D::zero(0, self.k);
        if i == 0 {
            h.set((0, 0), Complex64::new(1.0, 0.0));
        } else {
            let j = (i as i32 + 1) / 2;
            let c = if i % 2 == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
            h.set((0, j), c);
        }
        h
    }

    /// `(2+ε)q̈ + Π_Q f(q + p, η)` in coordinates.
    fn q_residual(&self, q: &Series2D, p: &Series2D, eta: f64) -> Result<DVector<f64>> {
        let f = self.solver.nonlinearity().compose_f(&(q + p), eta)?;
        let qdd = q
            .partial(Axis::Phi2)
            .partial(Axis::Phi2)
            .scale(2.0 + self.eps);
        Ok(self.to_coords(&(&qdd + &self.dec.project(&f, Target::Q))))
    }

    /// Bordered residual; the last entry is the phase condition.
    fn residual(&self, x: &DVector<f64>, mu: f64, p: &Series2D, eta: f64) -> Result<DVector<f64>> {
        let q = self.to_series(x);
        let g = self.q_residual(&q, p, eta)? + self.to_coords(&self.dqbar) * mu;
        let mut out = DVector::zeros(self.dim() + 1);
        out.rows_mut(0, self.dim()).copy_from(&g);
        out[self.dim()] = (&q - &self.qbar).mean_product(&self.dqbar);
        Ok(out)
    }

    fn border(&self, jac: &mut DMatrix<f64>) {
        let n = self.dim();
        let col = self.to_coords(&self.dqbar);
        jac.view_mut((0, n), (n, 1)).copy_from(&col);
        // ⟨h, q̄′⟩; each basis series carries its conjugate mode.
        for i in 0..n {
            jac[(n, i)] = self
                .basis(i)
                .rebox(self.dec.m1, self.dec.m2)
                .mean_product(&self.dqbar);
        }
    }

    fn chord(&self, q: &Series2D, p: &Series2D, eta: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        // `∂_u f` must be exact up to `2K` along φ₂ for the in-box products.
        let u = (q + p).rebox(self.dec.m1, 2 * self.k);
        let df = self
            .solver
            .nonlinearity()
            .compose_df(&u, eta)?
            .filter(|l| l.0 == 0);
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            let h = self.basis(i);
            let j = f64::from((i as i32 + 1) / 2);
            let lin = df.multiply(&h, Truncation::Cap { m1: 0, m2: self.k });
            let col = self.to_coords(
                &lin.rebox(self.dec.m1, self.dec.m2)
                    .axpy(-(2.0 + self.eps) * j * j, &h),
            );
            jac.view_mut((0, i), (n, 1)).copy_from(&col);
        }
        self.border(&mut jac);
        Ok(jac)
    }

    fn differences(&self, x: &DVector<f64>, p: &Series2D, eta: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let base = self.q_residual(&self.to_series(x), p, eta)?;
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            let h = 1e-7 * (1.0 + x[i].abs());
            let mut xi = x.clone();
            xi[i] += h;
            let qi = self.to_series(&xi);
            let pi = self.solver.solve_p_eta_from(&qi, eta, p)?.p;
            let col = (self.q_residual(&qi, &pi, eta)? - &base) / h;
            jac.view_mut((0, i), (n, 1)).copy_from(&col);
        }
        self.border(&mut jac);
        Ok(jac)
    }

    fn newton(
        &self,
        x0: &DVector<f64>,
        p0: &Series2D,
        eta: f64,
        opts: &ContinuationOptions,
    ) -> Result<(DVector<f64>, Series2D, f64, usize, f64, JacobianKind)> {
        let fail = |reason: String| Error::Continuation { eta, reason };
        let mut x = x0.clone();
        let mut mu = 0.0;
        let mut p = p0.clone();
        let mut kind = JacobianKind::FrozenChord;
        let mut prev = f64::INFINITY;
        let mut jac: Option<DMatrix<f64>> = None;
        for it in 0..=opts.max_newton {
            let q = self.to_series(&x);
            p = self
                .solver
                .solve_p_eta_from(&q, eta, &p)
                .map_err(|e| fail(format!("range solve: {e}")))?
                .p;
            let r = self.residual(&x, mu, &p, eta)?;
            let norm = r.amax();
            if !norm.is_finite() {
                return Err(fail("non-finite residual".into()));
            }
            if norm <= opts.tol {
                return Ok((x, p, mu, it, norm, kind));
            }
            if it > 0 && norm > opts.chord_limit * prev && kind == JacobianKind::FrozenChord {
                kind = JacobianKind::Differences;
                jac = None;
            }
            prev = norm;
            let j = match (kind, jac.take()) {
                (JacobianKind::FrozenChord, _) => self.chord(&q, &p, eta)?,
                (JacobianKind::Differences, Some(j)) => j,
                (JacobianKind::Differences, None) => self.differences(&x, &p, eta)?,
            };
            let step = j
                .clone()
                .lu()
                .solve(&(-&r))
                .ok_or_else(|| fail("singular bordered Jacobian".into()))?;
            if kind == JacobianKind::Differences {
                jac = Some(j);
            }
            let n = self.dim();
            x += step.rows(0, n);
            mu += step[n];
        }
        Err(fail(format!(
            "no convergence after {} Newton steps (residual {prev:.3e})",
            opts.max_newton
        )))
    }
}

/// Continues `q̄` from `η = 0` through the requested targets.
///
/// `dec` must be an irrational-frequency decomposition; `q̄` is truncated to
/// its box. A target of `0` reports the refined limit orbit itself.
pub fn continue_in_eta(
    dec: &Decomposition,
    nl: &Nonlinearity,
    orbit: &LimitOrbit,
    targets: &[f64],
    opts: &ContinuationOptions,
) -> Result<ContinuationReport> {
    if dec.setup.is_case_a() {
        return Err(precondition(
            "continuation in η needs an irrational forcing frequency",
        ));
    }
    if !monodromy(orbit).nondegenerate {
        return Err(precondition("the limit orbit is degenerate"));
    }
    if nl.d() != orbit.d {
        return Err(precondition("orbit and nonlinearity disagree on d"));
    }
    if targets.iter().any(|t| !(*t >= 0.0)) {
        return Err(precondition("η targets must be nonnegative"));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();

    let solver = RangeSolver::new(dec, nl, opts.range)?;
    let qbar = orbit.qbar_in(dec.m1, dec.m2);
    let sys = System {
        dqbar: qbar.partial(Axis::Phi2),
        qbar,
        solver,
        dec,
        eps: dec.setup.eps,
        k: dec.m2,
    };
    let d = nl.d() as i32;
    let zero = Series2D::zero(dec.m1, dec.m2);
    let record = |eta: f64, x: &DVector<f64>, p: Series2D, mu, its, res, kind| {
        let q = sys.to_series(x);
        let distance = (&q - &sys.qbar).weighted_norm(opts.weights);
        let (ratio_eta, ratio_eta_power) = if eta > 0.0 {
            (distance / eta, distance / eta.powi(2 * (d - 1)))
        } else {
            (0.0, 0.0)
        };
        EtaPoint {
            eta,
            q,
            p,
            mu,
            newton_iterations: its,
            residual: res,
            jacobian: kind,
            distance,
            ratio_eta,
            ratio_eta_power,
        }
    };

    let (mut x, mut p, mu, its, res, kind) =
        sys.newton(&sys.to_coords(&sys.qbar), &zero, 0.0, opts)?;
    let mut points = Vec::new();
    let mut ladder = vec![0.0];
    if sorted.first() == Some(&0.0) {
        points.push(record(0.0, &x, p.clone(), mu, its, res, kind));
    }
    for eta in eta_ladder(&sorted, opts.start_fraction, opts.ratio) {
        let out = sys.newton(&x, &p, eta, opts)?;
        x = out.0;
        p = out.1;
        ladder.push(eta);
        if sorted.contains(&eta) {
            points.push(record(eta, &x, p.clone(), out.2, out.3, out.4, out.5));
        }
    }
    Ok(ContinuationReport {
        qbar: sys.qbar.clone(),
        ladder,
        points,
    })
}
