//! Reduced action functional on `Q₁`.
//!
//! With `u = q₁ + q₂(q₁) + p(q₁)` from the range solver,
//!
//! ```text
//! Φ(q₁) = 𝒜(q₁) − ∫F(q₁, 0) + ℛ(q₁)
//! 𝒜(q)  = −½∫ L₁q · q
//! ℛ(q₁) = ∫F(q₁, 0) − ∫F(u, δ) + ½∫f(u, δ)(q₂ + p)
//! ```
//!
//! where `f`, `F` carry the factor `sign(ε)`. Then `ε·Φ(q₁)` equals the full
//! action `Ψ_ε(u)` and `dΦ(q₁)[k] = −∫ Π_{Q₁}[L₁q₁ + f(u, δ)] k`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::{Mode, Nonlinearity, Series2D, SpaceWeights, Truncation};
use crate::range_solver::{RangeOptions, RangeSolution, RangeSolver};
use crate::resonance::{Decomposition, IndexClass, Target};

const FOUR_PI2: f64 = 4.0 * PI * PI;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedEval {
    pub value: f64,
    /// `𝒜(q₁)`.
    pub quadratic: f64,
    /// `∫F(q₁, 0) = sign(ε)∫a_{2d−1} q₁^{2d}/(2d)`.
    pub potential: f64,
    /// `ℛ(q₁)`.
    pub remainder: f64,
    /// Euler–Lagrange residual `Π_{Q₁}[L₁q₁ + f(u, δ)]`; the `L²` gradient is its negative.
    pub gradient: Series2D,
    /// `|gradient|` in the functional's weights.
    pub grad_norm: f64,
    /// Rayleigh constants of `𝒜` on `Q₁ ∩ Q₊` and `Q₁ ∩ Q₋`.
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    pub range: RangeSolution,
}

/// `λ(x)`: `1` on `x ≤ 1`, `0` on `x ≥ 4`, quintic smoothstep between.
pub fn cutoff(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    if x >= 4.0 {
        return 0.0;
    }
    let t = (x - 1.0) / 3.0;
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// `λ′(x)`; `|λ′| ≤ 5/8`.
pub fn cutoff_derivative(x: f64) -> f64 {
    if x <= 1.0 || x >= 4.0 {
        return 0.0;
    }
    let t = (x - 1.0) / 3.0;
    -30.0 * t * t * (1.0 - t) * (1.0 - t) / 3.0
}

/// `Φ` bound to a certified decomposition and its range solver.
#[derive(Clone, Debug)]
pub struct ReducedFunctional {
    solver: RangeSolver,
    modes: Vec<Mode>,
    pub weights: SpaceWeights,
}

impl ReducedFunctional {
    pub fn new(dec: &Decomposition, nl: &Nonlinearity, options: RangeOptions) -> Result<Self> {
        Ok(ReducedFunctional::from_solver(RangeSolver::new(
            dec, nl, options,
        )?))
    }

    pub fn from_solver(solver: RangeSolver) -> Self {
        let modes = solver.decomposition().indices(Target::Q1);
        let weights = solver.options.weights;
        ReducedFunctional {
            solver,
            modes,
            weights,
        }
    }

    /// Copy whose range solves may run `max_iter` Picard steps.
    pub fn with_range_budget(&self, max_iter: usize) -> Self {
        let mut out = self.clone();
        out.solver.options.max_iter = max_iter;
        out
    }

    pub fn decomposition(&self) -> &Decomposition {
        self.solver.decomposition()
    }

    pub fn solver(&self) -> &RangeSolver {
        &self.solver
    }

    pub fn eps(&self) -> f64 {
        self.decomposition().setup.eps
    }

    /// Canonical `Q₁` indices; `(0, 0)` comes first.
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Real coordinates: `q₀`, then `(Re, Im)` for each remaining canonical mode.
    pub fn dim(&self) -> usize {
        2 * self.modes.len() - 1
    }

    pub fn to_series(&self, x: &DVector<f64>) -> Series2D {
        let dec = self.decomposition();
        let mut q = Series2D::zero(dec.m1, dec.m2);
        q.set((0, 0), Complex64::new(x[0], 0.0));
        for (k, &l) in self.modes.iter().enumerate().skip(1) {
            q.set(l, Complex64::new(x[2 * k - 1], x[2 * k]));
        }
        q
    }

    pub fn to_coords(&self, q: &Series2D) -> DVector<f64> {
        let mut x = DVector::zeros(self.dim());
        x[0] = q.get((0, 0)).re;
        for (k, &l) in self.modes.iter().enumerate().skip(1) {
            let c = q.get(l);
            x[2 * k - 1] = c.re;
            x[2 * k] = c.im;
        }
        x
    }

    /// Diagonal of the `H¹` Gram matrix in coordinates.
    pub fn h1_gram(&self) -> DVector<f64> {
        let dec = self.decomposition();
        let mut g = DVector::zeros(self.dim());
        g[0] = 1.0;
        for (k, &l) in self.modes.iter().enumerate().skip(1) {
            let w = 2.0 * dec.h1_weight(l).expect("Q1 mode");
            g[2 * k - 1] = w;
            g[2 * k] = w;
        }
        g
    }

    pub fn h1_norm(&self, q: &Series2D) -> f64 {
        self.decomposition().h1_inner(q, q).sqrt()
    }

    /// `𝒜(q) = −2π² Σ_l d_l |q̂_l|²`.
    pub fn quadratic(&self, q: &Series2D) -> f64 {
        let l1 = &self.solver.operators().l1;
        -0.5 * FOUR_PI2
            * q.iter()
                .map(|(l, c)| l1.eigenvalue(l) * c.norm_sqr())
                .sum::<f64>()
    }

    /// `∫F(q, 0)`.
    pub fn potential(&self, q: &Series2D) -> Result<f64> {
        Ok(FOUR_PI2 * self.solver.nonlinearity().compose_big_f(q, 0.0)?.mean())
    }

    /// `Γ(q) = 𝒜(q) − ∫F(q, 0)`.
    pub fn gamma(&self, q: &Series2D) -> Result<f64> {
        Ok(self.quadratic(q) - self.potential(q)?)
    }

    pub fn evaluate(&self, q1: &Series2D) -> Result<ReducedEval> {
        let range = self.solver.solve_q2_p(q1)?;
        self.assemble(q1, range)
    }

    /// Same as [`ReducedFunctional::evaluate`], with the range solve warm-started.
    pub fn evaluate_from(&self, q1: &Series2D, warm: &RangeSolution) -> Result<ReducedEval> {
        let range = self.solver.solve_q2_p_from(q1, warm)?;
        self.assemble(q1, range)
    }

    fn assemble(&self, q1: &Series2D, range: RangeSolution) -> Result<ReducedEval> {
        let dec = self.decomposition();
        let nl = self.solver.nonlinearity();
        let delta = self.solver.delta();
        let corr = &range.q2 + &range.p;
        let u = q1 + &corr;
        let f = nl.compose_f(&u, delta)?;
        let big_f = FOUR_PI2 * nl.compose_big_f(&u, delta)?.mean();
        let potential = self.potential(q1)?;
        let quadratic = self.quadratic(q1);
        let remainder = potential - big_f + 0.5 * FOUR_PI2 * f.mean_product(&corr);
        let gradient = dec.project(&(&self.solver.operators().apply_l1(q1) + &f), Target::Q1);
        let (alpha_plus, alpha_minus) = self.rayleigh_constants();
        Ok(ReducedEval {
            alpha_plus,
            alpha_minus,
            value: quadratic - potential + remainder,
            quadratic,
            potential,
            remainder,
            grad_norm: gradient.weighted_norm(self.weights),
            gradient,
            range,
        })
    }

    /// `∂Φ/∂x` in coordinates.
    pub fn coordinate_gradient(&self, eval: &ReducedEval) -> DVector<f64> {
        let mut g = self.to_coords(&eval.gradient) * (-2.0 * FOUR_PI2);
        g[0] *= 0.5;
        g
    }

    /// Coordinate Hessian with `q₂`, `p` frozen: `−∫(L₁k_j + f_u(u)k_j)k_i`.
    pub fn frozen_hessian(&self, q1: &Series2D, eval: &ReducedEval) -> Result<DMatrix<f64>> {
        let dec = self.decomposition();
        let n = self.dim();
        let u = (&(q1 + &eval.range.q2) + &eval.range.p).rebox(2 * dec.m1, 2 * dec.m2);
        let df = self
            .solver
            .nonlinearity()
            .compose_df(&u, self.solver.delta())?;
        let ops = self.solver.operators();
        let mut h = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let k = self.to_series(&e);
            let lin = df.multiply(
                &k,
                Truncation::Cap {
                    m1: dec.m1,
                    m2: dec.m2,
                },
            );
            let col = dec.project(&(&ops.apply_l1(&k) + &lin), Target::Q1);
            let mut c = self.to_coords(&col) * (-2.0 * FOUR_PI2);
            c[0] *= 0.5;
            h.set_column(j, &c);
        }
        Ok(0.5 * (&h + h.transpose()))
    }

    /// Exact coordinate Hessian, with the tangent `(q₂′[k], p′[k])` of the range map.
    ///
    /// The tangent solves the linear fixed point
    /// `a = −L₁⁻¹Π_{Q₂}[g·(k+a+b)]`, `b = −εL_ε⁻¹Π_P[g·(k+a+b)]` with `g = f_u(u)`,
    /// which contracts at the rate of the range map itself.
    pub fn hessian(&self, q1: &Series2D, eval: &ReducedEval) -> Result<DMatrix<f64>> {
        let dec = self.decomposition();
        let ops = self.solver.operators();
        let n = self.dim();
        let cap = Truncation::Cap {
            m1: dec.m1,
            m2: dec.m2,
        };
        let u = (&(q1 + &eval.range.q2) + &eval.range.p).rebox(2 * dec.m1, 2 * dec.m2);
        let g = self
            .solver
            .nonlinearity()
            .compose_df(&u, self.solver.delta())?;
        let (tol, max_iter) = (self.solver.options.tol, self.solver.options.max_iter);
        let mut h = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let k = self.to_series(&e);
            let mut a = Series2D::zero(dec.m1, dec.m2);
            let mut b = Series2D::zero(dec.m1, dec.m2);
            let mut converged = false;
            for _ in 0..max_iter {
                let lin = g.multiply(&(&(&k + &a) + &b), cap);
                let na = ops.invert_l1_on_q2(&dec.project(&lin, Target::Q2).scale(-1.0))?;
                let nb = ops.invert_on_p(&dec.project(&lin, Target::P).scale(-self.eps()))?;
                let update =
                    (&na - &a).weighted_norm(self.weights) + (&nb - &b).weighted_norm(self.weights);
                a = na;
                b = nb;
                if update <= tol {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::NotConverged {
                    iterations: max_iter,
                    update: f64::NAN,
                });
            }
            let lin = g.multiply(&(&(&k + &a) + &b), cap);
            let col = dec.project(&(&ops.apply_l1(&k) + &lin), Target::Q1);
            let mut c = self.to_coords(&col) * (-2.0 * FOUR_PI2);
            c[0] *= 0.5;
            h.set_column(j, &c);
        }
        Ok(0.5 * (&h + h.transpose()))
    }

    /// Resonance class of each coordinate.
    pub fn coordinate_classes(&self) -> Vec<IndexClass> {
        let dec = self.decomposition();
        let mut out = vec![IndexClass::Zero];
        for &l in self.modes.iter().skip(1) {
            let c = dec.classify(l);
            out.push(c);
            out.push(c);
        }
        out
    }

    /// `Φ̃(q₁) = Γ(q₁) + λ(|q₁|²_{H¹}/R²)·ℛ(q₁)`; no range solve when `|q₁|_{H¹} ≥ 2R`.
    pub fn extended(&self, q1: &Series2D, radius: f64) -> Result<f64> {
        let lam = cutoff(self.decomposition().h1_inner(q1, q1) / (radius * radius));
        if lam == 0.0 {
            return self.gamma(q1);
        }
        let e = self.evaluate(q1)?;
        Ok(e.quadratic - e.potential + lam * e.remainder)
    }

    /// `Ψ_ε(u) = −½∫L_ε u·u − ε∫F(u, δ)`, evaluated directly.
    pub fn action(&self, u: &Series2D) -> Result<f64> {
        let leps = &self.solver.operators().leps;
        let quad = 0.5
            * FOUR_PI2
            * u.iter()
                .map(|(l, c)| leps.eigenvalue(l) * c.norm_sqr())
                .sum::<f64>();
        let big_f = FOUR_PI2
            * self
                .solver
                .nonlinearity()
                .compose_big_f(u, self.solver.delta())?
                .mean();
        Ok(quad - self.eps() * big_f)
    }

    /// `|Ψ_ε(u) − ε Φ(q₁)|` and the same divided by `|Ψ_ε(u)|`.
    ///
    /// The identity holds at the exact range fixed point, so the solve is
    /// tightened to `1e−14` first.
    pub fn homogeneity_residual(&self, q1: &Series2D) -> Result<(f64, f64)> {
        let mut tight = self.with_range_budget(self.solver.options.max_iter.max(500));
        tight.solver.options.tol = tight.solver.options.tol.min(1e-14);
        let e = tight.evaluate(q1)?;
        let u = &(q1 + &e.range.q2) + &e.range.p;
        let psi = self.action(&u)?;
        let abs = (psi - self.eps() * e.value).abs();
        Ok((abs, if psi != 0.0 { abs / psi.abs() } else { abs }))
    }

    /// `(α₊, α₋)`: twice the smallest `|𝒜(q)|/|q|²_{H¹}` over single `Q₊` and `Q₋` modes of `Q₁`.
    pub fn rayleigh_constants(&self) -> (f64, f64) {
        let dec = self.decomposition();
        let l1 = &self.solver.operators().l1;
        let mut plus = f64::INFINITY;
        let mut minus = f64::INFINITY;
        for &l in self.modes.iter().skip(1) {
            let r = -FOUR_PI2 * l1.eigenvalue(l) / dec.h1_weight(l).expect("Q1 mode");
            match dec.classify(l) {
                IndexClass::Plus => plus = plus.min(r),
                IndexClass::Minus => minus = minus.min(-r),
                _ => {}
            }
        }
        (plus, minus)
    }
}
