//! Contraction solution of the range equations.
//!
//! Rational forcing solves the coupled system
//!
//! ```text
//! q₂ = −L₁⁻¹ Π_{Q₂} f(φ₁, q₁+q₂+p, δ),   p = −ε L_ε⁻¹ Π_P f(φ₁, q₁+q₂+p, δ)
//! ```
//!
//! for a given kernel part `q₁`. Irrational forcing solves
//! `p = −sign(ε) η^{2(d−1)} L_ε⁻¹ Π_P f(φ₁, q+p, η)` for a given `q(φ₂)`.
//! Both are plain Picard iterations from zero, stopped on the weighted norm
//! of the update.
//!
//! ```
//! use resonant_waves::range_solver::{RangeOptions, RangeSolver};
//! use resonant_waves::resonance::{Decomposition, FrequencySetup};
//! use resonant_waves::{Nonlinearity, Series2D};
//!
//! let setup = FrequencySetup::case_a(1, 1, 1e-4, 1e-3).unwrap();
//! let dec = Decomposition::new(setup, 12, 12, 4).unwrap();
//! let nl = Nonlinearity::monomial(2, 1.0).unwrap();
//! let solver = RangeSolver::new(&dec, &nl, RangeOptions::default()).unwrap();
//! let sol = solver.solve_q2_p(&Series2D::cos_mode(12, 12, (0, 1), 0.5)).unwrap();
//! // φ₂-only data never leaves the kernel.
//! assert!(sol.p.is_zero() && sol.q2.is_zero());
//! ```

use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::fourier::{Nonlinearity, Series2D, SpaceWeights};
use crate::resonance::{CertifiedOperators, Decomposition, Target};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RangeOptions {
    pub weights: SpaceWeights,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest admissible `|q₁|_{H¹}`; `None` disables the check.
    pub ball: Option<f64>,
}

impl Default for RangeOptions {
    fn default() -> Self {
        RangeOptions {
            weights: SpaceWeights::new(0.1, 0.4),
            tol: 1e-12,
            max_iter: 200,
            ball: None,
        }
    }
}

/// Dimensionless size ratios of the fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundDiagnostics {
    /// `|q₂|·N²`.
    pub q2_scaled: f64,
    /// `|p|·γ/|ε|` or `|p|·γ/η^{2(d−1)}`.
    pub p_scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeSolution {
    pub q2: Series2D,
    pub p: Series2D,
    pub iterations: usize,
    /// Largest ratio of successive updates while the update exceeded `10·tol`.
    pub contraction_rate: f64,
    /// Norm of the last update.
    pub fixed_point_residual: f64,
    pub bounds: BoundDiagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquivarianceReport {
    pub theta: f64,
    /// `|p(η, q_θ) − p(η, q)(·, · − θ)|` in the solver weights.
    pub difference: f64,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sensitivity {
    pub dq2_norm: f64,
    pub dp_norm: f64,
    /// `|q₂′[h]|·N² / |h|_{H¹}`.
    pub dq2_ratio: f64,
    /// `|p′[h]|·γ / (|ε|·|h|_{H¹})`.
    pub dp_ratio: f64,
}

/// Range-equation solver bound to a certified decomposition and a nonlinearity.
#[derive(Clone, Debug)]
pub struct RangeSolver {
    ops: CertifiedOperators,
    nl: Nonlinearity,
    pub options: RangeOptions,
}

struct Picard<'a> {
    q: &'a Series2D,
    delta: f64,
    prefactor: f64,
    with_q2: bool,
}

impl RangeSolver {
    /// Certifies the decomposition; the nonlinearity gets the sign of `ε`.
    pub fn new(dec: &Decomposition, nl: &Nonlinearity, options: RangeOptions) -> Result<Self> {
        let ops = CertifiedOperators::new(dec)?;
        Ok(RangeSolver::from_operators(ops, nl, options))
    }

    pub fn from_operators(
        ops: CertifiedOperators,
        nl: &Nonlinearity,
        options: RangeOptions,
    ) -> Self {
        let nl = nl.clone().with_sign_of(ops.dec.setup.eps);
        RangeSolver { ops, nl, options }
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.ops.dec
    }

    pub fn operators(&self) -> &CertifiedOperators {
        &self.ops
    }

    /// The nonlinearity with its sign factor applied.
    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    /// `δ = |ε|^{1/(2(d−1))}`.
    pub fn delta(&self) -> f64 {
        self.ops.dec.setup.delta(self.nl.d())
    }

    fn boxed(&self, u: &Series2D) -> Series2D {
        u.rebox(self.ops.dec.m1, self.ops.dec.m2)
    }

    /// One application of the map `(q₂, p) ↦ G(q₂, p)`.
    fn step(&self, pic: &Picard, q2: &Series2D, p: &Series2D) -> Result<(Series2D, Series2D)> {
        let dec = &self.ops.dec;
        let u = &(pic.q + q2) + p;
        let f = self.nl.compose_f(&self.boxed(&u), pic.delta)?;
        let new_q2 = if pic.with_q2 {
            self.ops
                .invert_l1_on_q2(&dec.project(&f, Target::Q2).scale(-1.0))?
        } else {
            Series2D::zero(dec.m1, dec.m2)
        };
        let new_p = self
            .ops
            .invert_on_p(&dec.project(&f, Target::P).scale(-pic.prefactor))?;
        Ok((new_q2, new_p))
    }

    fn iterate(
        &self,
        pic: &Picard,
        init: Option<(&Series2D, &Series2D)>,
        p_scale: f64,
    ) -> Result<RangeSolution> {
        let dec = &self.ops.dec;
        let w = self.options.weights;
        let tol = self.options.tol;
        let (mut q2, mut p) = match init {
            Some((a, b)) => (self.boxed(a), self.boxed(b)),
            None => (
                Series2D::zero(dec.m1, dec.m2),
                Series2D::zero(dec.m1, dec.m2),
            ),
        };
        let mut prev = f64::NAN;
        let mut rate: f64 = 0.0;
        let mut growth = 0;
        for k in 1..=self.options.max_iter {
            let (nq2, np) = self.step(pic, &q2, &p)?;
            let update = (&nq2 - &q2).weighted_norm(w) + (&np - &p).weighted_norm(w);
            q2 = nq2;
            p = np;
            if !update.is_finite() {
                return Err(Error::Divergence {
                    iterations: k,
                    rate: f64::INFINITY,
                });
            }
            if prev.is_finite() && prev > 10.0 * tol && prev > 0.0 {
                let r = update / prev;
                rate = rate.max(r);
                growth = if r >= 1.0 { growth + 1 } else { 0 };
                if growth >= 5 {
                    return Err(Error::Divergence {
                        iterations: k,
                        rate: r,
                    });
                }
            }
            if update <= tol {
                let bounds = BoundDiagnostics {
                    q2_scaled: q2.weighted_norm(w) * f64::from(dec.n_cut).powi(2),
                    p_scaled: if p_scale > 0.0 {
                        p.weighted_norm(w) * dec.setup.gamma / p_scale
                    } else {
                        0.0
                    },
                };
                return Ok(RangeSolution {
                    q2,
                    p,
                    iterations: k,
                    contraction_rate: rate,
                    fixed_point_residual: update,
                    bounds,
                });
            }
            prev = update;
        }
        if rate >= 1.0 {
            Err(Error::Divergence {
                iterations: self.options.max_iter,
                rate,
            })
        } else {
            Err(Error::NotConverged {
                iterations: self.options.max_iter,
                update: prev,
            })
        }
    }

    fn check_q1(&self, q1: &Series2D) -> Result<()> {
        let dec = &self.ops.dec;
        dec.check_support(q1, Target::Q1)?;
        dec.check_weights(self.options.weights)?;
        if let Some(ball) = self.options.ball {
            let norm = dec.h1_component_norm(q1)?;
            if norm > ball {
                return Err(precondition(format!(
                    "|q1|_H1 = {norm:.4e} exceeds the admissible ball {ball:.4e}"
                )));
            }
        }
        Ok(())
    }

    fn case_a_picard<'a>(&self, q1: &'a Series2D) -> Picard<'a> {
        Picard {
            q: q1,
            delta: self.delta(),
            prefactor: self.ops.dec.setup.eps,
            with_q2: true,
        }
    }

    /// Fixed point `(q₂(q₁), p(q₁))` from `(0, 0)`.
    pub fn solve_q2_p(&self, q1: &Series2D) -> Result<RangeSolution> {
        self.check_q1(q1)?;
        self.iterate(&self.case_a_picard(q1), None, self.ops.dec.setup.eps.abs())
    }

    /// Same fixed point, warm-started from a nearby solution.
    pub fn solve_q2_p_from(&self, q1: &Series2D, init: &RangeSolution) -> Result<RangeSolution> {
        self.check_q1(q1)?;
        self.iterate(
            &self.case_a_picard(q1),
            Some((&init.q2, &init.p)),
            self.ops.dec.setup.eps.abs(),
        )
    }

    /// One Picard step of the coupled map at `(q₂, p)`.
    pub fn picard_map(
        &self,
        q1: &Series2D,
        q2: &Series2D,
        p: &Series2D,
    ) -> Result<(Series2D, Series2D)> {
        self.step(&self.case_a_picard(q1), &self.boxed(q2), &self.boxed(p))
    }

    fn eta_picard<'a>(&self, q: &'a Series2D, eta: f64) -> Picard<'a> {
        let d = self.nl.d();
        let prefactor = self.ops.dec.setup.sign() * eta.powi(2 * (d as i32 - 1));
        Picard {
            q,
            delta: eta,
            prefactor,
            with_q2: false,
        }
    }

    fn check_eta(&self, q: &Series2D, eta: f64) -> Result<()> {
        self.ops.dec.check_support(q, Target::Q)?;
        if q.iter().any(|(l, _)| l.0 != 0) {
            return Err(precondition("q must depend on φ₂ only"));
        }
        if !(eta >= 0.0) {
            return Err(precondition(format!("η = {eta} must be nonnegative")));
        }
        Ok(())
    }

    /// Fixed point `p(η, q)` of the amplitude-parameter range map.
    pub fn solve_p_eta(&self, q: &Series2D, eta: f64) -> Result<RangeSolution> {
        self.check_eta(q, eta)?;
        let scale = eta.powi(2 * (self.nl.d() as i32 - 1));
        self.iterate(&self.eta_picard(q, eta), None, scale)
    }

    pub fn solve_p_eta_from(&self, q: &Series2D, eta: f64, p0: &Series2D) -> Result<RangeSolution> {
        self.check_eta(q, eta)?;
        let zero = Series2D::zero(self.ops.dec.m1, self.ops.dec.m2);
        let scale = eta.powi(2 * (self.nl.d() as i32 - 1));
        self.iterate(&self.eta_picard(q, eta), Some((&zero, p0)), scale)
    }

    /// Compares `p(η, q(· − θ))` with the translate of `p(η, q)` along `φ₂`.
    pub fn equivariance_check(
        &self,
        q: &Series2D,
        eta: f64,
        theta: f64,
    ) -> Result<EquivarianceReport> {
        let base = self.solve_p_eta(q, eta)?;
        let shifted = self.solve_p_eta(&q.translate(0.0, theta), eta)?;
        let difference =
            (&shifted.p - &base.p.translate(0.0, theta)).weighted_norm(self.options.weights);
        let scale = 1.0 + base.p.weighted_norm(self.options.weights);
        Ok(EquivarianceReport {
            theta,
            difference,
            pass: difference <= 10.0 * self.options.tol * scale,
        })
    }

    /// Central-difference derivative of `(q₂, p)` along `h ∈ Q₁`.
    pub fn sensitivity(&self, q1: &Series2D, h: &Series2D, step: f64) -> Result<Sensitivity> {
        let dec = &self.ops.dec;
        dec.check_support(h, Target::Q1)?;
        let w = self.options.weights;
        let plus = self.solve_q2_p(&q1.axpy(step, h))?;
        let minus = self.solve_q2_p(&q1.axpy(-step, h))?;
        let dq2_norm = (&plus.q2 - &minus.q2).weighted_norm(w) / (2.0 * step);
        let dp_norm = (&plus.p - &minus.p).weighted_norm(w) / (2.0 * step);
        let hn = dec.h1_component_norm(h)?;
        let eps = dec.setup.eps.abs();
        let (dq2_ratio, dp_ratio) = if hn > 0.0 {
            (
                dq2_norm * f64::from(dec.n_cut).powi(2) / hn,
                if eps > 0.0 {
                    dp_norm * dec.setup.gamma / (eps * hn)
                } else {
                    0.0
                },
            )
        } else {
            (0.0, 0.0)
        };
        Ok(Sensitivity {
            dq2_norm,
            dp_norm,
            dq2_ratio,
            dp_ratio,
        })
    }
}

/// Solves the coupled `(Q₂)`-`(P)` system at `q₁` from zero.
pub fn solve_q2_p(
    dec: &Decomposition,
    nl: &Nonlinearity,
    q1: &Series2D,
    options: RangeOptions,
) -> Result<RangeSolution> {
    RangeSolver::new(dec, nl, options)?.solve_q2_p(q1)
}

/// Solves the amplitude-parameter range equation at `(η, q)` from zero.
pub fn solve_p_eta(
    dec: &Decomposition,
    nl: &Nonlinearity,
    q: &Series2D,
    eta: f64,
    options: RangeOptions,
) -> Result<RangeSolution> {
    RangeSolver::new(dec, nl, options)?.solve_p_eta(q, eta)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::fourier::Harmonic;
    use crate::resonance::FrequencySetup;

    fn one_plus_cos() -> Nonlinearity {
        Nonlinearity::from_tables(
            2,
            &[vec![Harmonic::new(0, 1.0, 0.0), Harmonic::new(1, 1.0, 0.0)]],
            10.0,
        )
        .unwrap()
    }

    fn case_a(eps: f64) -> Decomposition {
        Decomposition::new(FrequencySetup::case_a(1, 1, eps, 1e-3).unwrap(), 16, 16, 4).unwrap()
    }

    #[test]
    fn zero_nonlinearity_gives_zero_in_one_step() {
        let solver = RangeSolver::new(
            &case_a(1e-4),
            &Nonlinearity::zero(2),
            RangeOptions::default(),
        )
        .unwrap();
        let sol = solver
            .solve_q2_p(&Series2D::cos_mode(16, 16, (0, 1), 1.0))
            .unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.q2.is_zero() && sol.p.is_zero());
    }

    #[test]
    fn phi2_data_stays_in_the_kernel() {
        let nl = Nonlinearity::monomial(2, 1.0).unwrap();
        let solver = RangeSolver::new(&case_a(1e-4), &nl, RangeOptions::default()).unwrap();
        let sol = solver
            .solve_q2_p(&Series2D::cos_mode(16, 16, (0, 1), 0.7))
            .unwrap();
        assert!(sol.q2.is_zero() && sol.p.is_zero());
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn first_iterate_hand_value() {
        let eps = 1e-4;
        let solver =
            RangeSolver::new(&case_a(eps), &one_plus_cos(), RangeOptions::default()).unwrap();
        let q1 = Series2D::cos_mode(16, 16, (0, 1), 1.0);
        let zero = Series2D::zero(16, 16);
        let (q2, p) = solver.picard_map(&q1, &zero, &zero).unwrap();
        let hand = eps * (3.0 / 16.0) / ((1.0 + eps) * (3.0 + eps));
        assert!((p.get((1, 1)) - Complex64::new(hand, 0.0)).norm() < 1e-16);
        assert!(q2.is_zero());
        let full = solver.solve_q2_p(&q1).unwrap();
        assert!((full.p.get((1, 1)).re - hand).abs() < 10.0 * eps * eps);
        assert!(full.contraction_rate < 0.5);
    }

    #[test]
    fn fixed_point_is_unique_from_perturbed_start() {
        let solver =
            RangeSolver::new(&case_a(1e-3), &one_plus_cos(), RangeOptions::default()).unwrap();
        let mut q1 = Series2D::cos_mode(16, 16, (0, 1), 1.0);
        q1.set((-2, 1), Complex64::new(0.2, 0.1));
        q1.set((0, 3), Complex64::new(0.05, 0.0));
        let a = solver.solve_q2_p(&q1).unwrap();
        let mut init = a.clone();
        init.p = a.p.scale(1.5);
        init.p.set((3, 1), Complex64::new(1e-3, 0.0));
        let b = solver.solve_q2_p_from(&q1, &init).unwrap();
        let w = solver.options.weights;
        assert!(
            (&a.p - &b.p).weighted_norm(w) + (&a.q2 - &b.q2).weighted_norm(w)
                < 10.0 * solver.options.tol
        );
        let dec = solver.decomposition();
        assert!(dec.check_support(&a.q2, Target::Q2).is_ok());
        assert!(dec.check_support(&a.p, Target::P).is_ok());
        assert!(!a.q2.is_zero());
    }

    #[test]
    fn large_coupling_is_reported_as_divergence() {
        let setup = FrequencySetup::case_a(1, 1, 0.0731, 1e-3).unwrap();
        let dec = Decomposition::new(setup, 16, 16, 4).unwrap();
        let nl = Nonlinearity::from_tables(
            2,
            &[vec![
                Harmonic::new(0, 1.0, 0.0),
                Harmonic::new(1, 40.0, 0.0),
            ]],
            10.0,
        )
        .unwrap();
        let solver = RangeSolver::new(&dec, &nl, RangeOptions::default()).unwrap();
        let q1 = Series2D::cos_mode(16, 16, (0, 1), 3.0);
        assert!(matches!(
            solver.solve_q2_p(&q1),
            Err(Error::Divergence { .. }) | Err(Error::Domain { .. })
        ));
    }

    fn case_b() -> Decomposition {
        let setup = FrequencySetup::case_b(1.6180339887, 1e-4, 1e-3).unwrap();
        Decomposition::case_b(setup, 8, 32).unwrap()
    }

    #[test]
    fn eta_map_examples() {
        let solver = RangeSolver::new(&case_b(), &one_plus_cos(), RangeOptions::default()).unwrap();
        let q = Series2D::cos_mode(8, 32, (0, 1), 1.0);
        assert!(solver.solve_p_eta(&q, 0.0).unwrap().p.is_zero());
        let flat = RangeSolver::new(
            &case_b(),
            &Nonlinearity::monomial(2, 1.0).unwrap(),
            RangeOptions::default(),
        )
        .unwrap();
        assert!(flat.solve_p_eta(&q, 0.01).unwrap().p.is_zero());
        let mut ratios = Vec::new();
        for eta in [1e-2, 5e-3, 2.5e-3] {
            let sol = solver.solve_p_eta(&q, eta).unwrap();
            assert!(!sol.p.is_zero());
            ratios.push(sol.bounds.p_scaled);
        }
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi / lo < 2.0);
        assert!(solver
            .solve_p_eta(&Series2D::cos_mode(8, 32, (1, 1), 1.0), 0.01)
            .is_err());
    }

    #[test]
    fn equivariance_under_phi2_translation() {
        let solver = RangeSolver::new(&case_b(), &one_plus_cos(), RangeOptions::default()).unwrap();
        let mut q = Series2D::cos_mode(8, 32, (0, 1), 1.0);
        q.set((0, 3), Complex64::new(0.1, -0.04));
        for theta in [0.0, std::f64::consts::PI, 0.7] {
            let r = solver.equivariance_check(&q, 0.01, theta).unwrap();
            assert!(r.difference < 1e-10, "θ = {theta}: {}", r.difference);
        }
    }

    #[test]
    fn sensitivity_examples() {
        let q1 = Series2D::cos_mode(16, 16, (0, 1), 1.0);
        let h = Series2D::cos_mode(16, 16, (0, 2), 1.0);
        let zero = RangeSolver::new(
            &case_a(1e-3),
            &Nonlinearity::zero(2),
            RangeOptions::default(),
        )
        .unwrap();
        let s = zero.sensitivity(&q1, &h, 1e-4).unwrap();
        assert_eq!((s.dq2_norm, s.dp_norm), (0.0, 0.0));
        // Cubes of modes up to 2 stay below the cutoff N = 8.
        let wide = Decomposition::new(FrequencySetup::case_a(1, 1, 1e-3, 1e-3).unwrap(), 16, 16, 8)
            .unwrap();
        let flat = RangeSolver::new(
            &wide,
            &Nonlinearity::monomial(2, 1.0).unwrap(),
            RangeOptions::default(),
        )
        .unwrap();
        let s = flat.sensitivity(&q1, &h.scale(0.1), 1e-4).unwrap();
        assert_eq!((s.dq2_norm, s.dp_norm), (0.0, 0.0));
        let solver =
            RangeSolver::new(&case_a(1e-3), &one_plus_cos(), RangeOptions::default()).unwrap();
        let coarse = solver.sensitivity(&q1, &h, 1e-3).unwrap();
        let fine = solver.sensitivity(&q1, &h, 5e-4).unwrap();
        assert!(fine.dp_ratio > 0.0);
        assert!(
            (coarse.dp_ratio - fine.dp_ratio).abs() < 1e-3 * fine.dp_ratio,
            "{coarse:?} {fine:?}"
        );
    }
}
