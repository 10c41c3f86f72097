//! Obstruction probe for even-power forcing `f = a(φ₁) u^D`.
//!
//! After rescaling, solutions solve `L_ε u + |ε| a u^D = 0`. Write
//! `u = ρ + w + p` with `ρ` the mean, `w(φ₂)` the zero-mean kernel part and
//! `p` the range part. For fixed `ρ` the pair `(w, p)` solves
//!
//! ```text
//! ŵ_j = sign(ε) ĝ_j / ((2+ε) j²),   p = −|ε| L_ε⁻¹ Π_P g,   g = a (ρ + w + p)^D
//! ```
//!
//! and the remaining scalar equation is `h(ρ) = ⟨g⟩ = 0`. Near `ρ = 0`
//! `h(ρ) ≈ ⟨a⟩ ρ^D` keeps one sign for even `D`, so no small solution exists.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::fourier::{Series2D, SpaceWeights, Truncation};
use crate::resonance::{CertifiedOperators, Decomposition, FrequencySetup, Target};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeOptions {
    pub m1: i32,
    pub m2: i32,
    /// Picard stops when the ℓ¹ update drops below `tol·ρ^D`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            m1: 8,
            m2: 16,
            tol: 1e-13,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub eps: f64,
    pub rho: f64,
    pub h: f64,
    /// `h(ρ) / ρ^D`.
    pub ratio: f64,
    pub w_norm: f64,
    pub p_norm: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub power: u32,
    pub mean_a: f64,
    pub rows: Vec<ProbeRow>,
    /// Smallest `h(ρ)/(⟨a⟩ρ^D)` over the grid.
    pub min_relative: f64,
    pub sign_change: bool,
    /// `|h(ρ)| ≥ |⟨a⟩|ρ^D/2` at every nonzero grid point.
    pub root_free: bool,
}

struct Inner<'a> {
    ops: CertifiedOperators,
    a: &'a Series2D,
    power: u32,
    opts: &'a ProbeOptions,
}

impl Inner<'_> {
    fn g(&self, u: &Series2D) -> Series2D {
        let (m1, m2) = (self.opts.m1, self.opts.m2);
        let reach = self.a.extent().0;
        let up = u.power(self.power, Truncation::Cap { m1: m1 + reach, m2 });
        self.a
            .multiply(&up, Truncation::Cap { m1, m2 })
            .rebox(m1, m2)
    }

    fn solve(&self, rho: f64) -> Result<(f64, Series2D, Series2D, usize)> {
        let dec = &self.ops.dec;
        let (eps, sign) = (dec.setup.eps, dec.setup.sign());
        let (m1, m2) = (self.opts.m1, self.opts.m2);
        let base = Series2D::constant(m1, m2, rho);
        let mut w = Series2D::zero(m1, m2);
        let mut p = Series2D::zero(m1, m2);
        let scale = rho.powi(self.power as i32);
        for it in 1..=self.opts.max_iter {
            let g = self.g(&(&(&base + &w) + &p));
            let new_w = dec
                .project(&g, Target::QPlus)
                .map_canonical(|l, c| c * (sign / ((2.0 + eps) * f64::from(l.1).powi(2))));
            let new_p = self
                .ops
                .invert_on_p(&dec.project(&g, Target::P).scale(-eps.abs()))?;
            let update = (&new_w - &w).l1_norm() + (&new_p - &p).l1_norm();
            w = new_w;
            p = new_p;
            if !update.is_finite() {
                return Err(Error::Divergence {
                    iterations: it,
                    rate: f64::INFINITY,
                });
            }
            if update <= self.opts.tol * scale {
                let h = self.g(&(&(&base + &w) + &p)).mean();
                return Ok((h, w, p, it));
            }
        }
        Err(Error::NotConverged {
            iterations: self.opts.max_iter,
            update: f64::NAN,
        })
    }
}

/// Evaluates `h(ρ)` on `rho_grid` for each `ε` in `eps_list`.
///
/// `a` must depend on `φ₁` only; `setup` supplies `ω₁` and `γ`, its `ε` is replaced.
pub fn nonexistence_probe(
    a: &Series2D,
    power: u32,
    setup: FrequencySetup,
    rho_grid: &[f64],
    eps_list: &[f64],
    opts: &ProbeOptions,
) -> Result<ProbeReport> {
    if power < 2 || power % 2 == 1 {
        return Err(precondition(format!(
            "the obstruction needs an even power D ≥ 2, got {power}"
        )));
    }
    if setup.is_case_a() {
        return Err(precondition(
            "the probe needs an irrational forcing frequency",
        ));
    }
    if a.iter().any(|(l, _)| l.1 != 0) {
        return Err(precondition("the coefficient must depend on φ₁ only"));
    }
    let mean_a = a.mean();
    if mean_a.abs() <= 1e-14 * (1.0 + a.l1_norm()) {
        return Err(precondition("the coefficient has zero mean"));
    }
    let mut rows = Vec::new();
    for &eps in eps_list {
        let dec = Decomposition::case_b(setup.with_eps(eps)?, opts.m1, opts.m2)?;
        let inner = Inner {
            ops: CertifiedOperators::new(&dec)?,
            a,
            power,
            opts,
        };
        for &rho in rho_grid {
            let (h, w, p, iterations) = inner.solve(rho)?;
            let rd = rho.powi(power as i32);
            rows.push(ProbeRow {
                eps,
                rho,
                h,
                ratio: if rho != 0.0 { h / rd } else { 0.0 },
                w_norm: w.weighted_norm(SpaceWeights::L1),
                p_norm: p.weighted_norm(SpaceWeights::L1),
                iterations,
            });
        }
    }
    let nonzero = rows.iter().filter(|r| r.rho != 0.0);
    let min_relative = nonzero
        .clone()
        .map(|r| r.ratio / mean_a)
        .fold(f64::INFINITY, f64::min);
    let sign_change = nonzero.clone().any(|r| r.h * mean_a <= 0.0);
    let root_free = nonzero
        .clone()
        .all(|r| r.h.abs() >= 0.5 * mean_a.abs() * r.rho.powi(power as i32));
    Ok(ProbeReport {
        power,
        mean_a,
        rows,
        min_relative,
        sign_change,
        root_free,
    })
}

/// `a(φ₁)` from cosine amplitudes: `a = Σ_k c_k cos(kφ₁)`.
pub fn cosine_coefficient(amplitudes: &[f64], m1: i32) -> Series2D {
    let mut a = Series2D::zero(m1, 0);
    for (k, &c) in amplitudes.iter().enumerate() {
        let v = if k == 0 { c } else { 0.5 * c };
        a.set((k as i32, 0), Complex64::new(v, 0.0));
    }
    a
}
