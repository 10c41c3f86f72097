//! Sampled verification of the saddle geometry of `Φ̃`.
//!
//! With `e₊ = cos φ₂` and the cylinder
//!
//! ```text
//! W⁻ = { w + t e₊ : w ∈ Q₁ ∩ (Q₀ ⊕ Q₋), |w|_{H¹} ≤ r₁, 0 ≤ t ≤ r₂ }
//! ```
//!
//! the geometry asks for `Φ̃ ≥ ω` on the sphere `S⁺ = {q₊ ∈ Q₁ ∩ Q₊ : |q₊|_{H¹} = ρ}`
//! and `Φ̃ ≤ ω/2` on `∂W⁻`: the side `|w| = r₁`, the top `t = r₂` and the base `t = 0`.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::functional::ReducedFunctional;
use crate::error::Result;
use crate::fourier::Series2D;
use crate::numerics::{bisect, golden_min};
use crate::resonance::IndexClass;

const FOUR_PI2: f64 = 4.0 * PI * PI;
const POWER_STEPS: usize = 60;

/// Radii, level and sampling plan of the geometry check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkingGeometry {
    pub rho: f64,
    pub omega_level: f64,
    pub r1: f64,
    pub r2: f64,
    /// Cutoff radius `R` of `Φ̃`.
    pub radius: f64,
    pub e_plus: Series2D,
    pub sphere_samples: usize,
    /// Samples on each of the three faces of `∂W⁻`.
    pub face_samples: usize,
    pub seed: u64,
    pub constants: GeometryConstants,
}

/// Constants behind the default radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryConstants {
    pub alpha_plus: f64,
    pub alpha_minus: f64,
    /// `max ∫F(q₊, 0)` over the unit sphere of `Q₁ ∩ Q₊`.
    pub kappa_hat: f64,
    /// Unit maximizer behind `kappa_hat`; sampled on `S⁺` as the worst direction.
    pub probe: Series2D,
    /// `𝒜(e₊) = (2+ε)π²`.
    pub kappa_plus: f64,
    /// Lower constant in `∫F(q) ≥ κ₃ |t|^{2d}` along `e₊`.
    pub kappa3: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Face {
    Sphere,
    Side,
    Top,
    Base,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub face: Face,
    /// `e₊` coefficient; `0` on the sphere.
    pub t: f64,
    /// `|q|_{H¹}` of the remaining part.
    pub w_norm: f64,
    /// `NaN` when the range solve failed.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkingReport {
    pub min_on_sphere: f64,
    pub max_on_boundary: f64,
    pub omega_level: f64,
    /// Largest sampled value on side, top and base.
    pub face_max: [f64; 3],
    pub sphere_argmin: Sample,
    pub boundary_argmax: Sample,
    pub failed_evaluations: usize,
    /// First sample breaking the geometry, if any.
    pub violation: Option<Sample>,
    pub pass: bool,
}

/// Unit vector in `H¹` with random coordinates on the given classes.
fn random_direction(
    rf: &ReducedFunctional,
    rng: &mut ChaCha8Rng,
    classes: &[IndexClass],
) -> Series2D {
    let cls = rf.coordinate_classes();
    let x = DVector::from_fn(rf.dim(), |i, _| {
        let v: f64 = rng.random_range(-1.0..1.0);
        if classes.contains(&cls[i]) {
            v
        } else {
            0.0
        }
    });
    let q = rf.to_series(&x);
    let n = rf.h1_norm(&q);
    if n > 0.0 {
        q.scale(1.0 / n)
    } else {
        q
    }
}

/// `min over φ₁` of the signed leading coefficient.
fn signed_min_leading(rf: &ReducedFunctional) -> f64 {
    let nl = rf.solver().nonlinearity();
    let a = nl.coefficient(nl.leading_power());
    (0..512)
        .map(|i| nl.sign() * a.evaluate(2.0 * PI * i as f64 / 512.0, 0.0))
        .fold(f64::INFINITY, f64::min)
}

/// `max ∫F(q, 0)` on the unit `H¹` sphere of `Q₁ ∩ Q₊`.
///
/// `∫F(·, 0)` is convex and homogeneous when the leading coefficient is
/// nonnegative, so the normalized-gradient iteration increases it monotonically.
fn potential_maximum(rf: &ReducedFunctional, rng: &mut ChaCha8Rng) -> Result<(f64, Series2D)> {
    let dec = rf.decomposition();
    let e_plus = Series2D::cos_mode(dec.m1, dec.m2, (0, 1), 1.0);
    let mut best = (rf.potential(&e_plus)?, e_plus);
    for _ in 0..16 {
        let q = random_direction(rf, rng, &[IndexClass::Plus]);
        let v = rf.potential(&q)?;
        if v > best.0 {
            best = (v, q);
        }
    }
    let gram = rf.h1_gram();
    let cls = rf.coordinate_classes();
    let nl = rf.solver().nonlinearity();
    let mut q = best.1.clone();
    for _ in 0..POWER_STEPS {
        let f = nl.compose_f(&q, 0.0)?;
        let mut g = rf.to_coords(&f) * (2.0 * FOUR_PI2);
        g[0] *= 0.5;
        for i in 0..g.len() {
            g[i] = if cls[i] == IndexClass::Plus {
                g[i] / gram[i]
            } else {
                0.0
            };
        }
        let next = rf.to_series(&g);
        let n = rf.h1_norm(&next);
        if !(n > 0.0) {
            break;
        }
        q = next.scale(1.0 / n);
        let v = rf.potential(&q)?;
        if v <= best.0 * (1.0 + 1e-14) {
            if v > best.0 {
                best = (v, q.clone());
            }
            break;
        }
        best = (v, q.clone());
    }
    Ok(best)
}

impl LinkingGeometry {
    /// Default radii for a cutoff radius `R`.
    ///
    /// `ρ` maximizes `α₊ρ²/2 − κ̂ρ^{2d}`, capped at `R/2`, and `ω = α₊ρ²/8`.
    /// Along `e₊`, `Γ(t e₊) ≤ κ₊t² − κ₃t^{2d}` with the Hölder constant
    /// `κ₃ = a_min/(2d)·4π²/2^d`; `r₂` clears its positive root, `r₁` makes
    /// `α₋s/2 + κ₃(r₁² − s)^d` exceed its maximum for every split `s`.
    /// Both stay beyond `2.2R`, where `Φ̃ = Γ`.
    pub fn defaults(rf: &ReducedFunctional, radius: f64, seed: u64) -> Result<Self> {
        let dec = rf.decomposition();
        let d = rf.solver().nonlinearity().d() as i32;
        let df = f64::from(d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (alpha_plus, alpha_minus) = rf.rayleigh_constants();
        let (kappa_hat, probe) = potential_maximum(rf, &mut rng)?;
        let kappa_plus = (2.0 + dec.setup.eps) * PI * PI;
        let a_min = signed_min_leading(rf);
        // A vanishing minimum leaves no Hölder bound; the mean is then a heuristic
        // and the sampled check decides.
        let a_low = if a_min > 0.0 {
            a_min
        } else {
            rf.solver().nonlinearity().sign() * rf.solver().nonlinearity().mean_leading()
        };
        let kappa3 = a_low / (2.0 * df) * FOUR_PI2 / 2f64.powi(d);

        let mut rho = if kappa_hat > 0.0 {
            (alpha_plus / (2.0 * df * kappa_hat)).powf(1.0 / (2.0 * df - 2.0))
        } else {
            f64::INFINITY
        };
        rho = rho.min(0.5 * radius);
        let omega_level = alpha_plus * rho * rho / 8.0;

        let floor = 2.2 * radius;
        let (r1, r2) = if kappa3 > 0.0 {
            let root = (kappa_plus / kappa3).powf(1.0 / (2.0 * df - 2.0));
            let t_star = (kappa_plus / (df * kappa3)).powf(1.0 / (2.0 * df - 2.0));
            let m = kappa_plus * t_star * t_star - kappa3 * t_star.powi(2 * d);
            let lower = |r: f64| {
                let h = |s: f64| 0.5 * alpha_minus * s + kappa3 * (r * r - s).max(0.0).powi(d);
                let s = golden_min(h, 0.0, r * r, 1e-12 * (1.0 + r * r));
                h(s).min(h(0.0)).min(h(r * r))
            };
            let mut hi = 1.0;
            while lower(hi) < m {
                hi *= 2.0;
            }
            let r1 = bisect(|r| lower(r) - m, 0.0, hi, 1e-10 * hi);
            (r1.max(floor), (1.1 * root).max(floor))
        } else {
            (floor, floor)
        };
        Ok(LinkingGeometry {
            rho,
            omega_level,
            r1,
            r2,
            radius,
            e_plus: Series2D::cos_mode(dec.m1, dec.m2, (0, 1), 1.0),
            sphere_samples: 64,
            face_samples: 64,
            seed,
            constants: GeometryConstants {
                alpha_plus,
                alpha_minus,
                kappa_hat,
                probe,
                kappa_plus,
                kappa3,
            },
        })
    }
}

/// Evaluates `Φ̃` on samples of `S⁺` and `∂W⁻`.
///
/// Samples are drawn sequentially from one seeded stream and evaluated in
/// parallel, so the report is deterministic.
pub fn verify_linking_geometry(rf: &ReducedFunctional, geom: &LinkingGeometry) -> LinkingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(geom.seed ^ 0x5eed);
    let neg = [IndexClass::Zero, IndexClass::Minus];
    let mut plan: Vec<(Face, f64, Series2D)> = Vec::new();

    let fixed = [geom.e_plus.clone(), geom.constants.probe.clone()];
    for q in &fixed {
        plan.push((Face::Sphere, 0.0, q.scale(geom.rho)));
    }
    for _ in fixed.len()..geom.sphere_samples.max(fixed.len()) {
        plan.push((
            Face::Sphere,
            0.0,
            random_direction(rf, &mut rng, &[IndexClass::Plus]).scale(geom.rho),
        ));
    }

    let k = &geom.constants;
    let t_peak = if k.kappa3 > 0.0 {
        let df = f64::from(rf.solver().nonlinearity().d());
        (k.kappa_plus / (df * k.kappa3))
            .powf(1.0 / (2.0 * df - 2.0))
            .min(geom.r2)
    } else {
        0.5 * geom.r2
    };
    let n = geom.face_samples.max(2);
    let dec = rf.decomposition();
    let q0_dir = Series2D::constant(dec.m1, dec.m2, 1.0);
    for i in 0..n {
        let w = if i == 0 {
            q0_dir.clone()
        } else {
            random_direction(rf, &mut rng, &neg)
        };
        let t = if i == 0 {
            t_peak
        } else {
            rng.random_range(0.0..=geom.r2)
        };
        plan.push((Face::Side, t, w.scale(geom.r1)));
    }
    for i in 0..n {
        let w = random_direction(rf, &mut rng, &neg);
        let r = if i == 0 {
            0.0
        } else {
            geom.r1 * rng.random_range(0.0..1.0f64).sqrt()
        };
        plan.push((Face::Top, geom.r2, w.scale(r)));
    }
    for i in 0..n {
        let w = random_direction(rf, &mut rng, &neg);
        // Dense near the origin, where the cutoff keeps the remainder.
        let r = geom.r1 * ((i + 1) as f64 / n as f64).powi(3);
        plan.push((Face::Base, 0.0, w.scale(r)));
    }

    let samples: Vec<Sample> = plan
        .par_iter()
        .map(|(face, t, w)| {
            let q = w.axpy(*t, &geom.e_plus);
            let value = rf.extended(&q, geom.radius).unwrap_or(f64::NAN);
            Sample {
                face: *face,
                t: *t,
                w_norm: rf.h1_norm(w),
                value,
            }
        })
        .collect();

    let failed_evaluations = samples.iter().filter(|s| s.value.is_nan()).count();
    let valid = |s: &&Sample| !s.value.is_nan();
    let sphere_argmin = samples
        .iter()
        .filter(|s| s.face == Face::Sphere)
        .filter(valid)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .unwrap_or(Sample {
            face: Face::Sphere,
            t: 0.0,
            w_norm: geom.rho,
            value: f64::NAN,
        });
    let boundary_argmax = samples
        .iter()
        .filter(|s| s.face != Face::Sphere)
        .filter(valid)
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .unwrap_or(Sample {
            face: Face::Base,
            t: 0.0,
            w_norm: 0.0,
            value: f64::NAN,
        });
    let face_max = [Face::Side, Face::Top, Face::Base].map(|f| {
        samples
            .iter()
            .filter(|s| s.face == f)
            .filter(valid)
            .map(|s| s.value)
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let omega = geom.omega_level;
    let violation = samples
        .iter()
        .find(|s| {
            s.value.is_nan()
                || if s.face == Face::Sphere {
                    s.value < omega
                } else {
                    s.value > 0.5 * omega
                }
        })
        .cloned();
    LinkingReport {
        min_on_sphere: sphere_argmin.value,
        max_on_boundary: boundary_argmax.value,
        omega_level: omega,
        face_max,
        pass: violation.is_none(),
        sphere_argmin,
        boundary_argmax,
        failed_evaluations,
        violation,
    }
}
