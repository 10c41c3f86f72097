use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fourier index `l = (l₁, l₂)`.
pub type Mode = (i32, i32);

/// Coefficients below this fraction of the ℓ¹ norm are pruned after each operation.
pub const DROP_RELATIVE: f64 = 1e-16;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Weights `(σ, s)` of the norm `Σ |û_l| e^{σ|l₂|} [l₁]^s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceWeights {
    pub sigma: f64,
    pub s: f64,
}

impl SpaceWeights {
    /// Plain ℓ¹ norm.
    pub const L1: SpaceWeights = SpaceWeights { sigma: 0.0, s: 0.0 };

    pub fn new(sigma: f64, s: f64) -> Self {
        assert!(sigma >= 0.0 && s >= 0.0, "weights must be nonnegative");
        SpaceWeights { sigma, s }
    }

    pub fn weight(&self, l: Mode) -> f64 {
        let bracket = f64::from(l.0.unsigned_abs().max(1));
        (self.sigma * f64::from(l.1.unsigned_abs())).exp() * bracket.powf(self.s)
    }

    /// Constant of the algebra inequality.
    pub fn algebra_constant(&self) -> f64 {
        2f64.powf(self.s)
    }
}

/// Output box of a product.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    /// Keep the full Minkowski-sum box.
    Exact,
    /// Keep at most `|l₁| ≤ m1`, `|l₂| ≤ m2`; the rest goes to the tail diagnostic.
    Cap { m1: i32, m2: i32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    Phi1,
    Phi2,
}

/// Sparse real Fourier series on the box `[-M1, M1] × [-M2, M2]`.
///
/// Invariants: `û_{-l} = conj(û_l)` exactly for every stored `l`, `û_0` is
/// real, every stored index lies in the box. Absent entries are zero.
/// `tail` accumulates the ℓ¹ mass discarded by truncation and pruning.
#[derive(Clone, Debug, PartialEq)]
pub struct Series2D {
    m1: i32,
    m2: i32,
    coeffs: BTreeMap<Mode, Complex64>,
    tail: f64,
}

#[inline]
fn negate(l: Mode) -> Mode {
    (-l.0, -l.1)
}

/// Representative of `{l, -l}`: `l₂ > 0`, or `l₂ = 0` and `l₁ ≥ 0`.
#[inline]
pub(crate) fn is_canonical(l: Mode) -> bool {
    l.1 > 0 || (l.1 == 0 && l.0 >= 0)
}

impl Series2D {
    pub fn zero(m1: i32, m2: i32) -> Self {
        assert!(m1 >= 0 && m2 >= 0, "box half-widths must be nonnegative");
        Series2D {
            m1,
            m2,
            coeffs: BTreeMap::new(),
            tail: 0.0,
        }
    }

    pub fn constant(m1: i32, m2: i32, c: f64) -> Self {
        let mut u = Series2D::zero(m1, m2);
        u.set((0, 0), Complex64::new(c, 0.0));
        u
    }

    /// `amp · cos(l·φ)`.
    pub fn cos_mode(m1: i32, m2: i32, l: Mode, amp: f64) -> Self {
        let mut u = Series2D::zero(m1, m2);
        if l == (0, 0) {
            u.set(l, Complex64::new(amp, 0.0));
        } else {
            u.set(l, Complex64::new(amp / 2.0, 0.0));
        }
        u
    }

    /// `amp · sin(l·φ)`.
    pub fn sin_mode(m1: i32, m2: i32, l: Mode, amp: f64) -> Self {
        let mut u = Series2D::zero(m1, m2);
        if l != (0, 0) {
            u.set(l, Complex64::new(0.0, -amp / 2.0));
        }
        u
    }

    /// Builds a series from canonical or arbitrary entries; each entry also sets its conjugate.
    pub fn from_entries(
        m1: i32,
        m2: i32,
        entries: impl IntoIterator<Item = (Mode, Complex64)>,
    ) -> Self {
        let mut u = Series2D::zero(m1, m2);
        for (l, c) in entries {
            u.set(l, c);
        }
        u
    }

    /// Sets `û_l = c` and `û_{-l} = conj(c)`; at `l = 0` only the real part is kept.
    ///
    /// Panics if `l` lies outside the box.
    pub fn set(&mut self, l: Mode, c: Complex64) {
        assert!(
            self.in_box(l),
            "mode ({}, {}) outside box ({}, {})",
            l.0,
            l.1,
            self.m1,
            self.m2
        );
        if l == (0, 0) {
            if c.re == 0.0 {
                self.coeffs.remove(&l);
            } else {
                self.coeffs.insert(l, Complex64::new(c.re, 0.0));
            }
            return;
        }
        if c == ZERO {
            self.coeffs.remove(&l);
            self.coeffs.remove(&negate(l));
        } else {
            self.coeffs.insert(l, c);
            self.coeffs.insert(negate(l), c.conj());
        }
    }

    pub fn get(&self, l: Mode) -> Complex64 {
        self.coeffs.get(&l).copied().unwrap_or(ZERO)
    }

    pub fn m1(&self) -> i32 {
        self.m1
    }

    pub fn m2(&self) -> i32 {
        self.m2
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn in_box(&self, l: Mode) -> bool {
        l.0.abs() <= self.m1 && l.1.abs() <= self.m2
    }

    /// Number of stored coefficients (both members of each conjugate pair).
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, Complex64)> + '_ {
        self.coeffs.iter().map(|(l, c)| (*l, *c))
    }

    /// One representative per conjugate pair.
    pub fn canonical(&self) -> impl Iterator<Item = (Mode, Complex64)> + '_ {
        self.iter().filter(|(l, _)| is_canonical(*l))
    }

    /// Largest `|l₁|` and `|l₂|` over stored entries.
    pub fn extent(&self) -> (i32, i32) {
        self.coeffs
            .keys()
            .fold((0, 0), |(a, b), l| (a.max(l.0.abs()), b.max(l.1.abs())))
    }

    /// Same coefficients in a different box; entries outside the new box move to the tail.
    pub fn rebox(&self, m1: i32, m2: i32) -> Series2D {
        let mut out = Series2D::zero(m1, m2);
        out.tail = self.tail;
        for (l, c) in self.iter() {
            if out.in_box(l) {
                out.coeffs.insert(l, c);
            } else {
                out.tail += c.norm();
            }
        }
        out
    }

    /// Keeps the entries whose index satisfies `keep`; `keep` must be symmetric under `l ↦ -l`.
    pub fn filter(&self, mut keep: impl FnMut(Mode) -> bool) -> Series2D {
        let mut out = Series2D::zero(self.m1, self.m2);
        for (l, c) in self.iter() {
            if keep(l) {
                debug_assert!(keep(negate(l)), "filter predicate must be symmetric");
                out.coeffs.insert(l, c);
            }
        }
        out
    }

    /// Applies `g(l, û_l)` to every canonical entry and restores the conjugate half.
    pub fn map_canonical(&self, mut g: impl FnMut(Mode, Complex64) -> Complex64) -> Series2D {
        let mut out = Series2D::zero(self.m1, self.m2);
        out.tail = self.tail;
        for (l, c) in self.canonical() {
            out.set(l, g(l, c));
        }
        out
    }

    pub fn weighted_norm(&self, w: SpaceWeights) -> f64 {
        self.iter().map(|(l, c)| c.norm() * w.weight(l)).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.iter().map(|(_, c)| c.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Mean over the torus, `û_0`.
    pub fn mean(&self) -> f64 {
        self.get((0, 0)).re
    }

    /// `∫_{T²} u dφ = 4π² û_0`.
    pub fn integral(&self) -> f64 {
        4.0 * PI * PI * self.mean()
    }

    /// Mean of the pointwise product, `(1/4π²)∫ u v = Σ_l Re(û_l conj(v̂_l))`.
    pub fn mean_product(&self, other: &Series2D) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .iter()
            .map(|(l, c)| {
                let d = large.get(l);
                c.re * d.re + c.im * d.im
            })
            .sum()
    }

    /// `Σ |û_l|²`, the mean of `u²`.
    pub fn mean_square(&self) -> f64 {
        self.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    /// Multiplies every coefficient by `a`.
    pub fn scale(&self, a: f64) -> Series2D {
        let mut out = self.clone();
        if a == 0.0 {
            out.coeffs.clear();
            return out;
        }
        for c in out.coeffs.values_mut() {
            *c *= a;
        }
        out.tail *= a.abs();
        out
    }

    /// `self + a·other` on the union box.
    pub fn axpy(&self, a: f64, other: &Series2D) -> Series2D {
        let mut out = Series2D::zero(self.m1.max(other.m1), self.m2.max(other.m2));
        out.coeffs = self.coeffs.clone();
        for (l, c) in other.iter() {
            let e = out.coeffs.entry(l).or_insert(ZERO);
            *e += c * a;
        }
        out.coeffs.retain(|_, c| *c != ZERO);
        out.tail = self.tail + a.abs() * other.tail;
        out.prune();
        out
    }

    /// Cauchy convolution `(uv)_j = Σ_k û_{j-k} v̂_k`.
    ///
    /// Coefficients inside the output box are exact: `Exact` keeps the full
    /// Minkowski-sum box, `Cap` only accumulates indices inside the cap. The
    /// tail grows by `|u|₁|v|₁ − |uv|₁(kept)`, an upper bound on the discarded mass.
    pub fn multiply(&self, other: &Series2D, policy: Truncation) -> Series2D {
        let (m1, m2) = match policy {
            Truncation::Exact => (self.m1 + other.m1, self.m2 + other.m2),
            Truncation::Cap { m1, m2 } => (m1, m2),
        };
        let mut out = Series2D::zero(m1, m2);
        out.tail = self.tail + other.tail;
        if self.is_zero() || other.is_zero() {
            return out;
        }
        // Dense grid for the larger factor, sparse sweep over the smaller.
        let (small, big) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let (b1, b2) = big.extent();
        let bw = (2 * b2 + 1) as usize;
        let mut grid = vec![ZERO; (2 * b1 + 1) as usize * bw];
        for (l, c) in big.iter() {
            grid[(l.0 + b1) as usize * bw + (l.1 + b2) as usize] = c;
        }
        let (s1, s2) = small.extent();
        let (e1, e2) = ((s1 + b1).min(m1), (s2 + b2).min(m2));
        let ow = (2 * e2 + 1) as usize;
        let mut acc = vec![ZERO; (2 * e1 + 1) as usize * ow];
        for (la, ca) in small.iter() {
            let (lo1, hi1) = ((la.0 - b1).max(-e1), (la.0 + b1).min(e1));
            let (lo2, hi2) = ((la.1 - b2).max(-e2), (la.1 + b2).min(e2));
            if lo1 > hi1 || lo2 > hi2 {
                continue;
            }
            for j1 in lo1..=hi1 {
                let grow = (j1 - la.0 + b1) as usize * bw;
                let arow = (j1 + e1) as usize * ow;
                for j2 in lo2..=hi2 {
                    acc[arow + (j2 + e2) as usize] += ca * grid[grow + (j2 - la.1 + b2) as usize];
                }
            }
        }
        let at = |l: Mode| acc[(l.0 + e1) as usize * ow + (l.1 + e2) as usize];
        for l1 in -e1..=e1 {
            for l2 in 0..=e2 {
                let l = (l1, l2);
                if !is_canonical(l) {
                    continue;
                }
                let v = if l == (0, 0) {
                    Complex64::new(at(l).re, 0.0)
                } else {
                    (at(l) + at(negate(l)).conj()) * 0.5
                };
                if v != ZERO {
                    out.set(l, v);
                }
            }
        }
        if let Truncation::Cap { .. } = policy {
            out.tail += (self.l1_norm() * other.l1_norm() - out.l1_norm()).max(0.0);
        }
        out.prune();
        out
    }

    /// `u^k`, exact inside the output box; `u^0 = 1`.
    ///
    /// Powers are built in increasing order and each intermediate `u^i` is cut
    /// to the box that still determines the output, the cap widened by
    /// `(k − i)` times the extent of `u`.
    pub fn power(&self, k: u32, policy: Truncation) -> Series2D {
        self.powers(k, policy)
            .pop()
            .expect("powers returns k + 1 entries")
    }

    /// `[u^0, u^1, …, u^k]`, each exact inside the box of `policy`.
    pub fn powers(&self, k: u32, policy: Truncation) -> Vec<Series2D> {
        let mut out = Vec::with_capacity(k as usize + 1);
        out.push(Series2D::constant(0, 0, 1.0));
        if k == 0 {
            return out;
        }
        let (x1, x2) = self.extent();
        let cap_for = |i: u32| match policy {
            Truncation::Exact => Truncation::Exact,
            Truncation::Cap { m1, m2 } => {
                let extra = (k - i) as i32;
                Truncation::Cap {
                    m1: m1 + extra * x1,
                    m2: m2 + extra * x2,
                }
            }
        };
        let mut current = self.clone();
        for i in 2..=k {
            out.push(current.clone());
            current = current.multiply(self, cap_for(i));
        }
        out.push(current);
        if let Truncation::Cap { m1, m2 } = policy {
            for p in out.iter_mut() {
                *p = p.rebox(m1, m2);
            }
        }
        out
    }

    /// `∂_{φ_axis}`: `û_l ↦ i l_axis û_l`.
    pub fn partial(&self, axis: Axis) -> Series2D {
        let mut out = Series2D::zero(self.m1, self.m2);
        out.tail = self.tail;
        for (l, c) in self.iter() {
            let k = f64::from(match axis {
                Axis::Phi1 => l.0,
                Axis::Phi2 => l.1,
            });
            if k != 0.0 {
                out.coeffs.insert(l, Complex64::new(-k * c.im, k * c.re));
            }
        }
        out
    }

    /// Translate: returns `u(φ₁ - θ₁, φ₂ - θ₂)`.
    pub fn translate(&self, theta1: f64, theta2: f64) -> Series2D {
        self.map_canonical(|l, c| {
            let phase = -(f64::from(l.0) * theta1 + f64::from(l.1) * theta2);
            c * Complex64::from_polar(1.0, phase)
        })
    }

    /// Point value `Σ û_l e^{i l·φ}`; the imaginary residue is asserted below 1e-12.
    pub fn evaluate(&self, phi1: f64, phi2: f64) -> f64 {
        let mut sum = ZERO;
        for (l, c) in self.iter() {
            let arg = f64::from(l.0) * phi1 + f64::from(l.1) * phi2;
            sum += c * Complex64::from_polar(1.0, arg);
        }
        let scale = 1.0 + self.l1_norm();
        assert!(
            sum.im.abs() <= 1e-12 * scale,
            "imaginary residue {} in real series",
            sum.im
        );
        sum.re
    }

    /// Drops coefficients below `DROP_RELATIVE · ℓ¹` into the tail.
    pub fn prune(&mut self) {
        let threshold = DROP_RELATIVE * self.l1_norm();
        if threshold == 0.0 {
            return;
        }
        let mut dropped = 0.0;
        self.coeffs.retain(|_, c| {
            let keep = c.norm() >= threshold;
            if !keep {
                dropped += c.norm();
            }
            keep
        });
        self.tail += dropped;
    }

    /// Largest deviation from `û_{-l} = conj(û_l)`; zero for every well-formed series.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (l, c) in self.iter() {
            let d = self.get(negate(l));
            worst = worst.max((c - d.conj()).norm());
            if l == (0, 0) {
                worst = worst.max(c.im.abs());
            }
        }
        worst
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson::from(self.clone())
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_json())?)
    }

    pub fn from_json_str(text: &str) -> Result<Series2D> {
        let raw: SeriesJson = serde_json::from_str(text)?;
        Series2D::try_from(raw)
    }
}

/// On-disk form: only `l₂ > 0` or `l₂ = 0, l₁ ≥ 0` is stored.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesJson {
    #[serde(rename = "M1")]
    pub m1: i32,
    #[serde(rename = "M2")]
    pub m2: i32,
    pub coeffs: Vec<(i32, i32, f64, f64)>,
}

impl From<Series2D> for SeriesJson {
    fn from(u: Series2D) -> Self {
        SeriesJson {
            m1: u.m1,
            m2: u.m2,
            coeffs: u.canonical().map(|(l, c)| (l.0, l.1, c.re, c.im)).collect(),
        }
    }
}

impl TryFrom<SeriesJson> for Series2D {
    type Error = Error;

    fn try_from(raw: SeriesJson) -> Result<Series2D> {
        if raw.m1 < 0 || raw.m2 < 0 {
            return Err(Error::Config(format!(
                "negative box ({}, {})",
                raw.m1, raw.m2
            )));
        }
        let mut u = Series2D::zero(raw.m1, raw.m2);
        for (l1, l2, re, im) in raw.coeffs {
            let l = (l1, l2);
            if !is_canonical(l) {
                return Err(Error::Config(format!(
                    "non-canonical stored mode ({l1}, {l2})"
                )));
            }
            if !u.in_box(l) {
                return Err(Error::Config(format!(
                    "mode ({l1}, {l2}) outside the declared box"
                )));
            }
            if l == (0, 0) && im != 0.0 {
                return Err(Error::Config("mean coefficient must be real".into()));
            }
            u.set(l, Complex64::new(re, im));
        }
        Ok(u)
    }
}

impl Serialize for Series2D {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Series2D {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let raw = SeriesJson::deserialize(deserializer)?;
        Series2D::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl Add for &Series2D {
    type Output = Series2D;
    fn add(self, rhs: &Series2D) -> Series2D {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Series2D {
    type Output = Series2D;
    fn sub(self, rhs: &Series2D) -> Series2D {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &Series2D {
    type Output = Series2D;
    fn neg(self) -> Series2D {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Series2D {
    type Output = Series2D;
    fn mul(self, a: f64) -> Series2D {
        self.scale(a)
    }
}
