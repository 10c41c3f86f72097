use serde::Serialize;

use super::setup::{gcd, FrequencySetup};
use crate::error::{precondition, Error, Result};
use crate::fourier::{Mode, Series2D, SpaceWeights};

/// Resonance class of an index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum IndexClass {
    /// `l = 0`.
    Zero,
    /// `l₁ = 0`, `l ≠ 0`.
    Plus,
    /// `n l₁ + 2m l₂ = 0`, `l ≠ 0` (rational forcing only).
    Minus,
    /// Everything else: the range.
    Range,
}

/// Index set targeted by a projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Target {
    Q,
    P,
    QPlus,
    QZero,
    QMinus,
    Q1,
    Q2,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::Q => "Q",
            Target::P => "P",
            Target::QPlus => "Q+",
            Target::QZero => "Q0",
            Target::QMinus => "Q-",
            Target::Q1 => "Q1",
            Target::Q2 => "Q2",
        }
    }
}

/// Splitting of the mode box into kernel classes and the range, with the Galerkin cutoff `N`.
///
/// Kernel modes carry a one-dimensional index `j`: `l₂` on `Λ₊`, and `k` with
/// `l = k·g` on `Λ₋`, where `g = (2m, −n)/gcd(n, 2m)` is the primitive generator.
/// `Q₁` keeps `|j| ≤ N`; `Q₂` is the rest of `Q` inside the box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub setup: FrequencySetup,
    pub m1: i32,
    pub m2: i32,
    pub n_cut: i32,
    generator: Mode,
}

impl Decomposition {
    pub fn new(setup: FrequencySetup, m1: i32, m2: i32, n_cut: i32) -> Result<Self> {
        if m1 < 1 || m2 < 1 || n_cut < 1 {
            return Err(precondition("box half-widths and N must be positive"));
        }
        let generator = match setup.ratio() {
            (0, _) => (0, 0),
            (n, m) => {
                let g = gcd(i64::from(n), 2 * i64::from(m)) as i32;
                (2 * m / g, -n / g)
            }
        };
        let dec = Decomposition {
            setup,
            m1,
            m2,
            n_cut,
            generator,
        };
        if setup.is_case_a() {
            let (g1, g2) = generator;
            if n_cut > m2 || n_cut * g1 > m1 || n_cut * g2.abs() > m2 {
                return Err(precondition(format!(
                    "box ({m1}, {m2}) does not contain Q1 for N = {n_cut}: need M1 ≥ {}, M2 ≥ {}",
                    n_cut * g1,
                    n_cut.max(n_cut * g2.abs())
                )));
            }
        }
        Ok(dec)
    }

    /// Case B: no Galerkin split, `Q₂` is empty.
    pub fn case_b(setup: FrequencySetup, m1: i32, m2: i32) -> Result<Self> {
        Decomposition::new(setup, m1, m2, m2)
    }

    /// Primitive `Λ₋` direction, `(0, 0)` in case B.
    pub fn generator(&self) -> Mode {
        self.generator
    }

    pub fn in_box(&self, l: Mode) -> bool {
        l.0.abs() <= self.m1 && l.1.abs() <= self.m2
    }

    pub fn classify(&self, l: Mode) -> IndexClass {
        if l == (0, 0) {
            return IndexClass::Zero;
        }
        if l.0 == 0 {
            return IndexClass::Plus;
        }
        match self.setup.ratio() {
            (0, _) => IndexClass::Range,
            (n, m) => {
                if i64::from(n) * i64::from(l.0) + 2 * i64::from(m) * i64::from(l.1) == 0 {
                    IndexClass::Minus
                } else {
                    IndexClass::Range
                }
            }
        }
    }

    /// One-dimensional index of a kernel mode; `None` on the range.
    pub fn component_index(&self, l: Mode) -> Option<(IndexClass, i32)> {
        match self.classify(l) {
            IndexClass::Zero => Some((IndexClass::Zero, 0)),
            IndexClass::Plus => Some((IndexClass::Plus, l.1)),
            IndexClass::Minus => Some((IndexClass::Minus, l.0 / self.generator.0)),
            IndexClass::Range => None,
        }
    }

    pub fn in_target(&self, l: Mode, target: Target) -> bool {
        let class = self.classify(l);
        match target {
            Target::P => class == IndexClass::Range,
            Target::Q => class != IndexClass::Range,
            Target::QPlus => class == IndexClass::Plus,
            Target::QZero => class == IndexClass::Zero,
            Target::QMinus => class == IndexClass::Minus,
            Target::Q1 | Target::Q2 => match self.component_index(l) {
                None => false,
                Some((_, j)) => (j.abs() <= self.n_cut) == (target == Target::Q1),
            },
        }
    }

    /// Restriction of the coefficients of `u` to `target`, in the decomposition box.
    pub fn project(&self, u: &Series2D, target: Target) -> Series2D {
        u.rebox(self.m1, self.m2)
            .filter(|l| self.in_target(l, target))
    }

    /// All in-box indices of `target`, canonical representatives only.
    pub fn indices(&self, target: Target) -> Vec<Mode> {
        let mut out = Vec::new();
        for l2 in 0..=self.m2 {
            for l1 in -self.m1..=self.m1 {
                let l = (l1, l2);
                if (l2 > 0 || l1 >= 0) && self.in_target(l, target) {
                    out.push(l);
                }
            }
        }
        out
    }

    /// Fails with the first stored mode of `u` outside `target` or the box.
    pub fn check_support(&self, u: &Series2D, target: Target) -> Result<()> {
        match u
            .iter()
            .find(|(l, _)| !self.in_box(*l) || !self.in_target(*l, target))
        {
            Some((l, _)) => Err(Error::Support {
                mode: l,
                target: target.name(),
            }),
            None => Ok(()),
        }
    }

    /// `(1 + j²)` with `j` the component index; the weight of a mode in the H¹ norm.
    pub fn h1_weight(&self, l: Mode) -> Option<f64> {
        self.component_index(l).map(|(class, j)| match class {
            IndexClass::Zero => 1.0,
            _ => 1.0 + f64::from(j).powi(2),
        })
    }

    /// `⟨a, b⟩_{H¹}` over kernel modes; range modes are ignored.
    pub fn h1_inner(&self, a: &Series2D, b: &Series2D) -> f64 {
        a.iter()
            .filter_map(|(l, c)| {
                let w = self.h1_weight(l)?;
                let d = b.get(l);
                Some(w * (c.re * d.re + c.im * d.im))
            })
            .sum()
    }

    /// `|q|_{H¹}`: a pair `{l, −l}` contributes `2|c|²(1+j²)`, the mean contributes `q₀²`.
    pub fn h1_component_norm(&self, q: &Series2D) -> Result<f64> {
        self.check_support(q, Target::Q)?;
        Ok(self.h1_inner(q, q).sqrt())
    }

    /// Smallest `κ` with `|q|_{σ,s} ≤ κ|q|_{H¹}` for every `q` supported on `Q₁`.
    pub fn embedding_constant(&self, w: SpaceWeights) -> f64 {
        let mut k2 = 1.0;
        for l in self.indices(Target::Q1) {
            if l == (0, 0) {
                continue;
            }
            let weight = w.weight(l);
            k2 += 2.0 * weight * weight / self.h1_weight(l).expect("Q1 mode");
        }
        k2.sqrt()
    }

    /// `σN ≤ 1`, required for the case A weighted estimates.
    pub fn check_weights(&self, w: SpaceWeights) -> Result<()> {
        if self.setup.is_case_a() && w.sigma * f64::from(self.n_cut) > 1.0 + 1e-12 {
            return Err(precondition(format!(
                "σN = {} exceeds 1",
                w.sigma * f64::from(self.n_cut)
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;

    fn dec11() -> Decomposition {
        let setup = FrequencySetup::case_a(1, 1, 1e-4, 1e-3).unwrap();
        Decomposition::new(setup, 24, 24, 8).unwrap()
    }

    #[test]
    fn classification_examples() {
        let d = dec11();
        assert_eq!(d.classify((-2, 1)), IndexClass::Minus);
        assert_eq!(d.classify((1, 1)), IndexClass::Range);
        assert_eq!(d.classify((0, 3)), IndexClass::Plus);
        assert_eq!(d.component_index((4, -2)), Some((IndexClass::Minus, 2)));
        assert_eq!(d.component_index((-2, 1)), Some((IndexClass::Minus, -1)));
        let b = Decomposition::case_b(
            FrequencySetup::case_b(1.6180339887, 1e-4, 1e-3).unwrap(),
            8,
            32,
        )
        .unwrap();
        let u = Series2D::cos_mode(8, 32, (1, 1), 1.0);
        assert!(b.project(&u, Target::Q).is_zero());
        assert!(b.indices(Target::Q2).is_empty());
    }

    #[test]
    fn even_numerator_uses_primitive_generator() {
        let setup = FrequencySetup::case_a(2, 1, 1e-4, 1e-3).unwrap();
        let d = Decomposition::new(setup, 8, 8, 4).unwrap();
        assert_eq!(d.generator(), (1, -1));
        assert_eq!(d.classify((1, -1)), IndexClass::Minus);
        assert_eq!(d.classify((2, -2)), IndexClass::Minus);
    }

    #[test]
    fn h1_norm_examples() {
        let d = dec11();
        assert_eq!(
            d.h1_component_norm(&Series2D::constant(24, 24, 1.0))
                .unwrap(),
            1.0
        );
        let q = Series2D::cos_mode(24, 24, (0, 1), 2.0);
        assert!((d.h1_component_norm(&q).unwrap() - 2.0).abs() < 1e-15);
        assert!(d
            .h1_component_norm(&Series2D::cos_mode(24, 24, (1, 1), 1.0))
            .is_err());
    }

    #[test]
    fn q1_and_q2_partition_q() {
        let d = dec11();
        let q1 = d.indices(Target::Q1).len();
        let q2 = d.indices(Target::Q2).len();
        assert_eq!(q1 + q2, d.indices(Target::Q).len());
        // q₀, eight Λ₊ and eight Λ₋ representatives.
        assert_eq!(q1, 17);
        let mut u = Series2D::zero(24, 24);
        u.set((0, 9), Complex64::new(1.0, 0.0));
        assert!(d.check_support(&u, Target::Q2).is_ok());
        assert!(d.check_support(&u, Target::Q1).is_err());
    }

    #[test]
    fn embedding_constant_attains_bound() {
        let d = dec11();
        let w = SpaceWeights::new(1.0 / 8.0, 0.4);
        let kappa = d.embedding_constant(w);
        // Extremal vector: coefficient proportional to weight/(H¹ weight).
        let mut q = Series2D::constant(24, 24, 1.0);
        for l in d.indices(Target::Q1) {
            if l != (0, 0) {
                let c = w.weight(l) / d.h1_weight(l).unwrap();
                q.set(l, Complex64::new(c, 0.0));
            }
        }
        let ratio = q.weighted_norm(w) / d.h1_component_norm(&q).unwrap();
        assert!((ratio - kappa).abs() < 1e-12 * kappa);
    }
}
