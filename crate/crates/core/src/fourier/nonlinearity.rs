use num_complex::Complex64;

use crate::error::{precondition, Error, Result};

use super::series::{Series2D, Truncation};

/// Odd-leading analytic nonlinearity
///
/// ```text
/// f(φ₁, u, δ) = sign · Σ_{k ≥ 2d−1} a_k(φ₁) δ^{k−(2d−1)} u^k
/// ```
///
/// Each `a_k` is a real series supported on `l₂ = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Nonlinearity {
    d: u32,
    coeffs: Vec<Series2D>,
    radius: f64,
    sign: f64,
}

/// One harmonic of a coefficient table: `cos_amp·cos(hφ₁) + sin_amp·sin(hφ₁)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Harmonic {
    pub index: i32,
    pub cos_amp: f64,
    pub sin_amp: f64,
}

impl Harmonic {
    pub fn new(index: i32, cos_amp: f64, sin_amp: f64) -> Self {
        Harmonic {
            index,
            cos_amp,
            sin_amp,
        }
    }
}

/// Builds `a(φ₁)` from harmonic rows; repeated indices add up.
pub fn coefficient_series(rows: &[Harmonic]) -> Result<Series2D> {
    let h = rows.iter().map(|r| r.index).max().unwrap_or(0);
    if rows.iter().any(|r| r.index < 0) {
        return Err(Error::Config("harmonic indices must be nonnegative".into()));
    }
    if rows
        .iter()
        .any(|r| !r.cos_amp.is_finite() || !r.sin_amp.is_finite())
    {
        return Err(Error::Config(
            "coefficient amplitudes must be finite".into(),
        ));
    }
    let mut a = Series2D::zero(h, 0);
    for r in rows {
        let add = if r.index == 0 {
            Series2D::constant(h, 0, r.cos_amp)
        } else {
            let mut t = Series2D::zero(h, 0);
            t.set(
                (r.index, 0),
                Complex64::new(r.cos_amp / 2.0, -r.sin_amp / 2.0),
            );
            t
        };
        a = &a + &add;
    }
    Ok(a.rebox(h, 0))
}

impl Nonlinearity {
    /// `coeffs[i]` is `a_{2d−1+i}`. The leading coefficient must be nonzero.
    pub fn new(d: u32, coeffs: Vec<Series2D>, radius: f64) -> Result<Self> {
        if d < 2 {
            return Err(precondition(format!("degree d = {d} must be at least 2")));
        }
        if !(radius > 0.0) {
            return Err(precondition("analyticity radius must be positive"));
        }
        match coeffs.first() {
            Some(a) if !a.is_zero() => {}
            _ => {
                return Err(precondition(format!(
                    "leading coefficient a_{} is zero",
                    2 * d - 1
                )))
            }
        }
        for (i, a) in coeffs.iter().enumerate() {
            if let Some((l, _)) = a.iter().find(|(l, _)| l.1 != 0) {
                return Err(precondition(format!(
                    "a_{} has the φ₂-dependent mode ({}, {})",
                    2 * d - 1 + i as u32,
                    l.0,
                    l.1
                )));
            }
        }
        Ok(Nonlinearity {
            d,
            coeffs,
            radius,
            sign: 1.0,
        })
    }

    /// `f ≡ 0`, the degenerate control.
    pub fn zero(d: u32) -> Self {
        Nonlinearity {
            d,
            coeffs: Vec::new(),
            radius: f64::INFINITY,
            sign: 1.0,
        }
    }

    /// Coefficients from harmonic tables, `tables[i]` describing `a_{2d−1+i}`.
    pub fn from_tables(d: u32, tables: &[Vec<Harmonic>], radius: f64) -> Result<Self> {
        let coeffs = tables
            .iter()
            .map(|t| coefficient_series(t))
            .collect::<Result<Vec<_>>>()?;
        Nonlinearity::new(d, coeffs, radius)
    }

    /// Constant leading coefficient only: `f = a·u^{2d−1}`.
    pub fn monomial(d: u32, a: f64) -> Result<Self> {
        Nonlinearity::new(d, vec![Series2D::constant(0, 0, a)], f64::INFINITY)
    }

    /// Sets the sign factor to `+1` for `ε ≥ 0` and `−1` for `ε < 0`.
    pub fn with_sign_of(mut self, eps: f64) -> Self {
        self.sign = if eps < 0.0 { -1.0 } else { 1.0 };
        self
    }

    /// Same coefficients with sign `+1`.
    pub fn unsigned(&self) -> Self {
        Nonlinearity {
            sign: 1.0,
            ..self.clone()
        }
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Leading power `2d − 1`.
    pub fn leading_power(&self) -> u32 {
        2 * self.d - 1
    }

    /// Largest stored power.
    pub fn max_power(&self) -> u32 {
        self.leading_power() + self.coeffs.len().saturating_sub(1) as u32
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Series2D::is_zero)
    }

    /// `a_k`, zero when not stored.
    pub fn coefficient(&self, k: u32) -> Series2D {
        k.checked_sub(self.leading_power())
            .and_then(|i| self.coeffs.get(i as usize))
            .cloned()
            .unwrap_or_else(|| Series2D::zero(0, 0))
    }

    pub fn coefficients(&self) -> &[Series2D] {
        &self.coeffs
    }

    /// `⟨a_{2d−1}⟩`, the φ₁-mean of the leading coefficient.
    pub fn mean_leading(&self) -> f64 {
        self.coefficient(self.leading_power()).mean()
    }

    /// Smallest value of `a_{2d−1}(φ₁)` on a 512-point grid.
    pub fn min_leading(&self) -> f64 {
        let a = self.coefficient(self.leading_power());
        (0..512)
            .map(|i| a.evaluate(2.0 * std::f64::consts::PI * i as f64 / 512.0, 0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ_k |a_k|_{H¹} r^k` over the stored coefficients.
    pub fn hypothesis_sum(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let h1: f64 = a
                    .iter()
                    .map(|(l, c)| c.norm_sqr() * (1.0 + f64::from(l.0).powi(2)))
                    .sum();
                h1.sqrt() * self.radius.powi((self.leading_power() as usize + i) as i32)
            })
            .sum()
    }

    /// True when some coefficient is non-constant in φ₁.
    pub fn depends_on_phi1(&self) -> bool {
        self.coeffs.iter().any(|a| a.iter().any(|(l, _)| l.0 != 0))
    }

    fn harmonic_reach(&self) -> i32 {
        self.coeffs.iter().map(|a| a.extent().0).max().unwrap_or(0)
    }

    fn guard(&self, u: &Series2D, delta: f64) -> Result<()> {
        let norm = u.l1_norm() * delta;
        if self.coeffs.len() > 1 && norm >= self.radius {
            return Err(Error::Domain {
                norm,
                radius: self.radius,
            });
        }
        Ok(())
    }

    /// `Σ_k a_k δ^{k−(2d−1)} u^{k+shift} / weight(k)` inside `box_`.
    fn series_sum(
        &self,
        u: &Series2D,
        delta: f64,
        box_: (i32, i32),
        shift: u32,
        weight: impl Fn(u32) -> f64,
    ) -> Result<Series2D> {
        self.guard(u, delta)?;
        let mut out = Series2D::zero(box_.0, box_.1);
        if self.is_zero() || u.is_zero() {
            return Ok(out);
        }
        let h = self.harmonic_reach();
        let cap = Truncation::Cap {
            m1: box_.0 + h,
            m2: box_.1,
        };
        let powers = u.powers(self.max_power() + shift, cap);
        let target = Truncation::Cap {
            m1: box_.0,
            m2: box_.1,
        };
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let k = self.leading_power() + i as u32;
            let scale = self.sign * delta.powi(i as i32) / weight(k);
            if scale == 0.0 {
                continue;
            }
            let term = a.multiply(&powers[(k + shift) as usize], target);
            out = out.axpy(scale, &term);
        }
        Ok(out.rebox(box_.0, box_.1))
    }

    /// `f(φ₁, u, δ)` inside the box of `u`, exact there.
    pub fn compose_f(&self, u: &Series2D, delta: f64) -> Result<Series2D> {
        self.compose_f_in(u, delta, (u.m1(), u.m2()))
    }

    /// `f(φ₁, u, δ)` on an explicit output box.
    pub fn compose_f_in(&self, u: &Series2D, delta: f64, box_: (i32, i32)) -> Result<Series2D> {
        self.series_sum(u, delta, box_, 0, |_| 1.0)
    }

    /// `F(φ₁, u, δ) = ∫₀^u f`, inside the box of `u`.
    pub fn compose_big_f(&self, u: &Series2D, delta: f64) -> Result<Series2D> {
        self.compose_big_f_in(u, delta, (u.m1(), u.m2()))
    }

    pub fn compose_big_f_in(&self, u: &Series2D, delta: f64, box_: (i32, i32)) -> Result<Series2D> {
        self.series_sum(u, delta, box_, 1, |k| f64::from(k + 1))
    }

    /// `∂_u f(φ₁, u, δ)` inside the box of `u`.
    pub fn compose_df(&self, u: &Series2D, delta: f64) -> Result<Series2D> {
        self.guard(u, delta)?;
        let box_ = (u.m1(), u.m2());
        let mut out = Series2D::zero(box_.0, box_.1);
        if self.is_zero() {
            return Ok(out);
        }
        let h = self.harmonic_reach();
        let cap = Truncation::Cap {
            m1: box_.0 + h,
            m2: box_.1,
        };
        let powers = u.powers(self.max_power() - 1, cap);
        let target = Truncation::Cap {
            m1: box_.0,
            m2: box_.1,
        };
        for (i, a) in self.coeffs.iter().enumerate() {
            let k = self.leading_power() + i as u32;
            let scale = self.sign * delta.powi(i as i32) * f64::from(k);
            if a.is_zero() || scale == 0.0 {
                continue;
            }
            out = out.axpy(scale, &a.multiply(&powers[(k - 1) as usize], target));
        }
        Ok(out.rebox(box_.0, box_.1))
    }

    /// `Σ a_k u^k` with sign `+1` and `δ = 1`, on the full product box.
    pub fn unscaled(&self, u: &Series2D) -> Result<Series2D> {
        let k = self.max_power() as i32;
        let box_ = (k * u.m1() + self.harmonic_reach(), k * u.m2());
        self.unsigned().compose_f_in(u, 1.0, box_)
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fourier::Axis;

    fn one_plus_cos() -> Nonlinearity {
        Nonlinearity::from_tables(
            2,
            &[vec![Harmonic::new(0, 1.0, 0.0), Harmonic::new(1, 1.0, 0.0)]],
            10.0,
        )
        .unwrap()
    }

    /// Pointwise oracle: `f` sampled on a grid of `u` values and transformed back.
    fn grid_coeff(g: impl Fn(f64, f64) -> f64, l: (i32, i32), n: usize) -> Complex64 {
        let h = 2.0 * PI / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (i as f64 * h, j as f64 * h);
                acc += Complex64::from_polar(g(x, y), -(f64::from(l.0) * x + f64::from(l.1) * y));
            }
        }
        acc / (n * n) as f64
    }

    #[test]
    fn table_builds_expected_series() {
        let a = coefficient_series(&[Harmonic::new(0, 1.0, 0.0), Harmonic::new(2, 0.5, -0.25)])
            .unwrap();
        let x = 0.83;
        assert!(
            (a.evaluate(x, 0.0) - (1.0 + 0.5 * (2.0 * x).cos() - 0.25 * (2.0 * x).sin())).abs()
                < 1e-15
        );
        assert!(coefficient_series(&[Harmonic::new(-1, 1.0, 0.0)]).is_err());
    }

    #[test]
    fn cube_of_two_cos() {
        let nl = Nonlinearity::monomial(2, 1.0).unwrap();
        let u = Series2D::cos_mode(0, 3, (0, 1), 2.0);
        let f = nl.compose_f(&u, 0.37).unwrap();
        assert_eq!(f.get((0, 1)).re, 3.0);
        assert_eq!(f.get((0, 3)).re, 1.0);
        assert_eq!(f.len(), 4);
        assert!(nl.compose_f(&Series2D::zero(2, 2), 1.0).unwrap().is_zero());
    }

    #[test]
    fn variable_coefficient_matches_grid_oracle() {
        let nl = one_plus_cos();
        let u = Series2D::cos_mode(1, 3, (0, 1), 1.0);
        let f = nl.compose_f(&u, 0.0).unwrap();
        for l in [(0, 1), (1, 1), (0, 3), (1, 3), (-1, 3), (1, -1)] {
            let oracle = grid_coeff(|x, y| (1.0 + x.cos()) * y.cos().powi(3), l, 16);
            assert!((f.get(l) - oracle).norm() < 1e-14, "mode {l:?}");
        }
        assert_eq!(f.get((1, 1)).re, 3.0 / 16.0);
    }

    #[test]
    fn higher_terms_carry_delta_powers() {
        let nl = Nonlinearity::new(
            2,
            vec![
                Series2D::constant(0, 0, 1.0),
                Series2D::constant(0, 0, 0.0),
                Series2D::constant(0, 0, 2.0),
            ],
            5.0,
        )
        .unwrap();
        let mut u = Series2D::zero(2, 2);
        u.set((1, 1), Complex64::new(0.2, 0.1));
        u.set((0, 0), Complex64::new(0.3, 0.0));
        let delta = 0.4;
        let f = nl.compose_f(&u, delta).unwrap();
        for l in [(0, 0), (1, 1), (2, 2), (-1, 1)] {
            let oracle = grid_coeff(
                |x, y| {
                    let v = u.evaluate(x, y);
                    v.powi(3) + 2.0 * delta * delta * v.powi(5)
                },
                l,
                32,
            );
            assert!((f.get(l) - oracle).norm() < 1e-14, "mode {l:?}");
        }
    }

    #[test]
    fn big_f_mean_of_two_cos() {
        let nl = Nonlinearity::monomial(2, 1.0).unwrap();
        let u = Series2D::cos_mode(0, 4, (0, 1), 2.0);
        assert!((nl.compose_big_f(&u, 0.0).unwrap().mean() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn f_is_derivative_of_big_f() {
        let nl = one_plus_cos();
        let mut u = Series2D::zero(2, 2);
        u.set((0, 1), Complex64::new(0.4, 0.0));
        u.set((1, 1), Complex64::new(0.1, -0.05));
        let mut v = Series2D::zero(2, 2);
        v.set((2, 1), Complex64::new(0.3, 0.2));
        v.set((0, 0), Complex64::new(0.1, 0.0));
        let big = (6, 6);
        let h = 1e-5;
        let plus = nl
            .compose_big_f_in(&u.axpy(h, &v), 0.0, big)
            .unwrap()
            .mean();
        let minus = nl
            .compose_big_f_in(&u.axpy(-h, &v), 0.0, big)
            .unwrap()
            .mean();
        let fd = (plus - minus) / (2.0 * h);
        let exact = nl.compose_f_in(&u, 0.0, big).unwrap().mean_product(&v);
        assert!((fd - exact).abs() < 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn df_is_linearization() {
        let nl = one_plus_cos().with_sign_of(-1.0);
        let mut u = Series2D::zero(3, 3);
        u.set((0, 1), Complex64::new(0.4, 0.0));
        u.set((1, -1), Complex64::new(0.1, 0.3));
        let mut v = Series2D::zero(3, 3);
        v.set((1, 2), Complex64::new(0.3, -0.2));
        let h = 1e-6;
        let fd = (&nl.compose_f(&u.axpy(h, &v), 0.2).unwrap()
            - &nl.compose_f(&u.axpy(-h, &v), 0.2).unwrap())
            .scale(0.5 / h);
        let lin = nl
            .compose_df(&u, 0.2)
            .unwrap()
            .multiply(&v, Truncation::Cap { m1: 3, m2: 3 });
        assert!((&fd - &lin).l1_norm() < 1e-8);
    }

    #[test]
    fn sign_and_guard() {
        let nl = Nonlinearity::new(
            2,
            vec![Series2D::constant(0, 0, 1.0), Series2D::constant(0, 0, 1.0)],
            0.5,
        )
        .unwrap()
        .with_sign_of(-0.1);
        let u = Series2D::cos_mode(0, 1, (0, 1), 1.0);
        let f = nl.compose_f(&u, 0.1).unwrap();
        assert!(f.get((0, 1)).re < 0.0);
        assert!(matches!(nl.compose_f(&u, 1.0), Err(Error::Domain { .. })));
        assert!(Nonlinearity::new(2, vec![Series2D::zero(0, 0)], 1.0).is_err());
        assert!(Nonlinearity::new(1, vec![Series2D::constant(0, 0, 1.0)], 1.0).is_err());
        assert!(Nonlinearity::new(2, vec![Series2D::cos_mode(0, 1, (0, 1), 1.0)], 1.0).is_err());
    }

    #[test]
    fn unscaled_keeps_full_product_box() {
        let nl = one_plus_cos().with_sign_of(-1.0);
        let u = Series2D::cos_mode(1, 1, (1, 1), 1.0);
        let f = nl.unscaled(&u).unwrap();
        assert_eq!((f.m1(), f.m2()), (4, 3));
        let oracle = grid_coeff(|x, y| (1.0 + x.cos()) * (x + y).cos().powi(3), (4, 3), 16);
        assert!((f.get((4, 3)) - oracle).norm() < 1e-15);
        assert!(f.get((4, 3)).re > 0.0);
    }

    #[test]
    fn diagnostics() {
        let nl = one_plus_cos();
        assert_eq!(nl.mean_leading(), 1.0);
        assert!(nl.depends_on_phi1());
        assert!(nl.min_leading().abs() < 1e-12);
        let h1 = (1.0f64 + 2.0 * 0.25 * 2.0).sqrt();
        assert!((nl.hypothesis_sum() - h1 * 1000.0).abs() < 1e-9);
        assert!(!Nonlinearity::monomial(2, 2.0).unwrap().depends_on_phi1());
        let u = Series2D::cos_mode(1, 1, (0, 1), 1.0).partial(Axis::Phi2);
        assert!(Nonlinearity::zero(2).compose_f(&u, 1.0).unwrap().is_zero());
    }
}
