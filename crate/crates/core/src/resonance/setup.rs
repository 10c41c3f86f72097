use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};

/// Default bound on `|ε|`.
pub const EPS0_DEFAULT: f64 = 0.1;
/// Default Diophantine constant.
pub const GAMMA_DEFAULT: f64 = 1e-3;

/// Forcing frequency `ω₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum Frequency {
    /// `ω₁ = n/m` with `gcd(n, m) = 1`.
    Rational { n: i32, m: i32 },
    /// `ω₁ ∈ (1, 2)` irrational up to the sieve surrogate.
    Irrational { omega1: f64 },
}

/// Frequency pair `(ω₁, 1 + ε)` with the Diophantine constant `γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencySetup {
    pub frequency: Frequency,
    pub eps: f64,
    pub gamma: f64,
    pub eps0: f64,
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn check_common(eps: f64, gamma: f64, eps0: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0 / 6.0) {
        return Err(precondition(format!("γ = {gamma} must lie in (0, 1/6)")));
    }
    if !(eps0 > 0.0) || !eps.is_finite() || eps.abs() >= eps0 {
        return Err(precondition(format!(
            "|ε| = {} must be below ε₀ = {eps0}",
            eps.abs()
        )));
    }
    Ok(())
}

impl FrequencySetup {
    pub fn case_a(n: i32, m: i32, eps: f64, gamma: f64) -> Result<Self> {
        Self::case_a_with(n, m, eps, gamma, EPS0_DEFAULT)
    }

    pub fn case_a_with(n: i32, m: i32, eps: f64, gamma: f64, eps0: f64) -> Result<Self> {
        if n < 1 || m < 1 {
            return Err(precondition(format!("ω₁ = {n}/{m} needs positive n and m")));
        }
        if gcd(i64::from(n), i64::from(m)) != 1 {
            return Err(precondition(format!("{n} and {m} are not coprime")));
        }
        check_common(eps, gamma, eps0)?;
        Ok(FrequencySetup {
            frequency: Frequency::Rational { n, m },
            eps,
            gamma,
            eps0,
        })
    }

    pub fn case_b(omega1: f64, eps: f64, gamma: f64) -> Result<Self> {
        Self::case_b_with(omega1, eps, gamma, EPS0_DEFAULT)
    }

    pub fn case_b_with(omega1: f64, eps: f64, gamma: f64, eps0: f64) -> Result<Self> {
        if !(omega1 > 1.0 && omega1 < 2.0) {
            return Err(precondition(format!("ω₁ = {omega1} must lie in (1, 2)")));
        }
        check_common(eps, gamma, eps0)?;
        Ok(FrequencySetup {
            frequency: Frequency::Irrational { omega1 },
            eps,
            gamma,
            eps0,
        })
    }

    /// Same frequency and `γ` with a different `ε`.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        check_common(eps, self.gamma, self.eps0)?;
        Ok(FrequencySetup { eps, ..*self })
    }

    pub fn is_case_a(&self) -> bool {
        matches!(self.frequency, Frequency::Rational { .. })
    }

    pub fn omega1(&self) -> f64 {
        match self.frequency {
            Frequency::Rational { n, m } => f64::from(n) / f64::from(m),
            Frequency::Irrational { omega1 } => omega1,
        }
    }

    pub fn omega2(&self) -> f64 {
        1.0 + self.eps
    }

    /// `(n, m)`; `(0, 1)` in case B.
    pub fn ratio(&self) -> (i32, i32) {
        match self.frequency {
            Frequency::Rational { n, m } => (n, m),
            Frequency::Irrational { .. } => (0, 1),
        }
    }

    /// Denominator `m`, 1 in case B.
    pub fn m(&self) -> i32 {
        self.ratio().1
    }

    /// `δ = |ε|^{1/(2(d−1))}`.
    pub fn delta(&self, d: u32) -> f64 {
        assert!(d >= 2);
        self.eps.abs().powf(1.0 / (2.0 * f64::from(d - 1)))
    }

    /// `sign(ε)`, `+1` when `ω₂ ≥ 1`.
    pub fn sign(&self) -> f64 {
        if self.eps < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Lower bound that `|D_l|` must exceed on the range: `γ/m²` or `γ`.
    pub fn divisor_threshold(&self) -> f64 {
        self.gamma / f64::from(self.m()).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities() {
        let s = FrequencySetup::case_a(3, 2, -0.01, 0.1).unwrap();
        assert_eq!(s.omega1(), 1.5);
        assert_eq!(s.omega2(), 0.99);
        assert_eq!(s.sign(), -1.0);
        assert!((s.delta(2) - 0.1).abs() < 1e-15);
        assert!((s.delta(3) - 0.01f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(s.divisor_threshold(), 0.025);
        let b = FrequencySetup::case_b(1.6180339887, 1e-4, 1e-3).unwrap();
        assert_eq!(b.m(), 1);
        assert!(!b.is_case_a());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(FrequencySetup::case_a(2, 4, 0.01, 0.1).is_err());
        assert!(FrequencySetup::case_a(1, 1, 0.01, 0.2).is_err());
        assert!(FrequencySetup::case_a(1, 1, 0.5, 0.1).is_err());
        assert!(FrequencySetup::case_b(2.5, 0.01, 0.1).is_err());
        assert!(FrequencySetup::case_b(1.5, 0.01, 0.0).is_err());
    }
}
