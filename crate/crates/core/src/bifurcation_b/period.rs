//! Period map of `ẍ = −V′(x)`, `V(x) = x^{2d}`, at energy `E = ẋ²/2 + x^{2d}`:
//!
//! ```text
//! T(E) = 4 E^{1/(2d) − 1/2} I_d,   I_d = ∫₀¹ dx / √(2(1 − x^{2d}))
//! ```

use crate::error::{precondition, Result};
use crate::numerics::integrate;

/// `I_d`, with the endpoint singularity removed by `x = 1 − t²`.
///
/// `1 − x^{2d} = (1 − x)·P(x)` with `P(x) = Σ_{j<2d} x^j`, so
/// `I_d = ∫₀¹ 2 dt / √(2 P(1 − t²))`, a smooth integrand.
pub fn period_integral(d: u32) -> Result<f64> {
    if d < 1 {
        return Err(precondition("degree d must be at least 1"));
    }
    let p = |x: f64| (0..2 * d).fold(0.0, |acc, _| acc * x + 1.0);
    Ok(integrate(
        |t| 2.0 / (2.0 * p(1.0 - t * t)).sqrt(),
        0.0,
        1.0,
        16,
        20,
    ))
}

fn check_energy(e: f64) -> Result<()> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(precondition(format!("energy E = {e} must be positive")));
    }
    Ok(())
}

/// `T(E)`.
pub fn period(e: f64, d: u32) -> Result<f64> {
    check_energy(e)?;
    let a = 1.0 / (2.0 * f64::from(d)) - 0.5;
    Ok(4.0 * e.powf(a) * period_integral(d)?)
}

/// `dT/dE = 2(1/d − 1) E^{1/(2d) − 3/2} I_d`.
pub fn period_derivative(e: f64, d: u32) -> Result<f64> {
    check_energy(e)?;
    let d_f = f64::from(d);
    Ok(2.0 * (1.0 / d_f - 1.0) * e.powf(1.0 / (2.0 * d_f) - 1.5) * period_integral(d)?)
}

/// Unique `E*` with `T(E*) = target`: bracket, bisection, then Newton.
pub fn solve_period_equation(d: u32, target: f64) -> Result<f64> {
    if d < 2 {
        return Err(precondition("the period is independent of E for d = 1"));
    }
    if !(target > 0.0) {
        return Err(precondition("target period must be positive"));
    }
    let g = |e: f64| period(e, d).map(|t| t - target);
    // T decreases strictly; grow the bracket geometrically.
    let (mut lo, mut hi) = (1.0, 1.0);
    while g(lo)? < 0.0 {
        lo *= 0.5;
    }
    while g(hi)? > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut e = 0.5 * (lo + hi);
    for _ in 0..20 {
        let step = g(e)? / period_derivative(e, d)?;
        e -= step;
        if step.abs() <= 1e-16 * e {
            break;
        }
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, SQRT_2};

    use super::*;

    #[test]
    fn harmonic_control_is_isochronous() {
        for e in [0.01, 1.0, 37.0] {
            assert!((period(e, 1).unwrap() - PI * SQRT_2).abs() < 1e-12);
            assert_eq!(period_derivative(e, 1).unwrap(), 0.0);
        }
        assert!(solve_period_equation(1, PI * SQRT_2).is_err());
    }

    #[test]
    fn quartic_values() {
        let i2 = period_integral(2).unwrap();
        assert!((i2 - 0.9270373386506859).abs() < 1e-14);
        assert!((period(1.0, 2).unwrap() - 3.708149354602744).abs() < 1e-12);
        assert!((period(16.0, 2).unwrap() / period(1.0, 2).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn period_root() {
        let e = solve_period_equation(2, 2.0 * PI).unwrap();
        assert!((period(e, 2).unwrap() - 2.0 * PI).abs() < 1e-12);
        let closed = (4.0 * period_integral(2).unwrap() / (2.0 * PI)).powi(4);
        assert!((e - closed).abs() < 1e-15);
        assert!(period(e / 2.0, 2).unwrap() > 2.0 * PI && period(2.0 * e, 2).unwrap() < 2.0 * PI);
        assert!(period(0.0, 2).is_err() && period_derivative(-1.0, 2).is_err());
    }

    #[test]
    fn derivative_matches_differences() {
        for d in [2, 3] {
            for e in [0.05, 0.3, 2.0] {
                let h = 1e-5 * e;
                let fd = (period(e + h, d).unwrap() - period(e - h, d).unwrap()) / (2.0 * h);
                let exact = period_derivative(e, d).unwrap();
                assert!(exact < 0.0);
                assert!((fd - exact).abs() < 1e-8 * exact.abs());
            }
        }
    }
}
