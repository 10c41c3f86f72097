use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Result};
use crate::fourier::Mode;

/// Largest denominator the rationality surrogate looks at.
pub const RATIONAL_DENOMINATOR_MAX: u64 = 1_000_000;
/// Match tolerance of the rationality surrogate.
pub const RATIONAL_MATCH_TOL: f64 = 1e-15;

/// Which small-divisor condition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `|l₁ + εl₂| > γ/|l₂|`.
    BGamma,
    /// `|ω₁l₁ + εl₂| > γ/(|l₁| + |l₂|)`.
    First,
    /// `|ω₁l₁ + (2+ε)l₂| > γ/(|l₁| + |l₂|)`.
    Second,
    /// `ω₁` is within tolerance of a low-denominator rational.
    RationalOmega1,
    /// `ω₁/ω₂` is within tolerance of a low-denominator rational.
    RationalRatio,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SieveVerdict {
    Accept,
    Reject { witness: Mode, condition: Condition },
}

impl SieveVerdict {
    pub fn accepted(&self) -> bool {
        matches!(self, SieveVerdict::Accept)
    }

    pub fn witness(&self) -> Option<Mode> {
        match self {
            SieveVerdict::Accept => None,
            SieveVerdict::Reject { witness, .. } => Some(*witness),
        }
    }
}

/// Checks `|l₁ + εl₂| > γ/|l₂|` for `0 < |l₂| ≤ lmax`, `l₁ ≠ 0`.
///
/// Only the two integers nearest `−εl₂` can fail since `γ/|l₂| < 1`. The scan
/// runs over `|l₂|` ascending, positive `l₂` first, so the witness has minimal `|l₂|`.
pub fn check_b_gamma(eps: f64, gamma: f64, lmax: i32) -> SieveVerdict {
    assert!(lmax >= 1, "lmax must be positive");
    for a in 1..=lmax {
        for l2 in [a, -a] {
            let x = -eps * f64::from(l2);
            for l1 in [x.floor() as i32, x.ceil() as i32] {
                if l1 == 0 {
                    continue;
                }
                if (f64::from(l1) + eps * f64::from(l2)).abs() <= gamma / f64::from(a) {
                    return SieveVerdict::Reject {
                        witness: (l1, l2),
                        condition: Condition::BGamma,
                    };
                }
            }
        }
    }
    SieveVerdict::Accept
}

/// Best rational approximation check: `Some((p, q))` when a continued-fraction
/// convergent with `q ≤ qmax` lies within `tol` of `x`.
///
/// The input is expanded exactly as the dyadic rational it is.
pub fn rational_witness(x: f64, qmax: u64, tol: f64) -> Option<(i128, u64)> {
    if !x.is_finite() {
        return None;
    }
    let bits = x.abs().to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    if mant == 0 {
        return Some((0, 1));
    }
    // x = mant · 2^e; keep numerator and denominator in u128.
    let (mut num, mut den): (u128, u128) = if e >= 0 {
        if e > 60 {
            return None;
        }
        ((mant as u128) << e, 1)
    } else if -e <= 120 {
        (mant as u128, 1u128 << (-e))
    } else {
        return None;
    };
    let sign: i128 = if x < 0.0 { -1 } else { 1 };
    let (mut h0, mut h1): (u128, u128) = (0, 1);
    let (mut k0, mut k1): (u128, u128) = (1, 0);
    while den != 0 {
        let a = num / den;
        (num, den) = (den, num % den);
        let h2 = a.checked_mul(h1).and_then(|v| v.checked_add(h0))?;
        let k2 = a.checked_mul(k1).and_then(|v| v.checked_add(k0))?;
        if k2 > u128::from(qmax) {
            return None;
        }
        if (x.abs() - h2 as f64 / k2 as f64).abs() <= tol {
            return Some((sign * h2 as i128, k2 as u64));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

/// Checks both `C_γ` conditions for `1 ≤ |l₁|, |l₂| ≤ lmax` plus the rationality surrogates.
///
/// Pairs are scanned by `|l₁| + |l₂|` ascending, `l₁ > 0`, positive `l₂` first;
/// the conditions are invariant under `l ↦ −l`.
pub fn check_c_gamma(eps: f64, omega1: f64, gamma: f64, lmax: i32) -> SieveVerdict {
    assert!(lmax >= 1, "lmax must be positive");
    if let Some((p, q)) = rational_witness(omega1, RATIONAL_DENOMINATOR_MAX, RATIONAL_MATCH_TOL) {
        return SieveVerdict::Reject {
            witness: (-(p as i32), q as i32),
            condition: Condition::RationalOmega1,
        };
    }
    if let Some((p, q)) = rational_witness(
        omega1 / (1.0 + eps),
        RATIONAL_DENOMINATOR_MAX,
        RATIONAL_MATCH_TOL,
    ) {
        return SieveVerdict::Reject {
            witness: (-(p as i32), q as i32),
            condition: Condition::RationalRatio,
        };
    }
    for total in 2..=2 * lmax {
        for l1 in (total - lmax).max(1)..=lmax.min(total - 1) {
            let a2 = total - l1;
            for l2 in [a2, -a2] {
                let bound = gamma / f64::from(total);
                let (x1, x2) = (omega1 * f64::from(l1), f64::from(l2));
                if (x1 + eps * x2).abs() <= bound {
                    return SieveVerdict::Reject {
                        witness: (l1, l2),
                        condition: Condition::First,
                    };
                }
                if (x1 + (2.0 + eps) * x2).abs() <= bound {
                    return SieveVerdict::Reject {
                        witness: (l1, l2),
                        condition: Condition::Second,
                    };
                }
            }
        }
    }
    SieveVerdict::Accept
}

/// Parameter family being sieved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SieveCase {
    /// `ε ∈ B_γ`; `ω₁ = n/m` is only recorded.
    A { omega1: f64 },
    /// `(ε, ω₁) ∈ C_γ` at fixed `ω₁`.
    B { omega1: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SievePoint {
    pub eps: f64,
    pub verdict: SieveVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct SieveScan {
    pub case: SieveCase,
    pub gamma: f64,
    pub lmax: i32,
    pub points: Vec<SievePoint>,
}

impl SieveScan {
    pub fn accepted(&self) -> impl Iterator<Item = f64> + '_ {
        self.points
            .iter()
            .filter(|p| p.verdict.accepted())
            .map(|p| p.eps)
    }

    /// CSV with columns `case, eps, omega1, gamma, Lmax, accepted, witness_l1, witness_l2`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "case",
            "eps",
            "omega1",
            "gamma",
            "Lmax",
            "accepted",
            "witness_l1",
            "witness_l2",
        ])?;
        let (tag, omega1) = match self.case {
            SieveCase::A { omega1 } => ("A", omega1),
            SieveCase::B { omega1 } => ("B", omega1),
        };
        for p in &self.points {
            let (w1, w2) = p
                .verdict
                .witness()
                .map(|l| (l.0.to_string(), l.1.to_string()))
                .unwrap_or_default();
            w.write_record([
                tag.to_string(),
                format!("{:e}", p.eps),
                omega1.to_string(),
                format!("{:e}", self.gamma),
                self.lmax.to_string(),
                p.verdict.accepted().to_string(),
                w1,
                w2,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Midpoint candidates `a + (b−a)(i+½)/count`, exact zero skipped, each sieved.
pub fn sieve_interval(
    case: SieveCase,
    interval: (f64, f64),
    gamma: f64,
    lmax: i32,
    count: usize,
) -> Result<SieveScan> {
    if count == 0 {
        return Err(precondition("sieve count must be at least 1"));
    }
    if lmax < 1 {
        return Err(precondition("Lmax must be at least 1"));
    }
    let (a, b) = interval;
    if !(a < b) {
        return Err(precondition(format!("empty interval ({a}, {b})")));
    }
    let candidates: Vec<f64> = (0..count)
        .map(|i| a + (b - a) * (i as f64 + 0.5) / count as f64)
        .filter(|&e| e != 0.0)
        .collect();
    let points = candidates
        .par_iter()
        .map(|&eps| {
            let verdict = match case {
                SieveCase::A { .. } => check_b_gamma(eps, gamma, lmax),
                SieveCase::B { omega1 } => check_c_gamma(eps, omega1, gamma, lmax),
            };
            SievePoint { eps, verdict }
        })
        .collect();
    Ok(SieveScan {
        case,
        gamma,
        lmax,
        points,
    })
}
