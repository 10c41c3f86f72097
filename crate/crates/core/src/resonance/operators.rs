use serde::Serialize;

use super::decomposition::{Decomposition, IndexClass, Target};
use crate::error::{precondition, Error, Result};
use crate::fourier::{Mode, Series2D};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OperatorKind {
    /// `L_ε = [ω₁∂₁ + ε∂₂][ω₁∂₁ + (2+ε)∂₂]`.
    Leps,
    /// `L₁ = (2+ε)∂₂² + 2ω₁∂₁∂₂`, used on the kernel.
    L1,
}

/// Constant-coefficient operator acting diagonally on Fourier modes.
///
/// `eigenvalue` returns `D_l = (ω₁l₁+εl₂)(ω₁l₁+(2+ε)l₂)` for `L_ε`, whose true
/// multiplier on `e^{il·φ}` is `−D_l`, and `d_l = −(2+ε)l₂² − 2ω₁l₁l₂` for
/// `L₁`, which is its multiplier. On the kernel `−D_l = ε d_l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagonalOperator {
    pub kind: OperatorKind,
    pub omega1: f64,
    pub eps: f64,
}

impl DiagonalOperator {
    pub fn leps(omega1: f64, eps: f64) -> Self {
        DiagonalOperator {
            kind: OperatorKind::Leps,
            omega1,
            eps,
        }
    }

    pub fn l1(omega1: f64, eps: f64) -> Self {
        DiagonalOperator {
            kind: OperatorKind::L1,
            omega1,
            eps,
        }
    }

    pub fn eigenvalue(&self, l: Mode) -> f64 {
        let (l1, l2) = (f64::from(l.0), f64::from(l.1));
        let w = self.omega1 * l1;
        match self.kind {
            // `w + 2l₂` is exact near resonance; adding `εl₂` last keeps the O(ε) part.
            OperatorKind::Leps => (w + self.eps * l2) * ((w + 2.0 * l2) + self.eps * l2),
            OperatorKind::L1 => -(2.0 + self.eps) * l2 * l2 - 2.0 * w * l2,
        }
    }

    /// Fourier multiplier of the operator.
    pub fn symbol(&self, l: Mode) -> f64 {
        match self.kind {
            OperatorKind::Leps => -self.eigenvalue(l),
            OperatorKind::L1 => self.eigenvalue(l),
        }
    }

    pub fn apply(&self, u: &Series2D) -> Series2D {
        u.map_canonical(|l, c| c * self.symbol(l))
    }

    /// In-box indices where the eigenvalue vanishes within `tol`.
    pub fn kernel_indices(&self, m1: i32, m2: i32, tol: f64) -> Vec<Mode> {
        let mut out = Vec::new();
        for l1 in -m1..=m1 {
            for l2 in -m2..=m2 {
                if self.eigenvalue((l1, l2)).abs() <= tol {
                    out.push((l1, l2));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    /// `min |D_l|` over in-box range indices.
    pub min_abs_on_p: f64,
    pub argmin: Mode,
    /// `γ/m²`.
    pub threshold: f64,
    /// `min |d_l| / ((2−|ε|)N²)` over `Q₂`; `+∞` when `Q₂` is empty.
    pub q2_ratio: f64,
    pub pass: bool,
}

/// Exhaustive certification of the small divisors the truncated solver inverts.
pub fn certify_bounds(dec: &Decomposition) -> BoundReport {
    let setup = dec.setup;
    let leps = DiagonalOperator::leps(setup.omega1(), setup.eps);
    let l1op = DiagonalOperator::l1(setup.omega1(), setup.eps);
    let mut min_abs_on_p = f64::INFINITY;
    let mut argmin = (0, 0);
    for l in dec.indices(Target::P) {
        let v = leps.eigenvalue(l).abs();
        if v < min_abs_on_p {
            min_abs_on_p = v;
            argmin = l;
        }
    }
    let q2_floor = (2.0 - setup.eps.abs()) * f64::from(dec.n_cut).powi(2);
    let q2_ratio = dec
        .indices(Target::Q2)
        .into_iter()
        .map(|l| l1op.eigenvalue(l).abs() / q2_floor)
        .fold(f64::INFINITY, f64::min);
    let threshold = setup.divisor_threshold();
    BoundReport {
        min_abs_on_p,
        argmin,
        threshold,
        q2_ratio,
        pass: min_abs_on_p > threshold && q2_ratio >= 1.0,
    }
}

/// Inverses of `L_ε` on `P` and of `L₁` on `Q₂`, available only after certification.
#[derive(Clone, Debug)]
pub struct CertifiedOperators {
    pub dec: Decomposition,
    pub leps: DiagonalOperator,
    pub l1: DiagonalOperator,
    pub report: BoundReport,
}

impl CertifiedOperators {
    pub fn new(dec: &Decomposition) -> Result<Self> {
        let report = certify_bounds(dec);
        if report.min_abs_on_p <= report.threshold {
            return Err(Error::Uncertified {
                mode: report.argmin,
                value: report.min_abs_on_p,
                threshold: report.threshold,
            });
        }
        if report.q2_ratio < 1.0 {
            return Err(precondition(format!(
                "|d_l| falls below (2−|ε|)N² on Q2 (ratio {})",
                report.q2_ratio
            )));
        }
        let setup = dec.setup;
        Ok(CertifiedOperators {
            dec: dec.clone(),
            leps: DiagonalOperator::leps(setup.omega1(), setup.eps),
            l1: DiagonalOperator::l1(setup.omega1(), setup.eps),
            report,
        })
    }

    /// Solves `L_ε p = h` for `h` on `P`: `p̂_l = −ĥ_l / D_l`.
    pub fn invert_on_p(&self, h: &Series2D) -> Result<Series2D> {
        self.dec.check_support(h, Target::P)?;
        let p = h.map_canonical(|l, c| c / self.leps.symbol(l));
        debug_assert!(p.l1_norm() <= h.l1_norm() / self.report.threshold * (1.0 + 1e-12));
        Ok(p)
    }

    /// Solves `L₁ q = h` for `h` on `Q₂`.
    pub fn invert_l1_on_q2(&self, h: &Series2D) -> Result<Series2D> {
        self.dec.check_support(h, Target::Q2)?;
        let q = h.map_canonical(|l, c| c / self.l1.symbol(l));
        let floor = (2.0 - self.dec.setup.eps.abs()) * f64::from(self.dec.n_cut).powi(2);
        debug_assert!(q.l1_norm() <= h.l1_norm() / floor * (1.0 + 1e-12));
        Ok(q)
    }

    /// `L₁` applied to a kernel series.
    pub fn apply_l1(&self, q: &Series2D) -> Series2D {
        self.l1.apply(q)
    }

    pub fn is_kernel(&self, l: Mode) -> bool {
        self.dec.classify(l) != IndexClass::Range
    }
}
