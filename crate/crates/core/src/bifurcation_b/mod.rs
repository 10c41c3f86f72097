//! Irrational forcing frequency: the bifurcation equation on `Q` is an ODE in
//! `φ₂`. Its `η → 0` limit `(2+ε)q̈ + ⟨a_{2d−1}⟩ q^{2d−1} = 0` has a
//! non-degenerate 2π-periodic orbit for `d ≥ 2`, which is continued to
//! `η > 0` by Newton's method.

mod continuation;
mod nonexistence;
mod orbit;
mod period;

pub use continuation::{
    continue_in_eta, eta_ladder, ContinuationOptions, ContinuationReport, EtaPoint, JacobianKind,
};
pub use nonexistence::{
    cosine_coefficient, nonexistence_probe, ProbeOptions, ProbeReport, ProbeRow,
};
pub use orbit::{
    limit_orbit, monodromy, monodromy_over, LimitOrbit, MonodromyReport, ENERGY_DRIFT_MAX,
    ORBIT_CSV_POINTS, ORBIT_STEPS,
};
pub use period::{period, period_derivative, period_integral, solve_period_equation};
