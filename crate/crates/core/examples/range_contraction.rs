//! Picard iteration for the range equations at fixed kernel data.

use resonant_waves::fourier::{Harmonic, Nonlinearity, Series2D};
use resonant_waves::range_solver::{RangeOptions, RangeSolver};
use resonant_waves::resonance::{Decomposition, FrequencySetup};

fn main() -> resonant_waves::Result<()> {
    // a₃(φ₁) = 1 + cos φ₁, d = 2, ω₁ = 1.
    let nl = Nonlinearity::from_tables(
        2,
        &[vec![Harmonic::new(0, 1.0, 0.0), Harmonic::new(1, 1.0, 0.0)]],
        10.0,
    )?;
    let q1 = Series2D::cos_mode(16, 16, (0, 1), 1.0);
    for eps in [1e-5, 3e-5, 1e-4, 3e-4] {
        let dec = Decomposition::new(FrequencySetup::case_a(1, 1, eps, 1e-3)?, 16, 16, 4)?;
        let solver = RangeSolver::new(&dec, &nl, RangeOptions::default())?;
        let zero = Series2D::zero(16, 16);
        let (_, p1) = solver.picard_map(&q1, &zero, &zero)?;
        let sol = solver.solve_q2_p(&q1)?;
        println!(
            "ε = {eps:.0e}: {} steps, rate {:.2e}, first p̂(1,1) = {:.6e} (hand {:.6e}), |p|γ/|ε| = {:.4}, |q₂|N² = {:.4}",
            sol.iterations,
            sol.contraction_rate,
            p1.get((1, 1)).re,
            eps * (3.0 / 16.0) / ((1.0 + eps) * (3.0 + eps)),
            sol.bounds.p_scaled,
            sol.bounds.q2_scaled,
        );
    }
    Ok(())
}
