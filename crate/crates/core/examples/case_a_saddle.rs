//! Rational forcing frequency: critical point of the reduced action and linking geometry.

use std::path::Path;

use resonant_waves::harness::{solve_case_a, Diagnostics, RunConfig};

fn main() -> resonant_waves::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/caseA_n1m1.toml");
    let cfg = RunConfig::from_path(&path)?;
    let r = solve_case_a(&cfg)?;
    let Diagnostics::A(a) = &r.diagnostics else {
        unreachable!("case a config")
    };
    println!(
        "critical value {:.6}, |∇Φ| = {:.2e}, |q₁*|_H¹ = {:.4}, seed {}",
        a.value, a.grad_norm, a.h1_norm, a.seed_index
    );
    println!(
        "minimax estimate {:.6}, linking level {:.6}",
        a.minimax_estimate, a.linking.omega_level
    );
    println!(
        "linking: min on sphere {:.4} ≥ max on boundary {:.3e}: {}",
        a.linking.min_on_sphere, a.linking.max_on_boundary, a.linking.pass
    );
    println!(
        "rescaled residual {:.2e}, PDE residual {:.2e} (target {:.0e})",
        a.equation_residual,
        r.residual(),
        r.residual_target
    );
    println!("|p|_(σ/4,s+2)·γω₁³/(m²|ε|) = {:.4}", a.p_ratio);
    println!(
        "masses m₁ = {:.3e}, m₂ = {:.3e}, pass {}",
        r.masses.m1, r.masses.m2, r.pass
    );
    Ok(())
}
