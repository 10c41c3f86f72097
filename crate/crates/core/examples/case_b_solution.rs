//! Irrational forcing frequency: continuation from the limit orbit, assembly and checks.

use std::path::Path;

use resonant_waves::harness::{solve_case_b, Diagnostics, RunConfig};

fn main() -> resonant_waves::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/caseB_d2.toml");
    let cfg = RunConfig::from_path(&path)?;
    let r = solve_case_b(&cfg)?;
    println!(
        "ε = {}, δ = {}, ω = ({}, {})",
        r.eps, r.delta, r.omega1, r.omega2
    );
    for e in &r.residuals {
        println!(
            "  residual in (σ = {}, s = {}): {:.3e}",
            e.sigma, e.s, e.residual
        );
    }
    println!(
        "|u| = {:.6e}, |u − δq̄| = {:.3e}, ratio to δ|ε|/γ = {:.4}",
        r.amplitude, r.correction, r.correction_ratio
    );
    println!(
        "masses m₁ = {:.3e}, m₂ = {:.3e}, quasi-periodic {}",
        r.masses.m1, r.masses.m2, r.masses.pass
    );
    if let Diagnostics::B(b) = &r.diagnostics {
        println!("η ladder {:?}", b.ladder);
        println!(
            "Newton steps {}, |q̄_δ − q̄| = {:.3e}, |p|γ/η² = {:.4}",
            b.newton_iterations, b.orbit_shift, b.p_ratio
        );
    }
    println!("pass {}", r.pass);
    Ok(())
}
