//! Even-power obstruction: `h(ρ)` keeps the sign of `⟨a⟩` for `f = a(φ₁)u²`.

use resonant_waves::bifurcation_b::{cosine_coefficient, nonexistence_probe, ProbeOptions};
use resonant_waves::harness::default_rho_grid;
use resonant_waves::resonance::FrequencySetup;

fn main() -> resonant_waves::Result<()> {
    let setup = FrequencySetup::case_b(1.618_033_988_749_895, 1e-4, 1e-3)?;
    let a = cosine_coefficient(&[1.0, 1.0], 8);
    let report = nonexistence_probe(
        &a,
        2,
        setup,
        &default_rho_grid(),
        &[1e-4, -2e-4, 3e-4],
        &ProbeOptions::default(),
    )?;
    for r in &report.rows {
        println!(
            "ε = {:+.0e}  ρ = {:.3e}  h = {:.6e}  h/ρ² = {:.6}",
            r.eps, r.rho, r.h, r.ratio
        );
    }
    println!(
        "min h/(⟨a⟩ρ²) = {:.4}, sign change {}, root free {}",
        report.min_relative, report.sign_change, report.root_free
    );
    Ok(())
}
