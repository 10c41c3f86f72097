//! Period map, limit orbit and monodromy of the generating oscillator `ẍ + x^{2d−1} = 0`.

use std::f64::consts::PI;

use resonant_waves::bifurcation_b::{
    limit_orbit, monodromy, period, period_derivative, solve_period_equation,
};

fn main() -> resonant_waves::Result<()> {
    for d in [2, 3] {
        let e = solve_period_equation(d, 2.0 * PI)?;
        println!(
            "d = {d}: E* = {e:.12}, T(E*) − 2π = {:.1e}, dT/dE = {:.6}",
            period(e, d)? - 2.0 * PI,
            period_derivative(e, d)?
        );
    }
    let orbit = limit_orbit(2, 1.0, 1e-4, 32)?;
    println!(
        "amplitude {:.10}, energy drift {:.1e}, odd-harmonic decay {:.4}",
        orbit.amplitude(),
        orbit.energy_drift,
        orbit.decay_rate
    );
    for j in (1..=9).step_by(2) {
        println!("  cos {j}φ₂: {:+.6e}", orbit.cosine[j]);
    }
    let m = monodromy(&orbit);
    println!(
        "monodromy {:?}: trace − 2 = {:.1e}, |M − I| = {:.4}, Floquet defect {:.1e}, nondegenerate {}",
        m.matrix,
        m.trace - 2.0,
        m.distance_from_identity,
        m.floquet_defect,
        m.nondegenerate
    );
    match limit_orbit(2, 1.0, -1e-4, 32) {
        Err(e) => println!("ε⟨a⟩ < 0: {e}"),
        Ok(_) => unreachable!("the sign hypothesis is checked"),
    }
    Ok(())
}
