//! Fourier series arithmetic and the weighted-norm algebra inequality.

use resonant_waves::fourier::{Axis, Series2D, SpaceWeights, Truncation};

fn main() {
    let u = Series2D::cos_mode(4, 4, (0, 1), 2.0);
    let v =
        Series2D::cos_mode(4, 4, (1, 1), 1.0).axpy(0.5, &Series2D::sin_mode(4, 4, (1, -2), 1.0));

    // 2cos φ₂ · 2cos φ₂ = 2 + 2cos 2φ₂.
    let uu = u.multiply(&u, Truncation::Exact);
    println!(
        "(2cos φ₂)²: mean {:.3}, cos 2φ₂ coefficient {:.3}",
        uu.mean(),
        2.0 * uu.get((0, 2)).re
    );

    for w in [
        SpaceWeights::new(0.0, 0.0),
        SpaceWeights::new(0.1, 0.4),
        SpaceWeights::new(0.5, 0.49),
    ] {
        let lhs = u.multiply(&v, Truncation::Exact).weighted_norm(w);
        let rhs = w.algebra_constant() * u.weighted_norm(w) * v.weighted_norm(w);
        println!(
            "σ = {:<4} s = {:<4}  |uv| = {lhs:.6}  ≤  2^s|u||v| = {rhs:.6}",
            w.sigma, w.s
        );
    }

    // Capped products keep the box and record the discarded mass.
    let capped = v.power(5, Truncation::Cap { m1: 2, m2: 2 });
    println!(
        "v⁵ capped to 2×2: {} modes, tail {:.3e}",
        capped.len(),
        capped.tail()
    );

    let dv = v.partial(Axis::Phi1);
    println!("∂₁v at (0.3, 0.7) = {:.6}", dv.evaluate(0.3, 0.7));
    println!("JSON: {}", v.to_json_string().unwrap());
}
