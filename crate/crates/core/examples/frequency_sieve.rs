//! Divisor sieves for both frequency regimes.

use resonant_waves::resonance::{
    certify_bounds, check_b_gamma, check_c_gamma, rational_witness, sieve_interval, Decomposition,
    FrequencySetup, SieveCase,
};

const GOLDEN: f64 = 1.618_033_988_749_895;

fn main() -> resonant_waves::Result<()> {
    let gamma = 1e-3;

    // Rational forcing frequency: ε itself must be badly approximable.
    for eps in [1e-4, 0.5, 1.0 / 7.0, 1e-3 * std::f64::consts::SQRT_2] {
        let v = check_b_gamma(eps, gamma, 256);
        println!(
            "ε = {eps:<22} accepted {:<5} witness {:?}",
            v.accepted(),
            v.witness()
        );
    }
    println!(
        "1/7 as a dyadic rational has convergent {:?}",
        rational_witness(1.0 / 7.0, 64, 1e-12)
    );

    // Irrational forcing frequency: the pair (ε, ω₁).
    println!(
        "(1e-4, golden) accepted {}",
        check_c_gamma(1e-4, GOLDEN, gamma, 256).accepted()
    );
    println!(
        "(1e-4, 1.5)    accepted {}",
        check_c_gamma(1e-4, 1.5, gamma, 256).accepted()
    );

    let scan = sieve_interval(
        SieveCase::B { omega1: GOLDEN },
        (-1e-3, 1e-3),
        gamma,
        256,
        40,
    )?;
    println!(
        "{} of {} points of [-1e-3, 1e-3] accepted",
        scan.accepted().count(),
        scan.points.len()
    );
    scan.write_csv(std::io::stdout().lock())?;

    // Certified bound on the range: min |D_l| over P against γ/m².
    let dec = Decomposition::new(FrequencySetup::case_a(1, 1, 1e-4, gamma)?, 64, 64, 8)?;
    let b = certify_bounds(&dec);
    println!(
        "min |D| on P = {:.4} at {:?}, threshold {:.1e}, pass {}",
        b.min_abs_on_p, b.argmin, b.threshold, b.pass
    );
    Ok(())
}
