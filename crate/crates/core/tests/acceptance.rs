//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the lines always print under `cargo test`.

use std::f64::consts::{PI, SQRT_2};
use std::path::Path;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resonant_waves::bifurcation_a::{
    default_seeds, embed_orbit, find_critical_point, phase_align, verify_linking_geometry,
    ReducedFunctional, SearchOptions,
};
use resonant_waves::bifurcation_b::{
    cosine_coefficient, limit_orbit, monodromy, nonexistence_probe, period, period_derivative,
    solve_period_equation, ProbeOptions,
};
use resonant_waves::fourier::{Harmonic, Nonlinearity, Series2D, SpaceWeights, Truncation};
use resonant_waves::harness::{default_rho_grid, random_q1, scaling_scan, solve_case_b, RunConfig};
use resonant_waves::range_solver::{RangeOptions, RangeSolver};
use resonant_waves::resonance::{
    certify_bounds, check_b_gamma, check_c_gamma, Decomposition, FrequencySetup,
};

const GOLDEN: f64 = 1.618_033_988_749_895;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> resonant_waves::Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn one_plus_cos() -> Nonlinearity {
    Nonlinearity::from_tables(
        2,
        &[vec![Harmonic::new(0, 1.0, 0.0), Harmonic::new(1, 1.0, 0.0)]],
        10.0,
    )
    .unwrap()
}

fn config(name: &str) -> RunConfig {
    RunConfig::from_path(
        &Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name),
    )
    .unwrap()
}

fn random_series(rng: &mut ChaCha8Rng, m: i32) -> Series2D {
    let mut u = Series2D::zero(m, m);
    for _ in 0..rng.random_range(1..=12) {
        let l = (rng.random_range(-m..=m), rng.random_range(0..=m));
        let c = if l == (0, 0) {
            Complex64::new(rng.random_range(-1.0..1.0), 0.0)
        } else {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        };
        u.set(l, c);
    }
    u
}

fn banach_algebra() -> resonant_waves::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let weights = [
        SpaceWeights::new(0.0, 0.0),
        SpaceWeights::new(0.1, 0.4),
        SpaceWeights::new(0.5, 0.49),
    ];
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (u, v) = (random_series(&mut rng, 6), random_series(&mut rng, 6));
        let uv = u.multiply(&v, Truncation::Exact);
        for w in weights {
            worst = worst.max(
                uv.weighted_norm(w)
                    / (w.algebra_constant() * u.weighted_norm(w) * v.weighted_norm(w)),
            );
        }
    }
    let u = Series2D::cos_mode(2, 2, (0, 1), 2.0);
    let w0 = SpaceWeights::new(0.0, 0.0);
    let equality =
        u.multiply(&u, Truncation::Exact).weighted_norm(w0) - u.weighted_norm(w0).powi(2);
    outcome(
        worst <= 1.0 + 1e-12 && equality.abs() < 1e-14,
        format!(
            "max |uv|/(2^s|u||v|) = {worst:.6} over 3000 checks; equality defect {equality:.1e}"
        ),
    )
}

fn sieve_certification() -> resonant_waves::Result<Outcome> {
    let gamma = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut a_ok, mut a_min) = (0, f64::INFINITY);
    while a_ok < 20 {
        let eps = rng.random_range(1e-5..1e-2) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        if !check_b_gamma(eps, gamma, 256).accepted() {
            continue;
        }
        let dec = Decomposition::new(FrequencySetup::case_a(1, 1, eps, gamma)?, 64, 64, 8)?;
        let b = certify_bounds(&dec);
        if !(b.min_abs_on_p > gamma) {
            return outcome(
                false,
                format!("case A ε = {eps}: min |D| = {:.3e}", b.min_abs_on_p),
            );
        }
        a_min = a_min.min(b.min_abs_on_p);
        a_ok += 1;
    }
    let (mut b_ok, mut b_min) = (0, f64::INFINITY);
    while b_ok < 20 {
        let eps = rng.random_range(1e-5..1e-2) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let omega1 = rng.random_range(1.05..1.95);
        if !check_c_gamma(eps, omega1, gamma, 256).accepted() {
            continue;
        }
        let b = certify_bounds(&Decomposition::case_b(
            FrequencySetup::case_b(omega1, eps, gamma)?,
            64,
            64,
        )?);
        if !(b.min_abs_on_p > gamma) {
            return outcome(
                false,
                format!(
                    "case B (ε, ω₁) = ({eps}, {omega1}): min |D| = {:.3e}",
                    b.min_abs_on_p
                ),
            );
        }
        b_min = b_min.min(b.min_abs_on_p);
        b_ok += 1;
    }
    // Nonzero rationals; ε = 0 satisfies the defining inequalities vacuously.
    let mut rationals = 0;
    for q in 1..=64i32 {
        for p in -q + 1..q {
            if p == 0 || gcd(p.unsigned_abs(), q as u32) != 1 {
                continue;
            }
            let eps = f64::from(p) / f64::from(q);
            if check_b_gamma(eps, gamma, 256).accepted() {
                return outcome(false, format!("rational ε = {p}/{q} accepted"));
            }
            rationals += 1;
        }
    }
    outcome(
        true,
        format!("case A min |D| {a_min:.3e} > γ/m² = {gamma:.0e}; case B min |D| {b_min:.3e} > γ; {rationals} rationals rejected"),
    )
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn range_contraction() -> resonant_waves::Result<Outcome> {
    let gamma = 1e-3;
    let nl = one_plus_cos();
    let ladder = [1e-5, 2e-5, 5e-5, 1e-4];
    let mut rich = Series2D::cos_mode(16, 16, (0, 1), 1.0);
    rich.set((-2, 1), Complex64::new(0.2, 0.0));
    let (mut worst_rate, mut ratios, mut hand_err) = (0.0f64, Vec::new(), 0.0f64);
    for eps in ladder {
        assert!(eps / gamma <= 0.1 && check_b_gamma(eps, gamma, 256).accepted());
        let dec = Decomposition::new(FrequencySetup::case_a(1, 1, eps, gamma)?, 16, 16, 4)?;
        let solver = RangeSolver::new(&dec, &nl, RangeOptions::default())?;
        let zero = Series2D::zero(16, 16);
        let (_, p1) = solver.picard_map(&Series2D::cos_mode(16, 16, (0, 1), 1.0), &zero, &zero)?;
        // |p̂(1,1)| = ε(3/16)/((1+ε)(3+ε)); the sign is that of the true inverse of L_ε.
        let hand = eps * (3.0 / 16.0) / ((1.0 + eps) * (3.0 + eps));
        hand_err = hand_err.max((p1.get((1, 1)).norm() - hand).abs());
        let sol = solver.solve_q2_p(&rich)?;
        worst_rate = worst_rate.max(sol.contraction_rate);
        ratios.push(sol.bounds.p_scaled);
    }
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    outcome(
        worst_rate < 0.5 && hand_err < 1e-10 && hi / lo <= 2.0,
        format!(
            "rate {worst_rate:.3e}; |p̂(1,1)| error {hand_err:.1e}; |p|γ/|ε| spread {:.4}",
            hi / lo
        ),
    )
}

/// `∫₀¹ dx/√(2(1 − x^{2d})) = B(1/(2d), 1/2) / (2d√2)`.
fn beta_integral(d: u32) -> f64 {
    let k = 2.0 * f64::from(d);
    statrs::function::beta::beta(1.0 / k, 0.5) / (k * SQRT_2)
}

fn period_map() -> resonant_waves::Result<Outcome> {
    let e2 = solve_period_equation(2, 2.0 * PI)?;
    let t_err = (period(e2, 2)? - 2.0 * PI).abs();
    // T(E) = 4E^{1/(2d)−1/2} I_d  ⇒  E* = (π/(2I_d))^{1/(1/(2d)−1/2)}.
    let closed = (PI / (2.0 * beta_integral(2))).powf(1.0 / (0.25 - 0.5));
    let e_err = (e2 - closed).abs();
    let d1_err = (period(0.37, 1)? - PI * SQRT_2).abs();
    let mut decreasing = true;
    for d in [2, 3] {
        for i in 0..20 {
            let e = 0.05 * 1.2f64.powi(i);
            decreasing &= period_derivative(e, d)? < 0.0 && period(e * 1.001, d)? < period(e, d)?;
        }
    }
    outcome(
        t_err < 1e-12 && e_err < 1e-10 && d1_err < 1e-12 && decreasing,
        format!("|T(E*)−2π| {t_err:.1e}; |E* − Beta form| {e_err:.1e}; d=1 |T−π√2| {d1_err:.1e}; dT/dE<0: {decreasing}"),
    )
}

fn monodromy_check() -> resonant_waves::Result<Outcome> {
    let orbit = limit_orbit(2, 1.0, 1e-4, 32)?;
    let m = monodromy(&orbit);
    let trace = (m.trace - 2.0).abs();
    // The flow direction at the turning point is (0, 1): M must fix it.
    let fixed = m.matrix[0][1].abs().max((m.matrix[1][1] - 1.0).abs());
    outcome(
        trace < 1e-6 && m.distance_from_identity > 1e-3 && fixed < 1e-8 && m.floquet_defect < 1e-8,
        format!(
            "|tr M − 2| {trace:.1e}; |M − I| {:.4}; |M(0,1)ᵀ − (0,1)ᵀ| {fixed:.1e}; Floquet defect {:.1e}",
            m.distance_from_identity, m.floquet_defect
        ),
    )
}

fn case_b_end_to_end() -> resonant_waves::Result<Outcome> {
    let t = Instant::now();
    let r = solve_case_b(&config("caseB_d2.toml"))?;
    let dt = t.elapsed();
    let pass = r.residual() < 1e-8
        && r.masses.m1 > 0.0
        && r.masses.m2 > 0.0
        && dt < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "residual {:.2e} in (σ, s) = ({}, {}); masses ({:.2e}, {:.2e}); {:.2?}",
            r.residual(),
            r.weights.sigma,
            r.weights.s,
            r.masses.m1,
            r.masses.m2,
            dt
        ),
    )
}

fn scaling_exponents() -> resonant_waves::Result<Outcome> {
    let r = scaling_scan(&config("caseB_d2.toml"))?;
    let used = r.rows.iter().filter(|row| row.accepted).count();
    outcome(
        used == 6
            && (r.amplitude_slope - 0.5).abs() <= 0.05
            && (r.correction_slope - 1.5).abs() <= 0.1,
        format!(
            "{used} points; amplitude slope {:.4}; correction slope {:.4}",
            r.amplitude_slope, r.correction_slope
        ),
    )
}

fn case_a_cross_validation() -> resonant_waves::Result<Outcome> {
    let eps = 1e-4;
    let dec = Decomposition::new(FrequencySetup::case_a(1, 1, eps, 1e-3)?, 8, 8, 4)?;
    let opts = RangeOptions {
        weights: SpaceWeights::new(0.25, 0.4),
        ..RangeOptions::default()
    };
    let rf = ReducedFunctional::new(&dec, &Nonlinearity::monomial(2, 2.0)?, opts)?;
    let search = SearchOptions::default();
    // No orbit seed: the search must find the orbit on its own.
    let cp = find_critical_point(&rf, &default_seeds(&rf, &search, None), &search)?;
    let orbit = limit_orbit(2, 2.0, eps, 24)?;
    let (theta, dist) = phase_align(&cp.q1, &embed_orbit(&orbit, &dec), &dec);
    let link = verify_linking_geometry(&rf, &cp.geometry);
    let pass = dist < 1e-3 && link.pass && link.min_on_sphere >= 2.0 * link.max_on_boundary;
    outcome(
        pass,
        format!(
            "H¹ distance {dist:.2e} at shift {theta:.4}; min on sphere {:.4} vs max on boundary {:.2e}",
            link.min_on_sphere, link.max_on_boundary
        ),
    )
}

fn gradient_identity() -> resonant_waves::Result<Outcome> {
    let dec = Decomposition::new(FrequencySetup::case_a(1, 1, 1e-4, 1e-3)?, 8, 8, 4)?;
    let opts = RangeOptions {
        weights: SpaceWeights::new(0.25, 0.4),
        ..RangeOptions::default()
    };
    let rf = ReducedFunctional::new(&dec, &one_plus_cos(), opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let q = random_q1(&rf, &mut rng, 1.0);
    let g = rf.coordinate_gradient(&rf.evaluate(&q)?);
    let x = rf.to_coords(&q);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let dir = DVector::from_fn(rf.dim(), |_, _| rng.random_range(-1.0..1.0));
        let dir = &dir / dir.norm();
        let h = 1e-4;
        let plus = rf.evaluate(&rf.to_series(&(&x + &dir * h)))?.value;
        let minus = rf.evaluate(&rf.to_series(&(&x - &dir * h)))?.value;
        let fd = (plus - minus) / (2.0 * h);
        let exact = g.dot(&dir);
        worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
    }
    let mut identity = 0.0f64;
    for size in [0.5, 1.0, 1.5] {
        identity = identity.max(rf.homogeneity_residual(&random_q1(&rf, &mut rng, size))?.0);
    }
    outcome(
        worst < 1e-6 && identity < 1e-10,
        format!("gradient relative error {worst:.1e}; identity residual {identity:.1e}"),
    )
}

fn even_power_probe() -> resonant_waves::Result<Outcome> {
    let eps = [1e-4, -2e-4, 3e-4];
    for &e in &eps {
        assert!(check_c_gamma(e, GOLDEN, 1e-3, 256).accepted());
    }
    let setup = FrequencySetup::case_b(GOLDEN, eps[0], 1e-3)?;
    let rho = default_rho_grid();
    let report = nonexistence_probe(
        &cosine_coefficient(&[1.0, 1.0], 8),
        2,
        setup,
        &rho,
        &eps,
        &ProbeOptions::default(),
    )?;
    let worst = report
        .rows
        .iter()
        .map(|r| r.h / (0.5 * r.rho * r.rho))
        .fold(f64::INFINITY, f64::min);
    outcome(
        worst >= 1.0 && !report.sign_change && rho[0] <= 1e-3 && *rho.last().unwrap() >= 1e-1,
        format!(
            "min h/(0.5ρ²) = {worst:.4} over {} points; sign change: {}",
            report.rows.len(),
            report.sign_change
        ),
    )
}

fn main() {
    type Criterion = fn() -> resonant_waves::Result<Outcome>;
    let criteria: [(&str, Criterion, Option<u64>); 10] = [
        ("weighted-norm algebra inequality", banach_algebra, Some(10)),
        (
            "sieve and bound certification",
            sieve_certification,
            Some(30),
        ),
        ("range contraction", range_contraction, None),
        ("period map", period_map, None),
        ("monodromy", monodromy_check, None),
        (
            "irrational-frequency end-to-end solve",
            case_b_end_to_end,
            Some(60),
        ),
        ("scaling exponents", scaling_exponents, None),
        (
            "rational-frequency cross-validation",
            case_a_cross_validation,
            None,
        ),
        ("gradient and homogeneity identity", gradient_identity, None),
        ("even-power obstruction probe", even_power_probe, None),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let dt = t.elapsed();
        let in_time = limit.is_none_or(|s| dt < Duration::from_secs(s));
        let pass = pass && in_time;
        failures += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.2?}{}]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            dt,
            limit.map(|s| format!(" < {s}s")).unwrap_or_default()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
