//! Property tests for the structural invariants of each layer.

use num_complex::Complex64;
use proptest::prelude::*;
use resonant_waves::bifurcation_a::ReducedFunctional;
use resonant_waves::bifurcation_b::{limit_orbit, period};
use resonant_waves::fourier::{Axis, Harmonic, Nonlinearity, Series2D, SpaceWeights, Truncation};
use resonant_waves::harness::pde_residual;
use resonant_waves::range_solver::{RangeOptions, RangeSolver};
use resonant_waves::resonance::{
    certify_bounds, check_b_gamma, Decomposition, DiagonalOperator, FrequencySetup, IndexClass,
    Target,
};

const GOLDEN: f64 = 1.618_033_988_749_895;

fn series(m: i32, max_terms: usize) -> impl Strategy<Value = Series2D> {
    prop::collection::vec(
        ((-m..=m, 0..=m), (-1.0..1.0f64, -1.0..1.0f64)),
        1..=max_terms,
    )
    .prop_map(move |terms| {
        let mut u = Series2D::zero(m, m);
        for (l, (re, im)) in terms {
            u.set(l, Complex64::new(re, if l == (0, 0) { 0.0 } else { im }));
        }
        u
    })
}

fn weights() -> impl Strategy<Value = SpaceWeights> {
    (0.0..0.6f64, 0.0..0.5f64).prop_map(|(sigma, s)| SpaceWeights::new(sigma, s))
}

fn one_plus_cos() -> Nonlinearity {
    Nonlinearity::from_tables(
        2,
        &[vec![Harmonic::new(0, 1.0, 0.0), Harmonic::new(1, 1.0, 0.0)]],
        10.0,
    )
    .unwrap()
}

fn case_a(eps: f64, box_: i32, n: i32) -> Decomposition {
    Decomposition::new(
        FrequencySetup::case_a(1, 1, eps, 1e-3).unwrap(),
        box_,
        box_,
        n,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn algebra_inequality(u in series(5, 10), v in series(5, 10), w in weights()) {
        let lhs = u.multiply(&v, Truncation::Exact).weighted_norm(w);
        prop_assert!(lhs <= w.algebra_constant() * u.weighted_norm(w) * v.weighted_norm(w) * (1.0 + 1e-12));
    }

    #[test]
    fn reality_is_preserved(u in series(4, 8), v in series(4, 8)) {
        prop_assert_eq!(u.multiply(&v, Truncation::Exact).reality_defect(), 0.0);
        prop_assert_eq!(u.multiply(&v, Truncation::Cap { m1: 2, m2: 2 }).reality_defect(), 0.0);
        prop_assert_eq!(u.partial(Axis::Phi1).reality_defect(), 0.0);
        prop_assert_eq!(u.partial(Axis::Phi2).reality_defect(), 0.0);
        prop_assert_eq!(one_plus_cos().compose_f(&u, 0.1).unwrap().reality_defect(), 0.0);
    }

    #[test]
    fn norms_grow_with_the_weights(u in series(6, 10), w in weights(), ds in 0.0..1.0f64, dsig in 0.0..0.5f64) {
        let base = u.weighted_norm(w);
        prop_assert!(u.weighted_norm(SpaceWeights::new(w.sigma + dsig, w.s)) >= base);
        prop_assert!(u.weighted_norm(SpaceWeights::new(w.sigma, w.s + ds)) >= base);
    }

    #[test]
    fn q1_embedding(coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16), s in 0.05..0.49f64) {
        let dec = case_a(1e-4, 8, 4);
        let w = SpaceWeights::new(0.25, s);
        let mut q = Series2D::zero(8, 8);
        let modes: Vec<_> = dec.indices(Target::Q1).into_iter().filter(|l| l.1 > 0 || (l.1 == 0 && l.0 >= 0)).collect();
        for (l, (re, im)) in modes.iter().zip(&coeffs) {
            q.set(*l, Complex64::new(*re, if *l == (0, 0) { 0.0 } else { *im }));
        }
        let h1 = dec.h1_component_norm(&q).unwrap();
        prop_assert!(q.weighted_norm(w) <= dec.embedding_constant(w) * h1 * (1.0 + 1e-12));
    }

    #[test]
    fn rationals_fail_the_sieve(q in 1..=64i32, p in 1..64i32, neg in any::<bool>()) {
        prop_assume!(p < q);
        let eps = f64::from(if neg { -p } else { p }) / f64::from(q);
        prop_assert!(!check_b_gamma(eps, 1e-3, 64).accepted());
    }

    #[test]
    fn projectors(u in series(6, 20)) {
        let dec = case_a(1e-4, 6, 3);
        let q1 = dec.project(&u, Target::Q1);
        prop_assert_eq!(dec.project(&q1, Target::Q1), q1.clone());
        prop_assert!(dec.project(&q1, Target::P).is_zero());
        prop_assert!(dec.project(&dec.project(&u, Target::Q2), Target::Q1).is_zero());
        let parts = [Target::QZero, Target::QPlus, Target::QMinus, Target::P]
            .iter()
            .fold(Series2D::zero(6, 6), |acc, &t| &acc + &dec.project(&u, t));
        prop_assert_eq!(&parts - &u, Series2D::zero(6, 6));
        let split = &(&q1 + &dec.project(&u, Target::Q2)) + &dec.project(&u, Target::P);
        prop_assert!((&split - &u).is_zero());
    }

    #[test]
    fn certified_range_symbols(eps in 1e-5..1e-2f64, neg in any::<bool>()) {
        let eps = if neg { -eps } else { eps };
        prop_assume!(check_b_gamma(eps, 1e-3, 256).accepted());
        let dec = case_a(eps, 24, 6);
        let report = certify_bounds(&dec);
        prop_assert!(report.pass);
        let leps = DiagonalOperator::leps(1.0, eps);
        for l in dec.indices(Target::P) {
            prop_assert!(leps.eigenvalue(l).abs() > report.threshold);
        }
    }

    #[test]
    fn kernel_at_zero_eps(l1 in -12..=12i32, l2 in -12..=12i32) {
        let dec = case_a(1e-4, 12, 6);
        let zero = DiagonalOperator::leps(1.0, 0.0).eigenvalue((l1, l2));
        prop_assert_eq!(zero == 0.0, dec.classify((l1, l2)) != IndexClass::Range);
        // Irrational forcing: the formal ε = 0 symbol vanishes only on l₁ = 0.
        let b = DiagonalOperator::leps(GOLDEN, 0.0).eigenvalue((l1, l2));
        prop_assert_eq!(b.abs() < 1e-12, l1 == 0);
    }

    #[test]
    fn period_decreases(d in 2u32..=4, e in 1e-3..10.0f64, step in 1e-3..1.0f64) {
        prop_assert!(period(e * (1.0 + step), d).unwrap() < period(e, d).unwrap());
    }

    #[test]
    fn residual_dominance(u in series(4, 8), w in weights(), ds in 0.0..1.0f64, dsig in 0.0..0.3f64) {
        let setup = FrequencySetup::case_b(GOLDEN, 1e-3, 1e-3).unwrap();
        let nl = one_plus_cos();
        let weak = pde_residual(&u, &setup, &nl, w).unwrap();
        let strong = pde_residual(&u, &setup, &nl, SpaceWeights::new(w.sigma + dsig, w.s + ds)).unwrap();
        prop_assert!(strong >= weak);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn range_fixed_point_is_unique_and_supported(
        c in prop::collection::vec((-0.5..0.5f64, -0.5..0.5f64), 6),
        kick in 0.5..2.0f64,
    ) {
        let dec = case_a(1e-4, 12, 4);
        let solver = RangeSolver::new(&dec, &one_plus_cos(), RangeOptions::default()).unwrap();
        let mut q1 = Series2D::cos_mode(12, 12, (0, 1), 1.0);
        for (&l, &(re, im)) in [(0, 2), (0, 3), (-2, 1), (-4, 2), (2, -1), (0, 0)].iter().zip(&c) {
            q1.set(l, Complex64::new(re, if l == (0, 0) { 0.0 } else { im }));
        }
        let a = solver.solve_q2_p(&q1).unwrap();
        prop_assert!(a.contraction_rate < 1.0 && a.fixed_point_residual <= solver.options.tol);
        prop_assert!(dec.check_support(&a.q2, Target::Q2).is_ok());
        prop_assert!(dec.check_support(&a.p, Target::P).is_ok());
        let mut init = a.clone();
        init.p = a.p.scale(kick);
        init.q2 = a.q2.scale(2.0 - kick);
        let b = solver.solve_q2_p_from(&q1, &init).unwrap();
        let w = solver.options.weights;
        prop_assert!((&a.p - &b.p).weighted_norm(w) + (&a.q2 - &b.q2).weighted_norm(w) <= 10.0 * solver.options.tol);
    }

    #[test]
    fn quadratic_form_splits(c in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5)) {
        let dec = case_a(1e-3, 8, 4);
        let rf = ReducedFunctional::new(&dec, &one_plus_cos(), RangeOptions::default()).unwrap();
        let mut plus = Series2D::zero(8, 8);
        let mut minus = Series2D::zero(8, 8);
        for (j, &(re, im)) in c.iter().enumerate().take(4) {
            plus.set((0, j as i32 + 1), Complex64::new(re, im));
            minus.set((-2 * (j as i32 + 1), j as i32 + 1), Complex64::new(im, re));
        }
        let zero = Series2D::constant(8, 8, c[4].0);
        prop_assert!(rf.quadratic(&plus) > 0.0);
        prop_assert!(rf.quadratic(&minus) < 0.0);
        prop_assert_eq!(rf.quadratic(&zero), 0.0);
        let total = rf.quadratic(&(&(&plus + &zero) + &minus));
        let (a_plus, a_minus) = (rf.quadratic(&plus), rf.quadratic(&minus));
        // The two parts can cancel; rounding scales with their sizes.
        prop_assert!((total - (a_plus + a_minus)).abs() <= 1e-14 * (a_plus.abs() + a_minus.abs()).max(1.0));
    }

    #[test]
    fn orbit_translates_solve_the_limit_equation(theta in 0.0..std::f64::consts::TAU) {
        let orbit = limit_orbit(2, 1.0, 1e-4, 48).unwrap();
        let base = orbit.collocation_residual(64, 0.0);
        let moved = orbit.collocation_residual(64, theta);
        prop_assert!(base < 1e-9 && moved < 1e-9, "{base} {moved}");
        prop_assert!(orbit.energy_drift < 1e-10);
    }
}
