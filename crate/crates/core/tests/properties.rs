mod common;

use num_complex::Complex;
use pim_core::oracle::{fd_derivative, solve_ivp};
use pim_core::platform::{epsilon0, identity_residual, platform_derivative, platform_value, y2};
use pim_core::quad::{integrate, try_integrate};
use pim_core::quantize::action;
use pim_core::{
    parse, BaseFunction, BaseSpec, BoundStateProblem, ExpansionOrder, ParamSet, PhaseApprox, Potential,
    QuadOptions,
};
use proptest::prelude::*;

fn builtin(name: &str, list: &str) -> Potential {
    Potential::builtin(name, &ParamSet::parse_list(list).unwrap()).unwrap()
}

fn airy() -> BaseFunction {
    BaseFunction::new(builtin("airy", ""), BaseSpec::unmodified()).unwrap()
}

fn weber() -> BaseFunction {
    BaseFunction::new(builtin("weber", "a=5"), BaseSpec::unmodified()).unwrap()
}

fn coulomb() -> BaseFunction {
    BaseFunction::new(builtin("coulomb", "E=-0.5,Z=1,l=0"), BaseSpec::kramers_langer()).unwrap()
}

fn radial_free() -> BaseFunction {
    BaseFunction::new(builtin("radial-free", "k=1,l=1"), BaseSpec::no_centrifugal(1.0)).unwrap()
}

/// (base, allowed interval) pairs the identities are sampled on.
fn corpus() -> Vec<(BaseFunction, (f64, f64))> {
    vec![(airy(), (0.5, 20.0)), (weber(), (-4.3, 4.3)), (coulomb(), (0.2, 1.8)), (radial_free(), (0.2, 30.0))]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn symbolic_derivative_matches_finite_differences(e in common::expression(), z in common::safe_z()) {
        let params = common::params();
        prop_assume!(common::is_tame(&e, z, &params));
        let exact: f64 = e.differentiate().evaluate(z, &params).unwrap();
        let fd = fd_derivative(|x| e.evaluate(x, &params), z, 1).unwrap();
        prop_assert!((exact - fd).abs() <= 1e-8 * exact.abs().max(1.0), "{} at {}: {} vs {}", e, z, exact, fd);
    }

    #[test]
    fn print_parse_round_trip(e in common::expression(), seed in 0u64..1000) {
        let params = common::params();
        let printed = e.to_string();
        let reparsed = parse(&printed).unwrap();
        for i in 0..100 {
            let z = 0.3 + 2.5 * (((seed + i) * 7919) % 1000) as f64 / 1000.0;
            match (e.evaluate::<f64>(z, &params), reparsed.evaluate::<f64>(z, &params)) {
                (Ok(a), Ok(b)) => prop_assert!(a == b || (a - b).abs() <= 1e-15 * a.abs(), "{}: {} vs {}", printed, a, b),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "{}: {:?} vs {:?}", printed, a, b),
            }
        }
    }

    #[test]
    fn q_squares_to_q2(which in 0usize..4, t in 0.0f64..1.0) {
        let (base, (lo, hi)) = corpus().swap_remove(which);
        let z = lo + (hi - lo) * t;
        let q = base.q(z).unwrap();
        let q2 = base.q2(z).unwrap();
        prop_assert!((q * q - q2).abs() <= 1e-14 * q2.abs());
    }

    #[test]
    fn q_derivatives_match_finite_differences(which in 0usize..4, t in 0.0f64..1.0) {
        let (base, (lo, hi)) = corpus().swap_remove(which);
        let z = lo + (hi - lo) * t;
        prop_assume!(base.q2(z).unwrap() > 0.01);
        let dq = base.dq(z).unwrap();
        let fd = fd_derivative(|x| base.q(x), z, 1).unwrap();
        prop_assert!((dq - fd).abs() <= 1e-8 * dq.abs().max(1.0), "Q′ at {}: {} vs {}", z, dq, fd);
        let d2q = base.d2q(z).unwrap();
        let fd = fd_derivative(|x| base.dq(x), z, 1).unwrap();
        prop_assert!((d2q - fd).abs() <= 1e-8 * d2q.abs().max(1.0), "Q″ at {}: {} vs {}", z, d2q, fd);
    }

    #[test]
    fn turning_points_are_zeros(energy in -2.0f64..-0.05, l in 0u32..4, s in prop::sample::select(vec![0.0, 1.0])) {
        let p = BoundStateProblem::new(1.0, l, 0).potential(energy).unwrap();
        let base = BaseFunction::new(p, BaseSpec::custom(s)).unwrap();
        for root in base.turning_points(1e-3, 100.0, 1024).unwrap() {
            let scale = 1.0 + (2.0 / root).abs() + (l * (l + 1)) as f64 / (root * root);
            prop_assert!(base.q2(root).unwrap().abs() < 1e-9 * scale, "root {}", root);
        }
    }

    #[test]
    fn identity_holds(which in 0usize..4, t in 0.0f64..1.0) {
        let (base, (lo, hi)) = corpus().swap_remove(which);
        let z = lo + (hi - lo) * t;
        prop_assume!(base.q2(z).unwrap() > 1e-3);
        prop_assert!(identity_residual(&base, z).unwrap() < 1e-9);
    }

    #[test]
    fn reduction_for_any_override(c0 in 0.5f64..3.0, c1 in 0.1f64..2.0, z in 0.5f64..5.0) {
        let q2 = parse(&format!("{c0} + {c1}*z")).unwrap();
        let base = BaseFunction::with_q2_override(builtin("airy", ""), BaseSpec::unmodified(), &q2, &ParamSet::new()).unwrap();
        prop_assert!((2.0 * y2(&base, z).unwrap() - epsilon0(&base, z).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn platform_derivative_integrates_to_boundary_terms(which in 0usize..4, ta in 0.0f64..1.0, tb in 0.0f64..1.0) {
        let (base, (lo, hi)) = corpus().swap_remove(which);
        let (a, b) = (lo + (hi - lo) * ta, lo + (hi - lo) * tb);
        let opts = QuadOptions::new(1e-13, 1e-13);
        let integral = try_integrate(|x| platform_derivative(&base, x), a, b, &opts).unwrap().value;
        let boundary = platform_value(&base, b).unwrap() - platform_value(&base, a).unwrap();
        prop_assert!((0.5 * integral - 0.5 * boundary).abs() < 1e-10);
    }

    #[test]
    fn quadrature_is_deterministic(c in -3.0f64..3.0, a in -2.0f64..0.0, b in 0.1f64..4.0) {
        let f = |x: f64| (c * x).sin() + x * x;
        let first = integrate(f, a, b, 1e-12, 1e-10).unwrap();
        let second = integrate(f, a, b, 1e-12, 1e-10).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn cubics_are_exact(c in prop::array::uniform4(-5.0f64..5.0), b in 0.1f64..3.0) {
        let f = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let exact = b * (c[0] + b * (c[1] / 2.0 + b * (c[2] / 3.0 + b * c[3] / 4.0)));
        let r = integrate(f, 0.0, b, 1e-12, 1e-10).unwrap();
        prop_assert!((r.value - exact).abs() <= 1e-13 * (1.0 + exact.abs()));
        prop_assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn phase_differences_do_not_depend_on_anchor(which in 0usize..4, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0, tz in 0.0f64..1.0) {
        let (base, (lo, hi)) = corpus().swap_remove(which);
        // stay clear of the interval ends, where Q may be small
        let pick = |t: f64| lo + (hi - lo) * (0.1 + 0.8 * t);
        let opts = QuadOptions::new(1e-13, 1e-13);
        let first = PhaseApprox::new(base.clone(), ExpansionOrder::Third, pick(t1)).unwrap().with_quad_options(opts);
        let second = first.reanchored(pick(t2)).unwrap();
        let z = pick(tz);
        let drift = first.phase(z).unwrap() - second.phase(z).unwrap() - first.phase(pick(t2)).unwrap();
        prop_assert!(drift.abs() < 1e-9);
    }

    #[test]
    fn modulus_equals_amplitude(t in 0.0f64..1.0) {
        let pa = PhaseApprox::new(airy(), ExpansionOrder::Third, 2.0).unwrap();
        let z = 1.0 + 9.0 * t;
        let (plus, minus) = pa.wavefunction(z).unwrap();
        let a = pa.amplitude(z).unwrap();
        prop_assert!((plus.norm() - a).abs() < 1e-15);
        prop_assert!((minus.norm() - a).abs() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn action_increases_with_energy(l in 0u32..3, excess in 0.05f64..5.0) {
        // bound states need ν = 1/√(−2E) > l + ½
        let e = -0.5 / (l as f64 + 0.5 + excess).powi(2);
        let prob = BoundStateProblem::new(1.0, l, 0);
        let lower = action(&prob.potential(e).unwrap(), prob.spec, e).unwrap();
        let upper = action(&prob.potential(e * 0.9).unwrap(), prob.spec, e * 0.9).unwrap();
        prop_assert!(upper > lower);
    }

    #[test]
    fn langer_action_closed_form(l in 0u32..4, excess in 0.05f64..5.0) {
        let e = -0.5 / (l as f64 + 0.5 + excess).powi(2);
        let prob = BoundStateProblem::new(1.0, l, 0);
        let a = action(&prob.potential(e).unwrap(), prob.spec, e).unwrap();
        let closed = std::f64::consts::PI * (1.0 / (-2.0 * e).sqrt() - (l as f64 + 0.5));
        prop_assert!((a - closed).abs() < 1e-9, "{} vs {}", a, closed);
    }
}

/// Halving the tolerance moves the end value by less than the coarser tolerance.
#[test]
fn oracle_self_convergence() {
    let cases: Vec<(Potential, f64, f64)> = vec![
        (builtin("airy", ""), 1.0, 10.0),
        (builtin("weber", "a=5"), -4.0, 4.0),
        (builtin("coulomb", "E=-0.5,Z=1,l=0"), 0.3, 5.0),
        (builtin("radial-free", "k=1,l=1"), 0.5, 10.0),
    ];
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    for (p, a, b) in cases {
        for tol in [1e-8, 1e-10] {
            let coarse = solve_ivp(&p, a, one, zero, b, tol).unwrap().last().1;
            let fine = solve_ivp(&p, a, one, zero, b, tol / 2.0).unwrap().last().1;
            let change = (coarse - fine).norm() / (1.0 + fine.norm());
            assert!(change < tol, "{}: tol {tol:e} changed the end value by {change:e}", p.label());
        }
    }
}

#[test]
fn oracle_is_exact_for_constant_r() {
    let p = Potential::parse("4", &ParamSet::new(), pim_core::Interval::real_line()).unwrap();
    let cmp = pim_core::oracle::compare_orders(&p, BaseSpec::unmodified(), -1.0, 2.5, 1e-12).unwrap();
    assert!(cmp.err_first < 1e-8 && cmp.err_third < 1e-8, "{cmp:?}");
}
