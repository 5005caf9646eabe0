//! Property tests for the invariants the library relies on.

use dbarg_core::bargmann::{hat_eval, log_grid, positivity_scan, weight_eval};
use dbarg_core::coherent::{coherent_coefficients, eigen_residual, norm_squared};
use dbarg_core::qspecial::{exp_q, generalized_factorial, ExpVariant};
use dbarg_core::quadrature::mellin_moment;
use dbarg_core::verify::{algebra_residuals, build_truncated_rep, moment_check};
use dbarg_core::{classify, solve_mellin, Exec, PsiSpec, QuadratureConfig, SpectrumKind};
use num_complex::Complex64;
use proptest::prelude::*;

fn q_above_one() -> impl Strategy<Value = f64> {
    1.05f64..3.0
}

/// `x + σ` with `μ` chosen so that the zero of ψ lies on the lattice.
fn affine_on_lattice(sigma: f64) -> PsiSpec {
    let mu = sigma.ceil() - sigma;
    PsiSpec::affine(sigma).unwrap().with_mu(if mu >= 1.0 { 0.0 } else { mu }).unwrap()
}

/// Structure functions with a closed-form Mellin solution.
fn solvable_psi() -> impl Strategy<Value = PsiSpec> {
    prop_oneof![
        (0.0f64..4.0).prop_map(affine_on_lattice),
        q_above_one().prop_map(|q| PsiSpec::q_bracket(q).unwrap()),
        q_above_one().prop_map(|q| PsiSpec::q_paren(q).unwrap()),
        (0.2f64..5.0, 0.2f64..0.95).prop_map(|(l, q)| PsiSpec::q_inverse_power(l, q).unwrap()),
        (0.1f64..4.0, q_above_one()).prop_map(|(a, q)| PsiSpec::shifted_exponential(a, q).unwrap()),
        (-1.0f64..1.0, 0.1f64..1.0, 0.001f64..0.05)
            .prop_map(|(a0, a1, a3)| PsiSpec::exp_poly(vec![a0, a1, 0.0, a3]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn factorial_recursion_holds_for_all_integers(psi in solvable_psi(), n in -12i64..12) {
        let spec = classify(&psi).unwrap();
        let fine = match spec.kind {
            SpectrumKind::LowerBounded { nu_minus } => n > nu_minus,
            _ => true,
        };
        prop_assume!(fine);
        let a = generalized_factorial(&psi, n).unwrap();
        let b = generalized_factorial(&psi, n - 1).unwrap();
        let want = psi.evaluate(psi.mu() + n as f64) * b;
        prop_assert!((a - want).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn reflected_factorials_are_reciprocal(q in q_above_one(), lambda in 0.2f64..4.0, n in 0i64..10) {
        let psi = PsiSpec::q_inverse_power(lambda, 1.0 / q).unwrap();
        let r = psi.reflect().unwrap();
        let a = generalized_factorial(&r, n).unwrap();
        let b = generalized_factorial(&psi, -n).unwrap();
        prop_assert!((a * b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mellin_recursion_and_normalization(psi in solvable_psi(), re in 0.5f64..6.0, im in -5.0f64..5.0) {
        let sol = solve_mellin(&psi).unwrap();
        let rho = Complex64::new(re, im);
        let next = hat_eval(&sol, rho + 1.0).unwrap();
        let cur = hat_eval(&sol, rho).unwrap();
        let psi_rho = sol.frame_psi.evaluate_complex(rho);
        prop_assert!((next - psi_rho * cur).norm() <= 1e-10 * next.norm());
        let one = hat_eval(&sol, Complex64::new(1.0, 0.0)).unwrap();
        prop_assert!((one.re - 1.0).abs() <= 1e-14 && one.im.abs() <= 1e-14);
    }

    #[test]
    fn truncated_algebra_interior_exact(psi in solvable_psi(), dim in 2usize..40) {
        let spec = classify(&psi).unwrap();
        let rep = build_truncated_rep(&psi, &spec, dim, -(dim as i64) / 2).unwrap();
        let report = algebra_residuals(&rep);
        prop_assert!(report.passed(), "{:?}", report.first_failure());
    }

    #[test]
    fn coherent_states_are_eigenvectors(q in q_above_one(), r in 0.05f64..1.5, theta in -3.0f64..3.0) {
        let psi = PsiSpec::q_bracket(q).unwrap();
        let spec = classify(&psi).unwrap();
        let z = Complex64::from_polar(r, theta);
        let state = coherent_coefficients(&psi, &spec, z, 1e-30).unwrap();
        let res = eigen_residual(&psi, &state);
        let norm = norm_squared(&psi, &spec, r * r, 1e-30).unwrap().value.sqrt();
        prop_assert!(res.interior <= 1e-13 * norm * r.max(1.0));
    }

    #[test]
    fn bracket_norm_is_q_exponential(q in q_above_one(), r2 in 0.0f64..3.0) {
        let psi = PsiSpec::q_bracket(q).unwrap();
        let spec = classify(&psi).unwrap();
        let n = norm_squared(&psi, &spec, r2, 1e-30).unwrap();
        let want = exp_q(r2, q, ExpVariant::Bracket).unwrap();
        prop_assert!(n.converged);
        prop_assert!((n.value - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn gamma_moments(sigma in 0.0f64..3.0, n in 0i64..8) {
        let sol = solve_mellin(&affine_on_lattice(sigma)).unwrap();
        let report = moment_check(&sol, n..=n, &QuadratureConfig::default(), 1e-9).unwrap();
        prop_assert!(report.passed(), "{:?}", report.first_failure());
    }

    #[test]
    fn weights_are_nonnegative(q in q_above_one()) {
        let grid = log_grid(1e-4, 1e2, 101);
        for psi in [PsiSpec::q_bracket(q).unwrap(), PsiSpec::q_paren(q).unwrap()] {
            let sol = solve_mellin(&psi).unwrap();
            let (min, _) = positivity_scan(&sol, &grid, Exec::Sequential).unwrap();
            prop_assert!(min >= 0.0);
        }
    }
}

#[test]
fn policies_give_identical_results() {
    let sol = solve_mellin(&PsiSpec::q_bracket(1.3).unwrap()).unwrap();
    let ln_f = |x: f64| weight_eval(&sol, x).unwrap().ln();
    let seq = QuadratureConfig {
        exec: Exec::Sequential,
        ..QuadratureConfig::default()
    };
    let par = QuadratureConfig {
        exec: Exec::Parallel,
        ..QuadratureConfig::default()
    };
    for rho in [1.0, 2.5, 4.0] {
        let a = mellin_moment(ln_f, rho, &seq).unwrap();
        let b = mellin_moment(ln_f, rho, &par).unwrap();
        assert_eq!(a.value().to_bits(), b.value().to_bits());
    }
    let grid = log_grid(1e-3, 1e3, 257);
    assert_eq!(
        positivity_scan(&sol, &grid, Exec::Sequential).unwrap(),
        positivity_scan(&sol, &grid, Exec::Parallel).unwrap()
    );
}
