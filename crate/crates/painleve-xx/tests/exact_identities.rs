//! Exact-arithmetic checks of the algebraic identities behind the
//! conserved quantity and the squaring map, on rational sample points,
//! plus property tests of the floating-point implementations.

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use painleve_xx::integrator::{oracle_integrate, Model};
use painleve_xx::ode_models::{
    invariant_c, invariant_c_scale, lift_xx_to_xxprime, rhs_xxprime, series_at_zero, Pii0State,
    XxPrimeState, XxState,
};
use painleve_xx::transforms::square_state;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// d/dt of C = 2 S S_dd - S_d^2 - 8 S^3 - 4 t S^2 along the third-order
/// flow, with the third derivative substituted from the equation. Must be
/// identically zero for arbitrary (t, S, S_d, S_dd).
fn c_derivative_along_flow(
    t: &BigRational,
    s: &BigRational,
    s_dot: &BigRational,
    s_ddot: &BigRational,
) -> BigRational {
    let two = rat(2, 1);
    let four = rat(4, 1);
    let eight = rat(8, 1);
    let twelve = rat(12, 1);
    let twenty_four = rat(24, 1);
    let s_dddot = &twelve * s * s_dot + &four * t * s_dot + &two * s;
    &two * s_dot * s_ddot + &two * s * &s_dddot
        - &two * s_dot * s_ddot
        - &twenty_four * s * s * s_dot
        - &eight * t * s * s_dot
        - &four * s * s
}

#[test]
fn invariant_derivative_vanishes_identically() {
    let samples = [
        (rat(0, 1), rat(1, 1), rat(0, 1), rat(4, 1)),
        (rat(1, 3), rat(-2, 7), rat(5, 2), rat(11, 13)),
        (rat(-7, 5), rat(22, 9), rat(-1, 4), rat(0, 1)),
        (rat(100, 1), rat(-3, 1000), rat(17, 11), rat(-19, 23)),
    ];
    for (t, s, s_dot, s_ddot) in samples {
        let d = c_derivative_along_flow(&t, &s, &s_dot, &s_ddot);
        assert_eq!(d, rat(0, 1), "dC/dt != 0 at rational sample");
    }
}

/// C evaluated on the square of an arbitrary rational PII0 point, using
/// S = s^2, S_d = 2 s s_d and the PII0 equation for the curvature.
fn c_of_square(t: &BigRational, s: &BigRational, s_dot: &BigRational) -> BigRational {
    let two = rat(2, 1);
    let four = rat(4, 1);
    let eight = rat(8, 1);
    let s_ddot_pii0 = &two * s * s * s + t * s;
    let cap_s = s * s;
    let cap_s_dot = &two * s * s_dot;
    let cap_s_ddot = &two * s * &s_ddot_pii0 + &two * s_dot * s_dot;
    &two * &cap_s * &cap_s_ddot
        - &cap_s_dot * &cap_s_dot
        - &eight * &cap_s * &cap_s * &cap_s
        - &four * t * &cap_s * &cap_s
}

#[test]
fn square_lands_exactly_on_invariant_zero() {
    let samples = [
        (rat(0, 1), rat(1, 1), rat(1, 1)),
        (rat(5, 3), rat(-7, 2), rat(13, 11)),
        (rat(-9, 4), rat(0, 1), rat(3, 8)),
        (rat(1, 1000), rat(999, 7), rat(-2, 5)),
    ];
    for (t, s, s_dot) in samples {
        assert_eq!(c_of_square(&t, &s, &s_dot), rat(0, 1));
    }
}

#[test]
fn series_fourth_coefficient_matches_symbolic_derivative() {
    // differentiating the third-order equation once more:
    // S'''' = 12 S_d^2 + 12 S S_dd + 4 S_d + 4 t S_dd + 2 S_d,
    // which at (S, S_d) = (0, 0), S_dd = c reduces to 4 a c
    for &(a, c) in &[(3.0, 2.0), (-1.5, 0.25), (0.0, 7.0), (10.0, -4.0)] {
        let series = series_at_zero(a, c, 6).unwrap();
        let fourth_derivative = 4.0 * a * c;
        let expected = fourth_derivative / 24.0;
        assert!(
            (series.coeffs[4] - expected).abs() <= 1e-14 * expected.abs().max(1.0),
            "h^4 coefficient {} vs {}",
            series.coeffs[4],
            expected
        );
    }
}

#[test]
fn series_agrees_with_fixed_step_integration_near_zero() {
    let (a, c) = (0.5, 2.0);
    let series = series_at_zero(a, c, 12).unwrap();
    for &h in &[0.01_f64, -0.01, 0.05, -0.05] {
        let end = oracle_integrate(Model::XxPrime, [0.0, 0.0, c], (a, a + h), h.abs() / 64.0)
            .unwrap();
        assert!(
            (series.eval(h) - end[0]).abs() <= 1e-12,
            "series {} vs integrated {} at h = {h}",
            series.eval(h),
            end[0]
        );
    }
}

proptest! {
    #[test]
    fn squared_states_sit_on_invariant_zero(
        t in -10.0_f64..10.0,
        s in -10.0_f64..10.0,
        s_dot in -10.0_f64..10.0,
    ) {
        let sq = square_state(Pii0State::new(t, s, s_dot)).unwrap();
        let c = invariant_c(sq).unwrap();
        let scale = invariant_c_scale(sq);
        prop_assert!(c.abs() <= 8.0 * f64::EPSILON * scale);
    }

    #[test]
    fn lifted_states_sit_on_invariant_zero(
        t in -10.0_f64..10.0,
        s in -10.0_f64..10.0,
        s_dot in -10.0_f64..10.0,
    ) {
        prop_assume!(s.abs() > 1e-6);
        let lifted = lift_xx_to_xxprime(XxState::new(t, s, s_dot), None).unwrap();
        let c = invariant_c(lifted).unwrap();
        let scale = invariant_c_scale(lifted);
        prop_assert!(c.abs() <= 8.0 * f64::EPSILON * scale);
    }

    #[test]
    fn third_order_rhs_defined_everywhere(
        t in -100.0_f64..100.0,
        s in -100.0_f64..100.0,
        s_dot in -100.0_f64..100.0,
        s_ddot in -100.0_f64..100.0,
    ) {
        // includes S = 0: the polynomial right side has no singular set
        let (d0, d1, d2) = rhs_xxprime(XxPrimeState::new(t, s, s_dot, s_ddot)).unwrap();
        prop_assert!(d0.is_finite() && d1.is_finite() && d2.is_finite());
    }

    #[test]
    fn series_keeps_sign_of_curvature(
        a in -2.0_f64..2.0,
        c in 0.1_f64..10.0,
        h in 1e-6_f64..1e-2,
    ) {
        let series = series_at_zero(a, c, 8).unwrap();
        prop_assert!(series.eval(h) > 0.0);
        prop_assert!(series.eval(-h) > 0.0);
        let neg = series_at_zero(a, -c, 8).unwrap();
        prop_assert!(neg.eval(h) < 0.0);
        prop_assert!(neg.eval(-h) < 0.0);
    }
}
