//! Integrator behavior: dense-output fidelity, event location, error
//! control, and the failure modes around blow-up and the singular guard.

use painleve_xx::error::Error;
use painleve_xx::integrator::{
    integrate, oracle_integrate, oracle_reference, Direction, EventSpec, IntegrateError, Model,
    Observable, ToleranceConfig,
};
use painleve_xx::ode_models::{invariant_c, invariant_c_scale, lift_xx_to_xxprime, XxState};

fn default_tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

#[test]
fn zero_solution_stays_zero() {
    let out = integrate(Model::Pii0, [0.0, 0.0, 0.0], (0.0, 5.0), &default_tol(), &[]).unwrap();
    for n in &out.trajectory.nodes {
        assert_eq!(n.y[0], 0.0);
        assert_eq!(n.y[1], 0.0);
    }
    // dense midpoints too
    for t in out.trajectory.sample_times(37) {
        let y = out.trajectory.evaluate_dense(t).unwrap();
        assert_eq!(y[0], 0.0);
        assert_eq!(y[1], 0.0);
    }
}

#[test]
fn dense_output_reproduces_nodes() {
    let lifted = lift_xx_to_xxprime(XxState::new(0.0, 1.0, 0.0), None).unwrap();
    let out = integrate(
        Model::XxPrime,
        [lifted.s, lifted.s_dot, lifted.s_ddot],
        (0.0, 1.0),
        &default_tol(),
        &[],
    )
    .unwrap();
    for n in &out.trajectory.nodes {
        let y = out.trajectory.evaluate_dense(n.t).unwrap();
        for (a, b) in y.iter().zip(&n.y) {
            let ulp = 4.0 * f64::EPSILON * b.abs().max(1.0);
            assert!((a - b).abs() <= ulp, "node at t={}: {a} vs {b}", n.t);
        }
    }
}

#[test]
fn dense_midpoint_matches_oracle() {
    let out = integrate(Model::Pii0, [0.0, 1.0, 0.0], (0.0, 1.0), &default_tol(), &[]).unwrap();
    let mid = out.trajectory.evaluate_dense(0.5).unwrap();
    let reference = oracle_reference(Model::Pii0, [0.0, 1.0, 0.0], (0.0, 0.5), 1e-3).unwrap();
    for i in 0..2 {
        assert!((mid[i] - reference[i]).abs() <= 1e-8, "{} vs {}", mid[i], reference[i]);
    }
}

#[test]
fn evaluate_dense_rejects_out_of_span() {
    let out = integrate(Model::Pii0, [0.0, 1.0, 0.0], (0.0, 1.0), &default_tol(), &[]).unwrap();
    assert!(out.trajectory.evaluate_dense(1.5).is_err());
    assert!(out.trajectory.evaluate_dense(-0.1).is_err());
}

#[test]
fn endpoint_error_monotone_in_tolerance() {
    // halving the tolerances never increases endpoint error on the fixture
    let lifted = lift_xx_to_xxprime(XxState::new(0.0, 1.0, 0.0), None).unwrap();
    let init = [lifted.s, lifted.s_dot, lifted.s_ddot];
    let reference = oracle_reference(Model::XxPrime, init, (0.0, 1.0), 1e-3).unwrap();
    let mut errors = Vec::new();
    for exp in [6, 8, 10] {
        let tol = ToleranceConfig::with_tolerances(10f64.powi(-exp), 10f64.powi(-exp));
        let out = integrate(Model::XxPrime, init, (0.0, 1.0), &tol, &[]).unwrap();
        let end = out.trajectory.evaluate_dense(1.0).unwrap();
        let err = (0..3).map(|i| (end[i] - reference[i]).abs()).fold(0.0_f64, f64::max);
        errors.push(err);
    }
    assert!(errors[0] >= errors[1] && errors[1] >= errors[2], "errors: {errors:?}");
}

#[test]
fn forward_backward_reversibility() {
    let tol = default_tol();
    let lifted = lift_xx_to_xxprime(XxState::new(0.0, -1.0, 0.0), None).unwrap();
    let init = [lifted.s, lifted.s_dot, lifted.s_ddot];
    let fwd = integrate(Model::XxPrime, init, (0.0, 1.0), &tol, &[]).unwrap();
    let end = fwd.trajectory.evaluate_dense(1.0).unwrap();
    let bwd = integrate(Model::XxPrime, end, (1.0, 0.0), &tol, &[]).unwrap();
    let back = bwd.trajectory.evaluate_dense(0.0).unwrap();
    for i in 0..3 {
        assert!(
            (back[i] - init[i]).abs() <= 10.0 * (tol.rtol + tol.atol) * init[i].abs().max(1.0),
            "component {i}: {} vs {}",
            back[i],
            init[i]
        );
    }
}

#[test]
fn invariant_drift_on_dense_samples() {
    let tol = default_tol();
    let lifted = lift_xx_to_xxprime(XxState::new(0.0, 1.0, 0.0), None).unwrap();
    let out = integrate(
        Model::XxPrime,
        [lifted.s, lifted.s_dot, lifted.s_ddot],
        (0.0, 1.0),
        &tol,
        &[],
    )
    .unwrap();
    let traj = out.trajectory;
    let mut scale: f64 = 1.0;
    let mut worst: f64 = 0.0;
    for t in traj.sample_times(100) {
        let st = traj.xxprime_state_at(t).unwrap();
        scale = scale.max(invariant_c_scale(st));
        worst = worst.max(invariant_c(st).unwrap().abs());
    }
    assert!(worst <= 100.0 * tol.rtol * scale, "drift {worst:e} vs scale {scale:e}");
}

#[test]
fn event_location_is_bracketed() {
    // s(0) = 0, s_dot(0) = 1: the zero sits at t = 0, found from t = -1
    let (s, s_dot) = painleve_xx::verify::PII0_CENTRAL_AT_MINUS_ONE;
    let spec = EventSpec { observable: Observable::Value, direction: Direction::Any, terminal: false };
    let out = integrate(Model::Pii0, [s, s_dot, 0.0], (-1.0, 1.0), &default_tol(), &[spec]).unwrap();
    assert_eq!(out.events.len(), 1);
    let hit = &out.events[0];
    assert!(hit.t.abs() <= 1e-10, "zero located at {:e}", hit.t);
    let eps = 1e-10 * hit.t.abs().max(1.0);
    let left = out.trajectory.evaluate_dense(hit.t - eps).unwrap()[0];
    let right = out.trajectory.evaluate_dense(hit.t + eps).unwrap()[0];
    assert!(left * right < 0.0, "no sign change across the hit: {left:e}, {right:e}");
}

#[test]
fn rising_direction_filter() {
    let (s, s_dot) = painleve_xx::verify::PII0_CENTRAL_AT_MINUS_ONE;
    let rising =
        EventSpec { observable: Observable::Value, direction: Direction::Rising, terminal: false };
    let falling =
        EventSpec { observable: Observable::Value, direction: Direction::Falling, terminal: false };
    let out =
        integrate(Model::Pii0, [s, s_dot, 0.0], (-1.0, 1.0), &default_tol(), &[rising, falling])
            .unwrap();
    // s increases through its zero, so only the rising spec fires
    assert_eq!(out.events.len(), 1);
    assert_eq!(out.events[0].spec_index, 0);
}

#[test]
fn no_interior_zero_forward_from_positive_slope() {
    // from s = 0 with positive slope at t = 0, s stays positive going right
    let spec = EventSpec { observable: Observable::Value, direction: Direction::Any, terminal: false };
    let out = integrate(Model::Pii0, [0.0, 1.0, 0.0], (0.0, 1.5), &default_tol(), &[spec]).unwrap();
    assert!(out.events.is_empty(), "unexpected zeros: {:?}", out.events);
    for t in out.trajectory.sample_times(64).into_iter().skip(1) {
        assert!(out.trajectory.evaluate_dense(t).unwrap()[0] > 0.0);
    }
}

#[test]
fn blow_up_truncates_with_partial_trajectory() {
    // this solution escapes to infinity near t = 1.74
    let err = integrate(Model::Pii0, [0.0, 1.0, 0.0], (0.0, 2.0), &default_tol(), &[]).unwrap_err();
    let IntegrateError::StepSizeUnderflow { t, partial } = err else {
        panic!("expected step-size underflow, got {err:?}");
    };
    assert!(t > 1.5 && t < 2.0, "blow-up located at t = {t}");
    let traj = &partial.trajectory;
    assert!(traj.nodes.len() > 10);
    assert!((traj.t_end - t).abs() < 1e-6);
    // the partial trajectory remains usable
    let y = traj.evaluate_dense(1.0).unwrap();
    assert!((y[0] - 1.20736294908308).abs() < 1e-7);
}

#[test]
fn xx_integration_aborts_near_singular_set() {
    // S starts positive but swings through zero on this span; the
    // second-order form must refuse rather than step across
    let err = integrate(Model::xx_default(), [1e-13, 1.0, 0.0], (0.0, 1.0), &default_tol(), &[])
        .unwrap_err();
    assert!(matches!(err, IntegrateError::Model(Error::NearSingular { .. })), "{err:?}");
}

#[test]
fn max_steps_budget() {
    let tol = ToleranceConfig { max_steps: 3, ..Default::default() };
    let err = integrate(Model::Pii0, [0.0, 1.0, 0.0], (0.0, 1.0), &tol, &[]).unwrap_err();
    assert!(matches!(err, IntegrateError::MaxStepsExceeded { .. }));
}

#[test]
fn oracle_trivial_and_step_mismatch() {
    let end = oracle_integrate(Model::Pii0, [0.0, 0.0, 0.0], (0.0, 3.0), 1e-2).unwrap();
    assert_eq!(end[0], 0.0);
    assert_eq!(end[1], 0.0);
    assert!(oracle_integrate(Model::Pii0, [0.0, 0.0, 0.0], (0.0, 1.0), 0.3).is_err());
}

#[test]
fn oracle_self_consistency_rejects_coarse_steps() {
    // a blow-up-adjacent span at a huge step cannot self-verify
    let res = oracle_reference(Model::Pii0, [0.0, 1.0, 0.0], (0.0, 1.7), 0.85);
    assert!(res.is_err());
}

#[test]
fn adaptive_matches_frozen_interior_value() {
    // s(0.5) on the run through s(0) = 0, s_dot(0) = 1, frozen from the
    // oracle protocol
    let out = integrate(Model::Pii0, [0.0, 1.0, 0.0], (0.0, 1.0), &default_tol(), &[]).unwrap();
    let y = out.trajectory.evaluate_dense(0.5).unwrap();
    assert!((y[0] - 5.084076825327244e-01).abs() <= 1e-8);
    assert!((y[1] - 1.0741131228496195e+00).abs() <= 1e-8);
}
