//! Numerical companion to the homogeneous second Painlevé equation and
//! Ince's twentieth canonical equation.
//!
//! The crate integrates three related real ODEs on open intervals:
//!
//! * `PII0`: s_dd = 2 s^3 + t s
//! * `XX`:   S_dd = S_d^2 / (2 S) + 4 S^2 + 2 t S (singular at S = 0)
//! * `XXP`:  S_ddd = 12 S S_d + 4 t S_d + 2 S (polynomial, regular)
//!
//! and implements the squaring / square-root maps between their solution
//! sets, zero location and classification, and a verification layer that
//! runs the associated structure theorems as executable checks.
//!
//! Integration across zeros of S always happens in third-order
//! coordinates, where initial data at a zero reduce to a single curvature
//! value. The conserved quantity `C = 2 S S_dd - S_d^2 - 8 S^3 - 4 t S^2`
//! tracks how faithfully a third-order flow stays on the second-order
//! solution manifold.

pub mod cli;
pub mod error;
pub mod integrator;
pub mod ode_models;
pub mod par;
pub mod transforms;
pub mod verify;
pub mod zero_analysis;

pub use error::{Error, Result};
pub use integrator::{
    integrate, oracle_integrate, oracle_reference, Model, ModelTag, ToleranceConfig, Trajectory,
};
pub use ode_models::{
    invariant_c, lift_xx_to_xxprime, rhs_pii0, rhs_xx, rhs_xxprime, series_at_zero, Pii0State,
    XxPrimeState, XxState,
};
pub use transforms::{
    sqrt_negative, sqrt_positive, sqrt_signed, square_state, square_trajectory, SquaredView,
};
pub use verify::{run_suite, VerificationReport};
pub use zero_analysis::{check_no_sign_change, classify_zero, locate_zeros, ZeroEvent};
