//! The three differential equations as evaluatable right-hand sides.
//!
//! * `PII0`:  s_dd = 2 s^3 + t s  (homogeneous second Painlevé equation)
//! * `XX`:    S_dd = S_d^2 / (2 S) + 4 S^2 + 2 t S  (singular where S = 0)
//! * `XXP`:   S_ddd = 12 S S_d + 4 t S_d + 2 S  (third-order, polynomial,
//!   regular everywhere; obtained by differentiating `XX`)
//!
//! Along `XXP` flows the quantity `C = 2 S S_dd - S_d^2 - 8 S^3 - 4 t S^2`
//! is conserved, and `C = 0` characterizes the solutions that also satisfy
//! `XX`. All zero crossings are integrated in `XXP` coordinates; the
//! second-order form is only usable away from its singular set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative guard band around the singular set of the second-order
/// equation: reject when |S| <= eta * max(1, S_dot^2).
pub const DEFAULT_ETA: f64 = 1e-12;

/// Maximum Taylor order supported by `series_at_zero`.
pub const MAX_SERIES_ORDER: usize = 12;

/// A point (t, s, s_dot) on a PII0 trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pii0State {
    pub t: f64,
    pub s: f64,
    pub s_dot: f64,
}

/// A point (t, S, S_dot) of the second-order equation.
///
/// Only representable where evaluation is attempted; S = 0 with
/// S_dot != 0 never occurs on a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxState {
    pub t: f64,
    pub s: f64,
    pub s_dot: f64,
}

/// A point (t, S, S_dot, S_ddot) of the lifted third-order system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XxPrimeState {
    pub t: f64,
    pub s: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
}

impl Pii0State {
    pub fn new(t: f64, s: f64, s_dot: f64) -> Self {
        Self { t, s, s_dot }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.s.is_finite() && self.s_dot.is_finite()
    }
}

impl XxState {
    pub fn new(t: f64, s: f64, s_dot: f64) -> Self {
        Self { t, s, s_dot }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.s.is_finite() && self.s_dot.is_finite()
    }
}

impl XxPrimeState {
    pub fn new(t: f64, s: f64, s_dot: f64, s_ddot: f64) -> Self {
        Self { t, s, s_dot, s_ddot }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.s.is_finite()
            && self.s_dot.is_finite()
            && self.s_ddot.is_finite()
    }
}

/// Right-hand side of PII0: returns (s_dot, 2 s^3 + t s).
pub fn rhs_pii0(state: Pii0State) -> Result<(f64, f64)> {
    if !state.is_finite() {
        return Err(Error::InvalidState { t: state.t });
    }
    let Pii0State { t, s, s_dot } = state;
    Ok((s_dot, 2.0 * s * s * s + t * s))
}

/// Right-hand side of the second-order equation: (S_dot, S_dot^2/(2S) + 4S^2 + 2tS).
///
/// The caller must stay away from the singular set: the call is rejected
/// when |S| <= eta * max(1, S_dot^2), since the dangerous quantity is
/// S_dot^2 / (2 S).
pub fn rhs_xx(state: XxState, eta: f64) -> Result<(f64, f64)> {
    if !state.is_finite() {
        return Err(Error::InvalidState { t: state.t });
    }
    let XxState { t, s, s_dot } = state;
    let guard = eta * 1.0_f64.max(s_dot * s_dot);
    if s.abs() <= guard {
        return Err(Error::NearSingular { t, s, guard });
    }
    Ok((s_dot, s_dot * s_dot / (2.0 * s) + 4.0 * s * s + 2.0 * t * s))
}

/// Right-hand side of the third-order equation: (S_dot, S_ddot, 12 S S_dot + 4 t S_dot + 2 S).
///
/// Polynomial right side, defined on all finite inputs including S = 0.
pub fn rhs_xxprime(state: XxPrimeState) -> Result<(f64, f64, f64)> {
    if !state.is_finite() {
        return Err(Error::InvalidState { t: state.t });
    }
    let XxPrimeState { t, s, s_dot, s_ddot } = state;
    Ok((s_dot, s_ddot, 12.0 * s * s_dot + 4.0 * t * s_dot + 2.0 * s))
}

/// Lift second-order initial data to third-order data.
///
/// Away from zeros S_ddot is forced by the second-order equation. At a zero
/// (S = 0, necessarily S_dot = 0) the solution is pinned instead by a caller
/// supplied nonzero S_ddot. The result has `invariant_c == 0` in exact
/// arithmetic.
pub fn lift_xx_to_xxprime(state: XxState, s_ddot_at_zero: Option<f64>) -> Result<XxPrimeState> {
    if !state.is_finite() {
        return Err(Error::InvalidState { t: state.t });
    }
    let XxState { t, s, s_dot } = state;
    if s == 0.0 {
        if s_dot != 0.0 {
            return Err(Error::InconsistentZeroData { t, s_dot });
        }
        match s_ddot_at_zero {
            Some(c) if c != 0.0 => Ok(XxPrimeState::new(t, 0.0, 0.0, c)),
            Some(_) => Err(Error::DegenerateZero { t }),
            None => Err(Error::Usage(
                "initial data at a zero of S requires an explicit S_ddot value".into(),
            )),
        }
    } else {
        if s_ddot_at_zero.is_some() {
            return Err(Error::Usage(
                "S_ddot may only be supplied when S = 0; away from zeros it is determined".into(),
            ));
        }
        let s_ddot = s_dot * s_dot / (2.0 * s) + 4.0 * s * s + 2.0 * t * s;
        Ok(XxPrimeState::new(t, s, s_dot, s_ddot))
    }
}

/// The conserved quantity `C = 2 S S_dd - S_d^2 - 8 S^3 - 4 t S^2`.
///
/// Constant along exact third-order flows; identically zero on states
/// compatible with the second-order equation.
pub fn invariant_c(state: XxPrimeState) -> Result<f64> {
    if !state.is_finite() {
        return Err(Error::InvalidState { t: state.t });
    }
    let XxPrimeState { t, s, s_dot, s_ddot } = state;
    Ok(2.0 * s * s_ddot - s_dot * s_dot - 8.0 * s * s * s - 4.0 * t * s * s)
}

/// Magnitude of the largest individual term of `C`, for normalizing drift.
pub fn invariant_c_scale(state: XxPrimeState) -> f64 {
    let XxPrimeState { t, s, s_dot, s_ddot } = state;
    let terms = [
        (2.0 * s * s_ddot).abs(),
        (s_dot * s_dot).abs(),
        (8.0 * s * s * s).abs(),
        (4.0 * t * s * s).abs(),
    ];
    terms.into_iter().fold(1.0_f64, f64::max)
}

/// Truncated Taylor expansion of the third-order solution at an isolated zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesAtZero {
    /// Location of the zero.
    pub a: f64,
    /// Value of S_ddot at the zero; nonzero for a genuine isolated zero.
    pub c: f64,
    /// Taylor coefficients of S about a, index k is the coefficient of h^k.
    pub coeffs: Vec<f64>,
}

impl SeriesAtZero {
    /// Evaluate the truncated series at offset h from the zero.
    pub fn eval(&self, h: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &b| acc * h + b)
    }
}

/// Taylor coefficients of the unique third-order solution with
/// S(a) = S_dot(a) = 0 and S_ddot(a) = c != 0.
///
/// Writing S(a + h) = sum b_k h^k and t = a + h, matching coefficients in
/// the third-order equation gives
///
/// ```text
/// (k+1)(k+2)(k+3) b_{k+3}
///     = 12 sum_{i+j=k} b_i (j+1) b_{j+1} + 4 a (k+1) b_{k+1} + 4 k b_k + 2 b_k
/// ```
///
/// seeded by b_0 = b_1 = 0, b_2 = c/2. In particular b_3 = 0 and
/// b_4 = a c / 6.
pub fn series_at_zero(a: f64, c: f64, order: usize) -> Result<SeriesAtZero> {
    if c == 0.0 {
        return Err(Error::DegenerateZero { t: a });
    }
    if !(4..=MAX_SERIES_ORDER).contains(&order) {
        return Err(Error::Usage(format!(
            "series order must lie in 4..={MAX_SERIES_ORDER}, got {order}"
        )));
    }
    let mut b = vec![0.0_f64; order + 1];
    b[2] = c / 2.0;
    for k in 0..=order.saturating_sub(3) {
        // coefficient of h^k in 12 S S_dot
        let mut conv = 0.0;
        for i in 0..=k {
            let j = k - i;
            conv += b[i] * ((j + 1) as f64) * b[j + 1];
        }
        let rhs_k = 12.0 * conv
            + 4.0 * a * ((k + 1) as f64) * b[k + 1]
            + 4.0 * (k as f64) * b[k]
            + 2.0 * b[k];
        let denom = ((k + 1) * (k + 2) * (k + 3)) as f64;
        b[k + 3] = rhs_k / denom;
    }
    Ok(SeriesAtZero { a, c, coeffs: b })
}
