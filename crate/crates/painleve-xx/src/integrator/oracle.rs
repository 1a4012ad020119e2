//! Classical fixed-step RK4 with Richardson extrapolation, used as the
//! independent reference for checking the adaptive path. Shares nothing
//! with the embedded-pair implementation beyond the model right-hand sides.

use thiserror::Error;

use crate::error::Error as ModelError;

use super::trajectory::{Model, RawState};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("step {h} does not divide span {span} within rounding")]
    StepMismatch { h: f64, span: f64 },

    #[error(
        "oracle self-consistency failed: extrapolations at h/2 and h/4 differ by {rel:e} \
         (required <= {required:e})"
    )]
    NotConverged { rel: f64, required: f64 },
}

/// Relative agreement required between successive extrapolations before a
/// value is accepted as a reference.
pub const ORACLE_SELF_CONSISTENCY: f64 = 1e-10;

fn rk4_step(model: Model, t: f64, y: &RawState, h: f64) -> Result<RawState, ModelError> {
    let dim = model.dim();
    let k1 = model.rhs(t, y)?;
    let mut y2 = [0.0; 3];
    for i in 0..dim {
        y2[i] = y[i] + 0.5 * h * k1[i];
    }
    let k2 = model.rhs(t + 0.5 * h, &y2)?;
    let mut y3 = [0.0; 3];
    for i in 0..dim {
        y3[i] = y[i] + 0.5 * h * k2[i];
    }
    let k3 = model.rhs(t + 0.5 * h, &y3)?;
    let mut y4 = [0.0; 3];
    for i in 0..dim {
        y4[i] = y[i] + h * k3[i];
    }
    let k4 = model.rhs(t + h, &y4)?;
    let mut out = [0.0; 3];
    for i in 0..dim {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Fixed-step classical 4th-order result at `t_span.1`. `h` must divide the
/// span within rounding.
pub fn oracle_integrate(
    model: Model,
    init: RawState,
    t_span: (f64, f64),
    h: f64,
) -> Result<RawState, OracleError> {
    let (t0, t1) = t_span;
    let span = t1 - t0;
    let n_real = span.abs() / h;
    let n = n_real.round() as usize;
    if n == 0 || (n_real - n as f64).abs() > 1e-6 * n_real.max(1.0) {
        return Err(OracleError::StepMismatch { h, span });
    }
    run_fixed(model, init, t0, t1, n)
}

fn run_fixed(
    model: Model,
    init: RawState,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<RawState, OracleError> {
    let h = (t1 - t0) / n as f64;
    let mut y = init;
    for i in 0..n {
        let t = t0 + (t1 - t0) * (i as f64) / (n as f64);
        y = rk4_step(model, t, &y, h)?;
    }
    Ok(y)
}

fn richardson(
    model: Model,
    init: RawState,
    t0: f64,
    t1: f64,
    n: usize,
) -> Result<RawState, OracleError> {
    let coarse = run_fixed(model, init, t0, t1, n)?;
    let fine = run_fixed(model, init, t0, t1, 2 * n)?;
    let mut out = [0.0; 3];
    for i in 0..3 {
        // one Richardson sweep on the O(h^4) method
        out[i] = (16.0 * fine[i] - coarse[i]) / 15.0;
    }
    Ok(out)
}

/// Reference endpoint state under the oracle protocol: Richardson
/// extrapolations built from steps (h/2, h/4) and (h/4, h/8) must agree to
/// `ORACLE_SELF_CONSISTENCY` relative before the finer one is returned.
pub fn oracle_reference(
    model: Model,
    init: RawState,
    t_span: (f64, f64),
    h: f64,
) -> Result<RawState, OracleError> {
    let (t0, t1) = t_span;
    let span = t1 - t0;
    let n_real = span.abs() / h;
    let n = n_real.round() as usize;
    if n == 0 || (n_real - n as f64).abs() > 1e-6 * n_real.max(1.0) {
        return Err(OracleError::StepMismatch { h, span });
    }
    let first = richardson(model, init, t0, t1, 2 * n)?;
    let second = richardson(model, init, t0, t1, 4 * n)?;
    let dim = model.dim();
    let mut rel: f64 = 0.0;
    for i in 0..dim {
        rel = rel.max((first[i] - second[i]).abs() / 1.0_f64.max(second[i].abs()));
    }
    if rel > ORACLE_SELF_CONSISTENCY {
        return Err(OracleError::NotConverged { rel, required: ORACLE_SELF_CONSISTENCY });
    }
    Ok(second)
}
