//! Dormand-Prince 5(4) embedded pair with 4th-order dense output and a
//! PI step-size controller.

use thiserror::Error;

use crate::error::Error as ModelError;

use super::events::{locate_events_in_step, EventHit, EventSpec};
use super::trajectory::{DenseStep, Model, Node, RawState, StepStats, Trajectory};
use super::ToleranceConfig;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

// 5th-order weights are row 6 of A (FSAL); these are the 5th-minus-4th
// error weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// dense-output weights for the quartic interpolant
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Successful integration result: trajectory plus raw event hits.
#[derive(Debug, Clone)]
pub struct IntegrationOutput {
    pub trajectory: Trajectory,
    pub events: Vec<EventHit>,
}

#[derive(Debug, Error)]
pub enum IntegrateError {
    /// Step size fell below the floor, usually finite-time blow-up. The
    /// partial trajectory up to the last accepted step is attached.
    #[error("step size underflow at t = {t:e}: blow-up or stiffness; partial trajectory retained")]
    StepSizeUnderflow { t: f64, partial: Box<IntegrationOutput> },

    #[error("step budget exhausted at t = {t:e}")]
    MaxStepsExceeded { t: f64, partial: Box<IntegrationOutput> },

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("{0}")]
    Usage(String),
}

impl IntegrateError {
    /// The trajectory computed before failure, when one exists.
    pub fn partial(&self) -> Option<&IntegrationOutput> {
        match self {
            IntegrateError::StepSizeUnderflow { partial, .. }
            | IntegrateError::MaxStepsExceeded { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

struct StageResult {
    y_new: RawState,
    k_last: RawState,
    err: f64,
    rcont: [RawState; 5],
}

enum StageOutcome {
    Done(StageResult),
    /// State left the finite range mid-step; retry with a smaller step.
    NonFinite,
}

fn stages(
    model: Model,
    t: f64,
    y: &RawState,
    k1: &RawState,
    h: f64,
    tol: &ToleranceConfig,
    stats: &mut StepStats,
) -> Result<StageOutcome, IntegrateError> {
    let dim = model.dim();
    let mut k = [[0.0_f64; 3]; 7];
    k[0] = *k1;
    for stage in 1..7 {
        let mut ys = [0.0; 3];
        for i in 0..dim {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage) {
                acc += A[stage][j] * kj[i];
            }
            ys[i] = y[i] + h * acc;
        }
        if ys.iter().take(dim).any(|v| !v.is_finite()) {
            return Ok(StageOutcome::NonFinite);
        }
        k[stage] = match model.rhs(t + C[stage] * h, &ys) {
            Ok(f) => f,
            Err(ModelError::InvalidState { .. }) => return Ok(StageOutcome::NonFinite),
            Err(e) => return Err(e.into()),
        };
        stats.rhs_evals += 1;
    }
    // stage 7 is evaluated at y_new (FSAL), so k[6] is f(t + h, y_new)
    let mut y_new = [0.0; 3];
    for i in 0..dim {
        let mut acc = 0.0;
        for (j, kj) in k.iter().enumerate().take(6) {
            acc += A[6][j] * kj[i];
        }
        y_new[i] = y[i] + h * acc;
    }
    if y_new.iter().take(dim).any(|v| !v.is_finite()) {
        return Ok(StageOutcome::NonFinite);
    }

    let mut err_sq = 0.0;
    for i in 0..dim {
        let mut e = 0.0;
        for (j, kj) in k.iter().enumerate() {
            e += E[j] * kj[i];
        }
        e *= h;
        let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
        err_sq += (e / sc) * (e / sc);
    }
    let err = (err_sq / dim as f64).sqrt();

    let mut rcont = [[0.0_f64; 3]; 5];
    for i in 0..dim {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        rcont[0][i] = y[i];
        rcont[1][i] = ydiff;
        rcont[2][i] = bspl;
        rcont[3][i] = ydiff - h * k[6][i] - bspl;
        let mut d = 0.0;
        for (j, kj) in k.iter().enumerate() {
            d += D[j] * kj[i];
        }
        rcont[4][i] = h * d;
    }

    Ok(StageOutcome::Done(StageResult { y_new, k_last: k[6], err, rcont }))
}

fn initial_step(model: Model, t0: f64, y0: &RawState, k1: &RawState, span: f64, dir: f64) -> f64 {
    let dim = model.dim();
    let ynorm = y0.iter().take(dim).fold(0.0_f64, |m, v| m.max(v.abs()));
    let fnorm = k1.iter().take(dim).fold(0.0_f64, |m, v| m.max(v.abs()));
    let _ = t0;
    let h = if fnorm > 1e-10 {
        0.01 * (1.0 + ynorm) / fnorm
    } else {
        1e-3 * span
    };
    dir * h.min(0.1 * span).max(f64::MIN_POSITIVE)
}

/// Integrate `model` from `init` over `t_span` with local error controlled
/// by the embedded 5(4) pair. Event observables are checked on every
/// accepted step and located on the dense output by bisection.
pub fn integrate(
    model: Model,
    init: RawState,
    t_span: (f64, f64),
    tol: &ToleranceConfig,
    events: &[EventSpec],
) -> Result<IntegrationOutput, IntegrateError> {
    tol.validate()?;
    let (t0, t1) = t_span;
    if t0 == t1 || !t0.is_finite() || !t1.is_finite() {
        return Err(IntegrateError::Usage(format!(
            "invalid span ({t0}, {t1}): endpoints must be finite and distinct"
        )));
    }
    let dim = model.dim();
    if init.iter().take(dim).any(|v| !v.is_finite()) {
        return Err(ModelError::InvalidState { t: t0 }.into());
    }
    for spec in events {
        spec.validate(model.tag()).map_err(IntegrateError::Usage)?;
    }

    let span = (t1 - t0).abs();
    let dir = (t1 - t0).signum();
    let h_min = if tol.h_min > 0.0 { tol.h_min } else { 1e-14 * span };

    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = init;
    let mut k1 = model.rhs(t, &y)?;
    stats.rhs_evals += 1;

    let mut h = if tol.h_init > 0.0 {
        dir * tol.h_init.min(span)
    } else {
        initial_step(model, t, &y, &k1, span, dir)
    };

    let mut nodes = vec![Node { t, y }];
    let mut steps: Vec<DenseStep> = Vec::new();
    let mut hits: Vec<EventHit> = Vec::new();

    let make_output = |nodes: Vec<Node>, steps: Vec<DenseStep>, hits: Vec<EventHit>, stats: StepStats| {
        let t_end = nodes.last().map(|n| n.t).unwrap_or(t0);
        IntegrationOutput {
            trajectory: Trajectory {
                model,
                t_start: t0,
                t_end,
                nodes,
                steps,
                tol: *tol,
                stats,
            },
            events: hits,
        }
    };

    let mut facold: f64 = 1e-4;
    let mut reject = false;
    let mut n_steps = 0usize;

    while dir * (t1 - t) > 0.0 {
        n_steps += 1;
        if n_steps > tol.max_steps {
            let out = make_output(nodes, steps, hits, stats);
            return Err(IntegrateError::MaxStepsExceeded { t, partial: Box::new(out) });
        }
        if h.abs() < h_min {
            let out = make_output(nodes, steps, hits, stats);
            return Err(IntegrateError::StepSizeUnderflow { t, partial: Box::new(out) });
        }
        // clamp onto the endpoint
        if dir * (t + h - t1) > 0.0 {
            h = t1 - t;
        }

        let result = match stages(model, t, &y, &k1, h, tol, &mut stats)? {
            StageOutcome::Done(r) => r,
            StageOutcome::NonFinite => {
                stats.rejected += 1;
                h *= 0.5;
                reject = true;
                continue;
            }
        };

        if result.err <= 1.0 {
            stats.accepted += 1;
            let step = DenseStep { t0: t, h, rcont: result.rcont };
            let t_new = t + h;

            let mut terminal = false;
            if !events.is_empty() {
                let found =
                    locate_events_in_step(model, &step, events, &y, &result.y_new, t, t_new);
                for hit in found {
                    terminal |= hit.terminal;
                    hits.push(hit);
                }
            }

            steps.push(step);
            t = t_new;
            y = result.y_new;
            k1 = result.k_last;
            nodes.push(Node { t, y });

            if terminal {
                break;
            }

            // PI controller (Hairer's dopri5 constants)
            let facmax = if reject { 1.0 } else { 5.0 };
            let fac = if result.err == 0.0 {
                facmax
            } else {
                let fac11 = result.err.powf(0.17);
                (0.9 * facold.powf(0.04) / fac11).clamp(0.2, facmax)
            };
            facold = result.err.max(1e-4);
            reject = false;
            h *= fac;
        } else {
            stats.rejected += 1;
            reject = true;
            let fac11 = result.err.powf(0.17);
            h /= (fac11 / 0.9).min(5.0);
        }
    }

    Ok(make_output(nodes, steps, hits, stats))
}
