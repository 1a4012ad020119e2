//! Maps between PII0 and second-order solution data: squaring, the
//! positive square root, the sign-flipping square root across an isolated
//! zero, and the negative branch sigma = sqrt(-S).
//!
//! Transform outputs are sampled paths, not re-integrated trajectories:
//! the identities behind them are pointwise, so sampling dense output
//! avoids compounding integration error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{ModelTag, Trajectory};
use crate::ode_models::{rhs_pii0, rhs_xx, Pii0State, XxPrimeState, XxState, DEFAULT_ETA};
use crate::par::{self, Parallelism};
use crate::zero_analysis::ZeroEvent;

/// Which square-root branch a transform takes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BranchTag {
    PositiveSqrt,
    /// Sign flips from -sqrt(S) to +sqrt(S) at the given zero location.
    SignedSqrtFlipAt(f64),
    NegativeBranch,
}

/// A source of second-order-with-curvature states at arbitrary times.
///
/// Implemented by third-order trajectories directly, by second-order
/// trajectories via their own equation, and by the squared view of a PII0
/// trajectory.
pub trait XxDense: Sync {
    fn span(&self) -> (f64, f64);
    fn xxprime_at(&self, t: f64) -> Result<XxPrimeState>;

    fn sample_times(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let (a, b) = self.span();
        (0..n).map(|i| a + (b - a) * (i as f64) / ((n - 1) as f64)).collect()
    }
}

impl XxDense for Trajectory {
    fn span(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    fn xxprime_at(&self, t: f64) -> Result<XxPrimeState> {
        match self.model.tag() {
            ModelTag::XxPrime => self.xxprime_state_at(t),
            ModelTag::Xx => {
                let y = self.evaluate_dense(t)?;
                let (_, s_ddot) = rhs_xx(XxState::new(t, y[0], y[1]), DEFAULT_ETA)?;
                Ok(XxPrimeState::new(t, y[0], y[1], s_ddot))
            }
            ModelTag::Pii0 => Err(Error::Usage(
                "PII0 trajectories carry s, not S; square them first".into(),
            )),
        }
    }
}

/// The square of a PII0 trajectory, exposed as a dense second-order path
/// without resampling error.
pub struct SquaredView<'a> {
    inner: &'a Trajectory,
}

impl<'a> SquaredView<'a> {
    pub fn new(inner: &'a Trajectory) -> Result<Self> {
        if inner.model.tag() != ModelTag::Pii0 {
            return Err(Error::Usage("squared view requires a PII0 trajectory".into()));
        }
        Ok(Self { inner })
    }

    pub fn trajectory(&self) -> &Trajectory {
        self.inner
    }
}

impl XxDense for SquaredView<'_> {
    fn span(&self) -> (f64, f64) {
        (self.inner.t_start, self.inner.t_end)
    }

    fn xxprime_at(&self, t: f64) -> Result<XxPrimeState> {
        square_state(self.inner.pii0_state_at(t)?)
    }
}

/// Square a PII0 point: S = s^2, S_dot = 2 s s_dot, with S_ddot computed
/// through the PII0 equation so that `invariant_c` of the result vanishes
/// identically.
pub fn square_state(p: Pii0State) -> Result<XxPrimeState> {
    let (_, s_ddot_of_s) = rhs_pii0(p)?;
    let Pii0State { t, s, s_dot } = p;
    let cap_s = s * s;
    let cap_s_dot = 2.0 * s * s_dot;
    let cap_s_ddot = 2.0 * s * s_ddot_of_s + 2.0 * s_dot * s_dot;
    Ok(XxPrimeState::new(t, cap_s, cap_s_dot, cap_s_ddot))
}

/// Pointwise square of a PII0 trajectory at `samples` uniform times.
/// Valid straight through zeros of s; no special-casing needed.
pub fn square_trajectory(traj: &Trajectory, samples: usize) -> Result<Vec<XxPrimeState>> {
    square_trajectory_with(traj, samples, Parallelism::Auto)
}

pub fn square_trajectory_with(
    traj: &Trajectory,
    samples: usize,
    mode: Parallelism,
) -> Result<Vec<XxPrimeState>> {
    if traj.model.tag() != ModelTag::Pii0 {
        return Err(Error::Usage("square_trajectory requires a PII0 trajectory".into()));
    }
    let times = traj.sample_times(samples);
    par::try_map(mode, times, |t| square_state(traj.pii0_state_at(t)?))
}

/// Positive square root of a strictly positive path: s = +sqrt(S),
/// s_dot = S_dot / (2 sqrt(S)).
///
/// Errors with the offending time as soon as any sample has S <= 0; a
/// path that merely touches zero admits no twice-differentiable root.
pub fn sqrt_positive(path: &dyn XxDense, samples: usize) -> Result<Vec<Pii0State>> {
    sqrt_positive_with(path, samples, Parallelism::Auto)
}

pub fn sqrt_positive_with(
    path: &dyn XxDense,
    samples: usize,
    mode: Parallelism,
) -> Result<Vec<Pii0State>> {
    // a path that touches zero between samples still has no valid positive
    // root: an isolated zero of S breaks twice-differentiability of sqrt(S)
    let zeros = crate::zero_analysis::locate_zeros_xx(path, &crate::zero_analysis::ZeroTols::default());
    if let Some(z) = zeros.first() {
        return Err(Error::BranchViolation { t: z.location, s: z.value_abs });
    }
    let times = path.sample_times(samples);
    par::try_map(mode, times, |t| {
        let st = path.xxprime_at(t)?;
        if st.s <= 0.0 {
            return Err(Error::BranchViolation { t, s: st.s });
        }
        let root = st.s.sqrt();
        Ok(Pii0State::new(t, root, st.s_dot / (2.0 * root)))
    })
}

/// Signed square root across one isolated zero: -sqrt(S) left of the zero,
/// +sqrt(S) right of it, with the derivative at the zero taken from the
/// curvature limit s_dot(a) = sqrt(S_ddot(a) / 2).
///
/// The location `a` is always included as a sample. `negate` yields the
/// mirrored PII0 solution through the same S.
pub fn sqrt_signed(
    path: &dyn XxDense,
    zero: &ZeroEvent,
    samples: usize,
    negate: bool,
) -> Result<Vec<Pii0State>> {
    sqrt_signed_with(path, zero, samples, negate, Parallelism::Auto)
}

pub fn sqrt_signed_with(
    path: &dyn XxDense,
    zero: &ZeroEvent,
    samples: usize,
    negate: bool,
    mode: Parallelism,
) -> Result<Vec<Pii0State>> {
    let a = zero.location;
    let (lo, hi) = ordered(path.span());
    if a < lo || a > hi {
        return Err(Error::Usage(format!("flip location {a} outside span [{lo}, {hi}]")));
    }
    let s_ddot_a = zero.curvature();
    if s_ddot_a <= 0.0 {
        return Err(Error::WrongSign { s_ddot: s_ddot_a });
    }
    let sign_of = |v: f64| if negate { -v } else { v };

    let mut times = path.sample_times(samples);
    let pos = times.partition_point(|&t| ordered_before(path.span(), t, a));
    times.insert(pos, a);

    par::try_map(mode, times, move |t| {
        if t == a {
            return Ok(Pii0State::new(a, 0.0, sign_of((s_ddot_a / 2.0).sqrt())));
        }
        let st = path.xxprime_at(t)?;
        if st.s < 0.0 {
            return Err(Error::BranchViolation { t, s: st.s });
        }
        let root = if t < a { -st.s.sqrt() } else { st.s.sqrt() };
        let s_dot = if root == 0.0 {
            // sample collided with the zero within rounding
            (s_ddot_a / 2.0).sqrt()
        } else {
            st.s_dot / (2.0 * root)
        };
        Ok(Pii0State::new(t, sign_of(root), sign_of(s_dot)))
    })
}

/// One sample of the negative branch sigma = sqrt(-S), with the residual of
/// sigma_dd = t sigma - 2 sigma^3 evaluated through the lifted curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaSample {
    pub t: f64,
    pub sigma: f64,
    pub sigma_dot: f64,
    pub residual: f64,
}

/// Negative branch of a strictly negative path.
pub fn sqrt_negative(path: &dyn XxDense, samples: usize) -> Result<Vec<SigmaSample>> {
    sqrt_negative_with(path, samples, Parallelism::Auto)
}

pub fn sqrt_negative_with(
    path: &dyn XxDense,
    samples: usize,
    mode: Parallelism,
) -> Result<Vec<SigmaSample>> {
    let times = path.sample_times(samples);
    par::try_map(mode, times, |t| {
        let st = path.xxprime_at(t)?;
        if st.s >= 0.0 {
            return Err(Error::BranchViolation { t, s: st.s });
        }
        let sigma = (-st.s).sqrt();
        let sigma_dot = -st.s_dot / (2.0 * sigma);
        let sigma_ddot = (-st.s_ddot - 2.0 * sigma_dot * sigma_dot) / (2.0 * sigma);
        let residual = sigma_ddot - t * sigma + 2.0 * sigma * sigma * sigma;
        Ok(SigmaSample { t, sigma, sigma_dot, residual })
    })
}

fn ordered((a, b): (f64, f64)) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

// whether t comes before a in the path's own direction
fn ordered_before((start, end): (f64, f64), t: f64, a: f64) -> bool {
    if start <= end {
        t < a
    } else {
        t > a
    }
}
