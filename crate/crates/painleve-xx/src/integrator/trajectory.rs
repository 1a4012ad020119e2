use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode_models::{self, Pii0State, XxPrimeState, XxState};

use super::ToleranceConfig;

/// Raw state vector; dimension 2 models leave the last component at zero.
pub type RawState = [f64; 3];

/// Which equation a trajectory solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    Pii0,
    Xx,
    XxPrime,
}

impl ModelTag {
    pub fn dim(self) -> usize {
        match self {
            ModelTag::Pii0 | ModelTag::Xx => 2,
            ModelTag::XxPrime => 3,
        }
    }
}

impl std::fmt::Display for ModelTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelTag::Pii0 => write!(f, "pii0"),
            ModelTag::Xx => write!(f, "xx"),
            ModelTag::XxPrime => write!(f, "xxprime"),
        }
    }
}

/// A model plus its evaluation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Pii0,
    /// Second-order form with its singular-set guard threshold.
    Xx { eta: f64 },
    XxPrime,
}

impl Model {
    pub fn xx_default() -> Self {
        Model::Xx { eta: ode_models::DEFAULT_ETA }
    }

    pub fn tag(self) -> ModelTag {
        match self {
            Model::Pii0 => ModelTag::Pii0,
            Model::Xx { .. } => ModelTag::Xx,
            Model::XxPrime => ModelTag::XxPrime,
        }
    }

    pub fn dim(self) -> usize {
        self.tag().dim()
    }

    pub fn rhs(self, t: f64, y: &RawState) -> Result<RawState> {
        match self {
            Model::Pii0 => {
                let (d0, d1) = ode_models::rhs_pii0(Pii0State::new(t, y[0], y[1]))?;
                Ok([d0, d1, 0.0])
            }
            Model::Xx { eta } => {
                let (d0, d1) = ode_models::rhs_xx(XxState::new(t, y[0], y[1]), eta)?;
                Ok([d0, d1, 0.0])
            }
            Model::XxPrime => {
                let (d0, d1, d2) =
                    ode_models::rhs_xxprime(XxPrimeState::new(t, y[0], y[1], y[2]))?;
                Ok([d0, d1, d2])
            }
        }
    }
}

/// An accepted step node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub t: f64,
    pub y: RawState,
}

/// Dense-output coefficients for one accepted step.
///
/// The interpolant over theta in [0, 1] (t = t0 + theta * h) is
/// `r0 + theta*(r1 + (1-theta)*(r2 + theta*(r3 + (1-theta)*r4)))`,
/// which reproduces the step endpoints exactly at theta = 0 and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    pub rcont: [RawState; 5],
}

impl DenseStep {
    pub fn eval(&self, theta: f64, dim: usize) -> RawState {
        let [r0, r1, r2, r3, r4] = &self.rcont;
        let mut out = [0.0; 3];
        let th1 = 1.0 - theta;
        for i in 0..dim {
            out[i] = r0[i] + theta * (r1[i] + th1 * (r2[i] + theta * (r3[i] + th1 * r4[i])));
        }
        out
    }
}

/// Accepted/rejected step counts and evaluation totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// A densely interpolable solution over an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub model: Model,
    pub t_start: f64,
    pub t_end: f64,
    pub nodes: Vec<Node>,
    pub steps: Vec<DenseStep>,
    pub tol: ToleranceConfig,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn span(&self) -> (f64, f64) {
        (self.t_start, self.t_end)
    }

    pub fn direction(&self) -> f64 {
        (self.t_end - self.t_start).signum()
    }

    fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t_start <= self.t_end {
            (self.t_start, self.t_end)
        } else {
            (self.t_end, self.t_start)
        };
        // tolerate rounding at the closed endpoints
        let slack = 4.0 * f64::EPSILON * (1.0 + lo.abs().max(hi.abs()));
        t >= lo - slack && t <= hi + slack
    }

    /// Evaluate the dense output at any time inside the closed span.
    pub fn evaluate_dense(&self, t: f64) -> Result<RawState> {
        if !self.contains(t) {
            return Err(Error::Usage(format!(
                "t = {t} outside trajectory span [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        let dir = self.direction();
        // locate the step whose interval covers t
        let idx = self
            .steps
            .partition_point(|s| dir * (s.t0 + s.h) < dir * t)
            .min(self.steps.len().saturating_sub(1));
        let step = &self.steps[idx];
        let theta = ((t - step.t0) / step.h).clamp(0.0, 1.0);
        Ok(step.eval(theta, self.model.dim()))
    }

    pub fn pii0_state_at(&self, t: f64) -> Result<Pii0State> {
        let y = self.evaluate_dense(t)?;
        Ok(Pii0State::new(t, y[0], y[1]))
    }

    pub fn xxprime_state_at(&self, t: f64) -> Result<XxPrimeState> {
        let y = self.evaluate_dense(t)?;
        Ok(XxPrimeState::new(t, y[0], y[1], y[2]))
    }

    /// Largest |S| (or |s|) over the accepted nodes; used to scale
    /// zero-detection thresholds.
    pub fn magnitude_scale(&self) -> f64 {
        self.nodes.iter().map(|n| n.y[0].abs()).fold(1.0, f64::max)
    }

    /// n uniformly spaced sample times covering the closed span.
    pub fn sample_times(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let (a, b) = (self.t_start, self.t_end);
        (0..n).map(|i| a + (b - a) * (i as f64) / ((n - 1) as f64)).collect()
    }
}
