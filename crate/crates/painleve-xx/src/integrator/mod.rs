//! Adaptive explicit integration with dense output and event detection,
//! plus an independent fixed-step oracle for reference values.

mod dopri5;
mod events;
mod oracle;
mod trajectory;

pub use dopri5::{integrate, IntegrateError, IntegrationOutput};
pub use events::{Direction, EventHit, EventSpec, Observable};
pub use oracle::{oracle_integrate, oracle_reference, OracleError};
pub use trajectory::{DenseStep, Model, ModelTag, Node, StepStats, Trajectory};

use serde::{Deserialize, Serialize};

/// Step-size and budget control for one integration run.
///
/// `h_init = 0` selects an automatic initial step; `h_min = 0` selects
/// the default floor of 1e-14 times the span length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: 0.0,
            h_min: 0.0,
            max_steps: 1_000_000,
        }
    }
}

impl ToleranceConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), IntegrateError> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(IntegrateError::Usage("rtol and atol must be positive".into()));
        }
        if self.h_init < 0.0 || self.h_min < 0.0 {
            return Err(IntegrateError::Usage("h_init and h_min must be nonnegative".into()));
        }
        if self.max_steps == 0 {
            return Err(IntegrateError::Usage("max_steps must be positive".into()));
        }
        Ok(())
    }
}
