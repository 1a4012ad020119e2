use thiserror::Error;

/// Errors shared by the model, transform and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in state at t = {t}")]
    InvalidState { t: f64 },

    /// |S| fell inside the guard band around the singular set S = 0 of the
    /// second-order equation. Integrate in third-order coordinates instead
    /// (see `lift_xx_to_xxprime`).
    #[error(
        "near-singular second-order state at t = {t} (S = {s:e}, guard {guard:e}); \
         lift to the third-order equation to cross zeros"
    )]
    NearSingular { t: f64, s: f64, guard: f64 },

    /// S = 0 with a nonzero first derivative cannot occur on a solution.
    #[error("inconsistent zero data at t = {t}: S = 0 requires S_dot = 0, got S_dot = {s_dot}")]
    InconsistentZeroData { t: f64, s_dot: f64 },

    /// S, S_dot and S_ddot all zero pins the identically-zero solution;
    /// callers wanting that solution must construct it explicitly.
    #[error("degenerate zero data at t = {t}: S = S_dot = S_ddot = 0 forces the zero solution")]
    DegenerateZero { t: f64 },

    #[error("branch violation at t = {t}: sample has S = {s}, outside the branch domain")]
    BranchViolation { t: f64, s: f64 },

    #[error("second derivative at the zero has the wrong sign ({s_ddot}); use the negative branch")]
    WrongSign { s_ddot: f64 },

    #[error("{0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
