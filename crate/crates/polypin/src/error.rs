use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),

    /// Laplace argument past the singularity of `Q_T`; carries the boundary
    /// argument (the smallest admissible lambda for this `T`).
    #[error("laplace argument {lambda} beyond the singularity for T={t}; boundary at {boundary}")]
    Domain { t: u32, lambda: f64, boundary: f64 },

    #[error("horizon too small for requested tail accuracy: achievable defect {achievable:e}, requested {requested:e}")]
    HorizonTooSmall { achievable: f64, requested: f64 },

    #[error("run refused: estimated cost {estimated_ops} elementary ops exceeds budget {budget}")]
    Infeasible { estimated_ops: u128, budget: u128 },

    #[error("solver did not converge: {0}")]
    Solver(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
