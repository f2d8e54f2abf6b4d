//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("grid too large: {points} points exceed the {limit} point limit")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("causal classification of the zero covector is undefined")]
    ZeroCovector,

    #[error("covector has no base point but the metric is position dependent")]
    MissingBasePoint,

    #[error("ray chart has no directions")]
    EmptyChart,

    #[error("chart/grid mismatch: {0}")]
    ChartGridMismatch(String),

    #[error("n = 2 filtered back-projection is ill posed at the cone; use stable_inversion")]
    NeedsStableInversion,

    #[error("geodesic left the metric's coordinate domain at s = {s}")]
    DomainExit { s: f64 },

    #[error("boundary solve failed for endpoint pair {detail}")]
    ShootingFailed { detail: String },

    #[error("curvature evaluation failed at {0}")]
    CurvatureEval(String),
}
