use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("singular fit: column {column} is linearly dependent on earlier columns")]
    SingularFit { column: usize },

    #[error("insufficient degrees of freedom: n = {n} with {k} predictors plus intercept")]
    InsufficientDf { n: usize, k: usize },

    #[error("infinite VIF for column {column}: it is an exact linear combination of the others")]
    InfiniteVif { column: usize },

    #[error("no replicate fits to summarize")]
    EmptyInput,

    #[error("cannot reach target PA {target} within {tol}: c = {lo_c} gives PA {lo_pa}, c = {hi_c} gives PA {hi_pa}")]
    Calibration {
        target: f64,
        tol: f64,
        lo_c: f64,
        lo_pa: f64,
        hi_c: f64,
        hi_pa: f64,
    },

    #[error("replicate {sim_index} failed: {source}")]
    Replicate {
        sim_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("ragged grid, missing (n, vif) cells: {missing:?}")]
    RaggedGrid { missing: Vec<(usize, f64)> },

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
