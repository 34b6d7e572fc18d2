use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("curve is not an immersion: |c'| = {speed:e} at node {node}")]
    DegenerateCurve { node: usize, speed: f64 },

    #[error("surface is not an immersion: area factor {area:e} at interior node ({i}, {j})")]
    DegenerateSurface { i: usize, j: usize, area: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("transform combination vanishes at tau = {tau}, node {node}")]
    VanishingCombination { tau: f64, node: usize },

    #[error("layer {layer} is infeasible: weighted Lipschitz sum {sum} exceeds {bound}")]
    InfeasibleLayer { layer: usize, sum: f64, bound: f64 },

    #[error("network derivative {value:e} too close to zero at sample {sample}")]
    NearSingularDerivative { sample: usize, value: f64 },

    #[error("no feasible decreasing step length >= {min_step:e} at iteration {iteration}")]
    StagnatedStep { iteration: usize, min_step: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
