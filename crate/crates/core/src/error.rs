use thiserror::Error;

/// Errors produced by grid ingestion, the likelihood core, the optimizers
/// and the representative-point pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("metric column `{0}` not found in header")]
    MissingColumn(String),

    #[error("non-numeric cell `{value}` in column `{column}` at data row {row}")]
    NonNumericCell {
        column: String,
        row: usize,
        value: String,
    },

    #[error("non-finite value in column `{column}` at data row {row}")]
    NonFiniteValue { column: String, row: usize },

    #[error("too few points: got {0}, need at least 4")]
    TooFewPoints(usize),

    #[error("non-positive coordinate in dimension `{name}` at data row {row}; mark the dimension passthrough to skip the log transform")]
    NonPositiveCoordinate { name: String, row: usize },

    #[error("dimension `{0}` is constant in log scale (standard deviation of logs is 0)")]
    ConstantDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("invalid boundary parameters: {0}")]
    InvalidParams(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSynthSpec(String),

    #[error("degenerate partition: effective mass {mass:.3e} on one side is below {floor:.1}")]
    DegeneratePartition { mass: f64, floor: f64 },

    #[error("fewer than 2 distinct coordinate values; no candidate split exists")]
    NoDistinctSplit,

    #[error("empty side: the fitted boundary places every point on one side")]
    EmptySide,

    #[error("degenerate: metric constant")]
    ConstantMetric,

    #[error("no sign change: both centers of gravity lie on the same side of the boundary")]
    NoSignChange,

    #[error("zero total mass on the requested index set")]
    ZeroMass,

    #[error("objective is not finite at the initial point")]
    NonFiniteObjective,

    #[error("all {0} restarts ended in a degenerate partition")]
    AllRestartsDegenerate(usize),

    #[error("empty candidate set under restriction")]
    EmptyCandidateSet,
}
