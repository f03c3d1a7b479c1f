//! Result-file schema for the `plateau` tool, plus the mapping from library
//! errors to process exit codes.
//!
//! Every file the tool writes carries `"schema": 1` so later revisions can
//! evolve the layout without breaking readers. The `timestamp` field is the
//! only part of a fit report that is allowed to differ between two runs with
//! identical inputs and seed; everything else is byte-stable.

use clap::ValueEnum;
use plateau_core::{
    Direction, Error, FitResult, OptimizerKind, RepresentativeResult, Restriction, TransformSpec,
};
use serde::{Deserialize, Serialize};

/// Schema tag written into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

/// Which way the metric is good, as spelled on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionArg {
    /// Smaller metric values are better (losses).
    Min,
    /// Larger metric values are better (accuracies).
    Max,
}

impl DirectionArg {
    pub fn to_direction(self) -> Direction {
        match self {
            DirectionArg::Min => Direction::MinimizeIsGood,
            DirectionArg::Max => Direction::MaximizeIsGood,
        }
    }
}

/// Boundary family flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryArg {
    /// Quadratic surface u'Au + b'u + c.
    Qp,
    /// One-hidden-layer tanh network.
    Nn,
}

/// Optimizer override flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerArg {
    Bfgs,
    Adam,
}

impl OptimizerArg {
    pub fn to_kind(self) -> OptimizerKind {
        match self {
            OptimizerArg::Bfgs => OptimizerKind::Bfgs,
            OptimizerArg::Adam => OptimizerKind::Adam,
        }
    }
}

/// Coordinate-transform policy flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformArg {
    /// Log-standardize dimensions that are strictly positive, pass the rest
    /// through untouched.
    Auto,
    /// Log-standardize every dimension (errors on non-positive values).
    LogStd,
    /// Fit in raw coordinates.
    None,
}

/// Candidate-set restriction for the nearest evaluated configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RestrictArg {
    /// Consider every evaluated configuration.
    All,
    /// Only configurations on the good side of the boundary.
    GoodSide,
}

impl RestrictArg {
    pub fn to_restriction(self, good_side: u8) -> Restriction {
        match self {
            RestrictArg::All => Restriction::All,
            RestrictArg::GoodSide => {
                if good_side == 2 {
                    Restriction::Side2
                } else {
                    Restriction::Side1
                }
            }
        }
    }
}

/// Echo of the flags a fit ran with, with the seed materialized. Re-running
/// the tool with exactly these values reproduces the report byte for byte
/// (timestamp aside).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input: String,
    pub output: String,
    pub metric: String,
    pub direction: DirectionArg,
    pub boundary: BoundaryArg,
    pub hidden: usize,
    pub restarts: usize,
    pub seed: u64,
    pub optimizer: OptimizerArg,
    pub transform: TransformArg,
    pub restrict: RestrictArg,
}

/// Sizes of the two sides of the fitted partition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PartitionSummary {
    pub side1: usize,
    pub side2: usize,
    pub good_side: u8,
}

/// Everything `plateau fit` writes: enough to reproduce the run, re-evaluate
/// the boundary anywhere, and read off the selected configuration without
/// touching the original CSV again.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub schema: u32,
    /// Unix seconds at the time the report was written. Excluded from
    /// reproducibility comparisons.
    pub timestamp: u64,
    pub config: ConfigEcho,
    pub n: usize,
    pub names: Vec<String>,
    /// Per-dimension (min, max) of the input coordinates in user units.
    pub data_range: Vec<(f64, f64)>,
    pub transform: TransformSpec,
    pub fit: FitResult,
    pub partition: PartitionSummary,
    pub representative: RepresentativeResult,
}

/// Output of `plateau point`: the selected locations in user units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointReport {
    pub schema: u32,
    pub boundary_point: Vec<f64>,
    pub nearest_point: Vec<f64>,
    pub nearest_index: usize,
    pub good_side: u8,
    pub restricted_to_good_side: bool,
}

/// Echo printed by `plateau synth` after writing the benchmark CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthReport {
    pub schema: u32,
    pub output: String,
    pub spec: plateau_core::SynthSpec,
}

/// Machine-readable error object printed on stderr when the tool fails.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema: u32,
    pub error: ErrorBody,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ErrorBody {
    /// Stable identifier for the failure class.
    pub code: String,
    /// Process exit status that accompanies this error.
    pub exit: i32,
    pub message: String,
}

/// Exit status for unusable input: malformed files, missing columns,
/// dimension mismatches, bad flag values.
pub const EXIT_INPUT: i32 = 2;
/// Exit status for inputs that were read fine but on which the method is
/// degenerate: constant metric, one-sided partitions, no boundary crossing.
pub const EXIT_DEGENERATE: i32 = 3;

/// Classify a library error into (exit code, stable code string).
pub fn classify(err: &Error) -> (i32, &'static str) {
    match err {
        Error::Csv(_) => (EXIT_INPUT, "csv"),
        Error::MissingColumn(_) => (EXIT_INPUT, "missing-column"),
        Error::NonNumericCell { .. } => (EXIT_INPUT, "non-numeric-cell"),
        Error::NonFiniteValue { .. } => (EXIT_INPUT, "non-finite-value"),
        Error::TooFewPoints(_) => (EXIT_INPUT, "too-few-points"),
        Error::NonPositiveCoordinate { .. } => (EXIT_INPUT, "non-positive-coordinate"),
        Error::ConstantDimension(_) => (EXIT_INPUT, "constant-dimension"),
        Error::DimMismatch { .. } => (EXIT_INPUT, "dim-mismatch"),
        Error::InvalidParams(_) => (EXIT_INPUT, "invalid-params"),
        Error::InvalidSynthSpec(_) => (EXIT_INPUT, "invalid-synth-spec"),
        Error::DegeneratePartition { .. } => (EXIT_DEGENERATE, "degenerate-partition"),
        Error::NoDistinctSplit => (EXIT_DEGENERATE, "no-distinct-split"),
        Error::EmptySide => (EXIT_DEGENERATE, "empty-side"),
        Error::ConstantMetric => (EXIT_DEGENERATE, "constant-metric"),
        Error::NoSignChange => (EXIT_DEGENERATE, "no-sign-change"),
        Error::ZeroMass => (EXIT_DEGENERATE, "zero-mass"),
        Error::NonFiniteObjective => (EXIT_DEGENERATE, "non-finite-objective"),
        Error::AllRestartsDegenerate(_) => (EXIT_DEGENERATE, "all-restarts-degenerate"),
        Error::EmptyCandidateSet => (EXIT_DEGENERATE, "empty-candidate-set"),
    }
}
