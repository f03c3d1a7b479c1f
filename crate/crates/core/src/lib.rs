//! Automatic detection of the boundary in hyper-parameter space where a
//! performance metric stops improving.
//!
//! Given a set of evaluated configurations `u_i` with metric values `z_i`,
//! the library fits a boundary function `g(u; w) = 0` separating the region
//! where the metric is still changing from the region where it has
//! plateaued. The fit maximizes a softened two-group Gaussian profile
//! log-likelihood in which each point's side assignment is a sigmoid of
//! `g(u_i; w)`, so the objective is smooth in the boundary parameters and
//! amenable to gradient-based optimizers.
//!
//! Two boundary families are provided: a quadratic polynomial (conic
//! section), paired with a BFGS maximizer, and a one-hidden-layer tanh
//! network, paired with ADAM. After the fit, the grid is partitioned, the
//! mass-weighted center of each side is computed, and the point where the
//! segment between the two centers crosses the boundary is reported as the
//! recommended configuration, along with the nearest already-evaluated grid
//! point.
//!
//! The typical flow is:
//!
//! ```
//! use plateau_core::grid::{EvalGrid, Direction, TransformMode, fit_transform};
//! use plateau_core::boundary::BoundaryFamily;
//! use plateau_core::optimize::{multi_start_fit, OptimOptions};
//! use plateau_core::representative::{representative_point, RepOptions};
//!
//! # fn main() -> Result<(), plateau_core::Error> {
//! # let coords = (0..20).map(|i| vec![1.0 + i as f64, 2.0 + (i % 5) as f64]).collect();
//! # let metrics = (0..20).map(|i| if i < 10 { 0.0 } else { 5.0 }).collect();
//! let grid = EvalGrid::new(coords, metrics,
//!     vec!["x".into(), "y".into()], Direction::MinimizeIsGood)?;
//! let (tgrid, spec) = fit_transform(&grid, &[TransformMode::LogStd, TransformMode::LogStd])?;
//! let opts = OptimOptions { seed: 7, ..OptimOptions::default() };
//! let fit = multi_start_fit(&tgrid, BoundaryFamily::Qp, &opts, &spec)?;
//! let rep = representative_point(&tgrid, &fit, &RepOptions::default())?;
//! println!("recommended configuration: {:?}", rep.boundary_point_user);
//! # Ok(())
//! # }
//! ```

pub mod boundary;
pub mod gradcheck;
pub mod grid;
pub mod likelihood;
pub mod optimize;
pub mod representative;

mod error;

pub use boundary::{BoundaryFamily, BoundaryParams, NnParams, QpParams};
pub use error::Error;
pub use grid::{DimTransform, Direction, EvalGrid, SynthSpec, TransformMode, TransformSpec};
pub use optimize::{FitResult, OptimOptions, OptimizerKind};
pub use representative::{RepOptions, RepresentativeResult, Restriction};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
