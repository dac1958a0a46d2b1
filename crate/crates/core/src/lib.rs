//! Estimation of the index vector and the monotone link in the single index
//! model `Y = psi0(alpha0^T X) + eps`.
//!
//! The link is fitted by isotonic least squares for a given direction. The
//! direction is fitted by one of the estimators in [`estimators`]: score
//! zero-crossings (simple or efficient, on a chart of the sphere or in `R^d`
//! with a Lagrange projector), profile least squares, maximum rank
//! correlation, or the link-free least-squares family.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod data;
pub mod error;
pub mod estimators;
pub mod isotonic;
pub mod kernel;
pub mod linalg;
pub mod optim;
pub mod score;
pub mod simulate;
pub mod sphere;

pub use data::{load_csv, save_csv, Dataset, ProjectedData};
pub use error::{Error, Result};
pub use estimators::{fit, Estimate, EstimatorKind, FitConfig, LinkFreeOpts, Starts};
pub use isotonic::{fit_isotonic, IsotonicFit};
pub use optim::{BroydenOpts, PatternSearchOpts, SolveReport};
pub use score::{BandwidthRule, Formulation, ScoreConfig};
pub use sphere::{Chart, ChartKind};
