//! Consequences of the density limit: gaps, log-Hölder moduli, Fuglede–Kadison
//! determinants and kernel dimensions.

mod fk;
mod gaps;
mod holder;
mod kernel;

use thiserror::Error;

use crate::algebraic::AlgebraicError;
use crate::spectral::SpectralError;

pub use fk::{fk_determinant, fk_positivity_probe, CutoffValue, FkEstimate, FkRow, PositivityCondition, PositivityReport};
pub use gaps::{spectral_gap_scan, GapInterval, GapReport, GapVerdict, Trend, DEFAULT_ETA_GAP};
pub use holder::{holder_constant, log_holder_check, HolderConstants, HolderReport, HolderRow};
pub use kernel::{connected_components, kernel_dimension_check, KernelReport, KernelRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantsError {
    #[error("grid has {0} cells, at least 8 are needed")]
    GridTooCoarse(usize),
    #[error("at least 3 exhaustion sets are needed, got {0}")]
    InsufficientData(usize),
    #[error("log-determinant drifts to −∞ (per-m values {0:?})")]
    DivergentEstimate(Vec<f64>),
    #[error("μ = {mu} lies within {distance:e} of a restricted spectrum and is not excluded exactly")]
    Undecidable { mu: String, distance: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Algebraic(#[from] AlgebraicError),
}
