use std::io;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("non-finite value at node {node} (r = {radius})")]
    NonFinite { node: usize, radius: f64 },

    #[error("no negative eigenvalue found (lowest = {lowest:e}); grid too coarse or domain too small")]
    NoNegativeEigenvalue { lowest: f64 },

    #[error("shift {shift:e} is within {gap:e} of eigenvalue {eigenvalue:e}")]
    NearSingularShift {
        shift: f64,
        eigenvalue: f64,
        gap: f64,
    },

    #[error("expansion validity violated: |v/W| = {ratio:.3} at r = {radius:.3}, t = {time:.3}")]
    ExpansionValidity { ratio: f64, radius: f64, time: f64 },

    #[error("Picard map is not contracting (ratios {ratios:?}); increase t_start")]
    NonContraction { ratios: Vec<f64> },

    #[error("Picard iteration did not reach tolerance {tol:e} in {iterations} iterations")]
    NotConverged { tol: f64, iterations: usize },

    #[error("light cone reaches the boundary: T_run = {t_run} > R - R_support = {window}")]
    DomainValidity { t_run: f64, window: f64 },

    #[error("rate fit rejected: {0}")]
    RateFit(String),

    #[error("eigendecomposition fault: {0}")]
    Spectrum(String),

    #[error("no overlap between the trajectories after shifting")]
    NoOverlap,

    #[error("config rejected: {0}")]
    Config(String),

    #[error("field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
