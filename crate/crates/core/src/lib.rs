//! Radial numerics for the threshold solutions `W±` of the focusing
//! energy-critical wave equation `u_tt - Δu = |u|^{4/(d-2)} u`.
//!
//! The crate builds everything on one cell-centered radial grid:
//!
//! * [`grid`]: fields, the finite-volume Laplacian and all norms,
//! * [`ground_state`]: `W`, energy, scaling, the remainder `R(v)`,
//! * [`linearized`]: `ℒ = -Δ - p_c W^{p_c-1}`, its eigenpair `(-e0², 𝒴)` and resolvent,
//! * [`profiles`]: the approximate solutions `W_k^a` and their residuals,
//! * [`evolver`]: leapfrog time integration with blow-up detection,
//! * [`duhamel`]: the spectral propagator and the Picard contraction for `W^a`,
//! * [`experiments`]: the experiment suites, reports and file formats.

pub mod duhamel;
pub mod error;
pub mod evolver;
pub mod experiments;
pub mod ground_state;
pub mod inequalities;
pub mod interp;
pub mod io;
pub mod linearized;
pub mod profiles;
pub mod rates;
pub mod suite;
pub mod trajectory;
pub mod tridiag;

pub mod grid;

pub use error::{Error, Result};
pub use grid::{Field, RadialGrid, State};
