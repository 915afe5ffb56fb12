//! The linearized operator `ℒ = -Δ - p_c W^{p_c-1}` about the ground state,
//! its negative eigenpair and its shifted resolvent.
//!
//! `ℒ` is self-adjoint in the weighted inner product `<f, g>_ω`. The similarity
//! transform `y = diag(√ω) f` turns it into an ordinary symmetric tridiagonal
//! matrix, which is what every eigen- and linear solve below works on.

use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::grid::{radial_laplacian_with, Boundary, Field, RadialGrid};
use crate::ground_state::{scaling_direction, scaling_direction_value, GroundState};
use crate::tridiag::SymTridiag;

/// Relative floor (in units of `e0^2`) separating bound states from the
/// near-zero modes of the truncated continuum.
pub const ESSENTIAL_FLOOR: f64 = 1e-6;

#[derive(Debug)]
pub struct DiscreteOperator {
    grid: Arc<RadialGrid>,
    potential: Field,
    sym: SymTridiag,
    sqrt_w: Vec<f64>,
    lowest: OnceLock<f64>,
}

/// `ℒ` with Dirichlet data at `R`.
pub fn assemble_l(ground: &GroundState) -> DiscreteOperator {
    DiscreteOperator::with_potential(ground.potential().clone())
}

impl DiscreteOperator {
    /// `-Δ - V` for an arbitrary potential field `V`.
    pub fn with_potential(potential: Field) -> Self {
        let grid = potential.grid().clone();
        let n = grid.len();
        let c = grid.conductance();
        let w = grid.weights();
        let sqrt_w: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        let diag = (0..n)
            .map(|i| {
                let inner = if i > 0 { c[i - 1] } else { 0.0 };
                (c[i] + inner) / w[i] - potential.values()[i]
            })
            .collect();
        let off = (0..n - 1).map(|i| -c[i] / (sqrt_w[i] * sqrt_w[i + 1])).collect();
        DiscreteOperator {
            grid,
            potential,
            sym: SymTridiag::new(diag, off),
            sqrt_w,
            lowest: OnceLock::new(),
        }
    }

    /// Plain `-Δ` (potential removed).
    pub fn free(grid: &Arc<RadialGrid>) -> Self {
        Self::with_potential(Field::zeros(grid))
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn potential(&self) -> &Field {
        &self.potential
    }

    /// The symmetrized matrix `diag(√ω) ℒ diag(√ω)^{-1}`.
    pub fn symmetric(&self) -> &SymTridiag {
        &self.sym
    }

    pub fn to_symmetric(&self, f: &Field) -> Vec<f64> {
        f.values().iter().zip(&self.sqrt_w).map(|(v, s)| v * s).collect()
    }

    pub fn from_symmetric(&self, y: &[f64]) -> Field {
        let values = y.iter().zip(&self.sqrt_w).map(|(v, s)| v / s).collect();
        Field::from_vec_unchecked(&self.grid, values)
    }

    pub fn apply(&self, f: &Field) -> Field {
        self.apply_with(f, Boundary::Dirichlet)
    }

    /// `-Δf - V f` with the given outer ghost value.
    pub fn apply_with(&self, f: &Field, boundary: Boundary) -> Field {
        let lap = radial_laplacian_with(f, boundary);
        let vf = f.pointwise_mul(&self.potential);
        let mut out = lap.scaled(-1.0);
        out.axpy(-1.0, &vf);
        out
    }

    /// Smallest eigenvalue (cached).
    pub fn lowest_eigenvalue(&self) -> f64 {
        *self.lowest.get_or_init(|| self.sym.eigenvalue(0))
    }

    /// Counting floor `δ = 10^{-6} e0^2`, or `10^{-6}` without a bound state.
    fn floor(&self) -> f64 {
        let lowest = self.lowest_eigenvalue();
        if lowest < 0.0 {
            ESSENTIAL_FLOOR * -lowest
        } else {
            ESSENTIAL_FLOOR
        }
    }
}

/// The negative eigenvalue `-e0^2` and its eigenfunction `𝒴`.
#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub e0: f64,
    /// `‖𝒴‖_{L^2_ω} = 1`, positive at the first node.
    pub y: Field,
    /// `‖ℒ𝒴 + e0^2 𝒴‖` measured on the symmetric matrix.
    pub residual: f64,
}

pub fn ground_eigenpair(l: &DiscreteOperator) -> Result<Eigenpair> {
    let lowest = l.lowest_eigenvalue();
    if lowest >= 0.0 {
        return Err(Error::NoNegativeEigenvalue { lowest });
    }
    let sym = l.symmetric();
    let mut y = sym.inverse_iteration(lowest)?;
    if y[0] < 0.0 {
        y.iter_mut().for_each(|v| *v = -*v);
    }
    let ay = sym.matvec(&y);
    let rayleigh: f64 = ay.iter().zip(&y).map(|(a, b)| a * b).sum();
    let residual = ay
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - rayleigh * b).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(Eigenpair {
        e0: (-rayleigh).sqrt(),
        y: l.from_symmetric(&y),
        residual,
    })
}

/// Number of eigenvalues below `-δ`, `δ = 10^{-6} e0^2`.
pub fn negative_count(l: &DiscreteOperator) -> usize {
    if l.lowest_eigenvalue() >= 0.0 {
        return 0;
    }
    l.symmetric().count_below(-l.floor())
}

/// Solve `(ℒ + μ) x = rhs`.
pub fn shifted_solve(l: &DiscreteOperator, mu: f64, rhs: &Field) -> Result<Field> {
    if !rhs.same_grid(l.potential()) {
        return Err(Error::GridMismatch);
    }
    if rhs.max_abs() == 0.0 {
        return Ok(Field::zeros(l.grid()));
    }
    let gap = l.floor();
    let sym = l.symmetric();
    if let Some(&eigenvalue) = sym.eigenvalues_in(-mu - gap, -mu + gap).first() {
        return Err(Error::NearSingularShift {
            shift: mu,
            eigenvalue,
            gap,
        });
    }
    let y = sym.solve_shifted(mu, &l.to_symmetric(rhs))?;
    let x = l.from_symmetric(&y);
    x.check_finite()?;
    Ok(x)
}

/// Rayleigh quotient `<ℒ ΛW, ΛW> / ‖ΛW‖^2` of the scaling direction.
pub fn zero_mode_rayleigh(l: &DiscreteOperator) -> f64 {
    let grid = l.grid();
    let lw = scaling_direction(grid);
    let ghost = scaling_direction_value(grid.dim(), grid.ghost_radius());
    let image = l.apply_with(&lw, Boundary::Exterior(ghost));
    image.dot(&lw) / lw.dot(&lw)
}
