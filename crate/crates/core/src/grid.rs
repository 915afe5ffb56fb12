//! Radial discretization of a ball in `R^d`, fields on it, and the norms every
//! other module measures with.
//!
//! Nodes are cell-centered, `r_i = (i + 1/2) h`, so the origin is never a node.
//! Each node carries the exact volume of its spherical shell
//! `[r_{i-1/2}, r_{i+1/2}]` as quadrature weight, and the Laplacian is the
//! finite-volume divergence of face fluxes. With these two choices the discrete
//! Laplacian is exactly self-adjoint under the weighted inner product and exact
//! on quadratics, origin cell included.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::trajectory::Trajectory;

/// Largest weighted-Sobolev order accepted by [`weighted_sobolev_norm`].
pub const M_MAX: usize = 4;

/// Relative level below which data counts as outside its support.
pub const SUPPORT_THRESHOLD: f64 = 1e-10;

/// Gamma function at half-integers and integers, `Γ(n / 2)`.
fn gamma_half(n: usize) -> f64 {
    let (mut value, mut x) = if n % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn sphere_area(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma_half(dim)
}

/// Volume of the ball of radius `radius` in `R^d`.
pub fn ball_volume(dim: usize, radius: f64) -> f64 {
    sphere_area(dim) * radius.powi(dim as i32) / dim as f64
}

/// Japanese bracket `<r> = (1 + r^2)^{1/2}`.
#[inline]
pub fn bracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

/// Value imposed just outside the last node by the Laplacian.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Boundary {
    /// Homogeneous Dirichlet: the ghost node at `R + h/2` is zero.
    Dirichlet,
    /// The ghost node takes the given value (a known exterior solution).
    Exterior(f64),
}

impl Boundary {
    fn ghost(self) -> f64 {
        match self {
            Boundary::Dirichlet => 0.0,
            Boundary::Exterior(v) => v,
        }
    }
}

#[derive(Debug, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    radius: f64,
    nodes: usize,
    spacing: f64,
    r: Vec<f64>,
    weights: Vec<f64>,
    /// `σ r_{i+1/2}^{d-1} / h`, the flux coefficient through the outer face of cell `i`.
    conductance: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: usize, radius: f64, nodes: usize) -> Result<Arc<Self>> {
        if dim < 3 {
            return Err(Error::InvalidGrid(format!("dimension {dim} < 3")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidGrid(format!("radius {radius} must be positive")));
        }
        if nodes < 16 {
            return Err(Error::InvalidGrid(format!("{nodes} nodes; need at least 16")));
        }
        let h = radius / nodes as f64;
        let sigma = sphere_area(dim);
        let d = dim as i32;
        let r: Vec<f64> = (0..nodes).map(|i| (i as f64 + 0.5) * h).collect();
        let weights = (0..nodes)
            .map(|i| {
                let outer = (i as f64 + 1.0) * h;
                let inner = i as f64 * h;
                sigma * (outer.powi(d) - inner.powi(d)) / dim as f64
            })
            .collect();
        let conductance = (0..nodes)
            .map(|i| sigma * ((i as f64 + 1.0) * h).powi(d - 1) / h)
            .collect();
        Ok(Arc::new(RadialGrid {
            dim,
            radius,
            nodes,
            spacing: h,
            r,
            weights,
            conductance,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.nodes == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn conductance(&self) -> &[f64] {
        &self.conductance
    }

    /// Radius of the ghost node just outside the domain.
    pub fn ghost_radius(&self) -> f64 {
        self.radius + 0.5 * self.spacing
    }

    /// Sum of the quadrature weights.
    pub fn volume(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Finite-volume Laplacian `(r^{d-1} f')' / r^{d-1}` with zero flux at the
    /// origin and the given outer ghost value.
    pub fn laplacian_into(&self, f: &[f64], boundary: Boundary, out: &mut [f64]) {
        let n = self.nodes;
        let c = &self.conductance;
        let ghost = boundary.ghost();
        let mut inflow = 0.0;
        for i in 0..n {
            let next = if i + 1 < n { f[i + 1] } else { ghost };
            let outflow = c[i] * (next - f[i]);
            out[i] = (outflow - inflow) / self.weights[i];
            inflow = outflow;
        }
    }

    pub fn laplacian(&self, f: &[f64], boundary: Boundary) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes];
        self.laplacian_into(f, boundary, &mut out);
        out
    }

    /// Centered derivative of an even (radial) profile, mirrored across the
    /// origin and one-sided (second order) at the outer edge.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        self.derivative_with_parity(f, false)
    }

    /// As [`Self::derivative`], for a profile extended to `r < 0` as an odd
    /// function when `odd` is set.
    pub fn derivative_with_parity(&self, f: &[f64], odd: bool) -> Vec<f64> {
        let n = self.nodes;
        let h2 = 2.0 * self.spacing;
        let mut out = vec![0.0; n];
        let mirror = if odd { -f[0] } else { f[0] };
        out[0] = (f[1] - mirror) / h2;
        for i in 1..n - 1 {
            out[i] = (f[i + 1] - f[i - 1]) / h2;
        }
        out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / h2;
        out
    }

    /// `f, ∂_r f, ..., ∂_r^k f` for a radial `f`; `∂_r^j f` has parity `(-1)^j`.
    pub fn derivatives(&self, f: &[f64], k: usize) -> Vec<Vec<f64>> {
        let mut out = vec![f.to_vec()];
        for j in 1..=k {
            let next = self.derivative_with_parity(&out[j - 1], j % 2 == 0);
            out.push(next);
        }
        out
    }

    /// Smallest radius beyond which every listed profile stays below
    /// `threshold` times its own maximum.
    pub fn effective_support(&self, profiles: &[&[f64]], threshold: f64) -> f64 {
        let mut support: f64 = 0.0;
        for values in profiles {
            let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if peak == 0.0 {
                continue;
            }
            let cut = threshold * peak;
            if let Some(last) = values.iter().rposition(|v| v.abs() >= cut) {
                let edge = if last + 1 < self.nodes {
                    self.r[last] + 0.5 * self.spacing
                } else {
                    self.radius
                };
                support = support.max(edge);
            }
        }
        support
    }
}

/// A real function sampled on the nodes of one grid.
#[derive(Clone)]
pub struct Field {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("dim", &self.grid.dim)
            .field("radius", &self.grid.radius)
            .field("nodes", &self.grid.nodes)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl Field {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Field {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &Arc<RadialGrid>, c: f64) -> Self {
        Field {
            grid: grid.clone(),
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        Field {
            grid: grid.clone(),
            values: grid.radii().iter().map(|&r| f(r)).collect(),
        }
    }

    pub(crate) fn from_vec_unchecked(grid: &Arc<RadialGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn ensure_same_grid(&self, other: &Field) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// First non-finite node, reported as an error.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(node) => Err(Error::NonFinite {
                node,
                radius: self.grid.r[node],
            }),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_vec_unchecked(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise map that also sees the node radius.
    pub fn map_with_radius(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let values = self
            .values
            .iter()
            .zip(self.grid.radii())
            .map(|(&v, &r)| f(r, v))
            .collect();
        Field::from_vec_unchecked(&self.grid, values)
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Field {
        assert!(self.same_grid(other), "fields live on different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field::from_vec_unchecked(&self.grid, values)
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Field) {
        assert!(self.same_grid(other), "fields live on different grids");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn pointwise_mul(&self, other: &Field) -> Field {
        self.zip_map(other, |a, b| a * b)
    }

    /// `<f, g>_ω`
    pub fn dot(&self, other: &Field) -> f64 {
        assert!(self.same_grid(other), "fields live on different grids");
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((a, b), w)| w * a * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Field {
    type Output = Field;
    fn mul(self, rhs: f64) -> Field {
        self.scaled(rhs)
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scaled(-1.0)
    }
}

/// Solution snapshot `(t, u, ∂_t u)`.
#[derive(Clone, Debug)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub ut: Field,
}

impl State {
    pub fn new(t: f64, u: Field, ut: Field) -> Result<Self> {
        u.ensure_same_grid(&ut)?;
        Ok(State { t, u, ut })
    }

    pub fn at_rest(t: f64, u: Field) -> Self {
        let ut = Field::zeros(u.grid());
        State { t, u, ut }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.u.grid()
    }
}

/// A sampled `L^q_t L^r_x` exponent pair; `f64::INFINITY` means sup.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedNormSpec {
    pub q: f64,
    pub r: f64,
}

impl MixedNormSpec {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        for (name, e) in [("q", q), ("r", r)] {
            if !(e >= 1.0) {
                return Err(Error::InvalidArgument(format!("exponent {name} = {e} < 1")));
            }
        }
        Ok(MixedNormSpec { q, r })
    }

    /// The diagonal Strichartz pair `L^{2(d+1)/(d-2)}_{t,x}` (the scattering size).
    pub fn scattering_size(dim: usize) -> Self {
        let e = 2.0 * (dim as f64 + 1.0) / (dim as f64 - 2.0);
        MixedNormSpec { q: e, r: e }
    }
}

/// `(Σ ω_i |f_i|^p)^{1/p}`, or `max |f_i|` for `p = ∞`.
pub fn lebesgue_norm(f: &Field, p: f64) -> f64 {
    debug_assert!(p >= 1.0);
    if p.is_infinite() {
        return f.max_abs();
    }
    let w = f.grid().weights();
    if p == 2.0 {
        return f
            .values()
            .iter()
            .zip(w)
            .map(|(v, w)| w * v * v)
            .sum::<f64>()
            .sqrt();
    }
    f.values()
        .iter()
        .zip(w)
        .map(|(v, w)| w * v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn radial_derivative(f: &Field) -> Field {
    Field::from_vec_unchecked(f.grid(), f.grid().derivative(f.values()))
}

/// Dirichlet Laplacian (zero ghost value beyond `R`).
pub fn radial_laplacian(f: &Field) -> Field {
    radial_laplacian_with(f, Boundary::Dirichlet)
}

pub fn radial_laplacian_with(f: &Field, boundary: Boundary) -> Field {
    Field::from_vec_unchecked(f.grid(), f.grid().laplacian(f.values(), boundary))
}

/// `‖∇f‖_2`
pub fn h1dot_norm(f: &Field) -> f64 {
    lebesgue_norm(&radial_derivative(f), 2.0)
}

/// `Σ_{j ≤ m} ‖<r>^{m-j} ∂_r^j f‖_2`, with pure radial derivatives.
pub fn weighted_sobolev_norm(f: &Field, m: usize) -> Result<f64> {
    if m > M_MAX {
        return Err(Error::InvalidArgument(format!(
            "weighted Sobolev order {m} exceeds {M_MAX}"
        )));
    }
    let grid = f.grid();
    let mut total = 0.0;
    for (j, derivative) in grid.derivatives(f.values(), m).iter().enumerate() {
        let power = (m - j) as i32;
        let sum: f64 = derivative
            .iter()
            .zip(grid.radii())
            .zip(grid.weights())
            .map(|((v, &r), w)| {
                let x = bracket(r).powi(power) * v;
                w * x * x
            })
            .sum();
        total += sum.sqrt();
    }
    Ok(total)
}

/// Temporal `L^q` (trapezoidal) of the spatial `L^r` norms of a trajectory.
pub fn mixed_spacetime_norm(traj: &Trajectory, spec: MixedNormSpec) -> Result<f64> {
    let fields = traj.fields();
    if fields.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let spatial: Vec<f64> = fields.iter().map(|f| lebesgue_norm(f, spec.r)).collect();
    if spec.q.is_infinite() {
        return Ok(spatial.iter().fold(0.0_f64, |m, &v| m.max(v)));
    }
    if spatial.len() == 1 {
        return Ok(0.0);
    }
    let times = traj.times();
    let mut acc = 0.0;
    for n in 0..spatial.len() - 1 {
        let dt = times[n + 1] - times[n];
        acc += 0.5 * dt * (spatial[n].powf(spec.q) + spatial[n + 1].powf(spec.q));
    }
    Ok(acc.powf(1.0 / spec.q))
}
