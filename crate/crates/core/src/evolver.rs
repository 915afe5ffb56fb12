//! Leapfrog integration of `u_tt = Δu + |u|^{p_c-1} u`, with blow-up
//! detection and the diagnostics used to classify runs.

use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{
    h1dot_norm, lebesgue_norm, radial_derivative, Boundary, Field, RadialGrid, State,
    SUPPORT_THRESHOLD,
};
use crate::ground_state::{energy, ground_state_value, EnergyBreakdown, GroundState, Params};

/// Golden-section search range for `log λ` in [`dist_to_w`].
pub const LOG_LAMBDA_RANGE: f64 = 2.0;

/// Dispersal proxy: `‖∇u‖` below this fraction of `‖∇W‖` ...
pub const DISPERSAL_GRADIENT: f64 = 0.9;
/// ... and `|potential| / kinetic_x` below this.
pub const DISPERSAL_POTENTIAL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// The right-hand side `u ↦ Δ_b u + f(u) + s` of the semi-discrete system.
#[derive(Clone, Debug)]
pub struct Dynamics {
    params: Params,
    boundary: Boundary,
    nonlinear: bool,
    /// Constant source; `-(Δ_b W + W^{p_c})` makes `W` an exact discrete steady state.
    source: Option<Field>,
    ground: Option<Arc<GroundState>>,
}

impl Dynamics {
    /// Full equation, Dirichlet at `R`.
    pub fn nonlinear(grid: &Arc<RadialGrid>) -> Result<Self> {
        Ok(Dynamics {
            params: Params::new(grid.dim())?,
            boundary: Boundary::Dirichlet,
            nonlinear: true,
            source: None,
            ground: None,
        })
    }

    /// Linear wave equation, Dirichlet at `R` (test hook).
    pub fn free(grid: &Arc<RadialGrid>) -> Result<Self> {
        Ok(Dynamics {
            nonlinear: false,
            ..Self::nonlinear(grid)?
        })
    }

    /// Full equation for solutions that equal `W` beyond `R`. With
    /// `well_balanced` the discrete static residual is subtracted so that
    /// `(W, 0)` does not move at all.
    pub fn about_ground_state(ground: &Arc<GroundState>, well_balanced: bool) -> Self {
        let source = well_balanced.then(|| ground.static_residual().scaled(-1.0));
        Dynamics {
            params: ground.params(),
            boundary: ground.boundary(),
            nonlinear: true,
            source,
            ground: Some(ground.clone()),
        }
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn ground(&self) -> Option<&Arc<GroundState>> {
        self.ground.as_ref()
    }

    fn acceleration_into(&self, grid: &RadialGrid, u: &[f64], out: &mut [f64]) {
        grid.laplacian_into(u, self.boundary, out);
        if self.nonlinear {
            for (a, &v) in out.iter_mut().zip(u) {
                *a += self.params.power(v);
            }
        }
        if let Some(s) = &self.source {
            for (a, v) in out.iter_mut().zip(s.values()) {
                *a += v;
            }
        }
    }

    pub fn acceleration(&self, u: &Field) -> Field {
        let mut out = vec![0.0; u.len()];
        self.acceleration_into(u.grid(), u.values(), &mut out);
        Field::from_vec_unchecked(u.grid(), out)
    }

    /// One kick-drift-kick step.
    pub fn step(&self, state: &State, dt: f64) -> Result<State> {
        let grid = state.grid();
        let mut stepper = Stepper::new(self, state);
        stepper.advance(self, grid, dt);
        stepper.check(grid)?;
        Ok(stepper.state(grid, state.t + dt))
    }
}

/// Working buffers of one run; `acc` always holds the acceleration at `u`.
struct Stepper {
    u: Vec<f64>,
    ut: Vec<f64>,
    acc: Vec<f64>,
}

impl Stepper {
    fn new(dynamics: &Dynamics, state: &State) -> Self {
        let u = state.u.values().to_vec();
        let mut acc = vec![0.0; u.len()];
        dynamics.acceleration_into(state.grid(), &u, &mut acc);
        Stepper {
            u,
            ut: state.ut.values().to_vec(),
            acc,
        }
    }

    fn advance(&mut self, dynamics: &Dynamics, grid: &RadialGrid, dt: f64) {
        let half = 0.5 * dt;
        for ((u, ut), a) in self.u.iter_mut().zip(self.ut.iter_mut()).zip(&self.acc) {
            *ut += half * a;
            *u += dt * *ut;
        }
        dynamics.acceleration_into(grid, &self.u, &mut self.acc);
        for (ut, a) in self.ut.iter_mut().zip(&self.acc) {
            *ut += half * a;
        }
    }

    fn sup(&self) -> f64 {
        self.u.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    fn check(&self, grid: &RadialGrid) -> Result<()> {
        for (i, (u, ut)) in self.u.iter().zip(&self.ut).enumerate() {
            if !u.is_finite() || !ut.is_finite() {
                return Err(Error::NonFinite {
                    node: i,
                    radius: grid.radii()[i],
                });
            }
        }
        Ok(())
    }

    fn state(&self, grid: &Arc<RadialGrid>, t: f64) -> State {
        State {
            t,
            u: Field::from_vec_unchecked(grid, self.u.clone()),
            ut: Field::from_vec_unchecked(grid, self.ut.clone()),
        }
    }
}

/// One leapfrog step of the full equation with Dirichlet data at `R`.
pub fn step(state: &State, dt: f64) -> Result<State> {
    Dynamics::nonlinear(state.grid())?.step(state, dt)
}

/// `(t, u, u_t) ↦ (-t, u, -u_t)`
pub fn time_reverse(state: &State) -> State {
    State {
        t: -state.t,
        u: state.u.clone(),
        ut: state.ut.scaled(-1.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolverConfig {
    /// `dt / h`
    pub cfl: f64,
    pub t_run: f64,
    pub direction: Direction,
    /// Blow-up when `sup |u|` exceeds this multiple of `W(0)`.
    pub blowup_threshold: f64,
    /// Steps between diagnostic records.
    pub diagnostic_stride: usize,
    /// Compute [`dist_to_w`] in every record.
    pub track_distance: bool,
}

impl Default for EvolverConfig {
    fn default() -> Self {
        EvolverConfig {
            cfl: 0.5,
            t_run: 10.0,
            direction: Direction::Forward,
            blowup_threshold: 100.0,
            diagnostic_stride: 10,
            track_distance: true,
        }
    }
}

impl EvolverConfig {
    /// Step count and step size: the largest `dt ≤ cfl·h` dividing `t_run`.
    pub fn steps(&self, grid: &RadialGrid) -> (usize, f64) {
        let target = self.cfl * grid.spacing();
        let n = ((self.t_run / target) - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_run / n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl = {} outside (0, 1]", self.cfl)));
        }
        if !(self.t_run > 0.0) || !self.t_run.is_finite() {
            return Err(Error::Config(format!("t_run = {} must be positive", self.t_run)));
        }
        if !(self.blowup_threshold > 1.0) {
            return Err(Error::Config("blow-up threshold must exceed 1".into()));
        }
        if self.diagnostic_stride == 0 {
            return Err(Error::Config("diagnostic stride must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistanceToW {
    pub distance: f64,
    pub lambda: f64,
    /// The minimizer sits on the edge of the search range.
    pub at_boundary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub energy: EnergyBreakdown,
    pub grad_norm: f64,
    pub ut_norm: f64,
    pub sup_u: f64,
    pub dist_w: f64,
    pub lambda_best: f64,
    /// Running trapezoidal `∫ ‖u‖_q^q dt`, `q = 2(d+1)/(d-2)`, over the records so far.
    pub scattering_partial: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionOutcome {
    pub final_state: State,
    pub blew_up: bool,
    pub t_blowup_estimate: Option<f64>,
    pub series: Vec<DiagnosticRecord>,
    pub dt: f64,
    pub steps: usize,
}

impl EvolutionOutcome {
    /// Largest relative energy deviation from the first record.
    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.series.first() else {
            return 0.0;
        };
        let e0 = first.energy.total;
        self.series
            .iter()
            .map(|r| (r.energy.total - e0).abs() / e0.abs())
            .fold(0.0, f64::max)
    }
}

/// Radius beyond which the data differ from the exterior background by
/// less than the support threshold.
pub fn data_support(state: &State, dynamics: &Dynamics) -> f64 {
    let grid = state.grid();
    let pert = match dynamics.ground() {
        Some(gs) => &state.u - gs.field(),
        None => state.u.clone(),
    };
    grid.effective_support(&[pert.values(), state.ut.values()], SUPPORT_THRESHOLD)
}

/// Integrate for `cfg.t_run`, stopping early on blow-up.
pub fn evolve(state: &State, cfg: &EvolverConfig, dynamics: &Dynamics) -> Result<EvolutionOutcome> {
    cfg.validate()?;
    let grid = state.grid().clone();
    let support = data_support(state, dynamics);
    let window = grid.radius() - support;
    if cfg.t_run > window {
        return Err(Error::DomainValidity {
            t_run: cfg.t_run,
            window,
        });
    }
    let sign = match cfg.direction {
        Direction::Forward => 1.0,
        Direction::Backward => -1.0,
    };
    let start = match cfg.direction {
        Direction::Forward => state.clone(),
        Direction::Backward => time_reverse(state),
    };
    let t0 = state.t;
    let (steps, dt) = cfg.steps(&grid);
    let threshold = cfg.blowup_threshold * ground_state_value(grid.dim(), 0.0);
    let q = scattering_exponent(grid.dim());

    let mut stepper = Stepper::new(dynamics, &start);
    let mut series = Vec::new();
    let mut scattering = 0.0;
    let mut last: Option<(f64, f64)> = None;
    let mut record = |stepper: &Stepper, n: usize, series: &mut Vec<DiagnosticRecord>| {
        let t = t0 + sign * n as f64 * dt;
        let snapshot = stepper.state(&grid, t);
        let norm_q = lebesgue_norm(&snapshot.u, q).powf(q);
        if let Some((t_prev, v_prev)) = last {
            scattering += 0.5 * (t - t_prev).abs() * (norm_q + v_prev);
        }
        last = Some((t, norm_q));
        let dist = if cfg.track_distance {
            dist_to_w(&snapshot)
        } else {
            DistanceToW {
                distance: f64::NAN,
                lambda: f64::NAN,
                at_boundary: false,
            }
        };
        series.push(DiagnosticRecord {
            t,
            energy: energy(&snapshot),
            grad_norm: h1dot_norm(&snapshot.u),
            ut_norm: lebesgue_norm(&snapshot.ut, 2.0),
            sup_u: snapshot.u.max_abs(),
            dist_w: dist.distance,
            lambda_best: dist.lambda,
            scattering_partial: scattering,
        });
    };

    record(&stepper, 0, &mut series);
    let mut prev_u = stepper.u.clone();
    let mut prev_ut = stepper.ut.clone();
    let mut blowup = None;
    let mut done = 0;
    for n in 1..=steps {
        prev_u.copy_from_slice(&stepper.u);
        prev_ut.copy_from_slice(&stepper.ut);
        stepper.advance(dynamics, &grid, dt);
        let sup = stepper.sup();
        if !sup.is_finite() || stepper.check(&grid).is_err() {
            // Keep the last finite state.
            stepper.u.copy_from_slice(&prev_u);
            stepper.ut.copy_from_slice(&prev_ut);
            blowup = Some(n);
            break;
        }
        done = n;
        if sup > threshold {
            blowup = Some(n);
            record(&stepper, n, &mut series);
            break;
        }
        if n % cfg.diagnostic_stride == 0 || n == steps {
            record(&stepper, n, &mut series);
        }
    }
    let elapsed = done as f64 * dt;
    let reached = stepper.state(&grid, elapsed);
    let final_state = match cfg.direction {
        Direction::Forward => State {
            t: t0 + elapsed,
            ..reached
        },
        Direction::Backward => State {
            t: t0 - elapsed,
            ..time_reverse(&reached)
        },
    };
    Ok(EvolutionOutcome {
        final_state,
        blew_up: blowup.is_some(),
        t_blowup_estimate: blowup.map(|n| t0 + sign * n as f64 * dt),
        series,
        dt,
        steps: done,
    })
}

/// `2(d+1)/(d-2)`
pub fn scattering_exponent(dim: usize) -> f64 {
    2.0 * (dim as f64 + 1.0) / (dim as f64 - 2.0)
}

/// `min_λ ‖∇(u - W_λ)‖_2 + ‖u_t‖_2` over `log λ ∈ [-2, 2]`, with `W_λ`
/// evaluated in closed form.
pub fn dist_to_w(state: &State) -> DistanceToW {
    let grid = state.grid();
    let d = grid.dim();
    let du = radial_derivative(&state.u);
    let ut = lebesgue_norm(&state.ut, 2.0);
    let objective = |s: f64| {
        let lambda = s.exp();
        let c = lambda.powf(-(d as f64 - 2.0) / 2.0);
        let w = Field::from_fn(grid, |r| c * ground_state_value(d, r / lambda));
        lebesgue_norm(&(&du - &radial_derivative(&w)), 2.0) + ut
    };
    let (s, distance) = golden_section(objective, -LOG_LAMBDA_RANGE, LOG_LAMBDA_RANGE, 1e-7);
    DistanceToW {
        distance,
        lambda: s.exp(),
        at_boundary: (s.abs() - LOG_LAMBDA_RANGE).abs() < 1e-3,
    }
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    // The endpoints are candidates too: the minimum may sit on the edge.
    [(x1, f1), (x2, f2), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((x1, f1), |best, cur| if cur.1 < best.1 { cur } else { best })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum Classification {
    Blowup { t: f64 },
    Dispersal { t: f64 },
    Undecided { t_run: f64 },
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Blowup { .. } => "blowup",
            Classification::Dispersal { .. } => "dispersal",
            Classification::Undecided { .. } => "undecided",
        }
    }
}

/// Blow-up if the run stopped on the sup-norm proxy; dispersal at the first
/// record with `‖∇u‖ < 0.9 ‖∇W‖` and `|potential| < 0.1 kinetic_x`.
pub fn classify(outcome: &EvolutionOutcome, grad_w: f64, t_run: f64) -> Classification {
    if let Some(t) = outcome.t_blowup_estimate {
        return Classification::Blowup { t };
    }
    outcome
        .series
        .iter()
        .find(|r| {
            r.grad_norm < DISPERSAL_GRADIENT * grad_w
                && r.energy.potential.abs() < DISPERSAL_POTENTIAL * r.energy.kinetic_x
        })
        .map(|r| Classification::Dispersal { t: r.t })
        .unwrap_or(Classification::Undecided { t_run })
}

pub const CSV_HEADER: &str =
    "t,E_total,E_kin_t,E_kin_x,E_pot,grad_norm,ut_norm,sup_u,dist_W,lambda_best";

pub fn write_csv(series: &[DiagnosticRecord], mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in series {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.t,
            r.energy.total,
            r.energy.kinetic_t,
            r.energy.kinetic_x,
            r.energy.potential,
            r.grad_norm,
            r.ut_norm,
            r.sup_u,
            r.dist_w,
            r.lambda_best
        )?;
    }
    Ok(())
}
