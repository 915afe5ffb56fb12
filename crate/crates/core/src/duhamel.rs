//! The exact correction `h = W^a - W_k^a` as the fixed point of the Duhamel
//! map
//!
//! ```text
//! h(t) = -∫_t^∞ sin((t-τ)√-Δ)/√-Δ · F(τ) dτ,
//! F = p_c W^{p_c-1} h + R(h + v_k) - R(v_k) - ε_k,
//! ```
//!
//! computed mode by mode in the eigenbasis of the discrete Dirichlet `-Δ`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{lebesgue_norm, weighted_sobolev_norm, Field, RadialGrid, State, SUPPORT_THRESHOLD};
use crate::ground_state::GroundState;
use crate::linearized::DiscreteOperator;
use crate::profiles::{ProfileSet, EXPANSION_LIMIT};
use crate::rates::{fit_decay_rate, RateFit};
use crate::trajectory::{TimeGrid, Trajectory};

/// Picard iterations before giving up.
pub const MAX_ITERATIONS: usize = 60;

/// Consecutive non-contracting iterations that trigger a fault.
pub const NON_CONTRACTION_STREAK: usize = 3;

/// Above this `ω Δτ` the oscillatory weights are integrated exactly; below
/// it the trapezoid is already accurate to `(ω Δτ)^2 / 12` and avoids the
/// cancellation in the exact weights.
pub const FILON_SWITCH: f64 = 0.1;

/// Diagonalization of the Dirichlet `-Δ`: `-Δ φ_m = λ_m φ_m`, `<φ_m, φ_n>_ω = δ_mn`.
#[derive(Debug)]
pub struct SpectralPropagator {
    grid: Arc<RadialGrid>,
    eigenvalues: Vec<f64>,
    frequencies: Vec<f64>,
    /// Orthonormal eigenvectors of the symmetrized matrix, as columns.
    basis: DMatrix<f64>,
    sqrt_w: Vec<f64>,
}

pub fn build_propagator(grid: &Arc<RadialGrid>) -> Result<SpectralPropagator> {
    let free = DiscreteOperator::free(grid);
    let (eigenvalues, basis) = free.symmetric().full_eigen()?;
    if let Some((m, &lambda)) = eigenvalues.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::Spectrum(format!("mode {m} has eigenvalue {lambda:e} ≤ 0")));
    }
    Ok(SpectralPropagator {
        grid: grid.clone(),
        frequencies: eigenvalues.iter().map(|l| l.sqrt()).collect(),
        eigenvalues,
        basis,
        sqrt_w: grid.weights().iter().map(|w| w.sqrt()).collect(),
    })
}

impl SpectralPropagator {
    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `λ_m`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `√λ_m`
    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// The eigenfield `φ_m`.
    pub fn mode(&self, m: usize) -> Field {
        let values = self
            .basis
            .column(m)
            .iter()
            .zip(&self.sqrt_w)
            .map(|(v, s)| v / s)
            .collect();
        Field::from_vec_unchecked(&self.grid, values)
    }

    /// Coefficients `<f, φ_m>_ω`.
    pub fn transform(&self, f: &Field) -> Vec<f64> {
        let y = nalgebra::DVector::from_iterator(
            f.len(),
            f.values().iter().zip(&self.sqrt_w).map(|(v, s)| v * s),
        );
        (self.basis.tr_mul(&y)).iter().copied().collect()
    }

    /// `Σ_m c_m φ_m`
    pub fn inverse(&self, coeffs: &[f64]) -> Field {
        let c = nalgebra::DVector::from_column_slice(coeffs);
        let y = &self.basis * c;
        let values = y.iter().zip(&self.sqrt_w).map(|(v, s)| v / s).collect();
        Field::from_vec_unchecked(&self.grid, values)
    }

    /// Coefficients of many fields at once: column `n` belongs to `fields[n]`.
    pub fn transform_many(&self, fields: &[Field]) -> DMatrix<f64> {
        let n = self.len();
        let mut y = DMatrix::<f64>::zeros(n, fields.len());
        for (col, f) in fields.iter().enumerate() {
            for (i, (v, s)) in f.values().iter().zip(&self.sqrt_w).enumerate() {
                y[(i, col)] = v * s;
            }
        }
        self.basis.tr_mul(&y)
    }

    pub fn inverse_many(&self, coeffs: &DMatrix<f64>) -> Vec<Field> {
        let y = &self.basis * coeffs;
        (0..y.ncols())
            .map(|col| {
                let values = y
                    .column(col)
                    .iter()
                    .zip(&self.sqrt_w)
                    .map(|(v, s)| v / s)
                    .collect();
                Field::from_vec_unchecked(&self.grid, values)
            })
            .collect()
    }

    /// `u(t) = cos(t√-Δ) f + sin(t√-Δ)/√-Δ g` and its time derivative.
    pub fn free_evolve(&self, f: &Field, g: &Field, t: f64) -> Result<State> {
        f.ensure_same_grid(g)?;
        let (fc, gc) = (self.transform(f), self.transform(g));
        let mut u = vec![0.0; self.len()];
        let mut ut = vec![0.0; self.len()];
        for m in 0..self.len() {
            let w = self.frequencies[m];
            let (s, c) = (w * t).sin_cos();
            u[m] = c * fc[m] + s / w * gc[m];
            ut[m] = -w * s * fc[m] + c * gc[m];
        }
        State::new(t, self.inverse(&u), self.inverse(&ut))
    }
}

/// Quadrature weights of `∫ cos(ωτ) F` and `∫ sin(ωτ) F` over each interval
/// of a uniform time grid: trapezoidal when `ω Δτ ≤ FILON_SWITCH`, exact for
/// piecewise-linear `F` otherwise.
#[derive(Debug)]
pub struct DuhamelKernel {
    times: Vec<f64>,
    frequencies: Vec<f64>,
    /// `[mode][interval] -> (cos_left, cos_right, sin_left, sin_right)`
    weights: Vec<Vec<[f64; 4]>>,
}

impl DuhamelKernel {
    pub fn new(prop: &SpectralPropagator, tg: &TimeGrid) -> Self {
        let times = tg.times();
        let dt = tg.step();
        let weights = prop
            .frequencies()
            .par_iter()
            .map(|&w| {
                times
                    .windows(2)
                    .map(|pair| interval_weights(w, pair[0], pair[1], dt))
                    .collect()
            })
            .collect();
        DuhamelKernel {
            times,
            frequencies: prop.frequencies().to_vec(),
            weights,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Mode coefficients of `h` and `h_t` at every sample time, from the
    /// mode coefficients of `F` (both `modes × times`).
    pub fn apply(&self, forcing: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let (modes, count) = forcing.shape();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..modes)
            .into_par_iter()
            .map(|m| {
                let w = self.frequencies[m];
                let mut h = vec![0.0; count];
                let mut ht = vec![0.0; count];
                let (mut c, mut s) = (0.0, 0.0);
                for n in (0..count).rev() {
                    if n + 1 < count {
                        let [c0, c1, s0, s1] = self.weights[m][n];
                        let (f0, f1) = (forcing[(m, n)], forcing[(m, n + 1)]);
                        c += c0 * f0 + c1 * f1;
                        s += s0 * f0 + s1 * f1;
                    }
                    let (sin, cos) = (w * self.times[n]).sin_cos();
                    h[n] = -(sin * c - cos * s) / w;
                    ht[n] = -(cos * c + sin * s);
                }
                (h, ht)
            })
            .collect();
        let mut h = DMatrix::zeros(modes, count);
        let mut ht = DMatrix::zeros(modes, count);
        for (m, (hr, htr)) in rows.into_iter().enumerate() {
            for n in 0..count {
                h[(m, n)] = hr[n];
                ht[(m, n)] = htr[n];
            }
        }
        (h, ht)
    }
}

fn interval_weights(w: f64, a: f64, b: f64, dt: f64) -> [f64; 4] {
    let (sa, ca) = (w * a).sin_cos();
    let (sb, cb) = (w * b).sin_cos();
    if w * dt <= FILON_SWITCH {
        let half = 0.5 * dt;
        return [half * ca, half * cb, half * sa, half * sb];
    }
    let i0c = (sb - sa) / w;
    let i1c = dt * sb / w + (cb - ca) / (w * w);
    let i0s = (ca - cb) / w;
    let i1s = -dt * cb / w + (sb - sa) / (w * w);
    [i0c - i1c / dt, i1c / dt, i0s - i1s / dt, i1s / dt]
}

/// `h` and `h_t` on the time grid of the forcing.
#[derive(Clone, Debug)]
pub struct DuhamelSolution {
    pub h: Trajectory,
    pub ht: Trajectory,
}

/// `h(t) = -∫_t^{T_max} sin((t-τ)√-Δ)/√-Δ F(τ) dτ` at every sample time.
pub fn duhamel_tail(prop: &SpectralPropagator, forcing: &Trajectory) -> Result<DuhamelSolution> {
    let tg = uniform_grid(forcing)?;
    let kernel = DuhamelKernel::new(prop, &tg);
    Ok(tail_with(prop, &kernel, forcing))
}

fn tail_with(prop: &SpectralPropagator, kernel: &DuhamelKernel, forcing: &Trajectory) -> DuhamelSolution {
    let coeffs = prop.transform_many(forcing.fields());
    let (hc, htc) = kernel.apply(&coeffs);
    let times = forcing.times().to_vec();
    DuhamelSolution {
        h: Trajectory::new(times.clone(), prop.inverse_many(&hc)).expect("uniform grid"),
        ht: Trajectory::new(times, prop.inverse_many(&htc)).expect("uniform grid"),
    }
}

fn uniform_grid(traj: &Trajectory) -> Result<TimeGrid> {
    let times = traj.times();
    if times.len() < 2 {
        return Err(Error::InvalidArgument("trajectory needs at least two samples".into()));
    }
    let tg = TimeGrid::uniform(times[0], times[times.len() - 1], times.len())?;
    let tol = 1e-9 * tg.step();
    if times.iter().enumerate().any(|(n, &t)| (t - tg.time(n)).abs() > tol) {
        return Err(Error::InvalidArgument("trajectory times are not uniform".into()));
    }
    Ok(tg)
}

/// `sup_n e^{α t_n} ‖f(t_n)‖_{H^{m,m}}` and where it is attained.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SigmaNorm {
    pub alpha: f64,
    pub m: usize,
    pub value: f64,
    pub argmax: f64,
}

impl SigmaNorm {
    pub fn of(traj: &Trajectory, alpha: f64, m: usize) -> Result<Self> {
        let values: Vec<f64> = traj
            .fields()
            .par_iter()
            .map(|f| weighted_sobolev_norm(f, m))
            .collect::<Result<_>>()?;
        let (mut value, mut argmax) = (0.0, traj.times()[0]);
        for (&t, v) in traj.times().iter().zip(values) {
            let weighted = (alpha * t).exp() * v;
            if weighted > value {
                value = weighted;
                argmax = t;
            }
        }
        if !value.is_finite() {
            return Err(Error::InvalidArgument("Σ-norm is not finite".into()));
        }
        Ok(SigmaNorm {
            alpha,
            m,
            value,
            argmax,
        })
    }
}

/// Everything the Picard map needs that does not depend on `h`.
#[derive(Debug)]
pub struct FixedPointProblem {
    ps: ProfileSet,
    prop: Arc<SpectralPropagator>,
    kernel: DuhamelKernel,
    tg: TimeGrid,
    /// `v_k(τ_n)`
    vk: Vec<Field>,
    /// `ε_k(τ_n)` without the static residual of `W`
    eps: Vec<Field>,
    alpha: f64,
    m: usize,
}

/// Largest radius the forcing reaches and the room left for the tail integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowCheck {
    pub forcing_support: f64,
    pub span: f64,
    pub room: f64,
}

impl FixedPointProblem {
    /// `α = (k + ½) e0`, Σ-norm order `m`. Rejects time grids whose span
    /// exceeds the light-cone room `R - R_support(ε_k(t_start))`.
    pub fn new(
        ps: ProfileSet,
        prop: Arc<SpectralPropagator>,
        tg: TimeGrid,
        m: usize,
    ) -> Result<Self> {
        let grid = ps.ground().grid().clone();
        if !Arc::ptr_eq(&grid, prop.grid()) && **prop.grid() != *grid {
            return Err(Error::GridMismatch);
        }
        let e0 = ps.e0();
        if tg.t_max() - tg.t_start() < 5.0 / e0 - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "time window {} shorter than 5/e0",
                tg.t_max() - tg.t_start()
            )));
        }
        let times = tg.times();
        let vk: Vec<Field> = times.par_iter().map(|&t| ps.eval_vk(t)).collect();
        let eps: Vec<Field> = times.par_iter().map(|&t| ps.high_order_residual(t)).collect();
        let problem = FixedPointProblem {
            alpha: (ps.order() as f64 + 0.5) * e0,
            kernel: DuhamelKernel::new(&prop, &tg),
            ps,
            prop,
            tg,
            vk,
            eps,
            m,
        };
        problem.window_check()?;
        Ok(problem)
    }

    pub fn window_check(&self) -> Result<WindowCheck> {
        let grid = self.prop.grid();
        let support = grid.effective_support(&[self.eps[0].values()], SUPPORT_THRESHOLD);
        let span = self.tg.t_max() - self.tg.t_start();
        let room = grid.radius() - support;
        if span > room {
            return Err(Error::DomainValidity {
                t_run: span,
                window: room,
            });
        }
        Ok(WindowCheck {
            forcing_support: support,
            span,
            room,
        })
    }

    pub fn profiles(&self) -> &ProfileSet {
        &self.ps
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.tg
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order_m(&self) -> usize {
        self.m
    }

    pub fn propagator(&self) -> &Arc<SpectralPropagator> {
        &self.prop
    }

    fn ground(&self) -> &GroundState {
        self.ps.ground()
    }

    /// `F(τ_n)` for a given `h`, after checking `|h + v_k| < ¾ W`.
    pub fn forcing(&self, h: &Trajectory) -> Result<Trajectory> {
        let gs = self.ground();
        let w = gs.field();
        let fields = h
            .fields()
            .par_iter()
            .zip(&self.vk)
            .zip(&self.eps)
            .zip(self.tg.times())
            .map(|(((h, v), eps), t)| {
                for (i, ((hv, vv), wv)) in h.values().iter().zip(v.values()).zip(w.values()).enumerate() {
                    let ratio = ((hv + vv) / wv).abs();
                    if !(ratio < EXPANSION_LIMIT) {
                        return Err(Error::ExpansionValidity {
                            ratio,
                            radius: w.grid().radii()[i],
                            time: t,
                        });
                    }
                }
                let mut f = h.pointwise_mul(gs.potential());
                f.axpy(1.0, &gs.remainder_difference(h, v));
                f.axpy(-1.0, eps);
                Ok(f)
            })
            .collect::<Result<Vec<_>>>()?;
        Trajectory::on_grid(&self.tg, fields)
    }

    /// `Φ(h)` together with its time derivative.
    pub fn picard_map(&self, h: &Trajectory) -> Result<DuhamelSolution> {
        let forcing = self.forcing(h)?;
        Ok(tail_with(&self.prop, &self.kernel, &forcing))
    }

    pub fn sigma(&self, traj: &Trajectory) -> Result<SigmaNorm> {
        SigmaNorm::of(traj, self.alpha, self.m)
    }

    /// Measured `Σ(Φ(h1) - Φ(h2)) / Σ(h1 - h2)`.
    pub fn contraction_factor(&self, h1: &Trajectory, h2: &Trajectory) -> Result<f64> {
        let d_in = self.sigma(&h1.sub(h2))?.value;
        let d_out = self.sigma(&self.picard_map(h1)?.h.sub(&self.picard_map(h2)?.h))?.value;
        Ok(d_out / d_in)
    }

    /// Iterate `h_{n+1} = Φ(h_n)` from `h_0 = 0` until the Σ-norm of the
    /// update falls below `tol` times the Σ-norm of the iterate.
    pub fn solve(&self, tol: f64) -> Result<FixedPointSolution> {
        let grid = self.prop.grid();
        let mut current = DuhamelSolution {
            h: Trajectory::zeros(&self.tg, grid),
            ht: Trajectory::zeros(&self.tg, grid),
        };
        let mut history = Vec::new();
        let mut streak = 0;
        for iteration in 1..=MAX_ITERATIONS {
            let next = self.picard_map(&current.h)?;
            let diff = self.sigma(&next.h.sub(&current.h))?.value;
            let size = self.sigma(&next.h)?.value;
            if let Some(&prev) = history.last() {
                let ratio: f64 = diff / prev;
                streak = if ratio >= 1.0 { streak + 1 } else { 0 };
                if streak >= NON_CONTRACTION_STREAK {
                    let ratios = ratios_of(&history, diff);
                    return Err(Error::NonContraction { ratios });
                }
            }
            history.push(diff);
            current = next;
            if diff <= tol * size || size == 0.0 {
                let tail = self.tail_estimate(&current.h)?;
                return Ok(FixedPointSolution {
                    sigma: self.sigma(&current.h)?,
                    h: current.h,
                    ht: current.ht,
                    history,
                    iterations: iteration,
                    tail_estimate: tail,
                    alpha: self.alpha,
                });
            }
        }
        Err(Error::NotConverged {
            tol,
            iterations: MAX_ITERATIONS,
        })
    }

    /// Bound on the neglected `∫_{T_max}^∞`: `‖F(T_max)‖ / (α ω_min)`.
    fn tail_estimate(&self, h: &Trajectory) -> Result<f64> {
        let forcing = self.forcing(h)?;
        let last = &forcing.fields()[forcing.len() - 1];
        Ok(lebesgue_norm(last, 2.0) / (self.alpha * self.prop.frequencies()[0]))
    }

    /// `v_k(τ_n)`
    pub fn vk(&self) -> &[Field] {
        &self.vk
    }
}

fn ratios_of(history: &[f64], last: f64) -> Vec<f64> {
    let mut all = history.to_vec();
    all.push(last);
    all.windows(2).map(|w| w[1] / w[0]).collect()
}

/// The converged correction and its iteration record.
#[derive(Clone, Debug)]
pub struct FixedPointSolution {
    pub h: Trajectory,
    pub ht: Trajectory,
    /// `Σ(h_{n+1} - h_n)` per iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub sigma: SigmaNorm,
    pub tail_estimate: f64,
    pub alpha: f64,
}

impl FixedPointSolution {
    /// Successive ratios of the update history.
    pub fn ratios(&self) -> Vec<f64> {
        self.history.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// `w^a = W^a - W = v_k + h` on the time grid.
    pub fn wa(&self, problem: &FixedPointProblem) -> Trajectory {
        let fields = self
            .h
            .fields()
            .iter()
            .zip(problem.vk())
            .map(|(h, v)| h + v)
            .collect();
        Trajectory::new(self.h.times().to_vec(), fields).expect("same grid")
    }

    /// `(W^a(τ_n), ∂_t W^a(τ_n))`
    pub fn state(&self, problem: &FixedPointProblem, n: usize) -> State {
        let ps = problem.profiles();
        let t = self.h.times()[n];
        let u = &(&self.h.fields()[n] + &problem.vk()[n]) + ps.ground().field();
        let ut = &ps.eval_vk_derivative(t, 1) + &self.ht.fields()[n];
        State { t, u, ut }
    }
}

/// `w^a(t)` from the fixed point, with centered second differences in time:
/// `‖∂_tt W^a - ΔW^a - f(W^a)‖_2` at interior sample `n`, and the floor
/// `‖ΔW + W^{p_c}‖_2 + (Δτ²/12) ‖∂_t^4 W^a‖_2` it is compared against.
pub fn pde_residual(problem: &FixedPointProblem, sol: &FixedPointSolution, n: usize) -> (f64, f64) {
    assert!(n > 0 && n + 1 < sol.h.len(), "interior sample required");
    let ps = problem.profiles();
    let gs = ps.ground();
    let dt = problem.time_grid().step();
    let w = |i: usize| &sol.h.fields()[i] + &problem.vk()[i];
    let (prev, cur, next) = (w(n - 1), w(n), w(n + 1));
    let mut utt = &(&next - &cur.scaled(2.0)) + &prev;
    utt = utt.scaled(1.0 / (dt * dt));
    let u = &cur + gs.field();
    let lap = crate::grid::radial_laplacian_with(&u, gs.boundary());
    let nl = crate::ground_state::nonlinearity(&u, gs.params());
    let residual = &(&utt - &lap) - &nl;
    let t = sol.h.times()[n];
    let rate_h = (ps.order() as f64 + 1.0) * ps.e0();
    let d4 = lebesgue_norm(&ps.eval_vk_derivative(t, 4), 2.0)
        + rate_h.powi(4) * lebesgue_norm(&sol.h.fields()[n], 2.0);
    let floor = lebesgue_norm(&gs.static_residual(), 2.0) + dt * dt / 12.0 * d4;
    (lebesgue_norm(&residual, 2.0), floor)
}

/// Decay-rate fit of `‖f(t)‖_2` over the samples in `[t_lo, t_hi]`.
pub fn fit_norm_decay(traj: &Trajectory, t_lo: f64, t_hi: f64) -> Result<RateFit> {
    let samples: Vec<(f64, f64)> = traj
        .times()
        .iter()
        .zip(traj.fields())
        .filter(|(t, _)| **t >= t_lo - 1e-12 && **t <= t_hi + 1e-12)
        .map(|(&t, f)| (t, lebesgue_norm(f, 2.0)))
        .collect();
    fit_decay_rate(&samples, 0.0)
}

/// Result of [`time_shift_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShiftFit {
    pub shift: f64,
    /// RMS mismatch over the overlap, relative to the RMS size of the reference.
    pub residual: f64,
    pub overlap: f64,
}

/// The shift `T` minimizing the mean of `‖a(t + T) - ref(t)‖_2²` over the
/// common window, which must span at least `min_overlap`.
pub fn time_shift_fit(traj_a: &Trajectory, traj_ref: &Trajectory, min_overlap: f64) -> Result<ShiftFit> {
    let (a0, a1) = (traj_a.times()[0], traj_a.times()[traj_a.len() - 1]);
    let (r0, r1) = (traj_ref.times()[0], traj_ref.times()[traj_ref.len() - 1]);
    // overlap(T) = min(r1, a1 - T) - max(r0, a0 - T) ≥ min_overlap
    let lo = a0 - r1 + min_overlap;
    let hi = a1 - r0 - min_overlap;
    if !(hi >= lo) {
        return Err(Error::NoOverlap);
    }
    let objective = |shift: f64| -> (f64, f64, f64) {
        let (mut err, mut size, mut count) = (0.0, 0.0, 0usize);
        let (mut first, mut last) = (f64::INFINITY, f64::NEG_INFINITY);
        for (&t, f) in traj_ref.times().iter().zip(traj_ref.fields()) {
            if let Some(g) = traj_a.sample(t + shift) {
                err += lebesgue_norm(&(&g - f), 2.0).powi(2);
                size += lebesgue_norm(f, 2.0).powi(2);
                count += 1;
                first = first.min(t);
                last = last.max(t);
            }
        }
        if count == 0 {
            return (f64::INFINITY, 0.0, 0.0);
        }
        (err / count as f64, (size / count as f64).sqrt(), last - first)
    };
    let scan = 200;
    let step = (hi - lo) / scan as f64;
    let best = (0..=scan)
        .map(|i| lo + step * i as f64)
        .map(|s| (s, objective(s).0))
        .fold((lo, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    let (mut x0, mut x1) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    while x1 - x0 > 1e-9 {
        let (m1, m2) = (x1 - ratio * (x1 - x0), x0 + ratio * (x1 - x0));
        if objective(m1).0 <= objective(m2).0 {
            x1 = m2;
        } else {
            x0 = m1;
        }
    }
    let shift = 0.5 * (x0 + x1);
    let (err, size, overlap) = objective(shift);
    if !(overlap > 0.0) {
        return Err(Error::NoOverlap);
    }
    Ok(ShiftFit {
        shift,
        residual: err.sqrt() / size,
        overlap,
    })
}
