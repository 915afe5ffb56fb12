//! The explicit ground state `W`, the energy, the scaling symmetry, the
//! nonlinearity `|u|^{p_c-1} u` and its remainder `R(v)` about `W`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{
    h1dot_norm, lebesgue_norm, radial_derivative, radial_laplacian_with, Boundary, Field,
    RadialGrid, State,
};
use crate::interp::MonotoneCubic;

/// Relative level used to measure how far a profile reaches before rescaling it.
pub const SCALE_SUPPORT_THRESHOLD: f64 = 1e-3;

/// Dimension and the critical power `p_c = (d+2)/(d-2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    dim: usize,
    p_c: f64,
}

impl Params {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidArgument(format!("dimension {dim} < 3")));
        }
        let p_c = if dim == 6 {
            2.0
        } else {
            (dim as f64 + 2.0) / (dim as f64 - 2.0)
        };
        Ok(Params { dim, p_c })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    /// `d = 6`, where the nonlinearity is exactly `|u| u`.
    pub fn is_quadratic(&self) -> bool {
        self.dim == 6
    }

    /// Sobolev exponent `2d/(d-2) = p_c + 1`.
    pub fn sobolev_exponent(&self) -> f64 {
        2.0 * self.dim as f64 / (self.dim as f64 - 2.0)
    }

    /// Dual exponent `2d/(d+2)`.
    pub fn dual_exponent(&self) -> f64 {
        2.0 * self.dim as f64 / (self.dim as f64 + 2.0)
    }

    /// Pointwise `|u|^{p_c - 1} u`.
    #[inline]
    pub fn power(&self, u: f64) -> f64 {
        if self.is_quadratic() {
            u.abs() * u
        } else {
            u.abs().powf(self.p_c - 1.0) * u
        }
    }

    /// `(1+s)^{p_c} - 1 - p_c s` for `s > -1` (and its `|1+s|` extension),
    /// accurate to relative precision for small `|s|`.
    pub fn binomial_remainder(&self, s: f64) -> f64 {
        let p = self.p_c;
        if self.is_quadratic() {
            return if s >= -1.0 {
                s * s
            } else {
                (1.0 + s).abs() * (1.0 + s) - 1.0 - 2.0 * s
            };
        }
        if s.abs() <= 0.25 {
            let mut coeff = p * (p - 1.0) / 2.0;
            let mut term = coeff * s * s;
            let mut sum = term;
            let mut j = 2.0;
            while term.abs() > 1e-18 * sum.abs() && j < 80.0 {
                j += 1.0;
                coeff *= (p - j + 1.0) / j;
                term = coeff * s.powi(j as i32);
                sum += term;
            }
            sum
        } else {
            (1.0 + s).abs().powf(p - 1.0) * (1.0 + s) - 1.0 - p * s
        }
    }
}

/// `W(r) = (1 + r^2/(d(d-2)))^{-(d-2)/2}`
pub fn ground_state_value(dim: usize, r: f64) -> f64 {
    let d = dim as f64;
    let base = 1.0 + r * r / (d * (d - 2.0));
    if dim == 6 {
        1.0 / (base * base)
    } else {
        base.powf(-(d - 2.0) / 2.0)
    }
}

/// `W'(r) = -(d-2) r/(d(d-2)) (1 + r^2/(d(d-2)))^{-d/2}`
pub fn ground_state_slope(dim: usize, r: f64) -> f64 {
    let d = dim as f64;
    let kappa = d * (d - 2.0);
    -(d - 2.0) * r / kappa * (1.0 + r * r / kappa).powf(-d / 2.0)
}

pub fn ground_state(grid: &Arc<RadialGrid>) -> Field {
    let d = grid.dim();
    Field::from_fn(grid, |r| ground_state_value(d, r))
}

/// Generator of the scaling symmetry at `λ = 1`: `ΛW = (d-2)/2 W + r W'`.
pub fn scaling_direction_value(dim: usize, r: f64) -> f64 {
    0.5 * (dim as f64 - 2.0) * ground_state_value(dim, r) + r * ground_state_slope(dim, r)
}

pub fn scaling_direction(grid: &Arc<RadialGrid>) -> Field {
    let d = grid.dim();
    Field::from_fn(grid, |r| scaling_direction_value(d, r))
}

/// `W` on one grid together with the fields derived from it.
#[derive(Debug)]
pub struct GroundState {
    params: Params,
    w: Field,
    /// `p_c W^{p_c - 1}`
    potential: Field,
}

impl GroundState {
    pub fn new(grid: &Arc<RadialGrid>) -> Result<Arc<Self>> {
        let params = Params::new(grid.dim())?;
        let w = ground_state(grid);
        let p = params.p_c();
        let potential = w.map(|v| p * v.powf(p - 1.0));
        Ok(Arc::new(GroundState { params, w, potential }))
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.w.grid()
    }

    pub fn field(&self) -> &Field {
        &self.w
    }

    pub fn potential(&self) -> &Field {
        &self.potential
    }

    /// Exterior condition that holds `W` fixed beyond the last node.
    pub fn boundary(&self) -> Boundary {
        let g = self.grid();
        Boundary::Exterior(ground_state_value(g.dim(), g.ghost_radius()))
    }

    /// `ΔW + W^{p_c}`: zero in the continuum, `O(h^2)` on the grid.
    pub fn static_residual(&self) -> Field {
        let lap = radial_laplacian_with(&self.w, self.boundary());
        &lap + &nonlinearity(&self.w, self.params)
    }

    /// `R(v) = |v+W|^{p_c-1}(v+W) - p_c W^{p_c-1} v - W^{p_c}`
    pub fn remainder(&self, v: &Field) -> Field {
        assert!(v.same_grid(&self.w), "fields live on different grids");
        let params = self.params;
        let p = params.p_c();
        v.zip_map(&self.w, |v, w| w.powf(p) * params.binomial_remainder(v / w))
    }

    /// `R(h+v) - R(v)`, accurate relative to `|h|` even when `|h| ≪ |v|`.
    pub fn remainder_difference(&self, h: &Field, v: &Field) -> Field {
        assert!(h.same_grid(&self.w) && v.same_grid(&self.w), "fields live on different grids");
        let params = self.params;
        let p = params.p_c();
        let values = h
            .values()
            .iter()
            .zip(v.values())
            .zip(self.w.values())
            .map(|((&h, &v), &w)| {
                let a = w + v;
                if params.is_quadratic() && a >= 0.0 && a + h >= 0.0 {
                    return 2.0 * v * h + h * h;
                }
                if a > 0.0 && v / w > -1.0 {
                    let shift = w.powf(p - 1.0) * ((p - 1.0) * (v / w).ln_1p()).exp_m1();
                    a.powf(p) * params.binomial_remainder(h / a) + p * shift * h
                } else {
                    let full = params.power(w + v + h) - p * w.powf(p - 1.0) * (v + h) - w.powf(p);
                    let base = params.power(w + v) - p * w.powf(p - 1.0) * v - w.powf(p);
                    full - base
                }
            })
            .collect();
        Field::from_vec_unchecked(self.grid(), values)
    }
}

pub fn nonlinearity(u: &Field, params: Params) -> Field {
    u.map(|v| params.power(v))
}

/// The three pieces of `E(u, u_t)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct EnergyBreakdown {
    pub kinetic_t: f64,
    pub kinetic_x: f64,
    pub potential: f64,
    pub total: f64,
}

/// `Σ ω_i |f_i|^p`
pub fn power_integral(f: &Field, p: f64) -> f64 {
    let w = f.grid().weights();
    if p == 3.0 {
        return f.values().iter().zip(w).map(|(v, w)| w * (v * v * v).abs()).sum();
    }
    f.values().iter().zip(w).map(|(v, w)| w * v.abs().powf(p)).sum()
}

pub fn energy(state: &State) -> EnergyBreakdown {
    let d = state.grid().dim() as f64;
    let ut = lebesgue_norm(&state.ut, 2.0);
    let grad = h1dot_norm(&state.u);
    let q = 2.0 * d / (d - 2.0);
    let kinetic_t = 0.5 * ut * ut;
    let kinetic_x = 0.5 * grad * grad;
    let potential = -(d - 2.0) / (2.0 * d) * power_integral(&state.u, q);
    EnergyBreakdown {
        kinetic_t,
        kinetic_x,
        potential,
        total: kinetic_t + kinetic_x + potential,
    }
}

/// `J(s) = |1+s|^{p_c-1}(1+s) - p_c s - 1 - |s|^{p_c-1} s`
pub fn j_function(s: f64, p_c: f64) -> f64 {
    (1.0 + s).abs().powf(p_c - 1.0) * (1.0 + s) - p_c * s - 1.0 - s.abs().powf(p_c - 1.0) * s
}

/// The pointwise bound on `J` as literally stated: `|J(s)| ≤ |s|` for
/// `|s| ≥ 1/2` and `|J(s)| ≤ |s|^{p_c}` for `|s| < 1/2`.
///
/// Holds for `s ≥ 0`; for `s < 0` it only holds up to a constant
/// (`d = 6`: `J(s) = 2 s^2`), see [`j_bound_constant`].
pub fn j_bound_holds(s: f64, p_c: f64) -> bool {
    let j = j_function(s, p_c).abs();
    if s.abs() >= 0.5 {
        j <= s.abs() * (1.0 + 1e-12)
    } else {
        j <= s.abs().powf(p_c) * (1.0 + 1e-12) + f64::MIN_POSITIVE
    }
}

/// `sup |J(s)| / |s|^{p_c}` over a uniform sweep of `0 < |s| < 1/2`.
pub fn j_bound_constant(p_c: f64, samples: usize) -> f64 {
    (1..samples)
        .flat_map(|i| {
            let s = 0.49 * i as f64 / samples as f64;
            [s, -s]
        })
        .map(|s| j_function(s, p_c).abs() / s.abs().powf(p_c))
        .fold(0.0, f64::max)
}

/// Interpolant of a radial profile that is even across the origin and
/// continues beyond `R` by the harmonic tail `f(r_N) (r_N / r)^{d-2}`.
struct RadialInterpolant {
    spline: MonotoneCubic,
    edge_r: f64,
    edge_value: f64,
    tail_power: i32,
}

impl RadialInterpolant {
    fn new(f: &Field) -> Self {
        let g = f.grid();
        let r = g.radii();
        let v = f.values();
        let mut xs = Vec::with_capacity(r.len() + 2);
        let mut ys = Vec::with_capacity(r.len() + 2);
        xs.extend([-r[1], -r[0]]);
        ys.extend([v[1], v[0]]);
        xs.extend_from_slice(r);
        ys.extend_from_slice(v);
        RadialInterpolant {
            spline: MonotoneCubic::new(xs, ys),
            edge_r: r[r.len() - 1],
            edge_value: v[v.len() - 1],
            tail_power: g.dim() as i32 - 2,
        }
    }

    fn eval(&self, r: f64) -> f64 {
        if r <= self.edge_r {
            self.spline.eval(r)
        } else {
            self.edge_value * (self.edge_r / r).powi(self.tail_power)
        }
    }
}

/// `u_λ(x) = λ^{-(d-2)/2} u(x/λ)`, `(u_t)_λ(x) = λ^{-d/2} u_t(x/λ)`, at time `λ t`.
pub fn scale(state: &State, lambda: f64) -> Result<State> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("scale factor {lambda} must be positive")));
    }
    let grid = state.grid();
    let support = grid.effective_support(
        &[state.u.values(), state.ut.values()],
        SCALE_SUPPORT_THRESHOLD,
    );
    if lambda * support > grid.radius() {
        return Err(Error::InvalidArgument(format!(
            "λ = {lambda} pushes support {support:.3} past R = {}",
            grid.radius()
        )));
    }
    if lambda == 1.0 {
        return Ok(state.clone());
    }
    let d = grid.dim() as f64;
    let resample = |f: &Field, power: f64| {
        let interp = RadialInterpolant::new(f);
        let c = lambda.powf(-power);
        Field::from_fn(grid, |r| c * interp.eval(r / lambda))
    };
    Ok(State {
        t: lambda * state.t,
        u: resample(&state.u, (d - 2.0) / 2.0),
        ut: resample(&state.ut, d / 2.0),
    })
}

/// `‖f‖_{2d/(d-2)} / ‖∇f‖_2`
pub fn sobolev_ratio(f: &Field) -> Result<f64> {
    let grad = h1dot_norm(f);
    if f.max_abs() == 0.0 || grad == 0.0 {
        return Err(Error::InvalidArgument("Sobolev ratio of the zero field".into()));
    }
    let params = Params::new(f.grid().dim())?;
    Ok(lebesgue_norm(f, params.sobolev_exponent()) / grad)
}

/// `<∇f, ∇g>` with the node-centered derivative.
pub fn h1dot_inner(f: &Field, g: &Field) -> f64 {
    radial_derivative(f).dot(&radial_derivative(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn explicit_values() {
        assert_eq!(ground_state_value(6, 0.0), 1.0);
        assert_eq!(ground_state_value(7, 0.0), 1.0);
        assert_relative_eq!(ground_state_value(6, 24f64.sqrt()), 0.25, max_relative = 1e-15);
        let r: f64 = 1.7;
        assert_relative_eq!(
            ground_state_slope(6, r),
            -(r / 6.0) * (1.0 + r * r / 24.0).powi(-3),
            max_relative = 1e-14
        );
    }

    #[test]
    fn far_field_constant() {
        for d in [6usize, 7, 8] {
            let target = ((d * (d - 2)) as f64).powf((d as f64 - 2.0) / 2.0);
            let at = |r: f64| r.powi(d as i32 - 2) * ground_state_value(d, r);
            let (near, far) = (at(60.0), at(1000.0));
            assert!(near < far && far < target, "d={d}");
            assert!((far - target).abs() / target < 1e-3, "d={d}");
        }
    }

    #[test]
    fn params() {
        let p = Params::new(6).unwrap();
        assert_eq!(p.p_c(), 2.0);
        assert_eq!(p.sobolev_exponent(), 3.0);
        assert_relative_eq!(Params::new(7).unwrap().p_c(), 9.0 / 5.0);
        assert!(Params::new(2).is_err());
    }

    #[test]
    fn nonlinearity_is_odd() {
        let g = RadialGrid::new(6, 10.0, 100).unwrap();
        let params = Params::new(6).unwrap();
        let w = ground_state(&g);
        assert_eq!(nonlinearity(&Field::zeros(&g), params).max_abs(), 0.0);
        let plus = nonlinearity(&w, params);
        let minus = nonlinearity(&w.scaled(-1.0), params);
        for ((a, b), wv) in plus.values().iter().zip(minus.values()).zip(w.values()) {
            assert_eq!(*a, -*b);
            assert_relative_eq!(*a, wv * wv, max_relative = 1e-15);
        }
    }

    #[test]
    fn remainder_quadratic_case() {
        let g = RadialGrid::new(6, 20.0, 400).unwrap();
        let gs = GroundState::new(&g).unwrap();
        assert_eq!(gs.remainder(&Field::zeros(&g)).max_abs(), 0.0);
        let v = Field::from_fn(&g, |r| 0.3 * (-r).exp() - 0.1 * (-(r - 2.0).powi(2)).exp());
        let rv = gs.remainder(&v);
        for (a, b) in rv.values().iter().zip(v.values()) {
            assert_relative_eq!(*a, b * b, max_relative = 1e-14);
        }
    }

    #[test]
    fn remainder_matches_definition() {
        for d in [6usize, 7, 8] {
            let g = RadialGrid::new(d, 20.0, 400).unwrap();
            let gs = GroundState::new(&g).unwrap();
            let params = gs.params();
            let p = params.p_c();
            let v = Field::from_fn(&g, |r| 0.4 * (-0.5 * r * r).exp() * (1.0 - r / 3.0));
            let rv = gs.remainder(&v);
            let w = gs.field();
            for i in 0..g.len() {
                let (vi, wi) = (v.values()[i], w.values()[i]);
                let direct = params.power(wi + vi) - params.power(wi) - p * wi.powf(p - 1.0) * vi;
                assert!((rv.values()[i] - direct).abs() < 1e-14, "d={d} i={i}");
                let split = wi.powf(p) * j_function(vi / wi, p) + params.power(vi);
                assert!((rv.values()[i] - split).abs() < 1e-13, "d={d} i={i}");
            }
        }
    }

    #[test]
    fn remainder_difference_is_consistent() {
        for d in [6usize, 7] {
            let g = RadialGrid::new(d, 20.0, 400).unwrap();
            let gs = GroundState::new(&g).unwrap();
            let v = Field::from_fn(&g, |r| 0.2 * (-0.6 * r).exp());
            let h = Field::from_fn(&g, |r| 0.05 * (-0.3 * r * r).exp());
            let lhs = gs.remainder_difference(&h, &v);
            let rhs = &gs.remainder(&(&h + &v)) - &gs.remainder(&v);
            for (a, b) in lhs.values().iter().zip(rhs.values()) {
                assert!((a - b).abs() < 1e-14, "d={d}: {a} vs {b}");
            }
            // Tiny increments keep full relative accuracy.
            let tiny = h.scaled(1e-20);
            let diff = gs.remainder_difference(&tiny, &v);
            let lin = v.zip_map(gs.field(), |v, w| {
                let p = gs.params().p_c();
                p * ((w + v).powf(p - 1.0) - w.powf(p - 1.0))
            });
            for ((a, l), t) in diff.values().iter().zip(lin.values()).zip(tiny.values()) {
                if t.abs() > 1e-300 && l.abs() > 1e-12 {
                    assert_relative_eq!(*a, l * t, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn j_function_quadratic_case() {
        assert_eq!(j_function(0.0, 2.0), 0.0);
        for s in [-0.4, -0.1, 0.1, 0.3, 0.9] {
            let expected = if s >= 0.0 { 0.0 } else { 2.0 * s * s };
            assert!((j_function(s, 2.0) - expected).abs() < 1e-15);
        }
        // The literal bound holds on the positive side only.
        assert!(j_bound_holds(0.3, 2.0));
        assert!(!j_bound_holds(-0.3, 2.0));
        assert_relative_eq!(j_bound_constant(2.0, 10_000), 2.0, max_relative = 1e-6);
    }

    #[test]
    fn binomial_remainder_small_arguments() {
        let p = Params::new(7).unwrap();
        for s in [1e-12, -3e-9, 1e-4, 0.2, -0.24, 0.26, -0.7] {
            let direct = (1.0 + s as f64).powf(p.p_c()) - 1.0 - p.p_c() * s;
            let stable = p.binomial_remainder(s);
            let leading = 0.5 * p.p_c() * (p.p_c() - 1.0) * s * s;
            if s.abs() < 1e-3 {
                assert_relative_eq!(stable, leading, max_relative = 1e-3);
            } else {
                assert_relative_eq!(stable, direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn energy_of_zero_state() {
        let g = RadialGrid::new(6, 5.0, 100).unwrap();
        let e = energy(&State::at_rest(0.0, Field::zeros(&g)));
        assert_eq!(e.total, 0.0);
        assert_eq!(e.kinetic_t + e.kinetic_x + e.potential, e.total);
    }

    #[test]
    fn scale_identity_and_origin_value() {
        let g = RadialGrid::new(6, 200.0, 8000).unwrap();
        let s = State::at_rest(0.0, ground_state(&g));
        let same = scale(&s, 1.0).unwrap();
        assert_eq!(same.u.values(), s.u.values());
        for lambda in [0.5, 2.0] {
            let scaled = scale(&s, lambda).unwrap();
            let r0 = g.radii()[0];
            let expected = lambda.powi(-2) * ground_state_value(6, r0 / lambda);
            assert_relative_eq!(scaled.u.values()[0], expected, max_relative = 2e-5);
        }
        assert!(scale(&s, 0.0).is_err());
        assert!(scale(&s, 10.0).is_err());
    }

    #[test]
    fn sobolev_ratio_is_homogeneous() {
        let g = RadialGrid::new(6, 30.0, 600).unwrap();
        let f = Field::from_fn(&g, |r| (-(r - 1.0).powi(2)).exp());
        let a = sobolev_ratio(&f).unwrap();
        assert_relative_eq!(sobolev_ratio(&f.scaled(-3.5)).unwrap(), a, max_relative = 1e-12);
        assert!(sobolev_ratio(&Field::zeros(&g)).is_err());
    }
}
