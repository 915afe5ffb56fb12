//! Sampled checks of the functional inequalities the contraction argument
//! rests on. Each sampler returns ratios `lhs / rhs`. A finite suite always has
//! a largest ratio, so "holds with a uniform constant" is tested where a false
//! inequality would show: the suite maximum must survive grid refinement, and
//! the ratio must not grow along bumps that concentrate, travel outward or
//! spread (see [`crate::suite::Degeneration`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{bracket, h1dot_norm, lebesgue_norm, weighted_sobolev_norm, Field, M_MAX};
use crate::ground_state::GroundState;

/// Safety factor applied to the suite maximum.
pub const CALIBRATION_FACTOR: f64 = 2.0;

/// Largest tolerated log-log growth rate of a ratio along a degenerating
/// family. Dimension counting gives rates that are multiples of 1/2 for the
/// inequalities that fail, and 0 or negative ones for those that hold.
pub const TAIL_EXPONENT: f64 = 0.25;

/// Ratios along one degenerating family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tail {
    pub family: String,
    pub parameters: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Log-log slope of ratio against parameter over the second half.
    pub exponent: f64,
}

impl Tail {
    pub fn new(family: impl Into<String>, points: &[(f64, f64)]) -> Result<Self> {
        let second = &points[points.len() / 2..];
        let exponent = if second.iter().all(|p| p.1 == 0.0) {
            f64::NEG_INFINITY
        } else {
            loglog_slope(second)?
        };
        Ok(Tail {
            family: family.into(),
            parameters: points.iter().map(|p| p.0).collect(),
            ratios: points.iter().map(|p| p.1).collect(),
            exponent,
        })
    }

    pub fn bounded(&self) -> bool {
        self.exponent <= TAIL_EXPONENT
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformConstant {
    pub samples: usize,
    pub suite_max: f64,
    /// `CALIBRATION_FACTOR × suite_max`
    pub constant: f64,
    /// Largest ratio of the suite rebuilt on the refined grid.
    pub refined_max: Option<f64>,
    pub tails: Vec<Tail>,
    pub holds: bool,
}

impl UniformConstant {
    /// Worst tail exponent, `-inf` without tails.
    pub fn worst_exponent(&self) -> f64 {
        self.tails.iter().map(|t| t.exponent).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_ratios(ratios: &[f64]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("no ratios".into()));
    }
    if let Some(bad) = ratios.iter().find(|r| !r.is_finite() || **r < 0.0) {
        return Err(Error::InvalidArgument(format!("invalid ratio {bad}")));
    }
    Ok(ratios.iter().copied().fold(0.0, f64::max))
}

/// The suite constant, covering `refined` too, with every tail bounded.
pub fn uniform_constant(ratios: &[f64], refined: Option<&[f64]>, tails: Vec<Tail>) -> Result<UniformConstant> {
    let suite_max = check_ratios(ratios)?;
    let refined_max = refined.map(check_ratios).transpose()?;
    let constant = CALIBRATION_FACTOR * suite_max;
    let holds = suite_max > 0.0
        && refined_max.is_none_or(|m| m <= constant)
        && tails.iter().all(Tail::bounded);
    Ok(UniformConstant {
        samples: ratios.len(),
        suite_max,
        constant,
        refined_max,
        tails,
        holds,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::InvalidArgument("log-log fit needs ≥ 2 positive points".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0.ln()).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        sxx += (x.ln() - mx).powi(2);
        sxy += (x.ln() - mx) * (y.ln() - my);
    }
    Ok(sxy / sxx)
}

/// `count` points log-spaced on `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// `(s, ‖R(s φ)‖_{2d/(d+2)})` for each `s`.
pub fn superlinearity_samples(gs: &GroundState, phi: &Field, s_values: &[f64]) -> Vec<(f64, f64)> {
    let q = gs.params().dual_exponent();
    s_values
        .iter()
        .map(|&s| (s, lebesgue_norm(&gs.remainder(&phi.scaled(s)), q)))
        .collect()
}

/// `‖R(h + w) - R(w)‖_{2d/(d+2)} / (‖h‖_{Ḣ¹}^{p_c} + ‖h‖_{Ḣ¹} e^{-(p_c-1) e0 t})`
pub fn gain_of_decay_ratio(gs: &GroundState, h: &Field, w: &Field, t: f64, e0: f64) -> Result<f64> {
    let params = gs.params();
    let grad = h1dot_norm(h);
    if grad == 0.0 {
        return Err(Error::InvalidArgument("zero perturbation".into()));
    }
    let p = params.p_c();
    let lhs = lebesgue_norm(&gs.remainder_difference(h, w), params.dual_exponent());
    let rhs = grad.powf(p) + grad * (-(p - 1.0) * e0 * t).exp();
    Ok(lhs / rhs)
}

/// `(k1, k2, m)` with `k1 + k2 + d/2 + 1 ≤ m`, taking `m = M_MAX`.
pub fn embedding_cases(dim: usize) -> Vec<(usize, usize, usize)> {
    let m = M_MAX;
    let mut cases = Vec::new();
    for k1 in 0..=m {
        for k2 in 0..=m {
            if (k1 + k2) as f64 + dim as f64 / 2.0 + 1.0 <= m as f64 {
                cases.push((k1, k2, m));
            }
        }
    }
    cases
}

fn derivatives(f: &Field, up_to: usize) -> Vec<Vec<f64>> {
    f.grid().derivatives(f.values(), up_to)
}

/// `‖<r>^{k1} ∂_r^{k2} f‖_∞ / ‖f‖_{H^{m,m}}`
pub fn embedding_ratio(f: &Field, k1: usize, k2: usize, m: usize) -> Result<f64> {
    let norm = weighted_sobolev_norm(f, m)?;
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero field".into()));
    }
    let d = &derivatives(f, k2)[k2];
    let sup = d
        .iter()
        .zip(f.grid().radii())
        .map(|(v, &r)| (bracket(r).powi(k1 as i32) * v).abs())
        .fold(0.0, f64::max);
    Ok(sup / norm)
}

/// `max_{j ≤ m} ‖∂_r^j f‖_∞`
pub fn w_m_infinity(f: &Field, m: usize) -> f64 {
    derivatives(f, m)
        .iter()
        .map(|d| d.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())))
        .fold(0.0, f64::max)
}

/// `‖f g‖_{H^{m,m}} / (‖f‖_{W^{m,∞}} ‖g‖_{H^{m,m}})`
pub fn bilinear_ratio(f: &Field, g: &Field, m: usize) -> Result<f64> {
    f.ensure_same_grid(g)?;
    let denom = w_m_infinity(f, m) * weighted_sobolev_norm(g, m)?;
    if denom == 0.0 {
        return Err(Error::InvalidArgument("zero field".into()));
    }
    Ok(weighted_sobolev_norm(&f.pointwise_mul(g), m)? / denom)
}

/// `‖<r>^{c j} h^j‖_{H^{m,m}} / (j^m ‖h‖_{H^{m,m}}^j)`
pub fn power_weight_ratio(h: &Field, j: usize, c: f64, m: usize) -> Result<f64> {
    let norm = weighted_sobolev_norm(h, m)?;
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero field".into()));
    }
    let weight = c * j as f64;
    let lifted = h.map_with_radius(|r, v| bracket(r).powf(weight) * v.powi(j as i32));
    Ok(weighted_sobolev_norm(&lifted, m)? / ((j as f64).powi(m as i32) * norm.powi(j as i32)))
}

/// The smallest order `m` the power-weight estimate is stated for.
pub fn power_weight_min_order(dim: usize, j: usize, c: f64) -> f64 {
    dim as f64 / 2.0 + 1.0 + c * j as f64 / (j as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RadialGrid;

    #[test]
    fn constant_and_tails() {
        let flat = Tail::new("flat", &[(1.0, 1.0), (2.0, 1.0), (4.0, 1.0), (8.0, 1.0)]).unwrap();
        assert!(flat.bounded());
        let ok = uniform_constant(&[1.0, 0.5], Some(&[1.9]), vec![flat]).unwrap();
        assert!(ok.holds);
        assert_eq!(ok.constant, 2.0);
        assert!(!uniform_constant(&[1.0, 0.5], Some(&[2.1]), vec![]).unwrap().holds);
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, x.sqrt())).collect();
        let growing = Tail::new("sqrt", &pts).unwrap();
        assert!((growing.exponent - 0.5).abs() < 1e-12);
        assert!(!uniform_constant(&[1.0], None, vec![growing]).unwrap().holds);
        assert!(uniform_constant(&[], None, vec![]).is_err());
        assert!(uniform_constant(&[f64::NAN], None, vec![]).is_err());
    }

    #[test]
    fn slopes() {
        let pts: Vec<_> = logspace(1e-3, 1.0, 7).into_iter().map(|x| (x, 3.0 * x.powf(1.7))).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn quadratic_superlinearity() {
        let g = RadialGrid::new(6, 20.0, 400).unwrap();
        let gs = GroundState::new(&g).unwrap();
        let phi = Field::from_fn(&g, |r| (-r * r / 4.0).exp());
        let samples = superlinearity_samples(&gs, &phi, &logspace(1e-4, 1e-1, 7));
        assert!((loglog_slope(&samples).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn embedding_case_lists() {
        assert_eq!(embedding_cases(6), vec![(0, 0, 4)]);
        assert_eq!(embedding_cases(3), vec![(0, 0, 4), (0, 1, 4), (1, 0, 4)]);
        assert!(embedding_cases(8).is_empty());
    }

    #[test]
    fn bilinear_with_constant_factor() {
        let g = RadialGrid::new(3, 10.0, 400).unwrap();
        let one = Field::constant(&g, 1.0);
        let f = Field::from_fn(&g, |r| (-r * r).exp());
        // f·1 = f and ‖1‖_{W^{m,∞}} = 1.
        assert!((bilinear_ratio(&one, &f, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_weight_reduces_to_identity() {
        let g = RadialGrid::new(3, 10.0, 400).unwrap();
        let h = Field::from_fn(&g, |r| (-r * r).exp());
        assert!((power_weight_ratio(&h, 1, 0.0, 2).unwrap() - 1.0).abs() < 1e-12);
    }
}
