//! Approximate threshold solutions `W_k^a(t) = W + Σ_{j≤k} e^{-j e0 t} Φ_j`.
//!
//! The profiles are fixed by requiring that the coefficient of `e^{-j e0 t}`
//! in `(∂_tt + ℒ) v_k - R(v_k)` vanish for every `j ≤ k`. Expanding
//! `R(v) = Σ_{l≥2} a_l W^{p_c-l} v^l` (the Taylor series of `(1+s)^{p_c}`
//! about `s = 0`) gives
//!
//! ```text
//! Φ_1 = a 𝒴,
//! Φ_j = (ℒ + j² e0²)^{-1} F_j,   F_j = Σ_{l=2}^{j} a_l W^{p_c-l} [v^l]_j,
//! ```
//!
//! where `[v^l]_j` is the sum of all products `Φ_{i_1} ⋯ Φ_{i_l}` with
//! `i_1 + … + i_l = j`. The residual `ε_k^a` is then `O(e^{-(k+1) e0 t})`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{lebesgue_norm, radial_laplacian_with, Field};
use crate::ground_state::{nonlinearity, GroundState, Params};
use crate::linearized::{shifted_solve, DiscreteOperator, Eigenpair};

/// `|v/W|` must stay below this for the power series of `R` to be used.
pub const EXPANSION_LIMIT: f64 = 0.75;

/// Relative size each profile must fall to by the last node.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Taylor coefficients of `P(s) = (1+s)^{p_c}` about `s = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionCoeffs {
    p_c: f64,
    /// `a_0 ..= a_{J_max}`
    coeffs: Vec<f64>,
}

impl ExpansionCoeffs {
    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn j_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `a_j` (zero beyond the truncation order).
    pub fn a(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }
}

/// `a_j = a_{j-1} (p_c - j + 1) / j`, `a_1 = p_c`.
pub fn taylor_coeffs(params: Params, j_max: usize) -> Result<ExpansionCoeffs> {
    if j_max < 2 {
        return Err(Error::InvalidArgument(format!("J_max = {j_max} < 2")));
    }
    let p = params.p_c();
    let mut coeffs = vec![1.0, p];
    for j in 2..=j_max {
        let prev = coeffs[j - 1];
        coeffs.push(prev * (p - j as f64 + 1.0) / j as f64);
    }
    Ok(ExpansionCoeffs { p_c: p, coeffs })
}

/// Profiles `Φ_1..Φ_k` for one amplitude `a`.
#[derive(Clone, Debug)]
pub struct ProfileSet {
    a: f64,
    e0: f64,
    ground: Arc<GroundState>,
    /// `Φ_1..Φ_k`
    phis: Vec<Field>,
    /// Right-hand sides `F_j` (after truncation); `F_1 = 0`.
    forcing: Vec<Field>,
    /// Relative mass removed from each `F_j` by the validity cutoff.
    truncation: Vec<f64>,
    /// `|Φ_j(r_{N-1})| / max |Φ_j|`.
    tail_ratio: Vec<f64>,
    t_check: f64,
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Build `Φ_1..Φ_k`. `t_check` is the earliest time at which the profiles
/// will be evaluated; the expansion's validity region is enforced there.
pub fn build_profiles(
    a: f64,
    k: usize,
    ground: &Arc<GroundState>,
    l: &DiscreteOperator,
    eig: &Eigenpair,
    coeffs: &ExpansionCoeffs,
    t_check: f64,
) -> Result<ProfileSet> {
    if k == 0 {
        return Err(Error::InvalidArgument("profile order k must be ≥ 1".into()));
    }
    if coeffs.j_max() < k.max(2) {
        return Err(Error::InvalidArgument(format!(
            "coefficients truncated at {} < k = {k}",
            coeffs.j_max()
        )));
    }
    let grid = ground.grid();
    ground.field().ensure_same_grid(&eig.y)?;
    let params = ground.params();
    let p = params.p_c();
    let e0 = eig.e0;
    let w = ground.field();

    let mut phis = vec![eig.y.scaled(a)];
    let mut forcing = vec![Field::zeros(grid)];
    let mut truncation = vec![0.0];
    for j in 2..=k {
        // powers[l][i] = [v^l]_i for i ≤ j (index 0 unused).
        let zero = Field::zeros(grid);
        let mut powers: Vec<Vec<Field>> = vec![vec![zero.clone(); j + 1]; j + 1];
        for i in 1..j {
            powers[1][i] = phis[i - 1].clone();
        }
        for lvl in 2..=j {
            for total in lvl..=j {
                let mut acc = Field::zeros(grid);
                for first in 1..=(total - (lvl - 1)) {
                    let rest = total - first;
                    if rest < lvl - 1 || first >= j {
                        continue;
                    }
                    acc.axpy(1.0, &powers[1][first].pointwise_mul(&powers[lvl - 1][rest]));
                }
                powers[lvl][total] = acc;
            }
        }
        let mut f = Field::zeros(grid);
        for lvl in 2..=j {
            let al = coeffs.a(lvl);
            if al == 0.0 {
                continue;
            }
            let weight = w.map(|wv| al * wv.powf(p - lvl as f64));
            f.axpy(1.0, &weight.pointwise_mul(&powers[lvl][j]));
        }
        let mut removed = 0.0;
        if !params.is_quadratic() {
            let v_prev = partial_sum(&phis, e0, t_check);
            let chi = v_prev.zip_map(w, |v, wv| 1.0 - smoothstep(((v / wv).abs() - 0.5) / 0.25));
            let kept = f.pointwise_mul(&chi);
            let total = lebesgue_norm(&f, 2.0);
            if total > 0.0 {
                removed = lebesgue_norm(&(&f - &kept), 2.0) / total;
            }
            f = kept;
        }
        let mu = (j * j) as f64 * e0 * e0;
        phis.push(shifted_solve(l, mu, &f)?);
        forcing.push(f);
        truncation.push(removed);
    }

    let tail_ratio = phis
        .iter()
        .map(|phi| {
            let peak = phi.max_abs();
            if peak == 0.0 {
                0.0
            } else {
                phi.values()[phi.len() - 1].abs() / peak
            }
        })
        .collect();

    let set = ProfileSet {
        a,
        e0,
        ground: ground.clone(),
        phis,
        forcing,
        truncation,
        tail_ratio,
        t_check,
    };
    set.check_validity(t_check)?;
    Ok(set)
}

fn partial_sum(phis: &[Field], e0: f64, t: f64) -> Field {
    let mut v = Field::zeros(phis[0].grid());
    for (idx, phi) in phis.iter().enumerate() {
        v.axpy((-((idx + 1) as f64) * e0 * t).exp(), phi);
    }
    v
}

impl ProfileSet {
    pub fn amplitude(&self) -> f64 {
        self.a
    }

    pub fn order(&self) -> usize {
        self.phis.len()
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn ground(&self) -> &Arc<GroundState> {
        &self.ground
    }

    /// `Φ_j`, 1-based.
    pub fn profile(&self, j: usize) -> &Field {
        &self.phis[j - 1]
    }

    pub fn profiles(&self) -> &[Field] {
        &self.phis
    }

    pub fn truncation(&self) -> &[f64] {
        &self.truncation
    }

    pub fn tail_ratios(&self) -> &[f64] {
        &self.tail_ratio
    }

    pub fn t_check(&self) -> f64 {
        self.t_check
    }

    /// Every profile has decayed below [`TAIL_TOLERANCE`] of its peak at `R`.
    pub fn tails_resolved(&self) -> bool {
        self.tail_ratio.iter().all(|&t| t <= TAIL_TOLERANCE)
    }

    /// Largest `|v_k(t)/W|` and where it occurs.
    pub fn max_ratio(&self, t: f64) -> (f64, f64) {
        let v = self.eval_vk(t);
        let grid = self.ground.grid();
        v.values()
            .iter()
            .zip(self.ground.field().values())
            .zip(grid.radii())
            .map(|((v, w), &r)| ((v / w).abs(), r))
            .fold((0.0, 0.0), |best, cur| if cur.0 > best.0 { cur } else { best })
    }

    pub fn check_validity(&self, t: f64) -> Result<()> {
        let (ratio, radius) = self.max_ratio(t);
        if ratio >= EXPANSION_LIMIT {
            return Err(Error::ExpansionValidity {
                ratio,
                radius,
                time: t,
            });
        }
        Ok(())
    }

    /// `Σ_j c_j(t) Φ_j` for per-order weights.
    fn combine(&self, weight: impl Fn(usize) -> f64) -> Field {
        let mut v = Field::zeros(self.ground.grid());
        for (idx, phi) in self.phis.iter().enumerate() {
            let c = weight(idx + 1);
            if c != 0.0 {
                v.axpy(c, phi);
            }
        }
        v
    }

    /// `v_k(t) = Σ_j e^{-j e0 t} Φ_j`
    pub fn eval_vk(&self, t: f64) -> Field {
        let e0 = self.e0;
        self.combine(|j| (-(j as f64) * e0 * t).exp())
    }

    /// `∂_t^n v_k(t)`, analytically.
    pub fn eval_vk_derivative(&self, t: f64, n: i32) -> Field {
        let e0 = self.e0;
        self.combine(|j| {
            let rate = j as f64 * e0;
            (-rate).powi(n) * (-rate * t).exp()
        })
    }

    /// `W_k^a(t) = W + v_k(t)`
    pub fn eval_wka(&self, t: f64) -> Field {
        &self.eval_vk(t) + self.ground.field()
    }

    /// `ε_k^a = (∂_tt - Δ) W_k^a - |W_k^a|^{p_c-1} W_k^a`, with `∂_tt` exact.
    /// Includes the `O(h^2)` static residual of `W` itself.
    pub fn residual(&self, t: f64) -> Field {
        let wka = self.eval_wka(t);
        let params = self.ground.params();
        let lap = radial_laplacian_with(&wka, self.ground.boundary());
        let mut out = self.eval_vk_derivative(t, 2);
        out.axpy(-1.0, &lap);
        out.axpy(-1.0, &nonlinearity(&wka, params));
        out
    }

    /// The residual with the time-independent static part of `W` removed:
    /// `Σ_j e^{-j e0 t}(j² e0² + ℒ) Φ_j - R(v_k)`, evaluated without
    /// cancellation against `W`-sized terms.
    pub fn dynamic_residual(&self, t: f64, l: &DiscreteOperator) -> Field {
        let e0 = self.e0;
        let mut out = Field::zeros(self.ground.grid());
        for (idx, phi) in self.phis.iter().enumerate() {
            let j = (idx + 1) as f64;
            let mut term = l.apply(phi);
            term.axpy(j * j * e0 * e0, phi);
            out.axpy((-j * e0 * t).exp(), &term);
        }
        out.axpy(-1.0, &self.ground.remainder(&self.eval_vk(t)));
        out
    }

    /// [`Self::dynamic_residual`] with the order-`j ≤ k` cancellations taken
    /// as exact: `Σ_{j≤k} e^{-j e0 t} F_j - R(v_k)`. For `d = 6` this is the
    /// finite sum `-Σ_{j>k} e^{-j e0 t} [v_k^2]_j`, free of cancellation.
    pub fn high_order_residual(&self, t: f64) -> Field {
        let e0 = self.e0;
        let k = self.order();
        let grid = self.ground.grid();
        let quadratic = self.ground.params().is_quadratic();
        let v = self.eval_vk(t);
        let fits = self
            .ground
            .field()
            .values()
            .iter()
            .zip(v.values())
            .all(|(w, v)| w + v >= 0.0);
        let mut out = Field::zeros(grid);
        if quadratic && fits {
            for j in (k + 1)..=(2 * k) {
                let mut coeff = Field::zeros(grid);
                for i in (j - k)..=k {
                    coeff.axpy(1.0, &self.phis[i - 1].pointwise_mul(&self.phis[j - i - 1]));
                }
                out.axpy(-(-(j as f64) * e0 * t).exp(), &coeff);
            }
            return out;
        }
        for (idx, f) in self.forcing.iter().enumerate() {
            out.axpy((-((idx + 1) as f64) * e0 * t).exp(), f);
        }
        out.axpy(-1.0, &self.ground.remainder(&v));
        out
    }

    /// Relative defect of the order-`j` cancellation,
    /// `‖(ℒ + j² e0²) Φ_j - F_j‖ / ‖F_j‖` (absolute for `j = 1`, scaled by `‖Φ_1‖`).
    pub fn cancellation_defects(&self, l: &DiscreteOperator) -> Vec<f64> {
        let e0 = self.e0;
        self.phis
            .iter()
            .enumerate()
            .map(|(idx, phi)| {
                let j = (idx + 1) as f64;
                let mut lhs = l.apply(phi);
                lhs.axpy(j * j * e0 * e0, phi);
                let defect = lebesgue_norm(&(&lhs - &self.forcing[idx]), 2.0);
                let scale = if idx == 0 {
                    lebesgue_norm(phi, 2.0)
                } else {
                    lebesgue_norm(&self.forcing[idx], 2.0)
                };
                if scale == 0.0 {
                    0.0
                } else {
                    defect / scale
                }
            })
            .collect()
    }
}
