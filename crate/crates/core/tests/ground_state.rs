mod common;

use approx::assert_relative_eq;
use nlw_threshold::ground_state::{
    energy, h1dot_inner, j_bound_constant, j_bound_holds, j_function, nonlinearity, scale, scaling_direction,
    sobolev_ratio, GroundState, Params,
};
use nlw_threshold::grid::{h1dot_norm, lebesgue_norm};
use nlw_threshold::{Field, RadialGrid, State};

use common::{gamma_half, p_c, radial_integral, w_exact};

/// Aubin-Talenti: the best constant in `‖f‖_{2d/(d-2)} ≤ S ‖∇f‖_2`.
fn talenti(d: usize) -> f64 {
    let df = d as f64;
    let gamma_d: f64 = (1..d).map(|k| k as f64).product();
    (std::f64::consts::PI * df * (df - 2.0)).powf(-0.5) * (gamma_d / gamma_half(d)).powf(1.0 / df)
}

fn w_slope(d: usize, r: f64) -> f64 {
    let df = d as f64;
    -(df - 2.0) / 2.0 * w_exact(d, r) / (1.0 + r * r / (df * (df - 2.0))) * 2.0 * r / (df * (df - 2.0))
}

#[test]
fn sampled_profile_is_the_closed_form() {
    for d in [3, 6, 7, 8] {
        let grid = RadialGrid::new(d, 30.0, 600).unwrap();
        let gs = GroundState::new(&grid).unwrap();
        for (v, &r) in gs.field().values().iter().zip(grid.radii()) {
            assert_relative_eq!(*v, w_exact(d, r), max_relative = 1e-14);
        }
    }
}

#[test]
fn identities_against_quadrature() {
    for d in [6, 7, 8] {
        let grid = RadialGrid::new(d, 60.0, 6000).unwrap();
        let gs = GroundState::new(&grid).unwrap();
        let q = 2.0 * d as f64 / (d as f64 - 2.0);
        // Whole space: the tails beyond r = 3000 are below 1e-9 relative.
        let grad2 = radial_integral(d, 3000.0, |r| w_slope(d, r).powi(2));
        let power = radial_integral(d, 3000.0, |r| w_exact(d, r).powf(q));
        assert_relative_eq!(grad2, power, max_relative = 1e-8);
        // The grid sees [0, R] only.
        let boxed = radial_integral(d, 60.0, |r| w_slope(d, r).powi(2));
        assert_relative_eq!(h1dot_norm(gs.field()).powi(2), boxed, max_relative = 1e-5);
        let boxed_power = radial_integral(d, 60.0, |r| w_exact(d, r).powf(q));
        let e_box = 0.5 * boxed - boxed_power / q;
        let e = energy(&State::at_rest(0.0, gs.field().clone())).total;
        assert_relative_eq!(e, e_box, max_relative = 5e-5);
        // Truncating the domain is what separates E from ‖∇W‖²/d.
        assert_relative_eq!(e, grad2 / d as f64, max_relative = 2e-3);
    }
}

#[test]
fn w_attains_the_sharp_sobolev_constant() {
    for d in [5, 6, 7, 8] {
        let grid = RadialGrid::new(d, 200.0, 20000).unwrap();
        let w = GroundState::new(&grid).unwrap().field().clone();
        assert_relative_eq!(sobolev_ratio(&w).unwrap(), talenti(d), max_relative = 5e-3);
    }
}

#[test]
fn sobolev_ratio_is_locally_maximal_at_w() {
    let grid = RadialGrid::new(6, 60.0, 6000).unwrap();
    let w = GroundState::new(&grid).unwrap().field().clone();
    let lw = scaling_direction(&grid);
    let top = sobolev_ratio(&w).unwrap();
    for (c, width) in [(0.0, 1.0), (3.0, 1.0), (6.0, 2.0)] {
        let mut g = Field::from_fn(&grid, |r| (-((r - c) / width).powi(2)).exp());
        // W and ΛW are neutral directions of the quotient.
        for dir in [&w, &lw] {
            let coef = h1dot_inner(&g, dir) / h1dot_inner(dir, dir);
            g.axpy(-coef, dir);
        }
        let g = g.scaled(h1dot_norm(&w) / h1dot_norm(&g));
        for eps in [0.05, -0.05] {
            let mut v = w.clone();
            v.axpy(eps, &g);
            assert!(sobolev_ratio(&v).unwrap() < top, "c = {c}, eps = {eps}");
        }
    }
}

#[test]
fn static_residual_is_second_order() {
    let rel = |n| {
        let gs = GroundState::new(&RadialGrid::new(6, 60.0, n).unwrap()).unwrap();
        lebesgue_norm(&gs.static_residual(), 2.0) / lebesgue_norm(&nonlinearity(gs.field(), gs.params()), 2.0)
    };
    let coarse = rel(3000);
    let fine = rel(6000);
    assert!(fine <= 1e-4);
    assert!((3.0..=5.0).contains(&(coarse / fine)), "ratio {}", coarse / fine);
}

#[test]
fn remainder_is_exactly_quadratic_for_d6() {
    let grid = RadialGrid::new(6, 20.0, 400).unwrap();
    let gs = GroundState::new(&grid).unwrap();
    let v = Field::from_fn(&grid, |r| 0.3 * (-r * r / 8.0).exp() * (r - 2.0));
    let w = gs.field();
    let positive = w.zip_map(&v, |w, v| w + v).values().iter().all(|x| *x >= 0.0);
    assert!(positive);
    let r = gs.remainder(&v);
    for (a, b) in r.values().iter().zip(v.values()) {
        assert_relative_eq!(*a, b * b, max_relative = 1e-12, epsilon = 1e-300);
    }
}

#[test]
fn remainder_difference_agrees_with_direct_formula() {
    for d in [6, 7] {
        let grid = RadialGrid::new(d, 20.0, 400).unwrap();
        let gs = GroundState::new(&grid).unwrap();
        let v = Field::from_fn(&grid, |r| 0.2 * (-r * r / 4.0).exp());
        let h = Field::from_fn(&grid, |r| 0.05 * (-(r - 1.0).powi(2)).exp());
        let direct = &gs.remainder(&(&h + &v)) - &gs.remainder(&v);
        let stable = gs.remainder_difference(&h, &v);
        let err = lebesgue_norm(&(&direct - &stable), 2.0);
        assert!(err <= 1e-12 * lebesgue_norm(&direct, 2.0), "d = {d}");
    }
}

#[test]
fn j_bound() {
    let p = p_c(6);
    for i in 0..=200 {
        let s = i as f64 / 20.0;
        assert!(j_bound_holds(s, p), "s = {s}");
    }
    // For s < 0 the bound only holds with a constant.
    assert!(!j_bound_holds(-0.25, p));
    assert_relative_eq!(j_function(-0.25, p), 2.0 * 0.0625, max_relative = 1e-12);
    assert_relative_eq!(j_bound_constant(p, 1000), 2.0, max_relative = 1e-9);
}

#[test]
fn scaling_preserves_energy_and_residual() {
    let grid = RadialGrid::new(6, 60.0, 6000).unwrap();
    let pulse = Field::from_fn(&grid, |r| (-(r - 5.0).powi(2)).exp());
    let ut = Field::from_fn(&grid, |r| 0.5 * (-(r - 5.0).powi(2)).exp());
    let state = State::new(0.0, pulse, ut).unwrap();
    let e = energy(&state).total;
    for lambda in [0.5, 2.0] {
        let scaled = scale(&state, lambda).unwrap();
        assert_relative_eq!(energy(&scaled).total, e, max_relative = 1e-3);
    }
    assert!(scale(&state, 20.0).is_err());
    assert!(scale(&state, -1.0).is_err());
}

#[test]
fn low_dimensions_are_rejected() {
    assert!(Params::new(2).is_err());
    assert!(RadialGrid::new(2, 10.0, 100).is_err());
}
