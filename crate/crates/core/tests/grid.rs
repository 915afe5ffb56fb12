mod common;

use approx::assert_relative_eq;
use nlw_threshold::grid::{
    h1dot_norm, lebesgue_norm, mixed_spacetime_norm, radial_laplacian, weighted_sobolev_norm, MixedNormSpec,
};
use nlw_threshold::trajectory::{TimeGrid, Trajectory};
use nlw_threshold::{Field, RadialGrid};
use proptest::prelude::*;

use common::{hermite, radial_integral};

fn gaussian(grid: &std::sync::Arc<RadialGrid>) -> Field {
    Field::from_fn(grid, |r| (-r * r).exp())
}

#[test]
fn norms_match_quadrature() {
    for d in [3, 6, 8] {
        let grid = RadialGrid::new(d, 8.0, 4000).unwrap();
        let g = gaussian(&grid);
        for p in [2.0, 3.0, 2.0 * d as f64 / (d as f64 - 2.0)] {
            let exact = radial_integral(d, 8.0, |r| (-p * r * r).exp()).powf(1.0 / p);
            assert_relative_eq!(lebesgue_norm(&g, p), exact, max_relative = 1e-5);
        }
        let grad = radial_integral(d, 8.0, |r| (2.0 * r * (-r * r).exp()).powi(2)).sqrt();
        assert_relative_eq!(h1dot_norm(&g), grad, max_relative = 1e-5);
    }
}

#[test]
fn weighted_sobolev_norm_of_a_gaussian() {
    let d = 3;
    let grid = RadialGrid::new(d, 10.0, 8000).unwrap();
    let g = gaussian(&grid);
    for m in 0..=4 {
        let exact: f64 = (0..=m)
            .map(|j| {
                radial_integral(d, 10.0, |r| {
                    let x = (1.0 + r * r).powf((m - j) as f64 / 2.0) * hermite(j, r) * (-r * r).exp();
                    x * x
                })
                .sqrt()
            })
            .sum();
        assert_relative_eq!(weighted_sobolev_norm(&g, m).unwrap(), exact, max_relative = 1e-4);
    }
    assert!(weighted_sobolev_norm(&g, 5).is_err());
}

#[test]
fn laplacian_is_second_order() {
    let error = |n: usize| {
        let grid = RadialGrid::new(5, 8.0, n).unwrap();
        let lap = radial_laplacian(&gaussian(&grid));
        let exact = Field::from_fn(&grid, |r| (4.0 * r * r - 10.0) * (-r * r).exp());
        lebesgue_norm(&(&lap - &exact), 2.0)
    };
    let ratio = error(400) / error(800);
    assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn constant_trajectory_mixed_norm() {
    let grid = RadialGrid::new(6, 5.0, 100).unwrap();
    let f = gaussian(&grid);
    let tg = TimeGrid::uniform(0.0, 3.0, 31).unwrap();
    let traj = Trajectory::on_grid(&tg, vec![f.clone(); 31]).unwrap();
    let spec = MixedNormSpec::new(4.0, 3.0).unwrap();
    let expected = 3f64.powf(0.25) * lebesgue_norm(&f, 3.0);
    assert_relative_eq!(mixed_spacetime_norm(&traj, spec).unwrap(), expected, max_relative = 1e-12);
    let zero = Trajectory::zeros(&tg, &grid);
    assert_eq!(mixed_spacetime_norm(&zero, spec).unwrap(), 0.0);
    assert!(MixedNormSpec::new(0.5, 2.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_symmetric_and_negative(
        d in 3usize..10,
        a in prop::collection::vec(-1.0f64..1.0, 40),
        b in prop::collection::vec(-1.0f64..1.0, 40),
    ) {
        let grid = RadialGrid::new(d, 7.0, 40).unwrap();
        let f = Field::new(grid.clone(), a).unwrap();
        let g = Field::new(grid, b).unwrap();
        let (lf, lg) = (radial_laplacian(&f), radial_laplacian(&g));
        let scale = f.dot(&f).sqrt() * g.dot(&g).sqrt();
        prop_assert!((lf.dot(&g) - f.dot(&lg)).abs() <= 1e-10 * scale);
        prop_assert!(lf.dot(&f) <= 0.0);
    }
}
