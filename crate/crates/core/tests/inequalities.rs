use std::sync::Arc;

use nlw_threshold::ground_state::GroundState;
use nlw_threshold::inequalities::{
    bilinear_ratio, embedding_ratio, gain_of_decay_ratio, logspace, loglog_slope, power_weight_min_order,
    power_weight_ratio, superlinearity_samples, uniform_constant, Tail,
};
use nlw_threshold::suite::{degenerating_family, gaussian_bump, smooth_bump_suite, Degeneration};
use nlw_threshold::{Field, RadialGrid, Result};

fn tail(grid: &Arc<RadialGrid>, kind: Degeneration, ratio: impl Fn(&Field) -> Result<f64>) -> Tail {
    let points = degenerating_family(grid, kind, 9)
        .iter()
        .map(|(p, f)| Ok((*p, ratio(f)?)))
        .collect::<Result<Vec<_>>>()
        .unwrap();
    Tail::new(format!("{kind:?}"), &points).unwrap()
}

fn tails(grid: &Arc<RadialGrid>, ratio: impl Fn(&Field) -> Result<f64> + Copy) -> Vec<Tail> {
    Degeneration::ALL.iter().map(|&k| tail(grid, k, ratio)).collect()
}

#[test]
fn embedding_holds_at_order_four_and_fails_at_order_one() {
    let grid = RadialGrid::new(3, 40.0, 4000).unwrap();
    let suite = smooth_bump_suite(&grid, 40, 11);
    let ratios: Vec<f64> = suite.iter().map(|f| embedding_ratio(f, 0, 0, 4).unwrap()).collect();
    let fine = RadialGrid::new(3, 40.0, 8000).unwrap();
    let refined: Vec<f64> = smooth_bump_suite(&fine, 40, 11)
        .iter()
        .map(|f| embedding_ratio(f, 0, 0, 4).unwrap())
        .collect();
    let uc = uniform_constant(&ratios, Some(&refined), tails(&grid, |f| embedding_ratio(f, 0, 0, 4))).unwrap();
    assert!(uc.holds, "{uc:?}");

    // ‖f‖_∞ ≤ C ‖f‖_{H^1} is false in three dimensions: concentration costs w^{-1/2}.
    let conc = tail(&grid, Degeneration::Concentration, |f| embedding_ratio(f, 0, 0, 1));
    assert!((conc.exponent - 0.5).abs() < 0.1, "{conc:?}");
    assert!(!conc.bounded());
    let ratios: Vec<f64> = suite.iter().map(|f| embedding_ratio(f, 0, 0, 1).unwrap()).collect();
    assert!(!uniform_constant(&ratios, None, vec![conc]).unwrap().holds);
}

#[test]
fn bilinear_estimate_holds_against_a_fixed_partner() {
    let grid = RadialGrid::new(6, 40.0, 2000).unwrap();
    let partner = gaussian_bump(&grid, 0.0, 1.0);
    let suite = smooth_bump_suite(&grid, 20, 3);
    let others = smooth_bump_suite(&grid, 20, 4);
    let ratios: Vec<f64> = suite.iter().zip(&others).map(|(f, g)| bilinear_ratio(f, g, 4).unwrap()).collect();
    let uc = uniform_constant(&ratios, None, tails(&grid, |g| bilinear_ratio(&partner, g, 4))).unwrap();
    assert!(uc.holds, "{uc:?}");
}

#[test]
fn power_weight_needs_enough_derivatives() {
    let grid = RadialGrid::new(3, 40.0, 2000).unwrap();
    let (j, c) = (2, 0.5);
    assert!(4.0 >= power_weight_min_order(3, j, c));
    let good = tail(&grid, Degeneration::Translation, |h| power_weight_ratio(h, j, c, 4));
    assert!(good.bounded(), "{good:?}");

    // A weight of <r>^6 is far more than two derivatives can pay for.
    let c = 3.0;
    assert!(2.0 < power_weight_min_order(3, j, c));
    let bad = tail(&grid, Degeneration::Translation, |h| power_weight_ratio(h, j, c, 2));
    assert!(bad.exponent > 2.0, "{bad:?}");
}

#[test]
fn remainder_is_quadratic_and_gains_decay() {
    for d in [6, 7] {
        let grid = RadialGrid::new(d, 30.0, 1200).unwrap();
        let gs = GroundState::new(&grid).unwrap();
        let phi = gaussian_bump(&grid, 2.0, 1.0);
        let samples = superlinearity_samples(&gs, &phi, &logspace(1e-4, 1e-2, 7));
        assert!((loglog_slope(&samples).unwrap() - 2.0).abs() < 1e-3, "d = {d}");
    }
    let grid = RadialGrid::new(6, 30.0, 1200).unwrap();
    let gs = GroundState::new(&grid).unwrap();
    let w = gaussian_bump(&grid, 0.0, 1.0).scaled(0.1);
    let gain = tail(&grid, Degeneration::Concentration, |h| gain_of_decay_ratio(&gs, &h.scaled(1e-2), &w, 1.0, 0.5));
    assert!(gain.bounded(), "{gain:?}");
}
