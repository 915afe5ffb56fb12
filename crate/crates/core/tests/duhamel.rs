use nlw_threshold::duhamel::{build_propagator, SpectralPropagator, duhamel_tail, time_shift_fit, SigmaNorm, FILON_SWITCH};
use nlw_threshold::grid::weighted_sobolev_norm;
use nlw_threshold::trajectory::{TimeGrid, Trajectory};
use nlw_threshold::{Error, Field, RadialGrid};

/// `h(t)` and `h_t(t)` for the forcing `e^{-μτ}` on one mode of frequency `ω`,
/// integrated in closed form over `[t, T]`.
fn exact_tail(mu: f64, omega: f64, t: f64, t_max: f64) -> (f64, f64) {
    let l = t_max - t;
    let g = (omega - (-mu * l).exp() * (mu * (omega * l).sin() + omega * (omega * l).cos())) / (mu * mu + omega * omega);
    let h = (-mu * t).exp() * g / omega;
    let ht = -mu * h - (-mu * t).exp() * (omega * l).sin() * (-mu * l).exp() / omega;
    (h, ht)
}

/// Largest errors of `h` and `h_t` on mode `m`, relative to `sup |h|` and `ω sup |h|`.
fn tail_errors(prop: &SpectralPropagator, m: usize, samples: usize) -> (f64, f64) {
    let tg = TimeGrid::uniform(0.0, 5.0, samples).unwrap();
    let mu = 1.0;
    let omega = prop.frequencies()[m];
    let phi = prop.mode(m);
    let forcing = Trajectory::on_grid(&tg, tg.times().iter().map(|t| phi.scaled((-mu * t).exp())).collect()).unwrap();
    let sol = duhamel_tail(prop, &forcing).unwrap();
    let exact: Vec<_> = tg.times().into_iter().map(|t| exact_tail(mu, omega, t, 5.0)).collect();
    let scale = exact.iter().map(|e| e.0.abs()).fold(0.0, f64::max);
    let (mut eh, mut eht) = (0.0f64, 0.0f64);
    for (n, (h, ht)) in exact.into_iter().enumerate() {
        let c = prop.transform(&sol.h.fields()[n]);
        eh = eh.max((c[m] - h).abs());
        eht = eht.max((prop.transform(&sol.ht.fields()[n])[m] - ht).abs());
        // Nothing leaks into the other modes.
        let other = if m == 0 { 1 } else { 0 };
        assert!(c[other].abs() <= 1e-12 * scale);
    }
    (eh / scale, eht / (omega * scale))
}

#[test]
fn tail_matches_closed_form_on_slow_and_fast_modes() {
    let grid = RadialGrid::new(6, 10.0, 100).unwrap();
    let prop = build_propagator(&grid).unwrap();
    let dt = 5.0 / 400.0;
    let fast = prop.len() - 10;
    assert!(prop.frequencies()[0] * dt < FILON_SWITCH);
    assert!(prop.frequencies()[fast] * dt > FILON_SWITCH);
    for m in [0, 5, fast] {
        let coarse = tail_errors(&prop, m, 401);
        let fine = tail_errors(&prop, m, 801);
        // Trapezoid error is (ω² + μ²) Δτ² / 12; Filon only interpolates the forcing.
        let (omega, h) = (prop.frequencies()[m], dt / 2.0);
        let bound = if omega * h <= FILON_SWITCH { (omega * omega + 1.0) * h * h / 6.0 } else { h * h };
        assert!(fine.0 < bound && fine.1 < bound, "mode {m}: {fine:?} vs {bound:e}");
        // Second order in the time step.
        assert!(coarse.0 / fine.0 > 3.5 && coarse.1 / fine.1 > 3.5, "mode {m}: {coarse:?} -> {fine:?}");
    }
}

#[test]
fn free_evolution_conserves_mode_amplitudes() {
    let grid = RadialGrid::new(5, 12.0, 120).unwrap();
    let prop = build_propagator(&grid).unwrap();
    let f = Field::from_fn(&grid, |r| (-(r - 3.0).powi(2)).exp());
    let g = Field::from_fn(&grid, |r| r * (-r * r / 2.0).exp());
    let state = prop.free_evolve(&f, &g, 2.3).unwrap();
    let (fc, gc) = (prop.transform(&f), prop.transform(&g));
    let (uc, utc) = (prop.transform(&state.u), prop.transform(&state.ut));
    let total: f64 = (0..prop.len()).map(|m| (prop.frequencies()[m] * fc[m]).powi(2) + gc[m] * gc[m]).sum();
    for m in 0..prop.len() {
        let w = prop.frequencies()[m];
        let before = w * w * fc[m] * fc[m] + gc[m] * gc[m];
        let after = w * w * uc[m] * uc[m] + utc[m] * utc[m];
        assert!((before - after).abs() <= 1e-12 * total, "mode {m}");
    }
}

#[test]
fn tail_rejects_non_uniform_times() {
    let grid = RadialGrid::new(6, 10.0, 40).unwrap();
    let prop = build_propagator(&grid).unwrap();
    let z = Field::zeros(&grid);
    let traj = Trajectory::new(vec![0.0, 1.0, 3.0], vec![z.clone(), z.clone(), z]).unwrap();
    assert!(matches!(duhamel_tail(&prop, &traj), Err(Error::InvalidArgument(_))));
}

fn travelling(grid: &std::sync::Arc<RadialGrid>, tg: &TimeGrid, delay: f64) -> Trajectory {
    let fields = tg
        .times()
        .iter()
        .map(|&t| Field::from_fn(grid, |r| (-(r - 2.0 - 0.5 * (t - delay)).powi(2)).exp()))
        .collect();
    Trajectory::on_grid(tg, fields).unwrap()
}

#[test]
fn recovers_a_synthetic_time_shift() {
    let grid = RadialGrid::new(6, 15.0, 300).unwrap();
    let tg = TimeGrid::uniform(0.0, 8.0, 161).unwrap();
    let reference = travelling(&grid, &tg, 0.0);
    let shifted = travelling(&grid, &tg, 1.3);
    let fit = time_shift_fit(&shifted, &reference, 4.0).unwrap();
    assert!((fit.shift - 1.3).abs() < 1e-3, "{fit:?}");
    assert!(fit.residual < 1e-3);
    assert!(fit.overlap >= 4.0);
    assert!(matches!(time_shift_fit(&shifted, &reference, 9.0), Err(Error::NoOverlap)));
}

#[test]
fn sigma_norm_weights_by_time() {
    let grid = RadialGrid::new(6, 10.0, 200).unwrap();
    let tg = TimeGrid::uniform(1.0, 3.0, 5).unwrap();
    let zero = Trajectory::zeros(&tg, &grid);
    let s = SigmaNorm::of(&zero, 1.0, 2).unwrap();
    assert_eq!(s.value, 0.0);
    assert_eq!(s.argmax, 1.0);

    let f = Field::from_fn(&grid, |r| (-r * r).exp());
    let norm = weighted_sobolev_norm(&f, 2).unwrap();
    let decaying = Trajectory::on_grid(&tg, tg.times().iter().map(|t| f.scaled((-t).exp())).collect()).unwrap();
    let slow = SigmaNorm::of(&decaying, 0.5, 2).unwrap();
    assert!((slow.value - (-0.5f64).exp() * norm).abs() < 1e-12 * norm);
    assert_eq!(slow.argmax, 1.0);
    let fast = SigmaNorm::of(&decaying, 2.0, 2).unwrap();
    assert!((fast.value - 3f64.exp() * norm).abs() < 1e-12 * fast.value);
    assert_eq!(fast.argmax, 3.0);
}
