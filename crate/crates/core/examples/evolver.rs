//! Leapfrog quality: energy drift on (W, 0), and the time order against the
//! exact spectral propagator for a free wave.

use std::sync::Arc;

use nlw_threshold::duhamel::build_propagator;
use nlw_threshold::evolver::{evolve, Dynamics, EvolverConfig};
use nlw_threshold::ground_state::GroundState;
use nlw_threshold::grid::lebesgue_norm;
use nlw_threshold::{Field, RadialGrid, State};

fn main() -> nlw_threshold::Result<()> {
    let grid = RadialGrid::new(6, 60.0, 6000)?;
    let gs = GroundState::new(&grid)?;
    let cfg = EvolverConfig { t_run: 20.0, track_distance: false, ..EvolverConfig::default() };
    let plain = evolve(&State::at_rest(0.0, gs.field().clone()), &cfg, &Dynamics::about_ground_state(&gs, false))?;
    println!("(W,0) energy drift per unit time: {:.2e}", plain.energy_drift() / cfg.t_run);

    let small = RadialGrid::new(6, 24.0, 480)?;
    let prop = Arc::new(build_propagator(&small)?);
    let bump = Field::from_fn(&small, |r| (-(r - 4.0).powi(2)).exp());
    let t_run = 10.0;
    let exact = prop.free_evolve(&bump, &Field::zeros(&small), t_run)?;
    let mut last = None;
    for cfl in [0.5, 0.25, 0.125] {
        let cfg = EvolverConfig { cfl, t_run, track_distance: false, ..EvolverConfig::default() };
        let out = evolve(&State::at_rest(0.0, bump.clone()), &cfg, &Dynamics::free(&small)?)?;
        let err = lebesgue_norm(&(&out.final_state.u - &exact.u), 2.0);
        match last {
            Some(prev) => println!("cfl {cfl}: error {err:.3e}, order {:.3}", f64::log2(prev / err)),
            None => println!("cfl {cfl}: error {err:.3e}"),
        }
        last = Some(err);
    }
    Ok(())
}
