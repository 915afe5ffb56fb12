//! Backward evolution of W_3^a data: a > 0 blows up, a < 0 disperses.

use nlw_threshold::evolver::{classify, evolve, Direction, Dynamics, EvolverConfig};
use nlw_threshold::ground_state::GroundState;
use nlw_threshold::grid::h1dot_norm;
use nlw_threshold::linearized::{assemble_l, ground_eigenpair};
use nlw_threshold::profiles::{build_profiles, taylor_coeffs};
use nlw_threshold::{RadialGrid, State};

fn main() -> nlw_threshold::Result<()> {
    let grid = RadialGrid::new(6, 100.0, 10000)?;
    let gs = GroundState::new(&grid)?;
    let l = assemble_l(&gs);
    let eig = ground_eigenpair(&l)?;
    let coeffs = taylor_coeffs(gs.params(), 3)?;
    let cfg = EvolverConfig {
        t_run: 40.0,
        direction: Direction::Backward,
        diagnostic_stride: 20,
        track_distance: false,
        ..EvolverConfig::default()
    };
    // Subtracting the static residual of discrete W keeps (W, 0) exactly still.
    let dynamics = Dynamics::about_ground_state(&gs, true);
    for a in [1e-2, -1e-2] {
        let ps = build_profiles(a, 3, &gs, &l, &eig, &coeffs, 0.0)?;
        let data = State::new(0.0, ps.eval_wka(0.0), ps.eval_vk_derivative(0.0, 1))?;
        let outcome = evolve(&data, &cfg, &dynamics)?;
        let class = classify(&outcome, h1dot_norm(gs.field()), cfg.t_run);
        println!("a = {a:+e}: {class:?} after {} steps", outcome.steps);
    }
    Ok(())
}
