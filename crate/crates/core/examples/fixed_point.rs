//! The exact threshold solution W^a = W + v_k + h as the fixed point of the
//! backward Duhamel map, on the default fixed-point grid.

use nlw_threshold::duhamel::{fit_norm_decay, pde_residual};
use nlw_threshold::experiments::{ExperimentConfig, FixedPointSetup};

fn main() -> nlw_threshold::Result<()> {
    let cfg = ExperimentConfig::default();
    let setup = FixedPointSetup::new(&cfg)?;
    let e0 = setup.e0();
    let (problem, sol) = setup.solve(1.0, 3, 1e-10)?;

    println!("e0 = {e0:.6}, {} Picard iterations", sol.iterations);
    for (i, r) in sol.ratios().iter().enumerate() {
        println!("  ‖h_{} - h_{}‖ / ‖h_{} - h_{}‖ = {r:.3}", i + 2, i + 1, i + 1, i);
    }
    let t_hi = problem.time_grid().t_max() - 3.0 / e0;
    let wa = sol.wa(&problem);
    let t0 = problem.time_grid().t_start();
    println!("‖w^a‖ decays at {:.4} e0", fit_norm_decay(&wa, t0, t_hi)?.rate / e0);
    println!("‖h‖   decays at {:.4} e0", fit_norm_decay(&sol.h, t0, t_hi)?.rate / e0);
    let (res, floor) = pde_residual(&problem, &sol, sol.h.len() / 2);
    println!("PDE residual mid-window {res:.2e} (discretization floor {floor:.2e})");
    Ok(())
}
