//! Approximate threshold solutions W_k^a = W + Σ e^{-j e0 t} Φ_j and the decay
//! of their residuals, fitted against (k+1) e0.

use nlw_threshold::ground_state::GroundState;
use nlw_threshold::grid::lebesgue_norm;
use nlw_threshold::linearized::{assemble_l, ground_eigenpair};
use nlw_threshold::profiles::{build_profiles, taylor_coeffs};
use nlw_threshold::rates::{fit_decay_rate, linspace};
use nlw_threshold::RadialGrid;

fn main() -> nlw_threshold::Result<()> {
    let grid = RadialGrid::new(6, 60.0, 6000)?;
    let gs = GroundState::new(&grid)?;
    let l = assemble_l(&gs);
    let eig = ground_eigenpair(&l)?;
    let e0 = eig.e0;
    let times = linspace(0.0, 4.0, 17);
    for k in 1..=3 {
        let coeffs = taylor_coeffs(gs.params(), k.max(2))?;
        let ps = build_profiles(1.0, k, &gs, &l, &eig, &coeffs, times[0])?;
        // The static residual of discrete W is subtracted; it does not decay.
        let samples: Vec<(f64, f64)> = times
            .iter()
            .map(|&t| (t, lebesgue_norm(&ps.dynamic_residual(t, &l), 2.0)))
            .collect();
        let fit = fit_decay_rate(&samples, 0.0)?;
        println!(
            "k = {k}: rate {:.5} e0 (target {}), fit rms {:.1e}, cancellation {:.1e}",
            fit.rate / e0,
            k + 1,
            fit.residual,
            ps.cancellation_defects(&l).iter().copied().fold(0.0, f64::max)
        );
    }
    Ok(())
}
