//! The static solution W on the reference grid: residual, the Pohozaev and
//! energy identities, and the Sobolev quotient.

use nlw_threshold::ground_state::{energy, nonlinearity, power_integral, sobolev_ratio, GroundState};
use nlw_threshold::grid::{h1dot_norm, lebesgue_norm};
use nlw_threshold::{RadialGrid, State};

fn main() -> nlw_threshold::Result<()> {
    for d in [6, 7, 8] {
        let grid = RadialGrid::new(d, 60.0, 6000)?;
        let gs = GroundState::new(&grid)?;
        let w = gs.field();
        let p = gs.params();

        let residual = lebesgue_norm(&gs.static_residual(), 2.0) / lebesgue_norm(&nonlinearity(w, p), 2.0);
        let grad2 = h1dot_norm(w).powi(2);
        let pohozaev = (grad2 - power_integral(w, p.sobolev_exponent())).abs() / grad2;
        let e = energy(&State::at_rest(0.0, w.clone())).total;

        println!("d = {d}  p_c = {:.4}", p.p_c());
        println!("  relative static residual  {residual:.3e}");
        println!("  Pohozaev defect           {pohozaev:.3e}");
        println!("  E(W,0) = {e:.6}, ‖∇W‖²/d = {:.6}", grad2 / d as f64);
        println!("  Sobolev quotient of W     {:.6}", sobolev_ratio(w)?);
    }
    Ok(())
}
