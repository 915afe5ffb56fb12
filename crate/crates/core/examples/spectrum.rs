//! The unique negative eigenvalue `-e0²` of the linearized operator and how
//! it moves under grid refinement.

use nlw_threshold::ground_state::GroundState;
use nlw_threshold::linearized::{assemble_l, ground_eigenpair, negative_count};
use nlw_threshold::RadialGrid;

fn e0(d: usize, radius: f64, nodes: usize) -> nlw_threshold::Result<f64> {
    let gs = GroundState::new(&RadialGrid::new(d, radius, nodes)?)?;
    Ok(ground_eigenpair(&assemble_l(&gs))?.e0)
}

fn main() -> nlw_threshold::Result<()> {
    for d in [6, 7, 8] {
        let gs = GroundState::new(&RadialGrid::new(d, 60.0, 6000)?)?;
        let l = assemble_l(&gs);
        let eig = ground_eigenpair(&l)?;
        println!(
            "d = {d}: {} negative eigenvalue(s), e0 = {:.8}, residual {:.1e}",
            negative_count(&l),
            eig.e0,
            eig.residual
        );
        let coarse = e0(d, 60.0, 3000)?;
        let fine = e0(d, 60.0, 12000)?;
        let order = ((coarse - eig.e0) / (eig.e0 - fine)).log2();
        println!("  N/2 {coarse:.8}  2N {fine:.8}  observed order {order:.2}");
    }
    Ok(())
}
