//! The weighted embedding ‖f‖_∞ ≤ C ‖f‖_{H^{4,4}} in d = 3 over a seeded
//! suite, and what a false variant (m = 1) looks like along concentrating bumps.

use nlw_threshold::inequalities::{embedding_ratio, uniform_constant, Tail};
use nlw_threshold::suite::{degenerating_family, smooth_bump_suite, Degeneration};
use nlw_threshold::RadialGrid;

fn main() -> nlw_threshold::Result<()> {
    let grid = RadialGrid::new(3, 60.0, 6000)?;
    let suite = smooth_bump_suite(&grid, 100, 20240611);

    for m in [4, 1] {
        let ratios = suite.iter().map(|f| embedding_ratio(f, 0, 0, m)).collect::<Result<Vec<_>, _>>()?;
        let tails = Degeneration::ALL
            .iter()
            .map(|&kind| {
                let points = degenerating_family(&grid, kind, 9)
                    .iter()
                    .map(|(param, f)| Ok((*param, embedding_ratio(f, 0, 0, m)?)))
                    .collect::<nlw_threshold::Result<Vec<_>>>()?;
                Tail::new(format!("{kind:?}"), &points)
            })
            .collect::<nlw_threshold::Result<Vec<_>>>()?;
        for t in &tails {
            println!("m = {m}  {:<14} growth exponent {:+.3}", t.family, t.exponent);
        }
        let uc = uniform_constant(&ratios, None, tails)?;
        println!("m = {m}  suite max {:.3e}, uniform: {}", uc.suite_max, uc.holds);
    }
    Ok(())
}
