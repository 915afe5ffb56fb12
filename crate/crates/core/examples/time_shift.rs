//! W^a(t) = W^{sign a}(t + log|a| / e0): recovering the shift between two
//! fixed points of the same sign, and failing to match opposite signs.

use nlw_threshold::duhamel::time_shift_fit;
use nlw_threshold::experiments::{ExperimentConfig, FixedPointSetup};

fn main() -> nlw_threshold::Result<()> {
    let setup = FixedPointSetup::new(&ExperimentConfig::default())?;
    let e0 = setup.e0();
    let wa = |a: f64| -> nlw_threshold::Result<_> {
        let (problem, sol) = setup.solve(a, 3, 1e-10)?;
        Ok(sol.wa(&problem))
    };
    let reference = wa(1.0)?;
    for a in [e0.exp(), (-e0).exp()] {
        let fit = time_shift_fit(&wa(a)?, &reference, 5.0)?;
        println!(
            "a = {a:.4}: shift {:.5}, predicted {:.5}, residual {:.1e}",
            fit.shift,
            a.ln() / e0,
            fit.residual
        );
    }
    let cross = time_shift_fit(&wa(-1.0)?, &reference, 5.0)?;
    println!("a = -1 against a = 1: best residual {:.2e}", cross.residual);
    Ok(())
}
