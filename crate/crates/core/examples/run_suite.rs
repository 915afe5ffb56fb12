//! Running one experiment suite from code with an edited config, without
//! writing files.

use nlw_threshold::experiments::{run_command, ExperimentConfig};

fn main() -> nlw_threshold::Result<()> {
    let cfg = ExperimentConfig::from_json(r#"{ "nodes": 3000, "dims": [6] }"#)?;
    let report = run_command("spectrum", &cfg, None)?;
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("all passed: {}", report.passed());
    Ok(())
}
