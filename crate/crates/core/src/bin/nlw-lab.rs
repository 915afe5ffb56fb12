use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nlw_threshold::experiments::{execute, execute_all, ExperimentConfig, Report};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    Groundstate,
    Spectrum,
    Profiles,
    Fixedpoint,
    Dichotomy,
    Inequalities,
    All,
}

/// Threshold-solution experiments for the energy-critical wave equation.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON config; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the suite seed of the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn print_report(report: &Report) {
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} {}: {}", report.command, c.name, c.detail);
    }
}

fn run(cli: &Cli) -> Result<bool, nlw_threshold::Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    std::fs::create_dir_all(&cli.out)?;
    let name = match cli.command {
        Command::All => {
            let mut ok = true;
            for suite in execute_all(&cfg, &cli.out)? {
                match suite.result {
                    Ok(report) => {
                        print_report(&report);
                        ok &= report.passed();
                    }
                    Err(e) => {
                        eprintln!("FAULT {}: {e}", suite.command);
                        ok = false;
                    }
                }
            }
            return Ok(ok);
        }
        Command::Groundstate => "groundstate",
        Command::Spectrum => "spectrum",
        Command::Profiles => "profiles",
        Command::Fixedpoint => "fixedpoint",
        Command::Dichotomy => "dichotomy",
        Command::Inequalities => "inequalities",
    };
    let report = execute(name, &cfg, &cli.out)?;
    print_report(&report);
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
