//! A full policy × seed grid driven by a TOML file, as the `socbandit run`
//! command does it. Pass another config path as the first argument to run
//! something else; output goes to `socbandit-grid` under the temp directory.

use std::path::PathBuf;

use social_bandits::harness::grid::format_summary;
use social_bandits::harness::{report_bounds, run_grid, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/grid.toml"));
    let cfg = ExperimentConfig::load(&path)?;
    cfg.validate()?;
    let out = std::env::temp_dir().join("socbandit-grid");
    let (result, files) = run_grid(&cfg, &out)?;

    format_summary(&result.summary, &mut std::io::stdout())?;
    print!("{}", report_bounds(&cfg, Some(&result.summary)));
    println!("{} runs; regret rows in {}", result.runs.len(), files.regret.display());
    println!("plot with: gnuplot {}", files.plot_script.display());
    Ok(())
}
