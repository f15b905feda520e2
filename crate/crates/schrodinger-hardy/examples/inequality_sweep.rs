//! Batch inequality sweeps through the command layer: ratio tables with
//! refinement-stability summaries, written as CSV.
//!
//!     cargo run --release --example inequality_sweep

use schrodinger_hardy::commands::{cmd_sweep, SweepId};
use schrodinger_hardy::config::ExperimentConfig;

fn main() -> schrodinger_hardy::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.dim = 1;
    cfg.points = 201;
    cfg.cases = 12;
    cfg.seed = 7;
    cfg.out_dir = std::env::temp_dir().join("sh_example_sweeps");

    for id in [SweepId::LogHolder, SweepId::Mollify] {
        let files = cmd_sweep(&cfg, id)?;
        println!("sweep {}:", id.label());
        let text = std::fs::read_to_string(&files[0])?;
        let lines: Vec<&str> = text.lines().collect();
        for line in lines.iter().take(4) {
            println!("  {line}");
        }
        println!("  ...");
        for line in lines.iter().rev().take(2).rev() {
            println!("  {line}");
        }
    }
    Ok(())
}
