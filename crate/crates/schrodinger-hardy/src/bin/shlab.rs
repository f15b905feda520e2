//! Batch experiment driver. Subcommands build potentials, compute
//! critical-radius maps and norms, run the product decomposition and
//! inequality sweeps, and emit CSV tables.
//!
//! Usage:
//!   shlab <subcommand> [positional args] [--config FILE] [--key value]...
//!
//! Subcommands: rho-map | norms | decompose | sweep <ID> |
//!              atoms-validate | product-convergence
//! Sweep ids: L3.1 L4.3 L4.5 L4.6 E4.3 P3.1 T3
//!
//! Config: flat key=value file; command-line --key value overrides win.
//! Keys: d, R, m, potential, q, seed, out_dir, cases, shen_pairs,
//! ball_stride, lambda_cap, gauge_tol. The SH_OUTPUT_DIR environment
//! variable sets the default output root.

use std::path::PathBuf;
use std::process::ExitCode;

use schrodinger_hardy::commands::run_command;
use schrodinger_hardy::config::ExperimentConfig;
use schrodinger_hardy::error::{Error, Result};

const USAGE: &str = "usage: shlab <rho-map|norms|decompose|sweep|atoms-validate|product-convergence> \
[args] [--config FILE] [--key value]...";

fn run(args: &[String]) -> Result<Vec<PathBuf>> {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        println!("{USAGE}");
        println!("sweep ids: L3.1 L4.3 L4.5 L4.6 E4.3 P3.1 T3");
        return Ok(Vec::new());
    }
    let sub = args[0].clone();
    let mut config_file: Option<PathBuf> = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut positional: Vec<String> = Vec::new();
    let mut i = 1;
    while i < args.len() {
        let tok = &args[i];
        if let Some(key) = tok.strip_prefix("--") {
            let value = args
                .get(i + 1)
                .ok_or_else(|| Error::Config(format!("flag --{key} needs a value")))?;
            if key == "config" {
                config_file = Some(PathBuf::from(value));
            } else {
                overrides.push((key.to_string(), value.clone()));
            }
            i += 2;
        } else {
            positional.push(tok.clone());
            i += 1;
        }
    }
    let mut cfg = match config_file {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    for (key, value) in &overrides {
        cfg.set(key, value)?;
    }
    run_command(&cfg, &sub, &positional)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            // one machine-readable error line on stderr
            eprintln!("error,{}", e.to_string().replace(',', ";"));
            ExitCode::FAILURE
        }
    }
}
