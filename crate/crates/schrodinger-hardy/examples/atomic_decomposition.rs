//! Constructive atomic decomposition: split a field through the
//! partition, atomize every localized piece, and validate the atoms.
//!
//!     cargo run --release --example atomic_decomposition

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schrodinger_hardy::atoms::{atomize_global, validate_atom};
use schrodinger_hardy::cover::{build_cover, build_partition};
use schrodinger_hardy::family::{atom_sum_spec, sample_atom_sum};
use schrodinger_hardy::grid::Grid;
use schrodinger_hardy::potential::Potential;
use schrodinger_hardy::rho::CriticalRadiusProfile;

fn main() -> schrodinger_hardy::Result<()> {
    let grid = Grid::new(2, 2.0, 33)?;
    let v = Potential::constant(grid, 1.0)?;
    let profile = CriticalRadiusProfile::compute(&v, 200, 3)?;
    let pou = build_partition(&build_cover(&profile)?)?;

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let spec = atom_sum_spec(&mut rng, 2, 2.0);
    let f = sample_atom_sum(&spec, grid, 2.0);
    println!("input: {} atom terms, ||f||_1 = {:.5}", spec.terms.len(), f.norm_l1());

    let (dec, labels) = atomize_global(&f, &pou, &profile, 2.0)?;
    let valid = dec
        .terms
        .iter()
        .filter(|(_, a)| validate_atom(a, &profile).ok())
        .count();
    println!(
        "decomposition: {} atoms ({} valid), sum |lambda| = {:.5}, residual {:.2e}",
        dec.terms.len(),
        valid,
        dec.coefficient_sum,
        dec.reconstruction_residual
    );

    let recon = dec.reconstruct(grid);
    println!(
        "reconstruction: ||f - sum lambda_j a_j||_1 / ||f||_1 = {:.2e}",
        recon.sub(&f)?.norm_l1() / f.norm_l1()
    );

    // a peek at the manifest rows
    let mut buf = Vec::new();
    dec.write_manifest(grid, Some(&labels), &mut buf)?;
    let text = String::from_utf8_lossy(&buf);
    for line in text.lines().take(6) {
        println!("  {line}");
    }
    println!("  ... ({} rows total)", dec.terms.len());
    Ok(())
}
