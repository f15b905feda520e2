//! Mollified products: (f·g) * φ_ε converges to f·g as ε shrinks, at
//! first order in ε for Lipschitz products.
//!
//!     cargo run --release --example product_convergence

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schrodinger_hardy::bumps::RadialProfile;
use schrodinger_hardy::family::{sample_smooth, smooth_pair_spec};
use schrodinger_hardy::grid::Grid;
use schrodinger_hardy::product::convergence_study;

fn main() -> schrodinger_hardy::Result<()> {
    let grid = Grid::new(2, 2.0, 129)?;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let spec = smooth_pair_spec(&mut rng, 2, 2.0);
    let f = sample_smooth(&spec.bumps_f, grid);
    let g = sample_smooth(&spec.bumps_g, grid);

    let study = convergence_study(&f, &g, &RadialProfile::standard_bump())?;
    println!("Lipschitz constant of f*g: {:.4}", study.lipschitz);
    println!("{:>10} {:>14} {:>14} {:>12}", "eps", "max error", "L1 error", "err/(L*eps)");
    for (eps, linf, l1) in &study.rows {
        println!(
            "{eps:>10.5} {linf:>14.3e} {l1:>14.3e} {:>12.4}",
            linf / (study.lipschitz * eps)
        );
    }
    Ok(())
}
