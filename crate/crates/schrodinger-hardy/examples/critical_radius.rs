//! Critical radius of a potential: single-point solves, the full map
//! with its dyadic layers, and the empirical growth constants.
//!
//!     cargo run --release --example critical_radius

use schrodinger_hardy::grid::Grid;
use schrodinger_hardy::potential::Potential;
use schrodinger_hardy::rho::{critical_radius, layer_index, CriticalRadiusProfile};

fn main() -> schrodinger_hardy::Result<()> {
    // closed-form check: V = 1 in d = 3 gives rho = sqrt(3 / 4 pi)
    let grid = Grid::new(3, 2.0, 49)?;
    let v = Potential::constant(grid, 1.0)?;
    let solve = critical_radius(&v, [0.0; 3])?;
    let exact = (3.0 / (4.0 * std::f64::consts::PI)).sqrt();
    println!(
        "V = 1, d = 3: rho(0) = {:.5}  (closed form {:.5}), layer n = {}",
        solve.rho,
        exact,
        layer_index(solve.rho)
    );

    // a potential whose local scale varies: V = |x|^2
    let v2 = Potential::power_law(grid, 2.0)?;
    for x in [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.5, 1.5, 0.0]] {
        let s = critical_radius(&v2, x)?;
        println!(
            "V = |x|^2: rho({:4.1},{:4.1},{:4.1}) = {:.4}, layer {}{}",
            x[0],
            x[1],
            x[2],
            s.rho,
            layer_index(s.rho),
            if s.clipped { " (boundary-clipped)" } else { "" }
        );
    }

    // full map on a coarser grid, with growth constants
    let grid2 = Grid::new(2, 2.0, 33)?;
    let v3 = Potential::power_law(grid2, 2.0)?;
    let profile = CriticalRadiusProfile::compute(&v3, 200, 1)?;
    println!(
        "map on d=2 m=33: layers {:?}, C0 = {}, k0 = {}, c_L = {:.1}",
        profile.layers_present(),
        profile.c0_hat(),
        profile.k0_hat(),
        profile.c_l()
    );
    Ok(())
}
