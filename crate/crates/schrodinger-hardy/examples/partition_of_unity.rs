//! Layer-adapted ball covers and the subordinate partition of unity for
//! a potential with two dyadic layers.
//!
//!     cargo run --release --example partition_of_unity

use schrodinger_hardy::cover::{build_cover, build_partition};
use schrodinger_hardy::grid::Grid;
use schrodinger_hardy::potential::Potential;
use schrodinger_hardy::rho::CriticalRadiusProfile;

fn main() -> schrodinger_hardy::Result<()> {
    let grid = Grid::new(2, 2.0, 33)?;
    let v = Potential::two_level_split(grid, 1.6, 3.6)?;
    let profile = CriticalRadiusProfile::compute(&v, 200, 7)?;
    println!("layers present: {:?}", profile.layers_present());

    let cover = build_cover(&profile)?;
    println!(
        "cover: {} balls, coverage {:.1}%",
        cover.entries().len(),
        100.0 * cover.coverage_fraction(&profile)
    );
    for inflation in [2.0, 4.0, 8.0] {
        println!(
            "  max overlap at inflation {inflation}: {}",
            cover.max_overlap(inflation)
        );
    }
    println!("  fitted overlap exponent: {:.2}", cover.overlap_exponent());

    let pou = build_partition(&cover)?;
    let sum = pou.weight_sum();
    let dev = sum
        .values()
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0f64, f64::max);
    println!("partition: {} weights, max |sum - 1| = {dev:.2e}", pou.entries.len());
    for (layer, sup) in pou.layer_gradient_sups() {
        println!("  layer {layer}: sup |grad psi| * 2^(-n/2) = {sup:.4}");
    }
    Ok(())
}
