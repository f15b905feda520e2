//! The heat semigroup of L = -Δ + V: spectral and Lanczos propagators,
//! the semigroup law, and kernel domination by the free kernel.
//!
//!     cargo run --release --example heat_semigroup

use schrodinger_hardy::field::Field;
use schrodinger_hardy::grid::Grid;
use schrodinger_hardy::potential::Potential;
use schrodinger_hardy::semigroup::{
    gaussian_domination_check, DiscreteOperator, Propagator,
};

fn main() -> schrodinger_hardy::Result<()> {
    let grid = Grid::new(2, 2.0, 21)?;
    let v = Potential::bump_plus_constant(grid, 1.0, 2.0, 1.0)?;
    let spectral = Propagator::spectral(DiscreteOperator::assemble(&v))?;
    let lanczos = Propagator::lanczos(DiscreteOperator::assemble(&v));

    let f = Field::from_fn(grid, |p| (-4.0 * (p[0] * p[0] + p[1] * p[1])).exp());
    println!("input mass {:.6}", f.integrate());
    for t in [0.01, 0.1, 1.0] {
        let u = spectral.heat_apply(t, &f)?;
        let w = lanczos.heat_apply(t, &f)?;
        let agree = u.sub(&w)?.norm_linf();
        println!(
            "t = {t:5.2}: mass {:.6}, peak {:.6}, spectral-vs-lanczos {:.2e}",
            u.integrate(),
            u.norm_linf(),
            agree
        );
    }

    // semigroup law
    let two = spectral.heat_apply(0.3, &spectral.heat_apply(0.2, &f)?)?;
    let one = spectral.heat_apply(0.5, &f)?;
    println!(
        "semigroup law |T_.3 T_.2 f - T_.5 f| = {:.2e}",
        two.sub(&one)?.norm_linf()
    );

    // the potential only shrinks the kernel relative to the free one
    let report = gaussian_domination_check(&spectral, &[0.05, 0.2])?;
    for (t, min, free, gauss) in &report.rows {
        println!(
            "t = {t}: min kernel {min:+.2e}, vs free kernel {free:.6}, vs continuum gaussian {gauss:.3}"
        );
    }
    Ok(())
}
