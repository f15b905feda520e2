//! The three maximal operators side by side: the semigroup maximal
//! function, the Hardy–Littlewood maximal function, and the grand
//! maximal function over the normalized test dictionary.
//!
//!     cargo run --release --example maximal_functions

use schrodinger_hardy::field::Field;
use schrodinger_hardy::grid::Grid;
use schrodinger_hardy::maximal::{
    grand_maximal, hardy_littlewood, maximal_heat, TestDictionary,
};
use schrodinger_hardy::potential::Potential;
use schrodinger_hardy::semigroup::{dyadic_heat_times, DiscreteOperator, Propagator};

fn main() -> schrodinger_hardy::Result<()> {
    let grid = Grid::new(2, 2.0, 33)?;
    let v = Potential::constant(grid, 1.0)?;
    let prop = Propagator::auto(DiscreteOperator::assemble(&v))?;
    let times = dyadic_heat_times(grid);
    println!(
        "dyadic times: {} values in [{:.2e}, {:.1}]",
        times.len(),
        times[0],
        times[times.len() - 1]
    );

    // a cancellative two-bump input
    let f = Field::from_fn(grid, |p| {
        let b = |cx: f64, cy: f64| {
            let r2 = (p[0] - cx).powi(2) + (p[1] - cy).powi(2);
            (-12.0 * r2).exp()
        };
        b(0.5, 0.0) - b(-0.5, 0.0)
    });

    let ml = maximal_heat(&prop, &f, &times)?;
    let hl = hardy_littlewood(&f);
    let dict = TestDictionary::standard(grid);
    println!(
        "dictionary: {} members, {} scales, envelope bound holds: {}",
        dict.members.len(),
        dict.scales.len(),
        dict.envelope_holds_on_grid(grid)
    );
    let gm = grand_maximal(&f, &dict)?;

    println!("||f||_1            = {:.5}", f.norm_l1());
    println!("||M_L f||_1        = {:.5}   (the adapted Hardy norm)", ml.integrate());
    println!("||M_HL f||_1       = {:.5}", hl.integrate());
    println!("||grand max f||_1  = {:.5}", gm.integrate());

    // the semigroup maximal function sits below a multiple of the
    // Hardy-Littlewood one; report the empirical constant
    let mut c: f64 = 0.0;
    for i in 0..grid.len() {
        if hl.values()[i] > 1e-12 {
            c = c.max(ml.values()[i] / hl.values()[i]);
        }
    }
    println!("pointwise M_L <= C * M_HL with empirical C = {c:.3}");
    Ok(())
}
