//! Splitting a product f·g into an integrable part and a rough part
//! with a log-Orlicz bound, with the certified norm ratio.
//!
//!     cargo run --release --example bilinear_split

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use schrodinger_hardy::bumps::RadialProfile;
use schrodinger_hardy::cover::{build_cover, build_partition};
use schrodinger_hardy::family::{atom_sum_spec, bmo_spec, sample_atom_sum, sample_bmo};
use schrodinger_hardy::grid::Grid;
use schrodinger_hardy::norms::BallSampling;
use schrodinger_hardy::potential::Potential;
use schrodinger_hardy::product::{bilinear_decompose, product_pairing, ProductContext};
use schrodinger_hardy::rho::CriticalRadiusProfile;
use schrodinger_hardy::semigroup::{dyadic_heat_times, DiscreteOperator, Propagator};

fn main() -> schrodinger_hardy::Result<()> {
    let grid = Grid::new(2, 2.0, 33)?;
    let v = Potential::constant(grid, 1.0)?;
    let profile = CriticalRadiusProfile::compute(&v, 200, 3)?;
    let pou = build_partition(&build_cover(&profile)?)?;
    let prop = Propagator::auto(DiscreteOperator::assemble(&v))?;
    let times = dyadic_heat_times(grid);
    let ctx = ProductContext {
        pou: &pou,
        profile: &profile,
        prop: &prop,
        times: &times,
        mollifier: RadialProfile::standard_bump(),
        sampling: BallSampling::standard(grid),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let f = sample_atom_sum(&atom_sum_spec(&mut rng, 2, 2.0), grid, 2.0);
    let g = sample_bmo(&bmo_spec(&mut rng, 2, 2.0), grid);

    let rep = bilinear_decompose(&ctx, &f, &g)?;
    println!("||f||_H1L = {:.5}   ||g||_BMOL = {:.5}", rep.f_h1l, rep.g_bmol);
    println!("smooth part: ||.||_1 = {:.5}, ||.||_H1L = {:.5}", rep.smooth_l1, rep.smooth_h1l);
    println!("rough part:  ||.||_Llog = {:.5}", rep.rough_llog);
    println!("bound ratio (||s||_1 + ||r||_Llog) / (||f|| ||g||) = {:.4}", rep.bound_ratio);

    // the split rebuilds the product exactly
    let fg = f.mul(&g)?;
    let err = rep.smooth_part.add(&rep.rough_part)?.sub(&fg)?.norm_linf();
    println!("splitting exactness: {err:.2e} (sup norm)");

    // pairing against a test function agrees with the split pairing
    let test = schrodinger_hardy::field::Field::from_fn(grid, |p| {
        (-3.0 * (p[0] * p[0] + p[1] * p[1])).exp()
    });
    let total = product_pairing(&f, &g, &test)?;
    let parts = rep.smooth_part.mul(&test)?.integrate() + rep.rough_part.mul(&test)?.integrate();
    println!("pairing identity: {total:.8} vs {parts:.8}");
    Ok(())
}
