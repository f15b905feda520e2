//! Luxemburg gauges: the log-Orlicz, exponential-class, and weighted
//! Hardy–Orlicz norms, with the indicator closed form as a sanity check.
//!
//!     cargo run --release --example luxemburg_norms

use schrodinger_hardy::field::Field;
use schrodinger_hardy::grid::{Ball, Grid};
use schrodinger_hardy::norms::{norm_exp, norm_llog};
use schrodinger_hardy::orlicz::{
    luxemburg, orlicz_family, xi, xi_inverse, GrowthFunction, Weight,
};

fn main() -> schrodinger_hardy::Result<()> {
    println!("Xi(1) = {:.12}", xi(1.0));
    println!("Xi^-1(Xi(10)) = {:.10}", xi_inverse(xi(10.0)));

    let grid = Grid::new(2, 2.0, 41)?;

    // indicator closed form: lambda* = c / Xi^-1(1 / sigma(E))
    let ball = Ball::new([0.5, -0.2, 0.0], 0.7)?;
    let c = 2.0;
    let g = Field::from_fn(grid, |p| if ball.contains(p) { c } else { 0.0 });
    let w = Weight::Sigma;
    let we = g.map_integrate(|v, p| if v != 0.0 { w.eval(p) } else { 0.0 });
    let closed = c / xi_inverse(1.0 / we);
    let solved = luxemburg(&g, orlicz_family(GrowthFunction::Xi), &w)?;
    println!(
        "indicator gauge: solver {:.10} vs closed form {:.10} ({} iters, residual {:.1e})",
        solved.lambda_star, closed, solved.iters, solved.residual
    );

    // log-Orlicz and exponential-class norms of a spiky field
    let spike = Field::from_fn(grid, |p| {
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt().max(grid.spacing() / 2.0);
        (1.0 / r).ln().max(0.0)
    });
    let llog = norm_llog(&spike)?;
    let exp = norm_exp(&spike)?;
    println!("log spike: ||.||_Llog = {:.5}, ||.||_Exp = {:.5}", llog.lambda_star, exp.lambda_star);
    println!("           ||.||_L1   = {:.5}", spike.norm_l1());
    Ok(())
}
