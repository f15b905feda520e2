//! Growth functions, weights, and the Luxemburg gauge solver.
//!
//! A growth function is an Orlicz function of lower type p ≤ 1 and upper
//! type 1; the key example is Xi(t) = t / log(e + t). The Luxemburg norm
//! of g against an integrand family phi_lambda and weight w is
//!
//! ```text
//! inf{ lambda > 0 : integral phi_lambda(x, g(x)) w(x) dx <= 1 }
//! ```
//!
//! computed by bracketing and bisection on the nonincreasing functional.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Ball, Grid, Point};

/// Xi(t) = t / log(e + t).
pub fn xi(t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t == 0.0 {
        0.0
    } else {
        t / (std::f64::consts::E + t).ln()
    }
}

/// Inverse of Xi by bisection to relative tolerance 1e-10.
pub fn xi_inverse(s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    if s == 0.0 {
        return 0.0;
    }
    // Xi(t) <= t, so t = s brackets from below; double for the upper end
    let mut lo = s;
    let mut hi = s.max(1.0);
    let mut guard = 0;
    while xi(hi) < s && guard < 4096 {
        hi *= 2.0;
        guard += 1;
    }
    if xi(lo) > s {
        lo = 0.0;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-10 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if xi(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// An Orlicz growth function with a declared lower type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthFunction {
    /// Xi(t) = t/log(e+t); lower type p for every p in (0,1), upper type 1.
    Xi,
    /// Phi(t) = t; the linear case.
    Identity,
}

impl GrowthFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            GrowthFunction::Xi => xi(t),
            GrowthFunction::Identity => t,
        }
    }

    pub fn inverse(&self, s: f64) -> f64 {
        match self {
            GrowthFunction::Xi => xi_inverse(s),
            GrowthFunction::Identity => s,
        }
    }

    /// Declared lower type used in reports.
    pub fn lower_type(&self) -> f64 {
        match self {
            GrowthFunction::Xi => 0.9,
            GrowthFunction::Identity => 1.0,
        }
    }
}

/// Pointwise weights w(x) > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Unit,
    /// sigma(x) = 1 / log(e + |x|).
    Sigma,
    /// (1 + |x|)^{-power}; the exponential-class norm uses power = 2d.
    PolyDecay { power: f64 },
    /// |x|; not locally bounded away from zero, used as the canonical
    /// non-A1 example.
    AbsRadius,
}

impl Weight {
    pub fn poly_decay(dim: usize) -> Weight {
        Weight::PolyDecay {
            power: 2.0 * dim as f64,
        }
    }

    pub fn eval(&self, p: Point) -> f64 {
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        match self {
            Weight::Unit => 1.0,
            Weight::Sigma => 1.0 / (std::f64::consts::E + r).ln(),
            Weight::PolyDecay { power } => (1.0 + r).powf(-power),
            Weight::AbsRadius => r,
        }
    }

    /// Weighted measure of a ball: h^d sum of w over grid points inside.
    pub fn ball_measure(&self, grid: Grid, ball: &Ball) -> f64 {
        grid.indices_in_ball(ball)
            .iter()
            .map(|&i| self.eval(grid.point(i)))
            .sum::<f64>()
            * grid.cell_volume()
    }

    /// Quadrature of w over the whole box (trapezoid weights).
    pub fn box_measure(&self, grid: Grid) -> f64 {
        Field::from_fn(grid, |p| self.eval(p)).integrate()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LuxemburgResult {
    pub lambda_star: f64,
    /// |functional(lambda_star) - 1|; zero for the degenerate zero input.
    pub residual: f64,
    pub iters: u32,
}

/// Default cap on the gauge bracket; beyond it the norm is declared to
/// overflow.
pub const DEFAULT_LAMBDA_CAP: f64 = 1e12;
/// Default relative tolerance of the gauge bisection.
pub const DEFAULT_GAUGE_TOL: f64 = 1e-8;

/// Scalar gauge solve: the infimum lambda with F(lambda) <= 1 for a
/// nonincreasing functional F, by doubling/halving bracket and bisection.
pub fn gauge_infimum(f: impl Fn(f64) -> f64) -> Result<LuxemburgResult> {
    gauge_infimum_with(f, DEFAULT_LAMBDA_CAP, DEFAULT_GAUGE_TOL)
}

pub fn gauge_infimum_with(
    f: impl Fn(f64) -> f64,
    lambda_cap: f64,
    rel_tol: f64,
) -> Result<LuxemburgResult> {
    // monotonicity spot check across three decades
    let probes = [1e-4, 1.0, 1e4];
    for w in probes.windows(2) {
        let (a, b) = (f(w[0]), f(w[1]));
        if a < b - 1e-9 * b.abs().max(1.0) {
            return Err(Error::InvalidIntegrand);
        }
    }
    let mut iters = 0u32;
    let mut hi = 1.0f64;
    let mut guard = 0;
    while f(hi) > 1.0 {
        hi *= 2.0;
        guard += 1;
        if hi > lambda_cap {
            return Err(Error::NormOverflow);
        }
        if guard > 200 {
            return Err(Error::NormOverflow);
        }
    }
    let mut lo = hi;
    guard = 0;
    while f(lo) <= 1.0 {
        lo /= 2.0;
        guard += 1;
        if lo < 1e-200 || guard > 800 {
            // functional never exceeds one: the infimum is zero
            return Ok(LuxemburgResult {
                lambda_star: 0.0,
                residual: 0.0,
                iters,
            });
        }
    }
    // stop at half the tolerance so the returned endpoint is within
    // rel_tol of the crossing, not just the bracket width
    while hi - lo > 0.5 * rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
        if iters > 400 {
            break;
        }
    }
    Ok(LuxemburgResult {
        lambda_star: hi,
        residual: (f(hi) - 1.0).abs(),
        iters,
    })
}

/// Luxemburg solve over a sampled field: integrand family
/// (lambda, x, g(x)) -> phi_lambda(x), weight w, trapezoid quadrature.
///
/// The field must be nonnegative; the map lambda -> functional must be
/// nonincreasing (spot-checked; violations error as invalid integrand).
pub fn luxemburg(
    g: &Field,
    family: impl Fn(f64, Point, f64) -> f64,
    w: &Weight,
) -> Result<LuxemburgResult> {
    luxemburg_with(g, family, w, DEFAULT_LAMBDA_CAP, DEFAULT_GAUGE_TOL)
}

pub fn luxemburg_with(
    g: &Field,
    family: impl Fn(f64, Point, f64) -> f64,
    w: &Weight,
    lambda_cap: f64,
    rel_tol: f64,
) -> Result<LuxemburgResult> {
    if g.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument(
            "luxemburg input must be nonnegative".into(),
        ));
    }
    if g.values().iter().all(|&v| v == 0.0) {
        return Ok(LuxemburgResult {
            lambda_star: 0.0,
            residual: 0.0,
            iters: 0,
        });
    }
    let functional =
        |lambda: f64| -> f64 { g.map_integrate(|v, p| family(lambda, p, v) * w.eval(p)) };
    gauge_infimum_with(functional, lambda_cap, rel_tol)
}

/// Family for a weighted Orlicz gauge: Phi(v / lambda).
pub fn orlicz_family(phi: GrowthFunction) -> impl Fn(f64, Point, f64) -> f64 {
    move |lambda, _p, v| phi.eval(v / lambda)
}

/// Family for log-type gauges: (v/λ) / (log(e + v/λ) + log(e + |x|)).
pub fn log_family() -> impl Fn(f64, Point, f64) -> f64 {
    |lambda, p, v| {
        let s = v / lambda;
        if s == 0.0 {
            return 0.0;
        }
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        s / ((std::f64::consts::E + s).ln() + (std::f64::consts::E + r).ln())
    }
}

/// Family for the exponential-class gauge: e^{v/λ} - 1, saturating to
/// +inf above exponent 500 to dodge overflow (the functional is then
/// certainly above one).
pub fn exp_family() -> impl Fn(f64, Point, f64) -> f64 {
    |lambda, _p, v| {
        let s = v / lambda;
        if s > 500.0 {
            f64::INFINITY
        } else {
            s.exp_m1()
        }
    }
}

/// Empirical growth-type constants of Phi over a log-spaced sample:
/// smallest C with Phi(st) <= C s^p Phi(t) for s in (0,1], and with
/// Phi(st) <= C s Phi(t) for s >= 1.
#[derive(Debug, Clone, Copy)]
pub struct GrowthTypeReport {
    pub p: f64,
    pub lower_c: f64,
    pub upper_c: f64,
}

pub fn growth_type_check(phi: GrowthFunction, p: f64, samples_per_axis: usize) -> GrowthTypeReport {
    let n = samples_per_axis.max(4);
    let mut lower_c: f64 = 0.0;
    let mut upper_c: f64 = 0.0;
    for i in 0..n {
        // s in [1e-6, 1] and [1, 1e6] log-spaced
        let frac = i as f64 / (n - 1) as f64;
        let s_lo = (10f64).powf(-6.0 * (1.0 - frac));
        let s_hi = (10f64).powf(6.0 * frac);
        for j in 0..n {
            let t = (10f64).powf(-4.0 + 10.0 * j as f64 / (n - 1) as f64);
            let base = phi.eval(t);
            if base > 0.0 {
                lower_c = lower_c.max(phi.eval(s_lo * t) / (s_lo.powf(p) * base));
                upper_c = upper_c.max(phi.eval(s_hi * t) / (s_hi * base));
            }
        }
    }
    GrowthTypeReport { p, lower_c, upper_c }
}

/// Worst ratio Phi(sum t_j) / sum Phi(t_j) over random nonnegative
/// sequences; for subadditive growth functions this stays near one.
pub fn subadditivity_check(phi: GrowthFunction, trials: usize, seed: u64) -> f64 {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let len = rng.gen_range(2..=24);
        let terms: Vec<f64> = (0..len)
            .map(|_| (10f64).powf(rng.gen_range(-3.0..3.0)))
            .collect();
        let total: f64 = terms.iter().sum();
        let sum_phi: f64 = terms.iter().map(|&t| phi.eval(t)).sum();
        if sum_phi > 0.0 {
            worst = worst.max(phi.eval(total) / sum_phi);
        }
    }
    worst
}

/// The bracketed Muckenhoupt product of a weight over one ball:
/// avg_B w * (avg_B w^{-1/(q-1)})^{q-1}, q > 1.
pub fn muckenhoupt_ratio(w: &Weight, q: f64, grid: Grid, ball: &Ball) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("need q > 1, got {q}")));
    }
    let idxs = grid.indices_in_ball(ball);
    if idxs.is_empty() {
        return Err(Error::DegenerateBall);
    }
    let n = idxs.len() as f64;
    let mean: f64 = idxs.iter().map(|&i| w.eval(grid.point(i))).sum::<f64>() / n;
    let dual: f64 = idxs
        .iter()
        .map(|&i| w.eval(grid.point(i)).powf(-1.0 / (q - 1.0)))
        .sum::<f64>()
        / n;
    Ok(mean * dual.powf(q - 1.0))
}

/// The A1 ratio avg_B w / min_B w; +inf when the weight vanishes on the
/// ball, which flags non-A1 behavior.
pub fn a1_ratio(w: &Weight, grid: Grid, ball: &Ball) -> Result<f64> {
    let idxs = grid.indices_in_ball(ball);
    if idxs.is_empty() {
        return Err(Error::DegenerateBall);
    }
    let n = idxs.len() as f64;
    let mean: f64 = idxs.iter().map(|&i| w.eval(grid.point(i))).sum::<f64>() / n;
    let inf = idxs
        .iter()
        .map(|&i| w.eval(grid.point(i)))
        .fold(f64::MAX, f64::min);
    if inf <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(mean / inf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn xi_values() {
        assert_eq!(xi(0.0), 0.0);
        // Xi(1) = 1/log(e+1); cross-checked against an independent
        // high-precision evaluation of log(e+1) = 1.3132616875182228...
        let want = 1.0 / 1.313_261_687_518_222_8;
        assert!((xi(1.0) - want).abs() < 1e-14, "xi(1) = {}", xi(1.0));
        assert!((xi(1.0) - 0.761_462_859_614_66).abs() < 1e-12);
    }

    #[test]
    fn xi_inverse_roundtrip() {
        for t in [0.1, 1.0, 10.0, 1000.0] {
            let s = xi(t);
            let back = xi_inverse(s);
            assert!((back - t).abs() < 1e-8 * t.max(1.0), "t={t} back={back}");
        }
        assert_eq!(xi_inverse(0.0), 0.0);
    }

    #[test]
    fn xi_over_t_nonincreasing() {
        let mut prev = f64::MAX;
        for k in 1..400 {
            let t = 0.05 * k as f64;
            let v = xi(t) / t;
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn growth_types_of_xi() {
        // upper type 1 holds with constant 1; lower type p < 1 holds with
        // a finite constant that grows as p -> 1
        for p in [0.5, 0.9, 13.0 / 14.0] {
            let rep = growth_type_check(GrowthFunction::Xi, p, 48);
            assert!(rep.upper_c <= 1.0 + 1e-12, "upper {}", rep.upper_c);
            assert!(rep.lower_c.is_finite() && rep.lower_c >= 1.0);
            assert!(rep.lower_c < 50.0, "lower {} at p={p}", rep.lower_c);
        }
    }

    #[test]
    fn xi_subadditive_with_constant_one() {
        let worst = subadditivity_check(GrowthFunction::Xi, 500, 42);
        assert!(worst <= 1.0 + 1e-12, "worst {worst}");
    }

    #[test]
    fn luxemburg_zero_input() {
        let grid = Grid::new(1, 1.0, 33).unwrap();
        let g = Field::zeros(grid);
        let r = luxemburg(&g, orlicz_family(GrowthFunction::Xi), &Weight::Sigma).unwrap();
        assert_eq!(r.lambda_star, 0.0);
    }

    #[test]
    fn luxemburg_indicator_closed_form() {
        // g = c 1_E, Phi = Xi, weight w: lambda* = c / Xi^{-1}(1/w(E))
        let grid = Grid::new(2, 2.0, 41).unwrap();
        let ball = Ball::new([0.4, -0.3, 0.0], 0.8).unwrap();
        let c = 3.7;
        let g = Field::from_fn(grid, |p| if ball.contains(p) { c } else { 0.0 });
        let w = Weight::Sigma;
        // w(E) with the same trapezoid quadrature the solver uses
        let we = g.map_integrate(|v, p| if v != 0.0 { w.eval(p) } else { 0.0 });
        let want = c / xi_inverse(1.0 / we);
        let got = luxemburg(&g, orlicz_family(GrowthFunction::Xi), &w).unwrap();
        assert!(
            (got.lambda_star - want).abs() < 1e-7 * want,
            "got {} want {}",
            got.lambda_star,
            want
        );
        assert!(got.residual < 1e-6);
    }

    #[test]
    fn luxemburg_homogeneous_families() {
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let g = Field::from_fn(grid, |p| (1.0 - p[0].abs()).max(0.0) * 2.0);
        let alpha = 3.25;
        let l1 = luxemburg(&g, log_family(), &Weight::Unit).unwrap();
        let l2 = luxemburg(&g.scale(alpha), log_family(), &Weight::Unit).unwrap();
        assert!(
            (l2.lambda_star - alpha * l1.lambda_star).abs() < 1e-7 * l2.lambda_star,
            "log family: {} vs {}",
            l2.lambda_star,
            alpha * l1.lambda_star
        );
        let x1 = luxemburg(&g, orlicz_family(GrowthFunction::Xi), &Weight::Sigma).unwrap();
        let x2 = luxemburg(
            &g.scale(alpha),
            orlicz_family(GrowthFunction::Xi),
            &Weight::Sigma,
        )
        .unwrap();
        assert!((x2.lambda_star - alpha * x1.lambda_star).abs() < 1e-7 * x2.lambda_star);
    }

    #[test]
    fn luxemburg_rejects_bad_inputs() {
        let grid = Grid::new(1, 1.0, 17).unwrap();
        let neg = Field::constant(grid, -1.0);
        assert!(luxemburg(&neg, orlicz_family(GrowthFunction::Xi), &Weight::Unit).is_err());

        // an increasing-in-lambda integrand is invalid
        let g = Field::constant(grid, 1.0);
        let bad = |lambda: f64, _p: Point, v: f64| v * lambda / (1.0 + lambda);
        assert!(matches!(
            luxemburg(&g, bad, &Weight::Unit),
            Err(Error::InvalidIntegrand)
        ));
    }

    #[test]
    fn luxemburg_overflow() {
        let grid = Grid::new(1, 1.0, 17).unwrap();
        let g = Field::constant(grid, 1.0);
        // functional pinned above one for every lambda
        let stuck = |_lambda: f64, _p: Point, _v: f64| 2.0;
        assert!(matches!(
            luxemburg(&g, stuck, &Weight::Unit),
            Err(Error::NormOverflow)
        ));
    }

    #[test]
    fn exp_family_guard() {
        let f = exp_family();
        assert!(f(1.0, [0.0; 3], 600.0).is_infinite());
        assert!((f(1.0, [0.0; 3], 1.0) - std::f64::consts::E + 1.0).abs() < 1e-12);
    }

    #[test]
    fn muckenhoupt_constant_weight() {
        let grid = Grid::new(2, 1.0, 33).unwrap();
        let b = Ball::new([0.2, 0.1, 0.0], 0.5).unwrap();
        let m = muckenhoupt_ratio(&Weight::Unit, 2.0, grid, &b).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        let a = a1_ratio(&Weight::Unit, grid, &b).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_is_a1_stable_under_refinement() {
        let sup_a1 = |m: usize| {
            let grid = Grid::new(2, 2.0, m).unwrap();
            let mut sup: f64 = 0.0;
            for ci in (0..m).step_by(4) {
                for cj in (0..m).step_by(4) {
                    let c = grid.point(grid.flat_index([ci, cj, 0]));
                    for r in [0.25, 0.5, 1.0] {
                        let b = Ball { center: c, radius: r };
                        if let Ok(v) = a1_ratio(&Weight::Sigma, grid, &b) {
                            sup = sup.max(v);
                        }
                    }
                }
            }
            sup
        };
        let coarse = sup_a1(33);
        let fine = sup_a1(49);
        assert!(coarse.is_finite() && fine.is_finite());
        assert!((fine / coarse - 1.0).abs() < 0.1, "{coarse} vs {fine}");
    }

    #[test]
    fn sigma_doubling_uniform() {
        // A1 weights are doubling: sigma(2B) <= C sigma(B) with one C
        // across sampled balls, stable under refinement
        let doubling_sup = |m: usize| {
            let grid = Grid::new(2, 2.0, m).unwrap();
            let mut sup: f64 = 0.0;
            for ci in (0..m).step_by(4) {
                for cj in (0..m).step_by(4) {
                    let c = grid.point(grid.flat_index([ci, cj, 0]));
                    for r in [0.2, 0.4, 0.8] {
                        let b = Ball { center: c, radius: r };
                        let b2 = Ball { center: c, radius: 2.0 * r };
                        let s1 = Weight::Sigma.ball_measure(grid, &b);
                        let s2 = Weight::Sigma.ball_measure(grid, &b2);
                        if s1 > 0.0 {
                            sup = sup.max(s2 / s1);
                        }
                    }
                }
            }
            sup
        };
        let coarse = doubling_sup(33);
        let fine = doubling_sup(49);
        assert!(coarse < 6.0, "doubling constant {coarse}");
        assert!((fine / coarse - 1.0).abs() < 0.15, "{coarse} vs {fine}");
    }

    #[test]
    fn abs_weight_fails_a1_at_origin() {
        let grid = Grid::new(1, 1.0, 41).unwrap();
        let b = Ball::new([0.0; 3], 0.9).unwrap();
        let a = a1_ratio(&Weight::AbsRadius, grid, &b).unwrap();
        assert!(a.is_infinite());
    }

    #[test]
    fn degenerate_ball_errors() {
        let grid = Grid::new(1, 1.0, 5).unwrap();
        let b = Ball::new([0.26, 0.0, 0.0], 0.2).unwrap();
        assert!(matches!(
            muckenhoupt_ratio(&Weight::Unit, 2.0, grid, &b),
            Err(Error::DegenerateBall)
        ));
    }
}
