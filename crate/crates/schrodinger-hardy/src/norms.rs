//! Space norms built from maximal functions and Orlicz gauges, mean
//! oscillation over sampled balls, and the atom-level inequality ratios.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{dist, Ball, Grid};
use crate::maximal::{grand_maximal, maximal_gauss_local, maximal_heat, TestDictionary};
use crate::orlicz::{
    gauge_infimum, log_family, luxemburg, orlicz_family, xi, xi_inverse, GrowthFunction,
    LuxemburgResult, Weight,
};
use crate::rho::CriticalRadiusProfile;
use crate::semigroup::Propagator;

/// Ball sampling for oscillation-type sups: centers on a stride
/// sublattice, dyadic radii in [2h, R].
#[derive(Debug, Clone)]
pub struct BallSampling {
    pub stride: usize,
    pub radii: Vec<f64>,
}

impl BallSampling {
    pub fn standard(grid: Grid) -> BallSampling {
        Self::with_stride(grid, 4)
    }

    pub fn with_stride(grid: Grid, stride: usize) -> BallSampling {
        let h = grid.spacing();
        let mut radii = Vec::new();
        let mut r = 2.0 * h;
        while r <= grid.half_width() * (1.0 + 1e-12) {
            radii.push(r);
            r *= 2.0;
        }
        if radii.is_empty() {
            radii.push(2.0 * h);
        }
        BallSampling { stride, radii }
    }

    pub fn centers(&self, grid: Grid) -> Vec<usize> {
        let m = grid.points_per_axis();
        let axis: Vec<usize> = (0..m).step_by(self.stride.max(1)).collect();
        let mut out = Vec::new();
        match grid.dim() {
            1 => {
                for &i in &axis {
                    out.push(grid.flat_index([i, 0, 0]));
                }
            }
            2 => {
                for &i in &axis {
                    for &j in &axis {
                        out.push(grid.flat_index([i, j, 0]));
                    }
                }
            }
            _ => {
                for &i in &axis {
                    for &j in &axis {
                        for &k in &axis {
                            out.push(grid.flat_index([i, j, k]));
                        }
                    }
                }
            }
        }
        out
    }
}

/// ‖f‖ in the heat-maximal Hardy sense: the L¹ norm of M_L f.
pub fn norm_h1l(prop: &Propagator, f: &Field, ts: &[f64]) -> Result<f64> {
    Ok(maximal_heat(prop, f, ts)?.integrate())
}

/// Local Hardy norm at layer n: the L¹ norm of the truncated Gaussian
/// maximal function.
pub fn norm_h1n(f: &Field, n: i32) -> Result<f64> {
    Ok(maximal_gauss_local(f, n)?.integrate())
}

fn oscillation_sweep(
    f: &Field,
    sampling: &BallSampling,
    mut on_ball: impl FnMut(usize, f64, &[usize]),
) {
    let grid = f.grid();
    for &r in &sampling.radii {
        for &c in &sampling.centers(grid) {
            let ball = Ball {
                center: grid.point(c),
                radius: r,
            };
            let idxs = grid.indices_in_ball(&ball);
            if !idxs.is_empty() {
                on_ball(c, r, &idxs);
            }
        }
    }
}

/// Mean-oscillation norm: sup over sampled balls of avg_B |f - f_B|.
pub fn norm_bmo(f: &Field, sampling: &BallSampling) -> f64 {
    let vals = f.values();
    let mut sup: f64 = 0.0;
    oscillation_sweep(f, sampling, |_c, _r, idxs| {
        let n = idxs.len() as f64;
        let mean: f64 = idxs.iter().map(|&i| vals[i]).sum::<f64>() / n;
        let osc: f64 = idxs.iter().map(|&i| (vals[i] - mean).abs()).sum::<f64>() / n;
        sup = sup.max(osc);
    });
    sup
}

/// The adapted oscillation norm: plain BMO plus the sup of avg_B |f| over
/// sampled balls whose radius reaches the critical radius of the center.
pub fn norm_bmo_l(f: &Field, profile: &CriticalRadiusProfile, sampling: &BallSampling) -> f64 {
    let vals = f.values();
    let rho = profile.rho().values();
    let mut osc_sup: f64 = 0.0;
    let mut avg_sup: f64 = 0.0;
    oscillation_sweep(f, sampling, |c, r, idxs| {
        let n = idxs.len() as f64;
        let mean: f64 = idxs.iter().map(|&i| vals[i]).sum::<f64>() / n;
        let osc: f64 = idxs.iter().map(|&i| (vals[i] - mean).abs()).sum::<f64>() / n;
        osc_sup = osc_sup.max(osc);
        if r >= rho[c] {
            let avg_abs: f64 = idxs.iter().map(|&i| vals[i].abs()).sum::<f64>() / n;
            avg_sup = avg_sup.max(avg_abs);
        }
    });
    osc_sup + avg_sup
}

/// Diagnostic variant: the adapted norm plus the magnitude of the mean
/// over the unit ball. Reported only; nothing downstream depends on it.
pub fn norm_bmo_l_plus(
    f: &Field,
    profile: &CriticalRadiusProfile,
    sampling: &BallSampling,
) -> Result<f64> {
    let unit = Ball {
        center: [0.0; 3],
        radius: 1.0,
    };
    Ok(norm_bmo_l(f, profile, sampling) + f.ball_average(&unit)?.abs())
}

/// The log-Orlicz norm of a function (no maximal operator):
/// inf{λ : ∫ (|f|/λ) / (log(e + |f|/λ) + log(e + |x|)) dx ≤ 1}.
pub fn norm_llog(f: &Field) -> Result<LuxemburgResult> {
    luxemburg(&f.abs(), log_family(), &Weight::Unit)
}

/// The exponential-class norm with weight (1 + |x|)^{-2d}.
pub fn norm_exp(f: &Field) -> Result<LuxemburgResult> {
    let w = Weight::poly_decay(f.grid().dim());
    luxemburg(&f.abs(), crate::orlicz::exp_family(), &w)
}

/// Hardy-type log norm: the log gauge of the grand maximal function.
pub fn norm_hlog(f: &Field, dict: &TestDictionary) -> Result<LuxemburgResult> {
    let gm = grand_maximal(f, dict)?;
    luxemburg(&gm, log_family(), &Weight::Unit)
}

/// Weighted Hardy–Orlicz norm of the grand maximal function: Xi gauge
/// against the log-distance weight.
pub fn norm_hxi_sigma(f: &Field, dict: &TestDictionary) -> Result<LuxemburgResult> {
    let gm = grand_maximal(f, dict)?;
    luxemburg(&gm, orlicz_family(GrowthFunction::Xi), &Weight::Sigma)
}

/// Weighted Hardy–Orlicz norm of the heat maximal function.
pub fn norm_hxil_sigma(prop: &Propagator, f: &Field, ts: &[f64]) -> Result<LuxemburgResult> {
    let ml = maximal_heat(prop, f, ts)?;
    luxemburg(&ml, orlicz_family(GrowthFunction::Xi), &Weight::Sigma)
}

/// sigma-measure of a ball (h^d sum over inside grid points).
pub fn sigma_ball(grid: Grid, ball: &Ball) -> f64 {
    Weight::Sigma.ball_measure(grid, ball)
}

/// Weighted Lq norm (∫ |f|^q sigma dx)^{1/q} with trapezoid quadrature.
pub fn norm_lq_sigma(f: &Field, q: f64) -> f64 {
    f.map_integrate(|v, p| v.abs().powf(q) * Weight::Sigma.eval(p))
        .powf(1.0 / q)
}

/// Validation report for an atom of the weighted Hardy–Orlicz space:
/// support inside the ball, the sigma-weighted size bound
/// ‖a‖_{L^q_σ} ≤ σ(B)^{1/q} Ξ^{-1}(σ(B)^{-1}), and zero mean.
#[derive(Debug, Clone, Copy)]
pub struct HxiAtomCheck {
    pub support_ok: bool,
    pub size_ok: bool,
    pub cancel_ok: bool,
    pub lq_sigma: f64,
    pub size_bound: f64,
    pub mean_abs: f64,
}

impl HxiAtomCheck {
    pub fn ok(&self) -> bool {
        self.support_ok && self.size_ok && self.cancel_ok
    }
}

pub fn validate_hxi_atom(a: &Field, ball: &Ball, q: f64) -> Result<HxiAtomCheck> {
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("need q > 1, got {q}")));
    }
    let grid = a.grid();
    let linf = a.norm_linf();
    let mut support_ok = true;
    for i in 0..grid.len() {
        if a.values()[i].abs() > 1e-12 * linf && !ball.contains(grid.point(i)) {
            support_ok = false;
            break;
        }
    }
    let sb = sigma_ball(grid, ball);
    let lq_sigma = norm_lq_sigma(a, q);
    let size_bound = sb.powf(1.0 / q) * xi_inverse(1.0 / sb);
    let size_ok = lq_sigma <= size_bound * (1.0 + 1e-9);
    let mean_abs = a.integrate().abs();
    let cancel_ok = mean_abs <= 1e-8 * a.norm_l1();
    Ok(HxiAtomCheck {
        support_ok,
        size_ok,
        cancel_ok,
        lq_sigma,
        size_bound,
        mean_abs,
    })
}

/// The atom-level Orlicz inequality ratio:
/// ∫ Xi(M_L b) σ dx over σ(B) Xi(σ(B)^{-1/q} ‖b‖_{L^q_σ}).
pub fn atom_orlicz_ratio(
    prop: &Propagator,
    b: &Field,
    ball: &Ball,
    q: f64,
    ts: &[f64],
) -> Result<f64> {
    let ml = maximal_heat(prop, b, ts)?;
    let lhs = ml.map_integrate(|v, p| xi(v) * Weight::Sigma.eval(p));
    let sb = sigma_ball(b.grid(), ball);
    let rhs = sb * xi(sb.powf(-1.0 / q) * norm_lq_sigma(b, q));
    if rhs == 0.0 {
        return Err(Error::DegenerateInput);
    }
    Ok(lhs / rhs)
}

/// Tail-weight comparison for the sigma weight: quadrature of
/// (r / |x - x0|)^{d + delta/2} σ(x) outside B(x0, 2r), relative to
/// σ(B(x0, 2r)).
pub fn tail_weight_ratio(grid: Grid, ball: &Ball, delta: f64) -> f64 {
    let r = ball.radius;
    let p = (grid.dim() as f64) + delta / 2.0;
    let probe = Field::zeros(grid);
    let lhs = probe.map_integrate(|_v, x| {
        let dd = dist(x, ball.center);
        if dd >= 2.0 * r {
            (r / dd).powf(p) * Weight::Sigma.eval(x)
        } else {
            0.0
        }
    });
    let two_ball = Ball {
        center: ball.center,
        radius: 2.0 * r,
    };
    let rhs = sigma_ball(grid, &two_ball);
    lhs / rhs
}

/// Coefficient gauge of a family of weighted-atom multiples: the infimum
/// λ with Σ_j σ(B_j) Xi(σ(B_j)^{-1/2} ν_j / λ) ≤ 1, where ν_j is the
/// weighted L² norm of the j-th piece.
pub fn lambda_2(items: &[(f64, f64)]) -> Result<f64> {
    if items.is_empty() {
        return Ok(0.0);
    }
    let f = |lambda: f64| -> f64 {
        items
            .iter()
            .map(|&(nu, sb)| sb * xi(sb.powf(-0.5) * nu / lambda))
            .sum()
    };
    Ok(gauge_infimum(f)?.lambda_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::semigroup::{dyadic_heat_times, DiscreteOperator};

    #[test]
    fn bmo_of_constant_vanishes() {
        let grid = Grid::new(2, 1.0, 17).unwrap();
        let f = Field::constant(grid, 4.2);
        let s = BallSampling::standard(grid);
        assert!(norm_bmo(&f, &s) < 1e-12);
    }

    #[test]
    fn bmo_translation_invariant() {
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let f = Field::from_fn(grid, |p| (3.0 * p[0]).sin() + p[0]);
        let s = BallSampling::standard(grid);
        let a = norm_bmo(&f, &s);
        let b = norm_bmo(&f.map(|v| v + 7.5), &s);
        assert!((a - b).abs() < 1e-12);
        assert!(a > 0.0);
    }

    #[test]
    fn bmo_l_of_constant_is_magnitude() {
        let grid = Grid::new(1, 2.0, 129).unwrap();
        let v = Potential::constant(grid, 2.0).unwrap();
        let prof = CriticalRadiusProfile::compute(&v, 120, 5).unwrap();
        let c = -3.0;
        let f = Field::constant(grid, c);
        let s = BallSampling::standard(grid);
        let n = norm_bmo_l(&f, &prof, &s);
        assert!((n - c.abs()).abs() < 1e-12, "{n}");
        // the diagnostic variant adds the unit-ball mean once more
        let plus = norm_bmo_l_plus(&f, &prof, &s).unwrap();
        assert!((plus - 2.0 * c.abs()).abs() < 1e-12, "{plus}");
    }

    #[test]
    fn bmo_log_refinement_stable() {
        // log|x| (clipped at grid scale) is the canonical BMO function
        let bmo_at = |m: usize| {
            let grid = Grid::new(3, 2.0, m).unwrap();
            let h = grid.spacing();
            let f = Field::from_fn(grid, |p| {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                r.max(h / 2.0).ln()
            });
            norm_bmo(&f, &BallSampling::standard(grid))
        };
        let coarse = bmo_at(25);
        let fine = bmo_at(37);
        assert!(coarse.is_finite() && fine.is_finite() && coarse > 0.0);
        assert!(
            (fine - coarse).abs() / coarse < 0.10,
            "coarse {coarse} fine {fine}"
        );
    }

    #[test]
    fn bmo_nondecreasing_in_sampling_density() {
        let grid = Grid::new(2, 1.0, 33).unwrap();
        let f = Field::from_fn(grid, |p| (4.0 * p[0]).sin() * p[1]);
        let sparse = norm_bmo(&f, &BallSampling::with_stride(grid, 4));
        let dense = norm_bmo(&f, &BallSampling::with_stride(grid, 2));
        assert!(dense >= sparse - 1e-14);
    }

    #[test]
    fn h1n_monotone_in_layer() {
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let f = Field::from_fn(grid, |p| (-(6.0 * p[0]).powi(2)).exp());
        let n2 = norm_h1n(&f, 2).unwrap();
        let n3 = norm_h1n(&f, 3).unwrap();
        assert!(n3 <= n2 + 1e-12, "{n3} vs {n2}");
    }

    #[test]
    fn hxi_atom_validation() {
        let grid = Grid::new(1, 2.0, 201).unwrap();
        // radius off the lattice so strict membership is symmetric
        let ball = Ball::new([0.3, 0.0, 0.0], 0.49).unwrap();
        // odd profile inside the ball: zero mean by symmetry
        let raw = Field::from_fn(grid, |p| {
            if ball.contains(p) {
                p[0] - ball.center[0]
            } else {
                0.0
            }
        });
        let sb: f64 = sigma_ball(grid, &ball);
        let bound = sb.powf(0.5) * xi_inverse(1.0 / sb);
        let a = raw.scale(bound / norm_lq_sigma(&raw, 2.0));
        let check = validate_hxi_atom(&a, &ball, 2.0).unwrap();
        assert!(check.ok(), "{check:?}");

        // oversize multiple fails the size bound
        let big = validate_hxi_atom(&a.scale(1.5), &ball, 2.0).unwrap();
        assert!(!big.size_ok && big.support_ok);

        // support violation
        let off = Field::constant(grid, 1.0);
        let bad = validate_hxi_atom(&off, &ball, 2.0).unwrap();
        assert!(!bad.support_ok);

        // mean violation
        let lump = Field::from_fn(grid, |p| if ball.contains(p) { 1.0 } else { 0.0 });
        let lump = lump.scale(0.5 * bound / norm_lq_sigma(&lump, 2.0));
        let nc = validate_hxi_atom(&lump, &ball, 2.0).unwrap();
        assert!(!nc.cancel_ok && nc.size_ok && nc.support_ok);
    }

    #[test]
    fn atom_orlicz_ratio_finite() {
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let v = Potential::constant(grid, 1.0).unwrap();
        let prop = Propagator::spectral(DiscreteOperator::assemble(&v)).unwrap();
        let ts = dyadic_heat_times(grid);
        let ball = Ball::new([0.0; 3], 0.4).unwrap();
        let raw = Field::from_fn(grid, |p| if ball.contains(p) { p[0] } else { 0.0 });
        let sb: f64 = sigma_ball(grid, &ball);
        let bound = sb.powf(0.5) * xi_inverse(1.0 / sb);
        let a = raw.scale(bound / norm_lq_sigma(&raw, 2.0));
        let ratio = atom_orlicz_ratio(&prop, &a, &ball, 2.0, &ts).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0, "{ratio}");
    }

    #[test]
    fn tail_weight_uniform_over_samples() {
        let grid = Grid::new(2, 2.0, 41).unwrap();
        let mut worst: f64 = 0.0;
        for (cx, cy, r) in [
            (0.0, 0.0, 0.2),
            (0.5, -0.3, 0.15),
            (-0.8, 0.4, 0.3),
            (0.2, 0.9, 0.25),
        ] {
            let ball = Ball::new([cx, cy, 0.0], r).unwrap();
            let ratio = tail_weight_ratio(grid, &ball, 0.5);
            assert!(ratio.is_finite());
            worst = worst.max(ratio);
        }
        assert!(worst < 20.0, "worst {worst}");
    }

    #[test]
    fn lambda_2_single_item_closed_form() {
        let nu: f64 = 0.7;
        let sb: f64 = 0.3;
        let want = sb.powf(-0.5) * nu / xi_inverse(1.0 / sb);
        let got = lambda_2(&[(nu, sb)]).unwrap();
        assert!((got - want).abs() < 1e-7 * want, "got {got} want {want}");
        assert_eq!(lambda_2(&[]).unwrap(), 0.0);
    }

    #[test]
    fn llog_dominated_by_l1_times_scale() {
        // L^log norm is finite and below the L¹ norm for bounded inputs
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let f = Field::from_fn(grid, |p| (1.0 - p[0].abs()).max(0.0));
        let l = norm_llog(&f).unwrap();
        assert!(l.lambda_star > 0.0);
        assert!(l.lambda_star <= f.norm_l1());
    }
}
