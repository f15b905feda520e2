//! Nonnegative potentials V and reverse Hölder verification.
//!
//! A potential is admissible when V ≥ 0 everywhere and V is not
//! identically zero. The reverse Hölder ratio of a ball B is
//! (avg_B V^q)^{1/q} / avg_B V, which is ≥ 1 by the power-mean
//! inequality; a potential class is verified by taking the sup of this
//! ratio over a multi-scale sample of balls.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::{Ball, Grid};

#[derive(Debug, Clone)]
pub struct Potential {
    field: Field,
    name: String,
}

impl Potential {
    pub fn new(field: Field, name: impl Into<String>) -> Result<Self> {
        if field.values().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidPotential("negative values".into()));
        }
        if field.values().iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidPotential("identically zero".into()));
        }
        Ok(Potential {
            field,
            name: name.into(),
        })
    }

    /// V ≡ c.
    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        Potential::new(Field::constant(grid, c), format!("const({c})"))
    }

    /// V(x) = |x|^a, a > 0.
    pub fn power_law(grid: Grid, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::InvalidPotential(format!(
                "power-law exponent must be positive, got {a}"
            )));
        }
        let f = Field::from_fn(grid, |p| {
            (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt().powf(a)
        });
        Potential::new(f, format!("power({a})"))
    }

    /// A smooth bump of the given amplitude over a constant floor.
    pub fn bump_plus_constant(grid: Grid, floor: f64, amplitude: f64, radius: f64) -> Result<Self> {
        let f = Field::from_fn(grid, |p| {
            let r2 = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / (radius * radius);
            let bump = if r2 < 1.0 {
                (-1.0 / (1.0 - r2)).exp() * std::f64::consts::E
            } else {
                0.0
            };
            floor + amplitude * bump
        });
        Potential::new(f, format!("bump({floor},{amplitude},{radius})"))
    }

    /// Two smooth plateau levels: `inner_level` for |x| below the split
    /// radius, `outer_level` outside, with a smooth transition. Useful for
    /// producing critical-radius maps with exactly two dyadic layers.
    pub fn two_level(grid: Grid, inner_level: f64, outer_level: f64, split: f64) -> Result<Self> {
        let w = split * 0.35;
        let f = Field::from_fn(grid, |p| {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let s = crate::bumps::smooth_step_down((r - split) / w + 0.5);
            outer_level + (inner_level - outer_level) * s
        });
        Potential::new(f, format!("two_level({inner_level},{outer_level},{split})"))
    }

    /// Two smooth levels split along the first coordinate: `left_level`
    /// for x1 < 0, `right_level` for x1 > 0. Both induced layers reach
    /// the box boundary, which keeps their covering geometry comparable.
    pub fn two_level_split(grid: Grid, left_level: f64, right_level: f64) -> Result<Self> {
        let w = grid.half_width() * 0.25;
        let f = Field::from_fn(grid, |p| {
            let s = crate::bumps::smooth_step_down(p[0] / w + 0.5);
            right_level + (left_level - right_level) * s
        });
        Potential::new(f, format!("two_level_split({left_level},{right_level})"))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn grid(&self) -> Grid {
        self.field.grid()
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// One sampled reverse Hölder ratio.
#[derive(Debug, Clone, Copy)]
pub struct BallRatio {
    pub ball: Ball,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct ReverseHolderReport {
    pub q: f64,
    pub samples: Vec<BallRatio>,
    pub sup_ratio: f64,
}

/// ((avg_B V^q)^{1/q}) / (avg_B V) over grid points inside B.
pub fn reverse_holder_ratio(v: &Potential, q: f64, ball: &Ball) -> Result<f64> {
    if !(q > 1.0) {
        return Err(Error::InvalidArgument(format!("need q > 1, got {q}")));
    }
    let mean = v.field().ball_average(ball)?;
    if mean <= 0.0 {
        return Err(Error::DegenerateBall);
    }
    let mean_q = v.field().map(|x| x.powf(q)).ball_average(ball)?;
    Ok(mean_q.powf(1.0 / q) / mean)
}

/// Multi-scale ball sample: centers on a sub-lattice of the given stride,
/// dyadic radii in [2h, R/2].
#[derive(Debug, Clone)]
pub struct BallSampler {
    pub stride: usize,
    pub radii: Vec<f64>,
}

impl BallSampler {
    pub fn dyadic(grid: Grid, stride: usize) -> Self {
        let h = grid.spacing();
        let mut radii = Vec::new();
        let mut r = 2.0 * h;
        while r <= grid.half_width() / 2.0 + 1e-12 {
            radii.push(r);
            r *= 2.0;
        }
        if radii.is_empty() {
            radii.push(2.0 * h);
        }
        BallSampler { stride, radii }
    }

    pub fn balls(&self, grid: Grid) -> Vec<Ball> {
        let m = grid.points_per_axis();
        let mut centers = Vec::new();
        let axis: Vec<usize> = (0..m).step_by(self.stride.max(1)).collect();
        match grid.dim() {
            1 => {
                for &i in &axis {
                    centers.push(grid.flat_index([i, 0, 0]));
                }
            }
            2 => {
                for &i in &axis {
                    for &j in &axis {
                        centers.push(grid.flat_index([i, j, 0]));
                    }
                }
            }
            _ => {
                for &i in &axis {
                    for &j in &axis {
                        for &k in &axis {
                            centers.push(grid.flat_index([i, j, k]));
                        }
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(centers.len() * self.radii.len());
        for &c in &centers {
            for &r in &self.radii {
                out.push(Ball {
                    center: grid.point(c),
                    radius: r,
                });
            }
        }
        out
    }
}

/// Sup of the reverse Hölder ratio over the sampled balls.
pub fn check_reverse_holder(
    v: &Potential,
    q: f64,
    sampler: &BallSampler,
) -> Result<ReverseHolderReport> {
    let mut samples = Vec::new();
    let mut sup_ratio: f64 = 0.0;
    for ball in sampler.balls(v.grid()) {
        match reverse_holder_ratio(v, q, &ball) {
            Ok(ratio) => {
                sup_ratio = sup_ratio.max(ratio);
                samples.push(BallRatio { ball, ratio });
            }
            // a sampled ball may degenerate (V vanishing on it); skip it
            Err(Error::DegenerateBall) | Err(Error::BallOffGrid) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(ReverseHolderReport {
        q,
        samples,
        sup_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn constant_potential_ratio_is_one() {
        let grid = Grid::new(2, 1.0, 17).unwrap();
        let v = Potential::constant(grid, 1.0).unwrap();
        for q in [1.5, 2.0, 3.0] {
            let b = Ball::new([0.1, 0.2, 0.0], 0.5).unwrap();
            let r = reverse_holder_ratio(&v, q, &b).unwrap();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ratio_at_least_one() {
        let grid = Grid::new(2, 2.0, 25).unwrap();
        let v = Potential::power_law(grid, 2.0).unwrap();
        let sampler = BallSampler::dyadic(grid, 4);
        let report = check_reverse_holder(&v, 2.0, &sampler).unwrap();
        assert!(!report.samples.is_empty());
        for s in &report.samples {
            assert!(s.ratio >= 1.0 - 1e-10, "ratio {}", s.ratio);
        }
        assert!(report.sup_ratio.is_finite());
    }

    #[test]
    fn power_law_ratio_matches_radial_quadrature_oracle() {
        // oracle: for V = |x|^2 on B(0,1) in d=3,
        //   avg V   = 3/5,  avg V^2 = 3/7,
        // by adaptive Simpson on the radial integrands; the ratio is
        // sqrt(3/7)/(3/5) = 1.0910894511799618...
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
            (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
        }
        fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, whole: f64) -> f64 {
            let m = 0.5 * (a + b);
            let l = simpson(f, a, m);
            let r = simpson(f, m, b);
            if (l + r - whole).abs() < 15.0 * eps {
                l + r + (l + r - whole) / 15.0
            } else {
                adaptive(f, a, m, eps / 2.0, l) + adaptive(f, m, b, eps / 2.0, r)
            }
        }
        let vol = |f: &dyn Fn(f64) -> f64| {
            4.0 * std::f64::consts::PI * adaptive(f, 0.0, 1.0, 1e-13, simpson(f, 0.0, 1.0))
        };
        let ball_vol = 4.0 / 3.0 * std::f64::consts::PI;
        let mean_v = vol(&|r| r.powi(4)) / ball_vol;
        let mean_v2 = vol(&|r| r.powi(6)) / ball_vol;
        let oracle = mean_v2.sqrt() / mean_v;
        assert!((oracle - 1.0910894511799618).abs() < 1e-12);

        let grid = Grid::new(3, 2.0, 49).unwrap();
        let v = Potential::power_law(grid, 2.0).unwrap();
        let b = Ball::new([0.0; 3], 1.0).unwrap();
        let got = reverse_holder_ratio(&v, 2.0, &b).unwrap();
        assert!((got - oracle).abs() < 0.02, "got {got}, oracle {oracle}");
    }

    #[test]
    fn rejects_inadmissible_potentials() {
        let grid = Grid::new(1, 1.0, 9).unwrap();
        assert!(Potential::new(Field::constant(grid, -1.0), "neg").is_err());
        assert!(Potential::new(Field::zeros(grid), "zero").is_err());
        let v = Potential::constant(grid, 1.0).unwrap();
        let b = Ball::new([0.0; 3], 0.5).unwrap();
        assert!(reverse_holder_ratio(&v, 1.0, &b).is_err());
    }

    #[test]
    fn degenerate_ball_detected() {
        let grid = Grid::new(1, 1.0, 33).unwrap();
        // vanishes near +1, positive elsewhere
        let f = Field::from_fn(grid, |p| if p[0] < 0.0 { 1.0 } else { 0.0 });
        let v = Potential::new(f, "half").unwrap();
        let b = Ball::new([0.9, 0.0, 0.0], 0.05).unwrap();
        assert!(matches!(
            reverse_holder_ratio(&v, 2.0, &b),
            Err(Error::DegenerateBall)
        ));
    }
}
