//! Direct convolution with radial kernels, zero extension outside the box.
//!
//! The kernel at scale t is k_t(x) = t^{-d} k(x/t) sampled on grid offsets.
//! For a normalized profile the sampled stencil is rescaled to exact
//! discrete unit mass, so constants are preserved away from the boundary
//! and every mollified piece keeps its integral to rounding.

use crate::bumps::RadialProfile;
use crate::error::{Error, Result};
use crate::field::{Field, Patch};
use crate::grid::Grid;

/// A sampled radial kernel: offsets within the support and their weights.
/// Weights include the h^d quadrature factor, so convolution is a plain
/// weighted sum of field values.
#[derive(Debug, Clone)]
pub struct Stencil {
    pub reach: i64,
    /// (offset triple, weight), offsets range over |j| <= reach per axis.
    pub taps: Vec<([i64; 3], f64)>,
}

impl Stencil {
    pub fn sample(grid: Grid, kernel: &RadialProfile, t: f64) -> Result<Stencil> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kernel scale must be positive, got {t}"
            )));
        }
        let h = grid.spacing();
        let d = grid.dim();
        let radius = kernel.support_radius * t;
        let reach = (radius / h).ceil() as i64;
        let inv_td = t.powi(-(d as i32));
        let mut taps = Vec::new();
        let r1 = if d >= 1 { reach } else { 0 };
        let r2 = if d >= 2 { reach } else { 0 };
        let r3 = if d >= 3 { reach } else { 0 };
        let mut mass = 0.0;
        for j0 in -r1..=r1 {
            for j1 in -r2..=r2 {
                for j2 in -r3..=r3 {
                    let rr = ((j0 * j0 + j1 * j1 + j2 * j2) as f64).sqrt() * h;
                    let v = kernel.eval(rr / t) * inv_td;
                    if v != 0.0 {
                        taps.push(([j0, j1, j2], v));
                        mass += v;
                    }
                }
            }
        }
        if taps.is_empty() {
            // kernel narrower than the grid: degenerate to the identity tap
            taps.push(([0, 0, 0], 1.0));
            mass = 1.0;
        }
        let hd = grid.cell_volume();
        let scale = if kernel.normalized {
            // exact discrete unit mass
            1.0 / (mass * hd)
        } else {
            1.0
        };
        for tap in &mut taps {
            tap.1 *= scale * hd;
        }
        Ok(Stencil { reach, taps })
    }

    /// Discrete mass of the stencil (sum of weights); 1 for normalized kernels.
    pub fn mass(&self) -> f64 {
        self.taps.iter().map(|t| t.1).sum()
    }
}

/// Convolve a dense field with a radial kernel at scale t.
pub fn convolve(f: &Field, kernel: &RadialProfile, t: f64) -> Result<Field> {
    let grid = f.grid();
    let stencil = Stencil::sample(grid, kernel, t)?;
    Ok(convolve_with_stencil(f, &stencil))
}

pub fn convolve_with_stencil(f: &Field, stencil: &Stencil) -> Field {
    let grid = f.grid();
    let m = grid.points_per_axis() as i64;
    let d = grid.dim();
    let vals = f.values();
    let mut out = vec![0.0f64; grid.len()];
    let strides: [i64; 3] = match d {
        1 => [1, 0, 0],
        2 => [m, 1, 0],
        _ => [m * m, m, 1],
    };
    for (idx, o) in out.iter_mut().enumerate() {
        let mi = grid.multi_index(idx);
        let c = [mi[0] as i64, mi[1] as i64, mi[2] as i64];
        let mut acc = 0.0;
        for &(off, w) in &stencil.taps {
            let mut ok = true;
            let mut j = 0i64;
            for a in 0..d {
                let p = c[a] + off[a];
                if p < 0 || p >= m {
                    ok = false;
                    break;
                }
                j += p * strides[a];
            }
            if ok {
                acc += w * vals[j as usize];
            }
        }
        *o = acc;
    }
    Field::new(grid, out).expect("convolution preserves finiteness")
}

/// Convolve a patch-supported piece, producing a patch grown by the kernel
/// reach. Zero extension outside the box applies as for dense fields.
pub fn convolve_patch(grid: Grid, piece: &Patch, stencil: &Stencil) -> Patch {
    let m = grid.points_per_axis() as i64;
    let d = grid.dim();
    let reach = stencil.reach;
    let mut lo = [0usize; 3];
    let mut shape = [1usize; 3];
    for a in 0..d {
        let l = (piece.lo[a] as i64 - reach).max(0);
        let hi = (piece.lo[a] as i64 + piece.shape[a] as i64 - 1 + reach).min(m - 1);
        lo[a] = l as usize;
        shape[a] = (hi - l + 1) as usize;
    }
    let mut out = Patch {
        lo,
        shape,
        values: vec![0.0; shape[0] * shape[1] * shape[2]],
    };
    // scatter: for each source value, add into shifted outputs
    let pstr = [
        (piece.shape[1] * piece.shape[2]) as i64,
        piece.shape[2] as i64,
        1,
    ];
    let ostr = [(shape[1] * shape[2]) as i64, shape[2] as i64, 1];
    for (k, &v) in piece.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let k = k as i64;
        let src = [
            piece.lo[0] as i64 + k / pstr[0],
            piece.lo[1] as i64 + (k / pstr[1]) % piece.shape[1] as i64,
            piece.lo[2] as i64 + k % piece.shape[2] as i64,
        ];
        for &(off, w) in &stencil.taps {
            let mut ok = true;
            let mut j = 0i64;
            for a in 0..d {
                let p = src[a] + off[a];
                if p < 0 || p >= m {
                    ok = false;
                    break;
                }
                j += (p - lo[a] as i64) * ostr[a];
            }
            if ok {
                out.values[j as usize] += w * v;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Ball;

    #[test]
    fn mollifier_preserves_constants_in_interior() {
        let grid = Grid::new(2, 1.0, 21).unwrap();
        let f = Field::constant(grid, 2.5);
        let k = RadialProfile::standard_bump();
        let t = 0.3;
        let out = convolve(&f, &k, t).unwrap();
        for i in 0..grid.len() {
            let p = grid.point(i);
            if p[0].abs() < 1.0 - t - 1e-9 && p[1].abs() < 1.0 - t - 1e-9 {
                assert!(
                    (out.values()[i] - 2.5).abs() < 1e-8,
                    "at {:?}: {}",
                    p,
                    out.values()[i]
                );
            }
        }
    }

    #[test]
    fn point_mass_reproduces_kernel_shape() {
        let grid = Grid::new(1, 1.0, 201).unwrap();
        let h = grid.spacing();
        let mut f = Field::zeros(grid);
        let center = grid.len() / 2;
        f.values_mut()[center] = 1.0 / h; // discrete delta with unit mass
        let k = RadialProfile::standard_bump();
        let t = 0.25;
        let out = convolve(&f, &k, t).unwrap();
        // oracle: direct kernel sampling with continuum normalization
        let raw_mass: f64 = (0..grid.len())
            .map(|i| k.eval((grid.point(i)[0].abs()) / t) / t)
            .sum::<f64>()
            * h;
        for i in 0..grid.len() {
            let x = grid.point(i)[0];
            let oracle = k.eval(x.abs() / t) / t / raw_mass;
            assert!(
                (out.values()[i] - oracle).abs() < 5.0 * h,
                "x={x}: got {} want {}",
                out.values()[i],
                oracle
            );
        }
    }

    #[test]
    fn output_depends_only_on_support_neighborhood() {
        let grid = Grid::new(1, 1.0, 101).unwrap();
        let k = RadialProfile::standard_bump();
        let t = 0.1;
        let f1 = Field::from_fn(grid, |p| if p[0] > 0.5 { 1.0 } else { 0.0 });
        let f2 = Field::from_fn(grid, |p| if p[0] > 0.5 { 2.0 } else { 0.0 });
        let o1 = convolve(&f1, &k, t).unwrap();
        let o2 = convolve(&f2, &k, t).unwrap();
        for i in 0..grid.len() {
            if grid.point(i)[0] < 0.5 - t - 1e-9 {
                assert_eq!(o1.values()[i], 0.0);
                assert_eq!(o2.values()[i], 0.0);
            }
        }
    }

    #[test]
    fn convolution_linear_and_translation_invariant() {
        let grid = Grid::new(1, 1.0, 81).unwrap();
        let k = RadialProfile::standard_bump();
        let t = 0.2;
        let f1 = Field::from_fn(grid, |p| (-8.0 * (p[0] + 0.3).powi(2)).exp());
        let f2 = Field::from_fn(grid, |p| (-12.0 * (p[0] - 0.2).powi(2)).exp());
        let a = 0.7;
        let b = -1.3;
        let lhs = convolve(&f1.scale(a).add(&f2.scale(b)).unwrap(), &k, t).unwrap();
        let rhs = convolve(&f1, &k, t)
            .unwrap()
            .scale(a)
            .add(&convolve(&f2, &k, t).unwrap().scale(b))
            .unwrap();
        for i in 0..grid.len() {
            assert!((lhs.values()[i] - rhs.values()[i]).abs() < 1e-12);
        }

        // shift by one whole grid step: interior outputs shift exactly
        let shift = Field::new(
            grid,
            (0..grid.len())
                .map(|i| if i == 0 { 0.0 } else { f1.values()[i - 1] })
                .collect(),
        )
        .unwrap();
        let o = convolve(&f1, &k, t).unwrap();
        let os = convolve(&shift, &k, t).unwrap();
        let reach = (t / grid.spacing()).ceil() as usize + 1;
        for i in reach + 1..grid.len() - reach {
            assert!(
                (os.values()[i] - o.values()[i - 1]).abs() < 1e-12,
                "i={i}"
            );
        }
    }

    #[test]
    fn rejects_nonpositive_scale() {
        let grid = Grid::new(1, 1.0, 11).unwrap();
        let f = Field::zeros(grid);
        assert!(convolve(&f, &RadialProfile::standard_bump(), 0.0).is_err());
        assert!(convolve(&f, &RadialProfile::standard_bump(), -1.0).is_err());
    }

    #[test]
    fn patch_convolution_matches_dense() {
        let grid = Grid::new(2, 1.0, 17).unwrap();
        let ball = Ball::new([0.2, -0.1, 0.0], 0.35).unwrap();
        let mut patch = Patch::covering_ball(grid, &ball);
        patch.fill_with(grid, |p| {
            if ball.contains(p) {
                (1.0 + p[0]) * (1.0 - p[1])
            } else {
                0.0
            }
        });
        let dense = patch.to_field(grid);
        let stencil = Stencil::sample(grid, &RadialProfile::standard_bump(), 0.22).unwrap();
        let want = convolve_with_stencil(&dense, &stencil);
        let got = convolve_patch(grid, &patch, &stencil).to_field(grid);
        for i in 0..grid.len() {
            assert!((want.values()[i] - got.values()[i]).abs() < 1e-13);
        }
    }
}
