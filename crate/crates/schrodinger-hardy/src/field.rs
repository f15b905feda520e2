//! Sampled scalar fields, tensor-product trapezoid quadrature, ball
//! averages, and the binary/CSV field formats.
//!
//! A [`Field`] is a real-valued function sampled at every grid point. All
//! integrals in the crate are trapezoid quadrature over the box: weight
//! `h/2` at axis endpoints and `h` inside, multiplied across axes.
//!
//! Binary format: magic `SHF1`, little-endian `u32 d`, `u32 m`, `f64 R`,
//! then `m^d` little-endian `f64` values row-major.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Ball, Grid, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value {v}")));
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Field {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Sample a closure at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Field { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Trapezoid weight of the grid point with flat index `idx`, including
    /// the h^d cell volume.
    pub fn quad_weight(&self, idx: usize) -> f64 {
        let mi = self.grid.multi_index(idx);
        let m = self.grid.points_per_axis();
        let mut w = self.grid.cell_volume();
        for a in 0..self.grid.dim() {
            if mi[a] == 0 || mi[a] == m - 1 {
                w *= 0.5;
            }
        }
        w
    }

    /// Tensor-product trapezoid quadrature of the field over the box.
    pub fn integrate(&self) -> f64 {
        self.map_integrate(|v, _| v)
    }

    /// Quadrature of `f(value, point)` over the box.
    pub fn map_integrate(&self, f: impl Fn(f64, Point) -> f64) -> f64 {
        let m = self.grid.points_per_axis();
        let h = self.grid.spacing();
        let d = self.grid.dim();
        let axis_w = |i: usize| if i == 0 || i == m - 1 { 0.5 * h } else { h };
        let mut total = 0.0;
        match d {
            1 => {
                for i in 0..m {
                    total += axis_w(i) * f(self.values[i], self.grid.point(i));
                }
            }
            2 => {
                let mut idx = 0;
                for i0 in 0..m {
                    let w0 = axis_w(i0);
                    for i1 in 0..m {
                        total += w0 * axis_w(i1) * f(self.values[idx], self.grid.point(idx));
                        idx += 1;
                    }
                }
            }
            _ => {
                let mut idx = 0;
                for i0 in 0..m {
                    let w0 = axis_w(i0);
                    for i1 in 0..m {
                        let w01 = w0 * axis_w(i1);
                        for i2 in 0..m {
                            total += w01 * axis_w(i2) * f(self.values[idx], self.grid.point(idx));
                            idx += 1;
                        }
                    }
                }
            }
        }
        total
    }

    /// L1 norm, quadrature of |f|.
    pub fn norm_l1(&self) -> f64 {
        self.map_integrate(|v, _| v.abs())
    }

    /// Lq norm, quadrature of |f|^q to the power 1/q.
    pub fn norm_lq(&self, q: f64) -> f64 {
        self.map_integrate(|v, _| v.abs().powf(q)).powf(1.0 / q)
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Mean of the field over grid points strictly inside the ball.
    ///
    /// Errors with "ball off grid" when no grid point lies inside.
    pub fn ball_average(&self, ball: &Ball) -> Result<f64> {
        let idxs = self.grid.indices_in_ball(ball);
        if idxs.is_empty() {
            return Err(Error::BallOffGrid);
        }
        let sum: f64 = idxs.iter().map(|&i| self.values[i]).sum();
        Ok(sum / idxs.len() as f64)
    }

    pub fn scale(&self, a: f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a * b)
    }

    pub fn zip(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    /// Write the binary field format to `path`.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut w)
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(b"SHF1")?;
        w.write_all(&(self.grid.dim() as u32).to_le_bytes())?;
        w.write_all(&(self.grid.points_per_axis() as u32).to_le_bytes())?;
        w.write_all(&self.grid.half_width().to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read the binary field format from `path`.
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Self::read_from(&mut r)
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)
            .map_err(|_| Error::MalformedField("truncated header".into()))?;
        if &magic != b"SHF1" {
            return Err(Error::MalformedField("bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)
            .map_err(|_| Error::MalformedField("truncated header".into()))?;
        let d = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)
            .map_err(|_| Error::MalformedField("truncated header".into()))?;
        let m = u32::from_le_bytes(b4) as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)
            .map_err(|_| Error::MalformedField("truncated header".into()))?;
        let half_width = f64::from_le_bytes(b8);
        let grid = Grid::new(d, half_width, m)
            .map_err(|e| Error::MalformedField(format!("bad grid header: {e}")))?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            r.read_exact(&mut b8)
                .map_err(|_| Error::MalformedField("dimension mismatch: short payload".into()))?;
            values.push(f64::from_le_bytes(b8));
        }
        // reject trailing bytes so a wrong header cannot masquerade
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(Error::MalformedField(
                "dimension mismatch: trailing bytes".into(),
            ));
        }
        Field::new(grid, values).map_err(|e| Error::MalformedField(e.to_string()))
    }

    /// CSV export: one line per point, `x1,...,xd,value`, with a header row.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let d = self.grid.dim();
        let mut header: Vec<String> = (1..=d).map(|a| format!("x{a}")).collect();
        header.push("value".into());
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.grid.len() {
            let p = self.grid.point(i);
            for a in 0..d {
                write!(w, "{},", p[a])?;
            }
            writeln!(w, "{}", self.values[i])?;
        }
        Ok(())
    }
}

/// A rectangular sub-box of a grid with dense values: the storage for
/// compactly supported pieces (partition weights, atoms).
#[derive(Debug, Clone)]
pub struct Patch {
    pub lo: [usize; 3],
    pub shape: [usize; 3],
    pub values: Vec<f64>,
}

impl Patch {
    /// Sub-box covering the ball intersected with the grid box.
    pub fn covering_ball(grid: Grid, ball: &Ball) -> Patch {
        let h = grid.spacing();
        let m = grid.points_per_axis();
        let mut lo = [0usize; 3];
        let mut shape = [1usize; 3];
        for a in 0..grid.dim() {
            let c = ball.center[a];
            let l = ((c - ball.radius + grid.half_width()) / h).floor().max(0.0) as usize;
            let hi = (((c + ball.radius + grid.half_width()) / h).ceil() as usize).min(m - 1);
            lo[a] = l;
            shape[a] = hi - l + 1;
        }
        let len = shape[0] * shape[1] * shape[2];
        Patch {
            lo,
            shape,
            values: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterate (flat grid index, patch value index) pairs.
    pub fn for_each_index(&self, grid: Grid, mut f: impl FnMut(usize, usize)) {
        let mut k = 0;
        for i0 in 0..self.shape[0] {
            for i1 in 0..self.shape[1] {
                for i2 in 0..self.shape[2] {
                    let mi = [self.lo[0] + i0, self.lo[1] + i1, self.lo[2] + i2];
                    f(grid.flat_index(mi), k);
                    k += 1;
                }
            }
        }
    }

    pub fn add_into(&self, grid: Grid, dense: &mut [f64]) {
        self.for_each_index(grid, |g, k| dense[g] += self.values[k]);
    }

    /// Local value index of a global grid index, when covered.
    pub fn local_index(&self, grid: Grid, global: usize) -> Option<usize> {
        let mi = grid.multi_index(global);
        let mut k = 0;
        for a in 0..3 {
            let rel = mi[a].checked_sub(self.lo[a])?;
            if rel >= self.shape[a] {
                return None;
            }
            k = k * self.shape[a] + rel;
        }
        Some(k)
    }

    /// Update values in place from (global grid index, current value).
    pub fn update_with(&mut self, grid: Grid, mut f: impl FnMut(usize, f64) -> f64) {
        let mut k = 0;
        for i0 in 0..self.shape[0] {
            for i1 in 0..self.shape[1] {
                for i2 in 0..self.shape[2] {
                    let mi = [self.lo[0] + i0, self.lo[1] + i1, self.lo[2] + i2];
                    self.values[k] = f(grid.flat_index(mi), self.values[k]);
                    k += 1;
                }
            }
        }
    }

    /// Fill patch values by sampling a closure at the covered grid points.
    pub fn fill_with(&mut self, grid: Grid, f: impl Fn(Point) -> f64) {
        let mut k = 0;
        for i0 in 0..self.shape[0] {
            for i1 in 0..self.shape[1] {
                for i2 in 0..self.shape[2] {
                    let mi = [self.lo[0] + i0, self.lo[1] + i1, self.lo[2] + i2];
                    self.values[k] = f(grid.point(grid.flat_index(mi)));
                    k += 1;
                }
            }
        }
    }

    pub fn to_field(&self, grid: Grid) -> Field {
        let mut out = Field::zeros(grid);
        self.add_into(grid, out.values_mut());
        out
    }

    /// Pointwise multiply with a dense field, keeping patch storage.
    pub fn mul_field(&self, grid: Grid, dense: &Field) -> Patch {
        let mut out = self.clone();
        let vals = dense.values();
        self.for_each_index(grid, |g, k| out.values[k] = self.values[k] * vals[g]);
        out
    }

    pub fn scale_in_place(&mut self, a: f64) {
        for v in &mut self.values {
            *v *= a;
        }
    }

    /// Plain h^d Riemann sum of the patch values (no trapezoid halving;
    /// patches hold interior-supported pieces).
    pub fn sum_h(&self, grid: Grid) -> f64 {
        self.values.iter().sum::<f64>() * grid.cell_volume()
    }

    /// h^d-weighted Lq norm of the patch.
    pub fn norm_lq_h(&self, grid: Grid, q: f64) -> f64 {
        (self
            .values
            .iter()
            .map(|v| v.abs().powf(q))
            .sum::<f64>()
            * grid.cell_volume())
        .powf(1.0 / q)
    }

    pub fn norm_l1_h(&self, grid: Grid) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * grid.cell_volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(m: usize) -> Grid {
        Grid::new(1, 1.0, m).unwrap()
    }

    #[test]
    fn integrate_constant_is_box_volume() {
        let f = Field::constant(grid1(11), 1.0);
        assert!((f.integrate() - 2.0).abs() < 1e-14);
        let g = Grid::new(2, 1.5, 7).unwrap();
        let f2 = Field::constant(g, 2.0);
        assert!((f2.integrate() - 2.0 * 9.0).abs() < 1e-12);
    }

    #[test]
    fn integrate_zero() {
        let f = Field::zeros(grid1(5));
        assert_eq!(f.integrate(), 0.0);
    }

    #[test]
    fn gaussian_integral_matches_adaptive_oracle() {
        // oracle: adaptive Simpson quadrature of exp(-x^2) on [-8, 8]
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
        let g = |x: f64| (-x * x).exp();
        let oracle = adaptive(&g, -8.0, 8.0, 1e-12, simpson(&g, -8.0, 8.0));
        assert!((oracle - std::f64::consts::PI.sqrt()).abs() < 1e-10);

        let grid = Grid::new(1, 8.0, 257).unwrap();
        let f = Field::from_fn(grid, |p| (-p[0] * p[0]).exp());
        assert!((f.integrate() - oracle).abs() < 1e-6);
    }

    #[test]
    fn quadrature_is_linear() {
        let g = Grid::new(2, 1.0, 9).unwrap();
        let f1 = Field::from_fn(g, |p| p[0] + 0.3 * p[1] * p[1]);
        let f2 = Field::from_fn(g, |p| (p[0] * 2.1).sin());
        let (a, b) = (1.7, -0.4);
        let lhs = f1.scale(a).add(&f2.scale(b)).unwrap().integrate();
        let rhs = a * f1.integrate() + b * f2.integrate();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn ball_average_constant_and_odd() {
        let g = grid1(101);
        let c = Field::constant(g, 3.25);
        let b = Ball::new([0.2, 0.0, 0.0], 0.3).unwrap();
        assert!((c.ball_average(&b).unwrap() - 3.25).abs() < 1e-14);

        let f = Field::from_fn(g, |p| p[0]);
        let b0 = Ball::new([0.0; 3], 0.5).unwrap();
        assert!(f.ball_average(&b0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ball_average_x_squared_closed_form() {
        // mean of x^2 over B(0,1) in 1d is 1/3; the strict point mean over
        // the open ball equals (1-h)/3 exactly, an O(h) boundary effect
        let g = grid1(2001);
        let f = Field::from_fn(g, |p| p[0] * p[0]);
        let b = Ball::new([0.0; 3], 1.0).unwrap();
        let got = f.ball_average(&b).unwrap();
        let h = g.spacing();
        assert!((got - (1.0 - h) / 3.0).abs() < 1e-12, "got {got}");
        assert!((got - 1.0 / 3.0).abs() <= h, "got {got}");
    }

    #[test]
    fn ball_average_within_range() {
        let g = Grid::new(2, 1.0, 17).unwrap();
        let f = Field::from_fn(g, |p| (3.0 * p[0]).sin() + p[1]);
        let b = Ball::new([0.3, -0.2, 0.0], 0.45).unwrap();
        let avg = f.ball_average(&b).unwrap();
        let idxs = g.indices_in_ball(&b);
        let lo = idxs.iter().map(|&i| f.values()[i]).fold(f64::MAX, f64::min);
        let hi = idxs.iter().map(|&i| f.values()[i]).fold(f64::MIN, f64::max);
        assert!(lo <= avg && avg <= hi);
    }

    #[test]
    fn ball_off_grid_errors() {
        let g = grid1(11);
        let f = Field::constant(g, 1.0);
        let b = Ball::new([5.0, 0.0, 0.0], 0.05).unwrap();
        assert!(matches!(f.ball_average(&b), Err(Error::BallOffGrid)));
    }

    #[test]
    fn binary_roundtrip_bit_exact() {
        let g = Grid::new(2, 1.25, 6).unwrap();
        let f = Field::from_fn(g, |p| 1.0 / (1.0 + p[0] * p[0] + 0.5 * p[1]).abs());
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let back = Field::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(f, back);
        // bit-exactness: serialize again and compare bytes
        let mut buf2 = Vec::new();
        back.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn malformed_field_files_rejected() {
        let mut buf = Vec::new();
        Field::constant(grid1(3), 1.0).write_to(&mut buf).unwrap();
        // bad magic
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            Field::read_from(&mut bad.as_slice()),
            Err(Error::MalformedField(_))
        ));
        // short payload
        let short = &buf[..buf.len() - 8];
        assert!(matches!(
            Field::read_from(&mut &short[..]),
            Err(Error::MalformedField(_))
        ));
        // trailing bytes
        let mut long = buf.clone();
        long.extend_from_slice(&[0u8; 8]);
        assert!(matches!(
            Field::read_from(&mut long.as_slice()),
            Err(Error::MalformedField(_))
        ));
    }

    #[test]
    fn patch_roundtrip() {
        let g = Grid::new(2, 1.0, 9).unwrap();
        let ball = Ball::new([0.3, 0.3, 0.0], 0.4).unwrap();
        let mut p = Patch::covering_ball(g, &ball);
        let n = p.len();
        for (k, v) in p.values.iter_mut().enumerate() {
            *v = k as f64 / n as f64;
        }
        let f = p.to_field(g);
        let mut sum = 0.0;
        p.for_each_index(g, |gidx, k| {
            assert_eq!(f.values()[gidx], p.values[k]);
            sum += p.values[k];
        });
        assert!((f.values().iter().sum::<f64>() - sum).abs() < 1e-12);
    }
}
