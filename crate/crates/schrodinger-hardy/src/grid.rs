//! Uniform tensor grids on the box [-R, R]^d and Euclidean balls.
//!
//! Every sampled object in the crate lives on a [`Grid`]: an axis-aligned
//! box of half-width `R` in dimension `d ∈ {1, 2, 3}` with `m` points per
//! axis, spacing `h = 2R/(m-1)`, points `x_i = -R + i·h`. Values are stored
//! row-major with the last axis contiguous.

use crate::error::{Error, Result};

/// A point in the box. Coordinates beyond the grid dimension are zero, so
/// distances may always be taken over all three entries.
pub type Point = [f64; 3];

pub fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

pub fn dist(a: Point, b: Point) -> f64 {
    dist2(a, b).sqrt()
}

/// Open Euclidean ball B(center, radius).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    /// Membership uses strict inequality: open balls.
    pub fn contains(&self, p: Point) -> bool {
        dist2(p, self.center) < self.radius * self.radius
    }

    /// Volume of the continuum ball (d = 1, 2, 3).
    pub fn volume(&self, d: usize) -> f64 {
        let r = self.radius;
        match d {
            1 => 2.0 * r,
            2 => std::f64::consts::PI * r * r,
            3 => 4.0 / 3.0 * std::f64::consts::PI * r * r * r,
            _ => unreachable!("dimension is capped at 3"),
        }
    }
}

/// Uniform grid over [-R, R]^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points_per_axis: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if points_per_axis < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points per axis, got {points_per_axis}"
            )));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        Ok(Grid {
            dim,
            half_width,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Grid spacing h = 2R/(m-1).
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points_per_axis as f64 - 1.0)
    }

    /// Total number of grid points, m^d.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Multi-index of a flat index; unused axes are zero.
    pub fn multi_index(&self, idx: usize) -> [usize; 3] {
        let m = self.points_per_axis;
        match self.dim {
            1 => [idx, 0, 0],
            2 => [idx / m, idx % m, 0],
            _ => [idx / (m * m), (idx / m) % m, idx % m],
        }
    }

    /// Flat index of a multi-index.
    pub fn flat_index(&self, mi: [usize; 3]) -> usize {
        let m = self.points_per_axis;
        match self.dim {
            1 => mi[0],
            2 => mi[0] * m + mi[1],
            _ => (mi[0] * m + mi[1]) * m + mi[2],
        }
    }

    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Coordinates of a grid point by flat index.
    pub fn point(&self, idx: usize) -> Point {
        let mi = self.multi_index(idx);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.axis_coord(mi[a]);
        }
        p
    }

    /// Nearest grid point (by coordinate clamping and rounding).
    pub fn nearest_index(&self, p: Point) -> usize {
        let h = self.spacing();
        let mut mi = [0usize; 3];
        for a in 0..self.dim {
            let i = ((p[a] + self.half_width) / h).round();
            mi[a] = i.clamp(0.0, (self.points_per_axis - 1) as f64) as usize;
        }
        self.flat_index(mi)
    }

    /// True if the point lies inside the closed box.
    pub fn contains_point(&self, p: Point) -> bool {
        (0..self.dim).all(|a| p[a].abs() <= self.half_width + 1e-12)
    }

    /// Flat indices of all grid points strictly inside the ball.
    pub fn indices_in_ball(&self, ball: &Ball) -> Vec<usize> {
        let mut out = Vec::new();
        let h = self.spacing();
        let m = self.points_per_axis;
        let lo_hi = |c: f64| -> (usize, usize) {
            let lo = ((c - ball.radius + self.half_width) / h).floor().max(0.0) as usize;
            let hi = (((c + ball.radius + self.half_width) / h).ceil() as usize).min(m - 1);
            (lo, hi)
        };
        let (lo0, hi0) = lo_hi(ball.center[0]);
        let (lo1, hi1) = if self.dim >= 2 {
            lo_hi(ball.center[1])
        } else {
            (0, 0)
        };
        let (lo2, hi2) = if self.dim >= 3 {
            lo_hi(ball.center[2])
        } else {
            (0, 0)
        };
        for i0 in lo0..=hi0 {
            for i1 in lo1..=hi1 {
                for i2 in lo2..=hi2 {
                    let mi = [i0, i1, i2];
                    let idx = self.flat_index(mi);
                    if ball.contains(self.point(idx)) {
                        out.push(idx);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_1d_points() {
        let g = Grid::new(1, 1.0, 3).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.len(), 3);
        assert_eq!(g.point(0)[0], -1.0);
        assert_eq!(g.point(1)[0], 0.0);
        assert_eq!(g.point(2)[0], 1.0);
    }

    #[test]
    fn grid_2d_count_and_spacing() {
        let g = Grid::new(2, 2.0, 5).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g.spacing(), 1.0);
    }

    #[test]
    fn grid_3d_spacing() {
        let g = Grid::new(3, 4.0, 33).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.len(), 35937);
    }

    #[test]
    fn grid_rejects_bad_args() {
        assert!(Grid::new(0, 1.0, 3).is_err());
        assert!(Grid::new(4, 1.0, 3).is_err());
        assert!(Grid::new(2, 1.0, 1).is_err());
        assert!(Grid::new(2, -1.0, 3).is_err());
    }

    #[test]
    fn flat_and_multi_roundtrip() {
        let g = Grid::new(3, 1.0, 4).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.flat_index(g.multi_index(idx)), idx);
        }
    }

    #[test]
    fn ball_strict_membership() {
        let b = Ball::new([0.0; 3], 1.0).unwrap();
        assert!(b.contains([0.999, 0.0, 0.0]));
        assert!(!b.contains([1.0, 0.0, 0.0]));
        assert!(Ball::new([0.0; 3], 0.0).is_err());
    }

    #[test]
    fn indices_in_ball_matches_scan() {
        let g = Grid::new(2, 1.0, 9).unwrap();
        let b = Ball::new([0.25, -0.1, 0.0], 0.6).unwrap();
        let fast = g.indices_in_ball(&b);
        let slow: Vec<usize> = (0..g.len()).filter(|&i| b.contains(g.point(i))).collect();
        assert_eq!(fast, slow);
    }
}
