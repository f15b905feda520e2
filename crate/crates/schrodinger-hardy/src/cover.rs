//! Layer-adapted ball covers and the subordinate partition of unity.
//!
//! For each dyadic layer n present on the grid, a greedy row-major scan
//! picks a maximal 2^{-n/2}-separated subset of the layer's grid points.
//! Every layer point then lies strictly within 2^{-n/2} of some chosen
//! center (else it would have been chosen itself), so the layer is fully
//! covered. The partition weights are plateau bumps, identically one on
//! the covering ball and supported in the doubled ball, normalized by
//! their sum.

use crate::bumps::plateau;
use crate::error::{Error, Result};
use crate::field::{Field, Patch};
use crate::grid::{dist, dist2, Ball, Grid, Point};
use crate::rho::CriticalRadiusProfile;

#[derive(Debug, Clone, Copy)]
pub struct CoverEntry {
    pub layer: i32,
    pub center_index: usize,
    pub center: Point,
    /// Covering radius 2^{-n/2}.
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct Cover {
    grid: Grid,
    entries: Vec<CoverEntry>,
}

fn layer_radius(n: i32) -> f64 {
    (2f64).powf(-0.5 * n as f64)
}

/// Greedy maximal separated subsets per layer, in row-major point order.
pub fn build_cover(profile: &CriticalRadiusProfile) -> Result<Cover> {
    let grid = profile.grid();
    let mut entries = Vec::new();
    for n in profile.layers_present() {
        let radius = layer_radius(n);
        let r2 = radius * radius;
        let mut selected: Vec<usize> = Vec::new();
        for idx in 0..grid.len() {
            if profile.layer()[idx] != n {
                continue;
            }
            let p = grid.point(idx);
            let taken = selected
                .iter()
                .any(|&s| dist2(p, grid.point(s)) < r2);
            if !taken {
                selected.push(idx);
            }
        }
        for idx in selected {
            entries.push(CoverEntry {
                layer: n,
                center_index: idx,
                center: grid.point(idx),
                radius,
            });
        }
    }
    if entries.is_empty() {
        return Err(Error::InvalidArgument("no layers on the grid".into()));
    }
    Ok(Cover { grid, entries })
}

impl Cover {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn entries(&self) -> &[CoverEntry] {
        &self.entries
    }

    /// Verify that every grid point of each layer lies strictly inside
    /// some covering ball of that layer; returns the fraction covered.
    pub fn coverage_fraction(&self, profile: &CriticalRadiusProfile) -> f64 {
        let grid = self.grid;
        let mut covered = 0usize;
        for idx in 0..grid.len() {
            let n = profile.layer()[idx];
            let p = grid.point(idx);
            let ok = self
                .entries
                .iter()
                .filter(|e| e.layer == n)
                .any(|e| dist2(p, e.center) < e.radius * e.radius);
            if ok {
                covered += 1;
            }
        }
        covered as f64 / grid.len() as f64
    }

    /// Number of entries whose inflated ball meets the inflated ball of
    /// the given entry (open balls meet iff centers are closer than the
    /// radius sum).
    pub fn overlap_count(&self, entry_idx: usize, inflation: f64) -> usize {
        let e = &self.entries[entry_idx];
        self.entries
            .iter()
            .filter(|o| {
                dist(e.center, o.center) < inflation * (e.radius + o.radius)
            })
            .count()
    }

    pub fn max_overlap(&self, inflation: f64) -> usize {
        (0..self.entries.len())
            .map(|i| self.overlap_count(i, inflation))
            .max()
            .unwrap_or(0)
    }

    /// Fitted exponent: max over R in {2,4,8} of log(max overlap)/log R.
    pub fn overlap_exponent(&self) -> f64 {
        [2.0f64, 4.0, 8.0]
            .iter()
            .map(|&r| (self.max_overlap(r).max(1) as f64).ln() / r.ln())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct PartitionEntry {
    pub layer: i32,
    pub center_index: usize,
    pub center: Point,
    /// Layer scale 2^{-n/2}; the weight is supported in twice this.
    pub scale: f64,
    pub weight: Patch,
    /// Finite-difference sup of |∇ψ| over the support.
    pub grad_sup: f64,
}

#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    grid: Grid,
    pub entries: Vec<PartitionEntry>,
}

/// Build the normalized partition subordinate to the cover: plateau bumps
/// equal to one on B(x_{n,k}, 2^{-n/2}), supported in the doubled ball,
/// divided by their sum.
pub fn build_partition(cover: &Cover) -> Result<PartitionOfUnity> {
    let grid = cover.grid();
    let mut raw: Vec<Patch> = Vec::with_capacity(cover.entries().len());
    let mut total = vec![0.0f64; grid.len()];
    for e in cover.entries() {
        let outer = 2.0 * e.radius;
        let ball = Ball {
            center: e.center,
            radius: outer,
        };
        let mut patch = Patch::covering_ball(grid, &ball);
        patch.fill_with(grid, |p| plateau(dist(p, e.center), e.radius, outer));
        patch.add_into(grid, &mut total);
        raw.push(patch);
    }
    if total.iter().any(|&s| s <= 0.0) {
        return Err(Error::CoverageHole);
    }
    let mut entries = Vec::with_capacity(raw.len());
    for (e, mut patch) in cover.entries().iter().zip(raw.into_iter()) {
        patch.update_with(grid, |g, v| v / total[g]);
        let grad_sup = patch_grad_sup(&patch, grid);
        entries.push(PartitionEntry {
            layer: e.layer,
            center_index: e.center_index,
            center: e.center,
            scale: e.radius,
            weight: patch,
            grad_sup,
        });
    }
    Ok(PartitionOfUnity { grid, entries })
}

/// Central-difference sup of |∇ψ| treating values outside the patch as
/// zero (the weight vanishes at its support boundary).
fn patch_grad_sup(patch: &Patch, grid: Grid) -> f64 {
    let d = grid.dim();
    let h = grid.spacing();
    let strides = [patch.shape[1] * patch.shape[2], patch.shape[2], 1];
    let mut sup: f64 = 0.0;
    for k in 0..patch.values.len() {
        let mut loc = [0usize; 3];
        let mut rem = k;
        for a in 0..3 {
            loc[a] = rem / strides[a].max(1);
            rem %= strides[a].max(1);
        }
        let mut g2 = 0.0;
        for a in 0..d {
            let up = if loc[a] + 1 < patch.shape[a] {
                patch.values[k + strides[a]]
            } else {
                0.0
            };
            let down = if loc[a] > 0 {
                patch.values[k - strides[a]]
            } else {
                0.0
            };
            let der = (up - down) / (2.0 * h);
            g2 += der * der;
        }
        sup = sup.max(g2);
    }
    sup.sqrt()
}

impl PartitionOfUnity {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Sum of all weights as a dense field; one everywhere when the
    /// partition is healthy.
    pub fn weight_sum(&self) -> Field {
        let mut total = vec![0.0f64; self.grid.len()];
        for e in &self.entries {
            e.weight.add_into(self.grid, &mut total);
        }
        Field::new(self.grid, total).expect("weights are finite")
    }

    /// The localized pieces ψ_{n,k} f, one patch per entry.
    pub fn pieces(&self, f: &Field) -> Result<Vec<Patch>> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self
            .entries
            .iter()
            .map(|e| e.weight.mul_field(self.grid, f))
            .collect())
    }

    /// Per-layer suprema of the scale-normalized gradient: pairs
    /// (layer, max_k ‖∇ψ_{n,k}‖∞ · 2^{-n/2}). Uniformity of these across
    /// layers is the scaling content of the partition bound.
    pub fn layer_gradient_sups(&self) -> Vec<(i32, f64)> {
        let mut acc: Vec<(i32, f64)> = Vec::new();
        for e in &self.entries {
            let v = e.grad_sup * e.scale;
            match acc.iter_mut().find(|(n, _)| *n == e.layer) {
                Some((_, cur)) => *cur = cur.max(v),
                None => acc.push((e.layer, v)),
            }
        }
        acc.sort_by_key(|&(n, _)| n);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    fn constant_profile(d: usize, m: usize) -> CriticalRadiusProfile {
        let grid = Grid::new(d, 2.0, m).unwrap();
        let v = Potential::constant(grid, 1.0).unwrap();
        CriticalRadiusProfile::compute(&v, 120, 3).unwrap()
    }

    #[test]
    fn cover_single_layer_constant_potential() {
        let prof = constant_profile(3, 17);
        assert_eq!(prof.layers_present(), vec![2]);
        let cover = build_cover(&prof).unwrap();
        // all centers in layer 2, pairwise separation >= 1/2
        for e in cover.entries() {
            assert_eq!(e.layer, 2);
            assert!((e.radius - 0.5).abs() < 1e-14);
        }
        for (i, a) in cover.entries().iter().enumerate() {
            for b in cover.entries().iter().skip(i + 1) {
                assert!(dist(a.center, b.center) >= 0.5 - 1e-12);
            }
        }
        assert_eq!(cover.coverage_fraction(&prof), 1.0);
    }

    #[test]
    fn overlap_monotone_in_inflation() {
        let prof = constant_profile(2, 25);
        let cover = build_cover(&prof).unwrap();
        assert!(cover.max_overlap(2.0) <= cover.max_overlap(4.0));
        assert!(cover.max_overlap(4.0) <= cover.max_overlap(8.0));
        // every entry overlaps itself
        for i in 0..cover.entries().len() {
            assert!(cover.overlap_count(i, 2.0) >= 1);
        }
        assert!(cover.overlap_exponent().is_finite());
    }

    #[test]
    fn partition_sums_to_one() {
        let prof = constant_profile(2, 33);
        let cover = build_cover(&prof).unwrap();
        let pou = build_partition(&cover).unwrap();
        let sum = pou.weight_sum();
        for &v in sum.values() {
            assert!((v - 1.0).abs() < 1e-10, "sum {v}");
        }
        // nonnegative weights, supported in the doubled balls
        for e in &pou.entries {
            e.weight.for_each_index(pou.grid(), |g, k| {
                let v = e.weight.values[k];
                assert!(v >= 0.0);
                if v > 0.0 {
                    assert!(dist(pou.grid().point(g), e.center) < 2.0 * e.scale);
                }
            });
        }
    }

    #[test]
    fn single_ball_cover_gives_unit_weight() {
        // a hand-built one-ball cover of the whole box: the normalized
        // weight is identically one on the covering ball
        let grid = Grid::new(1, 2.0, 41).unwrap();
        let center = grid.point(grid.len() / 2);
        let cover = Cover {
            grid,
            entries: vec![CoverEntry {
                layer: -4,
                center_index: grid.len() / 2,
                center,
                radius: 4.0,
            }],
        };
        let pou = build_partition(&cover).unwrap();
        let e = &pou.entries[0];
        e.weight.for_each_index(grid, |g, k| {
            if dist(grid.point(g), e.center) < e.scale {
                assert!((e.weight.values[k] - 1.0).abs() < 1e-12);
            }
        });
    }

    #[test]
    fn gradient_band_bounded_for_two_layers() {
        let grid = Grid::new(2, 2.0, 33).unwrap();
        // levels tuned to land in adjacent dyadic layers; the coordinate
        // split gives both layers the same boundary exposure
        let v = Potential::two_level_split(grid, 1.6, 3.6).unwrap();
        let prof = CriticalRadiusProfile::compute(&v, 150, 7).unwrap();
        let layers = prof.layers_present();
        assert!(layers.len() >= 2, "layers {layers:?}");
        let cover = build_cover(&prof).unwrap();
        let pou = build_partition(&cover).unwrap();
        let sups = pou.layer_gradient_sups();
        assert!(sups.len() >= 2);
        let hi = sups.iter().map(|&(_, v)| v).fold(0.0f64, f64::max);
        let lo = sups.iter().map(|&(_, v)| v).fold(f64::MAX, f64::min);
        assert!(lo > 0.0 && hi / lo <= 2.0, "layer sups {sups:?}");
        // the scale-normalized gradient stays near the plateau slope
        // bound |S'| <= 2
        assert!(hi <= 4.0, "hi {hi}");
    }

    #[test]
    fn coverage_hole_detected() {
        let prof = constant_profile(1, 65);
        let cover = build_cover(&prof).unwrap();
        // strip all entries but keep a fake one far too small
        let crippled = Cover {
            grid: cover.grid(),
            entries: vec![CoverEntry {
                layer: 2,
                center_index: 0,
                center: cover.grid().point(0),
                radius: 0.01,
            }],
        };
        assert!(matches!(
            build_partition(&crippled),
            Err(Error::CoverageHole)
        ));
    }

    #[test]
    fn pieces_sum_to_input() {
        let prof = constant_profile(2, 25);
        let cover = build_cover(&prof).unwrap();
        let pou = build_partition(&cover).unwrap();
        let f = Field::from_fn(pou.grid(), |p| (2.0 * p[0]).sin() + p[1] * p[1]);
        let pieces = pou.pieces(&f).unwrap();
        let mut sum = vec![0.0f64; pou.grid().len()];
        for p in &pieces {
            p.add_into(pou.grid(), &mut sum);
        }
        for (a, b) in sum.iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
