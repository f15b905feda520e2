//! Seeded random input families with controlled norms.
//!
//! Every generator draws continuum parameters (centers, radii, weights)
//! so the same family member can be sampled onto grids of different
//! resolution; refinement studies compare like with like.
//!
//! Hardy-type inputs are finite sums of normalized cancellative atoms;
//! oscillation-bounded factors are constants plus clipped logarithmic
//! spikes, the canonical bounded-mean-oscillation profiles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::field::Field;
use crate::grid::{dist, Ball, Grid, Point};
use crate::norms::{norm_lq_sigma, sigma_ball};
use crate::orlicz::xi_inverse;

/// One atom term of a Hardy-type sum.
#[derive(Debug, Clone, Copy)]
pub struct AtomTermSpec {
    pub coeff: f64,
    pub center: Point,
    pub radius: f64,
    pub direction: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct AtomSumSpec {
    pub terms: Vec<AtomTermSpec>,
}

/// Draw an atom-sum spec: 3 to 8 atoms at safe-interior centers with
/// radii scaled to the box.
pub fn atom_sum_spec(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> AtomSumSpec {
    let count = rng.gen_range(3..=8);
    let mut terms = Vec::with_capacity(count);
    for _ in 0..count {
        let mut center = [0.0f64; 3];
        for c in center.iter_mut().take(dim) {
            *c = rng.gen_range(-0.5 * half_width..0.5 * half_width);
        }
        let mut direction = [0.0f64; 3];
        for u in direction.iter_mut().take(dim) {
            *u = rng.gen_range(-1.0..1.0);
        }
        let norm = (direction.iter().map(|u| u * u).sum::<f64>()).sqrt().max(1e-9);
        for u in &mut direction {
            *u /= norm;
        }
        terms.push(AtomTermSpec {
            coeff: rng.gen_range(0.2..1.0),
            center,
            radius: half_width * rng.gen_range(0.10..0.30),
            direction,
        });
    }
    AtomSumSpec { terms }
}

fn bump(r2: f64) -> f64 {
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

/// Sample one atom term: an odd directional profile corrected to exact
/// discrete zero mean and normalized to ‖a‖_{L^q} = |B|^{1/q-1}.
pub fn sample_atom(spec: &AtomTermSpec, grid: Grid, q: f64) -> Field {
    let ball = Ball {
        center: spec.center,
        radius: spec.radius,
    };
    let odd = Field::from_fn(grid, |p| {
        let r2 = dist(p, spec.center).powi(2) / (spec.radius * spec.radius);
        let dotp: f64 = (0..3).map(|a| (p[a] - spec.center[a]) * spec.direction[a]).sum();
        bump(r2) * dotp / spec.radius
    });
    let even = Field::from_fn(grid, |p| {
        let r2 = dist(p, spec.center).powi(2) / (spec.radius * spec.radius);
        bump(r2)
    });
    let m_odd = odd.integrate();
    let m_even = even.integrate();
    let corrected = if m_even.abs() > 0.0 {
        odd.sub(&even.scale(m_odd / m_even)).expect("same grid")
    } else {
        odd
    };
    let lq = corrected.norm_lq(q);
    if lq == 0.0 {
        return corrected;
    }
    let bound = ball.volume(grid.dim()).powf(1.0 / q - 1.0);
    corrected.scale(bound / lq)
}

/// Sample the full atom sum on a grid.
pub fn sample_atom_sum(spec: &AtomSumSpec, grid: Grid, q: f64) -> Field {
    let mut acc = Field::zeros(grid);
    for term in &spec.terms {
        let atom = sample_atom(term, grid, q);
        acc = acc.add(&atom.scale(term.coeff)).expect("same grid");
    }
    acc
}

/// Oscillation-bounded factor: base constant plus clipped log spikes.
#[derive(Debug, Clone)]
pub struct BmoSpec {
    pub base: f64,
    /// (center, support radius, strength)
    pub spikes: Vec<(Point, f64, f64)>,
}

pub fn bmo_spec(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> BmoSpec {
    let count = rng.gen_range(2..=5);
    let mut spikes = Vec::with_capacity(count);
    for _ in 0..count {
        let mut center = [0.0f64; 3];
        for c in center.iter_mut().take(dim) {
            *c = rng.gen_range(-0.7 * half_width..0.7 * half_width);
        }
        spikes.push((
            center,
            half_width * rng.gen_range(0.15..0.45),
            rng.gen_range(0.3..1.0),
        ));
    }
    BmoSpec {
        base: rng.gen_range(-1.0..1.0),
        spikes,
    }
}

/// Sample the factor: g(x) = base + Σ γ log(s/max(|x-z|, h/2))₊.
pub fn sample_bmo(spec: &BmoSpec, grid: Grid) -> Field {
    let h = grid.spacing();
    Field::from_fn(grid, |p| {
        let mut v = spec.base;
        for &(z, s, gamma) in &spec.spikes {
            let r = dist(p, z).max(h / 2.0);
            if r < s {
                v += gamma * (s / r).ln();
            }
        }
        v
    })
}

/// A smooth compactly supported pair for mollified-product studies.
#[derive(Debug, Clone)]
pub struct SmoothPairSpec {
    pub bumps_f: Vec<(Point, f64, f64)>,
    pub bumps_g: Vec<(Point, f64, f64)>,
}

pub fn smooth_pair_spec(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> SmoothPairSpec {
    let draw = |rng: &mut ChaCha8Rng| {
        let count = rng.gen_range(1..=3);
        (0..count)
            .map(|_| {
                let mut center = [0.0f64; 3];
                for c in center.iter_mut().take(dim) {
                    *c = rng.gen_range(-0.35 * half_width..0.35 * half_width);
                }
                (
                    center,
                    half_width * rng.gen_range(0.2..0.5),
                    rng.gen_range(-2.0..2.0),
                )
            })
            .collect()
    };
    SmoothPairSpec {
        bumps_f: draw(rng),
        bumps_g: draw(rng),
    }
}

pub fn sample_smooth(bumps: &[(Point, f64, f64)], grid: Grid) -> Field {
    Field::from_fn(grid, |p| {
        bumps
            .iter()
            .map(|&(z, w, amp)| amp * bump(dist(p, z).powi(2) / (w * w)))
            .sum()
    })
}

/// Spec of one multiple of a weighted Hardy–Orlicz atom.
#[derive(Debug, Clone, Copy)]
pub struct HxiAtomSpec {
    pub center: Point,
    pub radius: f64,
    pub direction: [f64; 3],
    pub multiple: f64,
}

pub fn hxi_atom_spec(rng: &mut ChaCha8Rng, dim: usize, half_width: f64) -> HxiAtomSpec {
    let mut center = [0.0f64; 3];
    for c in center.iter_mut().take(dim) {
        *c = rng.gen_range(-0.5 * half_width..0.5 * half_width);
    }
    let mut direction = [0.0f64; 3];
    for u in direction.iter_mut().take(dim) {
        *u = rng.gen_range(-1.0..1.0);
    }
    let norm = (direction.iter().map(|u| u * u).sum::<f64>()).sqrt().max(1e-9);
    for u in &mut direction {
        *u /= norm;
    }
    HxiAtomSpec {
        center,
        radius: half_width * rng.gen_range(0.12..0.35),
        direction,
        multiple: rng.gen_range(0.5..2.0),
    }
}

/// Sample the multiple of an atom normalized to the weighted size bound
/// ‖a‖_{L^q_σ} = σ(B)^{1/q} Ξ^{-1}(σ(B)^{-1}); returns (field, ball).
pub fn sample_hxi_atom(spec: &HxiAtomSpec, grid: Grid, q: f64) -> (Field, Ball) {
    let ball = Ball {
        center: spec.center,
        radius: spec.radius,
    };
    let term = AtomTermSpec {
        coeff: 1.0,
        center: spec.center,
        radius: spec.radius,
        direction: spec.direction,
    };
    // reuse the odd mean-zero shape, then renormalize in the weighted norm
    let shape = sample_atom(&term, grid, q);
    let lq_sigma = norm_lq_sigma(&shape, q);
    let sb: f64 = sigma_ball(grid, &ball);
    let bound = sb.powf(1.0 / q) * xi_inverse(1.0 / sb);
    let a = shape.scale(bound / lq_sigma);
    (a.scale(spec.multiple), ball)
}
