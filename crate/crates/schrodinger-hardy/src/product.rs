//! Splitting localized pieces into mollified and rough parts, products
//! against oscillation-bounded factors, and mollified product limits.
//!
//! The rough projection subtracts from every localized piece its
//! mollification at the layer scale:
//!
//! ```text
//! rough(f) = Σ_{n,k} (ψ_{n,k} f - φ_{2^{-n/2}} * (ψ_{n,k} f))
//! ```
//!
//! so rough(f) + Σ φ_{2^{-n/2}} * (ψ_{n,k} f) rebuilds f exactly at grid
//! points. A product f·g then splits as smooth·g + rough(f)·g: the first
//! part is integrable with norms controlled piece by piece, the second
//! carries the log-Orlicz bound.

use crate::bumps::RadialProfile;
use crate::conv::{convolve_patch, Stencil};
use crate::cover::PartitionOfUnity;
use crate::error::{Error, Result};
use crate::field::{Field, Patch};
use crate::maximal::TestDictionary;
use crate::norms::{norm_bmo_l, norm_h1l, norm_h1n, norm_llog, BallSampling};
use crate::rho::CriticalRadiusProfile;
use crate::semigroup::Propagator;

/// Result of the piece-level splitting.
#[derive(Debug, Clone)]
pub struct SmoothRough {
    /// Σ φ_{t_n} * (ψ_{n,k} f), the mollified local averages.
    pub smooth: Field,
    /// f minus the smooth part, assembled from the same pieces.
    pub rough: Field,
    /// Σ ψ_{n,k} f as actually accumulated (equals f to rounding).
    pub piece_sum: Field,
}

/// Split f into its mollified layer averages and the rough remainder.
/// Pieces of one layer share the kernel scale, so they are summed first
/// and convolved once (convolution is linear).
pub fn smooth_rough_split(
    f: &Field,
    pou: &PartitionOfUnity,
    mollifier: &RadialProfile,
) -> Result<SmoothRough> {
    let grid = pou.grid();
    if f.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let pieces = pou.pieces(f)?;
    let mut piece_sum = vec![0.0f64; grid.len()];
    for p in &pieces {
        p.add_into(grid, &mut piece_sum);
    }

    // group pieces by layer into one patch per layer
    let mut layers: Vec<i32> = pou.entries.iter().map(|e| e.layer).collect();
    layers.sort_unstable();
    layers.dedup();
    let mut smooth = vec![0.0f64; grid.len()];
    for n in layers {
        let mut lo = [usize::MAX; 3];
        let mut hi = [0usize; 3];
        for (e, p) in pou.entries.iter().zip(&pieces) {
            if e.layer != n {
                continue;
            }
            for a in 0..3 {
                lo[a] = lo[a].min(p.lo[a]);
                hi[a] = hi[a].max(p.lo[a] + p.shape[a] - 1);
            }
        }
        if lo[0] == usize::MAX {
            continue;
        }
        let shape = [hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1];
        let mut layer_sum = Patch {
            lo,
            shape,
            values: vec![0.0; shape[0] * shape[1] * shape[2]],
        };
        for (e, p) in pou.entries.iter().zip(&pieces) {
            if e.layer != n {
                continue;
            }
            p.for_each_index(grid, |g, k| {
                if let Some(local) = layer_sum.local_index(grid, g) {
                    layer_sum.values[local] += p.values[k];
                }
            });
        }
        let t = (2f64).powf(-0.5 * n as f64);
        let stencil = Stencil::sample(grid, mollifier, t)?;
        let out = convolve_patch(grid, &layer_sum, &stencil);
        out.add_into(grid, &mut smooth);
    }

    let rough: Vec<f64> = piece_sum
        .iter()
        .zip(&smooth)
        .map(|(a, b)| a - b)
        .collect();
    Ok(SmoothRough {
        smooth: Field::new(grid, smooth)?,
        rough: Field::new(grid, rough)?,
        piece_sum: Field::new(grid, piece_sum)?,
    })
}

/// The rough projection alone.
pub fn rough_projection(
    f: &Field,
    pou: &PartitionOfUnity,
    mollifier: &RadialProfile,
) -> Result<Field> {
    Ok(smooth_rough_split(f, pou, mollifier)?.rough)
}

/// Σ (φ_{t_n} * (ψ_{n,k} f)) · g, the integrable product part.
pub fn smooth_product(
    f: &Field,
    g: &Field,
    pou: &PartitionOfUnity,
    mollifier: &RadialProfile,
) -> Result<Field> {
    let split = smooth_rough_split(f, pou, mollifier)?;
    split.smooth.mul(g)
}

/// Quadrature pairing ⟨f×g, test⟩ = ∫ f g test dx.
pub fn product_pairing(f: &Field, g: &Field, test: &Field) -> Result<f64> {
    let fg = f.mul(g)?;
    Ok(fg.mul(test)?.integrate())
}

/// The split product: (smooth part · g, rough part · g). Their sum is
/// exactly f·g at grid points.
pub fn split_product(
    f: &Field,
    g: &Field,
    pou: &PartitionOfUnity,
    mollifier: &RadialProfile,
) -> Result<(Field, Field)> {
    let split = smooth_rough_split(f, pou, mollifier)?;
    Ok((split.smooth.mul(g)?, split.rough.mul(g)?))
}

/// Everything the bilinear estimate needs in one place.
pub struct ProductContext<'a> {
    pub pou: &'a PartitionOfUnity,
    pub profile: &'a CriticalRadiusProfile,
    pub prop: &'a Propagator,
    pub times: &'a [f64],
    pub mollifier: RadialProfile,
    pub sampling: BallSampling,
}

#[derive(Debug, Clone)]
pub struct BilinearReport {
    pub smooth_part: Field,
    pub rough_part: Field,
    pub smooth_l1: f64,
    pub smooth_h1l: f64,
    pub rough_llog: f64,
    pub f_h1l: f64,
    pub g_bmol: f64,
    /// (‖smooth·g‖_L¹ + ‖rough·g‖_Llog) / (‖f‖_{H¹_L} ‖g‖_{BMO_L}).
    pub bound_ratio: f64,
}

/// Split the product and certify the two-part bound against the product
/// of the input norms.
pub fn bilinear_decompose(ctx: &ProductContext, f: &Field, g: &Field) -> Result<BilinearReport> {
    let (smooth_part, rough_part) = split_product(f, g, ctx.pou, &ctx.mollifier)?;
    let f_h1l = norm_h1l(ctx.prop, f, ctx.times)?;
    let g_bmol = norm_bmo_l(g, ctx.profile, &ctx.sampling);
    if f_h1l < 1e-12 || g_bmol < 1e-12 {
        return Err(Error::DegenerateInput);
    }
    let smooth_l1 = smooth_part.norm_l1();
    let smooth_h1l = norm_h1l(ctx.prop, &smooth_part, ctx.times)?;
    let rough_llog = norm_llog(&rough_part)?.lambda_star;
    let bound_ratio = (smooth_l1 + rough_llog) / (f_h1l * g_bmol);
    Ok(BilinearReport {
        smooth_part,
        rough_part,
        smooth_l1,
        smooth_h1l,
        rough_llog,
        f_h1l,
        g_bmol,
        bound_ratio,
    })
}

/// Rough-projection continuity data: ‖grand maximal of rough(f)‖_L¹
/// against ‖f‖_{H¹_L}.
pub fn rough_h1_ratio(
    ctx: &ProductContext,
    f: &Field,
    dict: &TestDictionary,
) -> Result<(f64, f64)> {
    let rough = rough_projection(f, ctx.pou, &ctx.mollifier)?;
    let num = crate::maximal::grand_maximal(&rough, dict)?.integrate();
    let den = norm_h1l(ctx.prop, f, ctx.times)?;
    Ok((num, den))
}

/// Per-piece product bound data: for each partition entry,
/// ‖(φ_{t_n} * (ψ_{n,k} f)) g‖_{H¹_L} against ‖ψ_{n,k} f‖ in the local
/// Hardy norm of its layer times ‖g‖_{BMO_L}.
#[derive(Debug, Clone, Copy)]
pub struct PieceBound {
    pub layer: i32,
    pub entry: usize,
    pub piece_h1n: f64,
    pub product_h1l: f64,
    pub ratio: f64,
}

pub fn smooth_piece_bounds(
    ctx: &ProductContext,
    f: &Field,
    g: &Field,
) -> Result<Vec<PieceBound>> {
    let grid = ctx.pou.grid();
    let g_bmol = norm_bmo_l(g, ctx.profile, &ctx.sampling);
    let pieces = ctx.pou.pieces(f)?;
    let mut out = Vec::new();
    for (k, (e, piece)) in ctx.pou.entries.iter().zip(&pieces).enumerate() {
        let piece_field = piece.to_field(grid);
        let piece_h1n = norm_h1n(&piece_field, e.layer)?;
        if piece_h1n <= 0.0 {
            continue;
        }
        let t = e.scale;
        let stencil = Stencil::sample(grid, &ctx.mollifier, t)?;
        let mollified = convolve_patch(grid, piece, &stencil).to_field(grid);
        let prod = mollified.mul(g)?;
        let product_h1l = norm_h1l(ctx.prop, &prod, ctx.times)?;
        out.push(PieceBound {
            layer: e.layer,
            entry: k,
            piece_h1n,
            product_h1l,
            ratio: product_h1l / (piece_h1n * g_bmol),
        });
    }
    Ok(out)
}

/// Mollified product (f·g) * φ̃_ε; the scale must be resolvable (ε ≥ 2h).
pub fn mollified_product(
    f: &Field,
    g: &Field,
    eps: f64,
    mollifier: &RadialProfile,
) -> Result<Field> {
    let grid = f.grid();
    if eps < 2.0 * grid.spacing() {
        return Err(Error::InvalidArgument(format!(
            "mollification scale {eps} below the resolvable 2h"
        )));
    }
    let fg = f.mul(g)?;
    crate::conv::convolve(&fg, mollifier, eps)
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    /// (epsilon, max error, L¹ error) per mollification scale.
    pub rows: Vec<(f64, f64, f64)>,
    /// Finite-difference Lipschitz constant of f·g.
    pub lipschitz: f64,
}

/// Mollify f·g along the dyadic scale sequence from R/4 down to 2h and
/// tabulate the errors against the pointwise product.
pub fn convergence_study(
    f: &Field,
    g: &Field,
    mollifier: &RadialProfile,
) -> Result<ConvergenceStudy> {
    let grid = f.grid();
    let fg = f.mul(g)?;
    let mut eps_list = Vec::new();
    let mut eps = grid.half_width() / 4.0;
    while eps >= 2.0 * grid.spacing() {
        eps_list.push(eps);
        eps /= 2.0;
    }
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument(
            "grid too coarse for any resolvable mollification scale".into(),
        ));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &e in &eps_list {
        let smeared = mollified_product(f, g, e, mollifier)?;
        let diff = smeared.sub(&fg)?;
        rows.push((e, diff.norm_linf(), diff.norm_l1()));
    }
    Ok(ConvergenceStudy {
        rows,
        lipschitz: lipschitz_estimate(&fg),
    })
}

/// Max Euclidean gradient norm by central differences (interior points).
pub fn lipschitz_estimate(f: &Field) -> f64 {
    let grid = f.grid();
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let d = grid.dim();
    let vals = f.values();
    let mut sup: f64 = 0.0;
    for idx in 0..grid.len() {
        let mi = grid.multi_index(idx);
        let mut g2 = 0.0;
        let mut interior = true;
        for a in 0..d {
            if mi[a] == 0 || mi[a] == m - 1 {
                interior = false;
                break;
            }
            let mut up = mi;
            up[a] += 1;
            let mut down = mi;
            down[a] -= 1;
            let der =
                (vals[grid.flat_index(up)] - vals[grid.flat_index(down)]) / (2.0 * h);
            g2 += der * der;
        }
        if interior {
            sup = sup.max(g2.sqrt());
        }
    }
    sup
}
