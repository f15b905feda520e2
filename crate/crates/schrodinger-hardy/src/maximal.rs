//! Maximal operators: the semigroup maximal function, its Gaussian local
//! truncations, the Hardy–Littlewood maximal function over dyadic balls,
//! and the grand maximal function over a normalized test dictionary.

use rayon::prelude::*;

use crate::bumps::RadialProfile;
use crate::conv::{convolve_with_stencil, Stencil};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::semigroup::{dyadic_heat_times, gauss_apply, Propagator};

/// M_L f = sup over the time set of |e^{-tL} f|, pointwise.
pub fn maximal_heat(prop: &Propagator, f: &Field, ts: &[f64]) -> Result<Field> {
    if ts.is_empty() {
        return Err(Error::InvalidArgument("empty time set".into()));
    }
    let outs = prop.heat_apply_many(ts, f)?;
    let mut sup = vec![0.0f64; f.grid().len()];
    for out in &outs {
        for (s, v) in sup.iter_mut().zip(out.values()) {
            *s = s.max(v.abs());
        }
    }
    Field::new(f.grid(), sup)
}

/// The local Gaussian maximal function at layer n: sup over dyadic times
/// strictly below 2^{-n} of |Gaussian smoothing of f|.
pub fn maximal_gauss_local(f: &Field, n: i32) -> Result<Field> {
    let cutoff = (2f64).powi(-n);
    let ts: Vec<f64> = dyadic_heat_times(f.grid())
        .into_iter()
        .filter(|&t| t < cutoff)
        .collect();
    if ts.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no dyadic times below 2^(-{n})"
        )));
    }
    let mut sup = vec![0.0f64; f.grid().len()];
    for &t in &ts {
        let out = gauss_apply(f, t)?;
        for (s, v) in sup.iter_mut().zip(out.values()) {
            *s = s.max(v.abs());
        }
    }
    Field::new(f.grid(), sup)
}

/// Largest integer s >= 0 with s^2 < q2, robust to float fuzz.
fn strict_radius(q2: f64) -> i64 {
    if q2 <= 0.0 {
        return -1; // no admissible offset
    }
    let mut s = q2.sqrt().floor() as i64;
    while s >= 0 && (s * s) as f64 >= q2 {
        s -= 1;
    }
    while (((s + 1) * (s + 1)) as f64) < q2 {
        s += 1;
    }
    s
}

/// Prefix sums along the last axis; interval sums in O(1).
struct LinePrefix {
    m: usize,
    data: Vec<f64>,
}

impl LinePrefix {
    fn build(vals: &[f64], grid: Grid) -> LinePrefix {
        let m = grid.points_per_axis();
        let lines = vals.len() / m;
        let mut data = vec![0.0; vals.len()];
        for l in 0..lines {
            let base = l * m;
            let mut acc = 0.0;
            for k in 0..m {
                acc += vals[base + k];
                data[base + k] = acc;
            }
        }
        LinePrefix { m, data }
    }

    /// Sum over the last-axis range [a, b] (clipped to the line).
    fn interval(&self, line: usize, a: i64, b: i64) -> (f64, usize) {
        let lo = a.max(0) as usize;
        let hi = b.min(self.m as i64 - 1);
        if hi < lo as i64 {
            return (0.0, 0);
        }
        let hi = hi as usize;
        let base = line * self.m;
        let upper = self.data[base + hi];
        let lower = if lo == 0 { 0.0 } else { self.data[base + lo - 1] };
        (upper - lower, hi - lo + 1)
    }
}

/// Hardy–Littlewood maximal function: sup over dyadic radii in [h, 2R] of
/// the clipped ball averages of |f| (grid-point means).
pub fn hardy_littlewood(f: &Field) -> Field {
    let grid = f.grid();
    let h = grid.spacing();
    let m = grid.points_per_axis();
    let d = grid.dim();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let prefix = LinePrefix::build(&abs, grid);
    let mut radii = Vec::new();
    let mut r = h;
    while r <= 2.0 * grid.half_width() * (1.0 + 1e-12) {
        radii.push(r);
        r *= 2.0;
    }
    let mi = m as i64;
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let c = grid.multi_index(idx);
            let mut best = 0.0f64;
            for &r in &radii {
                let q2 = (r / h) * (r / h);
                let mut total = 0.0;
                let mut count = 0usize;
                match d {
                    1 => {
                        let s = strict_radius(q2);
                        let (sum, n) = prefix.interval(0, c[0] as i64 - s, c[0] as i64 + s);
                        total = sum;
                        count = n;
                    }
                    2 => {
                        let s1 = strict_radius(q2);
                        for j1 in -s1..=s1 {
                            let row = c[0] as i64 + j1;
                            if row < 0 || row >= mi {
                                continue;
                            }
                            let s2 = strict_radius(q2 - (j1 * j1) as f64);
                            let (sum, n) =
                                prefix.interval(row as usize, c[1] as i64 - s2, c[1] as i64 + s2);
                            total += sum;
                            count += n;
                        }
                    }
                    _ => {
                        let s1 = strict_radius(q2);
                        for j1 in -s1..=s1 {
                            let row = c[0] as i64 + j1;
                            if row < 0 || row >= mi {
                                continue;
                            }
                            let rem = q2 - (j1 * j1) as f64;
                            let s2 = strict_radius(rem);
                            for j2 in -s2..=s2 {
                                let col = c[1] as i64 + j2;
                                if col < 0 || col >= mi {
                                    continue;
                                }
                                let s3 = strict_radius(rem - (j2 * j2) as f64);
                                let line = (row * mi + col) as usize;
                                let (sum, n) =
                                    prefix.interval(line, c[2] as i64 - s3, c[2] as i64 + s3);
                                total += sum;
                                count += n;
                            }
                        }
                    }
                }
                if count > 0 {
                    best = best.max(total / count as f64);
                }
            }
            best
        })
        .collect();
    Field::new(grid, out).expect("maximal values finite")
}

/// A normalized test family: radial profiles rescaled so the pointwise
/// envelope |φ(x)| + |∇φ(x)| ≤ (1 + |x|²)^{-(d+1)} holds with near
/// equality at the worst radius, together with a dyadic scale set.
#[derive(Debug, Clone)]
pub struct TestDictionary {
    /// (profile, envelope normalization factor)
    pub members: Vec<(RadialProfile, f64)>,
    pub scales: Vec<f64>,
    dim: usize,
}

impl TestDictionary {
    /// Eight members (four truncated Gaussians, four compact bumps) and
    /// up to twelve dyadic scales within the resolved range [2h, 2R].
    pub fn standard(grid: Grid) -> TestDictionary {
        let d = grid.dim();
        let mut members = Vec::with_capacity(8);
        for sigma in [0.15, 0.3, 0.5, 0.8] {
            members.push(RadialProfile::truncated_gaussian(sigma, 6.0 * sigma));
        }
        for w in [0.4, 0.7, 1.0, 1.3] {
            members.push(RadialProfile {
                shape: crate::bumps::ProfileShape::Bump,
                support_radius: w,
                normalized: false,
            });
        }
        let members = members
            .into_iter()
            .map(|p| {
                let c = envelope_scale(&p, d);
                (p, c)
            })
            .collect();
        let mut scales = Vec::new();
        let mut t = 2.0 * grid.half_width();
        let floor = 2.0 * grid.spacing();
        while scales.len() < 12 && t >= floor {
            scales.push(t);
            t /= 2.0;
        }
        TestDictionary {
            members,
            scales,
            dim: d,
        }
    }

    /// Verify the envelope bound at every grid sample for every member.
    pub fn envelope_holds_on_grid(&self, grid: Grid) -> bool {
        (0..grid.len()).all(|i| {
            let p = grid.point(i);
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let bound = (1.0 + r * r).powi(-(self.dim as i32 + 1));
            self.members.iter().all(|(prof, c)| {
                c * (prof.eval(r).abs() + prof.derivative(r).abs()) <= bound * (1.0 + 1e-9)
            })
        })
    }
}

/// Envelope normalization: 1 / sup_r (|φ| + |φ'|)(r) (1 + r²)^{d+1},
/// the sup taken over a fine radial scan with a small safety margin.
fn envelope_scale(p: &RadialProfile, d: usize) -> f64 {
    let n = 8192;
    let mut sup: f64 = 0.0;
    for k in 0..=n {
        let r = p.support_radius * k as f64 / n as f64;
        let v = (p.eval(r).abs() + p.derivative(r).abs()) * (1.0 + r * r).powi(d as i32 + 1);
        sup = sup.max(v);
    }
    0.995 / sup
}

/// Sliding window maximum along the last axis with half-width s (clipped
/// at line ends), van Herk two-pass scheme, O(N) per call.
fn slide_max_last_axis(vals: &[f64], grid: Grid, s: usize) -> Vec<f64> {
    let m = grid.points_per_axis();
    let lines = vals.len() / m;
    let w = 2 * s + 1;
    let mut out = vec![0.0; vals.len()];
    let mut pre = vec![0.0; m];
    let mut suf = vec![0.0; m];
    for l in 0..lines {
        let base = l * m;
        let line = &vals[base..base + m];
        // block prefix maxima
        for (k, &v) in line.iter().enumerate() {
            pre[k] = if k % w == 0 { v } else { pre[k - 1].max(v) };
        }
        for k in (0..m).rev() {
            suf[k] = if k % w == w - 1 || k == m - 1 {
                line[k]
            } else {
                suf[k + 1].max(line[k])
            };
        }
        for k in 0..m {
            let a = k.saturating_sub(s);
            let b = (k + s).min(m - 1);
            out[base + k] = if a / w == b / w {
                // window inside one block
                let mut v = line[a];
                for &x in &line[a + 1..=b] {
                    v = v.max(x);
                }
                v
            } else {
                suf[a].max(pre[b])
            };
        }
    }
    out
}

/// Max over ball offsets |y - x| < t (grid points only) of g(y), assuming
/// g >= 0, via per-axis decomposition and sliding-window maxima.
fn ball_max(g: &[f64], grid: Grid, t: f64) -> Vec<f64> {
    let h = grid.spacing();
    let m = grid.points_per_axis();
    let d = grid.dim();
    let q2 = (t / h) * (t / h);
    let s_max = strict_radius(q2).min(m as i64 - 1);
    if s_max < 0 {
        return g.to_vec();
    }
    // sliding maxima along the last axis for every needed half-width
    let mut by_halfwidth: Vec<Option<Vec<f64>>> = vec![None; s_max as usize + 1];
    let mi = m as i64;
    match d {
        1 => slide_max_last_axis(g, grid, s_max as usize),
        2 => {
            let mut out = vec![0.0f64; g.len()];
            for j1 in -s_max..=s_max {
                let s2 = strict_radius(q2 - (j1 * j1) as f64).min(mi - 1);
                if s2 < 0 {
                    continue;
                }
                let su = s2 as usize;
                if by_halfwidth[su].is_none() {
                    by_halfwidth[su] = Some(slide_max_last_axis(g, grid, su));
                }
                let sl = by_halfwidth[su].as_ref().expect("just filled");
                for r0 in 0..mi {
                    let rr = r0 + j1;
                    if rr < 0 || rr >= mi {
                        continue;
                    }
                    let dst = (r0 * mi) as usize;
                    let src = (rr * mi) as usize;
                    for k in 0..m {
                        out[dst + k] = out[dst + k].max(sl[src + k]);
                    }
                }
            }
            out
        }
        _ => {
            let mut out = vec![0.0f64; g.len()];
            for j1 in -s_max..=s_max {
                for j2 in -s_max..=s_max {
                    let rem = q2 - ((j1 * j1 + j2 * j2) as f64);
                    let s3 = strict_radius(rem).min(mi - 1);
                    if s3 < 0 {
                        continue;
                    }
                    let su = s3 as usize;
                    if by_halfwidth[su].is_none() {
                        by_halfwidth[su] = Some(slide_max_last_axis(g, grid, su));
                    }
                    let sl = by_halfwidth[su].as_ref().expect("just filled");
                    for r0 in 0..mi {
                        let rr = r0 + j1;
                        if rr < 0 || rr >= mi {
                            continue;
                        }
                        for c0 in 0..mi {
                            let cc = c0 + j2;
                            if cc < 0 || cc >= mi {
                                continue;
                            }
                            let dst = ((r0 * mi + c0) * mi) as usize;
                            let src = ((rr * mi + cc) * mi) as usize;
                            for k in 0..m {
                                out[dst + k] = out[dst + k].max(sl[src + k]);
                            }
                        }
                    }
                }
            }
            out
        }
    }
}

/// The grand maximal function: max over dictionary members, scales, and
/// admissible grid offsets |y - x| < t of |f * φ_t(y)|.
pub fn grand_maximal(f: &Field, dict: &TestDictionary) -> Result<Field> {
    if dict.members.is_empty() || dict.scales.is_empty() {
        return Err(Error::InvalidArgument("empty test dictionary".into()));
    }
    let grid = f.grid();
    // per scale: combine member convolutions pointwise, then take the
    // local ball max over admissible offsets
    let per_scale: Vec<Vec<f64>> = dict
        .scales
        .par_iter()
        .map(|&t| {
            let mut combined = vec![0.0f64; grid.len()];
            for (prof, c) in &dict.members {
                let mut stencil =
                    Stencil::sample(grid, prof, t).expect("positive scale by construction");
                for tap in &mut stencil.taps {
                    tap.1 *= c;
                }
                let conv = convolve_with_stencil(f, &stencil);
                for (acc, v) in combined.iter_mut().zip(conv.values()) {
                    *acc = acc.max(v.abs());
                }
            }
            ball_max(&combined, grid, t)
        })
        .collect();
    let mut sup = vec![0.0f64; grid.len()];
    for scale_field in &per_scale {
        for (s, v) in sup.iter_mut().zip(scale_field) {
            *s = s.max(*v);
        }
    }
    Field::new(grid, sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;
    use crate::semigroup::DiscreteOperator;

    #[test]
    fn maximal_heat_basics() {
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let v = Potential::constant(grid, 1.0).unwrap();
        let p = Propagator::spectral(DiscreteOperator::assemble(&v)).unwrap();
        let ts = dyadic_heat_times(grid);

        let zero = Field::zeros(grid);
        assert_eq!(maximal_heat(&p, &zero, &ts).unwrap().norm_linf(), 0.0);
        assert!(maximal_heat(&p, &zero, &[]).is_err());

        let f = Field::from_fn(grid, |q| (1.0 - q[0].abs()).max(0.0));
        let ml = maximal_heat(&p, &f, &ts).unwrap();
        let t0 = p.heat_apply(ts[0], &f).unwrap();
        for i in 0..grid.len() {
            assert!(ml.values()[i] >= t0.values()[i] - 1e-14);
        }

        // constant input: sup attained at the smallest time, value ~ c
        let c = 2.0;
        let cf = Field::constant(grid, c);
        let mlc = maximal_heat(&p, &cf, &ts).unwrap();
        for i in 0..grid.len() {
            if grid.point(i)[0].abs() <= 1.0 {
                assert!((mlc.values()[i] - c).abs() < 1e-3 * c);
            }
        }
    }

    #[test]
    fn local_maximal_windows_shrink() {
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let f = Field::from_fn(grid, |q| (-8.0 * q[0] * q[0]).exp());
        let m2 = maximal_gauss_local(&f, 2).unwrap();
        let m4 = maximal_gauss_local(&f, 4).unwrap();
        for i in 0..grid.len() {
            assert!(m4.values()[i] <= m2.values()[i] + 1e-14);
        }
        assert!(maximal_gauss_local(&f, 40).is_err());
    }

    #[test]
    fn hardy_littlewood_constant_and_domination() {
        let grid = Grid::new(2, 1.0, 21).unwrap();
        let c = Field::constant(grid, 3.0);
        let m = hardy_littlewood(&c);
        for &v in m.values() {
            assert!((v - 3.0).abs() < 1e-12);
        }
        let f = Field::from_fn(grid, |p| (5.0 * p[0]).sin() * (3.0 * p[1]).cos());
        let mf = hardy_littlewood(&f);
        for i in 0..grid.len() {
            assert!(mf.values()[i] >= f.values()[i].abs() - 1e-14);
        }
    }

    #[test]
    fn hardy_littlewood_indicator_scan_oracle() {
        // indicator of B(0,1) in d=1 evaluated at x=2: brute scan over the
        // same dyadic radii and clipped point means
        let grid = Grid::new(1, 4.0, 257).unwrap();
        let f = Field::from_fn(grid, |p| if p[0].abs() < 1.0 { 1.0 } else { 0.0 });
        let mf = hardy_littlewood(&f);
        let x_idx = grid.nearest_index([2.0, 0.0, 0.0]);

        let h = grid.spacing();
        let mut oracle: f64 = 0.0;
        let mut r = h;
        while r <= 8.0 * (1.0 + 1e-12) {
            let mut sum = 0.0;
            let mut count = 0usize;
            for j in 0..grid.len() {
                if (grid.point(j)[0] - 2.0).abs() < r {
                    sum += f.values()[j];
                    count += 1;
                }
            }
            if count > 0 {
                oracle = oracle.max(sum / count as f64);
            }
            r *= 2.0;
        }
        assert!((mf.values()[x_idx] - oracle).abs() < 1e-12);
        // continuum sup over all radii is 1/3, attained near r = 3
        assert!((oracle - 1.0 / 3.0).abs() < 0.05, "oracle {oracle}");
    }

    #[test]
    fn hardy_littlewood_matches_bruteforce_2d() {
        // oracle in exact integer offset arithmetic: |j| h < r with
        // r/h a power of two is exact, float coordinates are not
        let grid = Grid::new(2, 1.0, 13).unwrap();
        let f = Field::from_fn(grid, |p| p[0] - 2.0 * p[1] + 0.3);
        let fast = hardy_littlewood(&f);
        let h = grid.spacing();
        let m = grid.points_per_axis() as i64;
        for idx in 0..grid.len() {
            let c = grid.multi_index(idx);
            let mut best: f64 = 0.0;
            let mut r = h;
            while r <= 2.0 * grid.half_width() * (1.0 + 1e-12) {
                let q2 = (r / h) * (r / h);
                let mut sum = 0.0;
                let mut count = 0;
                for j in 0..grid.len() {
                    let jm = grid.multi_index(j);
                    let d0 = jm[0] as i64 - c[0] as i64;
                    let d1 = jm[1] as i64 - c[1] as i64;
                    let _ = m;
                    if ((d0 * d0 + d1 * d1) as f64) < q2 {
                        sum += f.values()[j].abs();
                        count += 1;
                    }
                }
                if count > 0 {
                    best = best.max(sum / count as f64);
                }
                r *= 2.0;
            }
            assert!(
                (fast.values()[idx] - best).abs() < 1e-12,
                "idx {idx}: {} vs {best}",
                fast.values()[idx]
            );
        }
    }

    #[test]
    fn dictionary_envelope_invariant() {
        for d in [1usize, 2] {
            let grid = Grid::new(d, 2.0, 33).unwrap();
            let dict = TestDictionary::standard(grid);
            assert_eq!(dict.members.len(), 8);
            assert!(!dict.scales.is_empty() && dict.scales.len() <= 12);
            assert!(dict.envelope_holds_on_grid(grid));
        }
    }

    #[test]
    fn grand_maximal_properties() {
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let dict = TestDictionary::standard(grid);
        let zero = Field::zeros(grid);
        assert_eq!(grand_maximal(&zero, &dict).unwrap().norm_linf(), 0.0);

        let f = Field::from_fn(grid, |p| (1.0 - 4.0 * p[0].abs()).max(0.0));
        let gm = grand_maximal(&f, &dict).unwrap();

        // homogeneity
        let alpha = -2.5;
        let gma = grand_maximal(&f.scale(alpha), &dict).unwrap();
        for i in 0..grid.len() {
            assert!((gma.values()[i] - alpha.abs() * gm.values()[i]).abs() < 1e-12);
        }

        // dominates each single member convolution at zero offset
        let (prof, c) = &dict.members[0];
        let t = dict.scales[dict.scales.len() - 1];
        let mut st = Stencil::sample(grid, prof, t).unwrap();
        for tap in &mut st.taps {
            tap.1 *= c;
        }
        let conv = convolve_with_stencil(&f, &st);
        for i in 0..grid.len() {
            assert!(gm.values()[i] >= conv.values()[i].abs() - 1e-14);
        }

        // sublinearity
        let g = Field::from_fn(grid, |p| (p[0] * 3.0).sin() * 0.4);
        let both = grand_maximal(&f.add(&g).unwrap(), &dict).unwrap();
        let gg = grand_maximal(&g, &dict).unwrap();
        for i in 0..grid.len() {
            assert!(both.values()[i] <= gm.values()[i] + gg.values()[i] + 1e-10);
        }
    }

    #[test]
    fn heat_maximal_below_hardy_littlewood() {
        // the semigroup maximal function sits under one empirical
        // multiple of the Hardy-Littlewood one across a random family
        use rand::Rng;
        use rand::SeedableRng;
        let grid = Grid::new(1, 2.0, 101).unwrap();
        let v = Potential::constant(grid, 1.0).unwrap();
        let p = Propagator::spectral(DiscreteOperator::assemble(&v)).unwrap();
        let ts = dyadic_heat_times(grid);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut c: f64 = 0.0;
        for _ in 0..8 {
            let a: f64 = rng.gen_range(0.5..2.0);
            let x0: f64 = rng.gen_range(-1.0..1.0);
            let w: f64 = rng.gen_range(0.2..0.6);
            let f = Field::from_fn(grid, |q| a * (-((q[0] - x0) / w).powi(2)).exp());
            let ml = maximal_heat(&p, &f, &ts).unwrap();
            let hl = hardy_littlewood(&f);
            for i in 0..grid.len() {
                if hl.values()[i] > 1e-12 {
                    c = c.max(ml.values()[i] / hl.values()[i]);
                }
            }
        }
        assert!(c.is_finite() && c > 0.0 && c < 10.0, "empirical C = {c}");
    }

    #[test]
    fn ball_max_matches_bruteforce() {
        let grid = Grid::new(2, 1.0, 17).unwrap();
        let g: Vec<f64> = (0..grid.len())
            .map(|i| ((i * 2654435761) % 1000) as f64 / 1000.0)
            .collect();
        for t in [0.2, 0.5, 1.1] {
            let fast = ball_max(&g, grid, t);
            for idx in 0..grid.len() {
                let c = grid.point(idx);
                let mut best = 0.0f64;
                for j in 0..grid.len() {
                    if crate::grid::dist2(grid.point(j), c) < t * t {
                        best = best.max(g[j]);
                    }
                }
                assert!((fast[idx] - best).abs() < 1e-14, "t={t} idx={idx}");
            }
        }
    }
}
