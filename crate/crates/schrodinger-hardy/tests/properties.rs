//! Property tests for the structural invariants: serialization is the
//! identity, quadrature is linear, layers partition the positive reals,
//! and the gauge is one-homogeneous.

use proptest::prelude::*;

use schrodinger_hardy::field::Field;
use schrodinger_hardy::grid::{Ball, Grid};
use schrodinger_hardy::orlicz::{luxemburg, orlicz_family, GrowthFunction, Weight};
use schrodinger_hardy::rho::layer_index;

fn arb_grid() -> impl Strategy<Value = Grid> {
    (1usize..=3, 0.5f64..4.0, 3usize..=9)
        .prop_map(|(d, r, m)| Grid::new(d, r, m).expect("valid grid"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn binary_roundtrip_is_identity(grid in arb_grid(), seed in any::<u64>()) {
        let f = Field::from_fn(grid, |p| {
            let s = (seed % 1000) as f64 / 1000.0;
            (p[0] * 3.1 + s).sin() * (1.0 + p[1]) + p[2]
        });
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        let back = Field::read_from(&mut buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &f);
        let mut buf2 = Vec::new();
        back.write_to(&mut buf2).unwrap();
        prop_assert_eq!(buf, buf2);
    }

    #[test]
    fn quadrature_linear(grid in arb_grid(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f = Field::from_fn(grid, |p| (p[0] * 2.0).cos() + p[1]);
        let g = Field::from_fn(grid, |p| p[0] - p[2] * p[2]);
        let lhs = f.scale(a).add(&g.scale(b)).unwrap().integrate();
        let rhs = a * f.integrate() + b * g.integrate();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
    }

    #[test]
    fn layers_partition(log_rho in -8.0f64..8.0) {
        let rho = log_rho.exp();
        let n = layer_index(rho);
        let up = (2f64).powf(-0.5 * n as f64);
        let lo = (2f64).powf(-0.5 * (n + 1) as f64);
        prop_assert!(lo < rho && rho <= up);
        // uniqueness: neighbors reject it
        prop_assert!(!(rho <= (2f64).powf(-0.5 * (n + 1) as f64)));
        prop_assert!(!(rho > (2f64).powf(-0.5 * n as f64)));
    }

    #[test]
    fn ball_average_bounded_by_range(cx in -0.8f64..0.8, r in 0.3f64..1.0) {
        let grid = Grid::new(2, 1.0, 17).unwrap();
        let f = Field::from_fn(grid, |p| (5.0 * p[0]).sin() + p[1] * p[1]);
        let ball = Ball::new([cx, 0.0, 0.0], r).unwrap();
        if let Ok(avg) = f.ball_average(&ball) {
            let idxs = grid.indices_in_ball(&ball);
            let lo = idxs.iter().map(|&i| f.values()[i]).fold(f64::MAX, f64::min);
            let hi = idxs.iter().map(|&i| f.values()[i]).fold(f64::MIN, f64::max);
            prop_assert!(lo <= avg && avg <= hi);
        }
    }

    #[test]
    fn gauge_one_homogeneous(alpha in 0.05f64..20.0) {
        let grid = Grid::new(1, 2.0, 65).unwrap();
        let g = Field::from_fn(grid, |p| (1.0 - p[0].abs()).max(0.0) * 3.0);
        let base = luxemburg(&g, orlicz_family(GrowthFunction::Xi), &Weight::Sigma)
            .unwrap()
            .lambda_star;
        let scaled = luxemburg(&g.scale(alpha), orlicz_family(GrowthFunction::Xi), &Weight::Sigma)
            .unwrap()
            .lambda_star;
        prop_assert!((scaled - alpha * base).abs() <= 1e-7 * alpha * base);
    }
}
