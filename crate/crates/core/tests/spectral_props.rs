mod common;

use common::{max_abs_diff, random_field, reflect_x, reflect_y, rel_l2_diff};
use fdkp::spectral::{norm, transform, Side};
use fdkp::symbols::{mtilde_inverse, mtilde_symbol, n_eps_symbol};
use fdkp::{Field, Frame, Grid, NormKind, SymbolParams};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(20.0, 30.0, 64, 32).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parseval(seed in any::<u64>(), scale in 0.5f64..4.0) {
        let g = grid();
        let f = random_field(g, Frame::Physical, seed, scale);
        let direct: f64 = f.samples().iter().map(|v| v * v).sum::<f64>() * g.dx() * g.dy();
        prop_assert!(close(direct.sqrt(), f.norm_l2(), 1e-12));
    }

    #[test]
    fn transform_round_trip(seed in any::<u64>()) {
        let g = grid();
        let f = random_field(g, Frame::Physical, seed, 2.0);
        let back = transform::backward(&g, &transform::forward(&g, f.samples()).unwrap()).unwrap();
        let err = back.iter().zip(f.samples().iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let size = f.samples().iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-12 * size);
    }

    #[test]
    fn cone_projections_partition(seed in any::<u64>(), eps in 0.02f64..0.25, scaled in any::<bool>()) {
        let g = grid();
        let p = SymbolParams::default().with_epsilon(eps);
        let frame = if scaled { Frame::KpScaled } else { Frame::Physical };
        let f = random_field(g, frame, seed, 3.0);
        let inside = f.project_cone(Side::Inside, &p);
        let outside = f.project_cone(Side::Outside, &p);
        let sum = inside.add(&outside).unwrap();
        prop_assert_eq!(sum.coeffs(), f.coeffs());
        let again = inside.project_cone(Side::Inside, &p);
        prop_assert_eq!(again.coeffs(), inside.coeffs());
        prop_assert!(inside.project_cone(Side::Outside, &p).norm_l2() == 0.0);
        prop_assert!(inside.dot(&outside).unwrap() == 0.0);
        let total = f.norm_l2().powi(2);
        prop_assert!(close(inside.norm_l2().powi(2) + outside.norm_l2().powi(2), total, 1e-12));
    }

    #[test]
    fn scaled_norm_identity(seed in any::<u64>(), eps in 0.02f64..0.25) {
        // the physical image sampled on the stretched grid, u = eps^2 zeta(eps x, eps^2 y)
        let g = grid();
        let p = SymbolParams::default().with_epsilon(eps);
        let zeta = random_field(g, Frame::KpScaled, seed, 2.0);
        let e2 = eps * eps;
        let pg = Grid::new(g.half_width_x / eps, g.half_width_y / e2, g.points_x, g.points_y).unwrap();
        let u1 = Field::from_physical(pg, Frame::Physical, &zeta.samples().mapv(|v| e2 * v)).unwrap();
        let lhs = norm(&u1, NormKind::EpsScaled, &p).unwrap().powi(2);
        let rhs = eps * norm(&zeta, NormKind::Y(1.0), &p).unwrap().powi(2);
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} {rhs}");
        let via_frames = norm(&zeta, NormKind::EpsScaled, &p).unwrap().powi(2);
        prop_assert!(close(via_frames, rhs, 1e-12));
    }

    #[test]
    fn norms_increase_with_order(seed in any::<u64>(), r in 0.0f64..2.0, dr in 0.0f64..1.0) {
        let g = grid();
        let p = SymbolParams::default();
        let f = random_field(g, Frame::KpScaled, seed, 2.0);
        let a = norm(&f, NormKind::Y(r), &p).unwrap();
        let b = norm(&f, NormKind::Y(r + dr), &p).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-14));
        prop_assert!(f.norm_l2() <= a * (1.0 + 1e-14));
    }

    #[test]
    fn multiplier_inverse_pair(seed in any::<u64>()) {
        let g = grid();
        let p = SymbolParams::default();
        let f = random_field(g, Frame::KpScaled, seed, 3.0);
        let back = f
            .apply_multiplier(|a, b| mtilde_symbol(a, b, &p))
            .unwrap()
            .apply_multiplier(|a, b| mtilde_inverse(a, b, &p))
            .unwrap();
        prop_assert!(rel_l2_diff(&f, &back) <= 1e-12);
    }

    #[test]
    fn reflections_commute_with_operations(seed in any::<u64>(), eps in 0.02f64..0.25) {
        let g = grid();
        let p = SymbolParams::default().with_epsilon(eps);
        let f = random_field(g, Frame::KpScaled, seed, 2.0);
        let ops: [&dyn Fn(&Field) -> Field; 4] = [
            &|h| h.apply_multiplier(|a, b| mtilde_inverse(a, b, &p)).unwrap(),
            &|h| h.apply_multiplier(|a, b| n_eps_symbol(a, b, &p)).unwrap(),
            &|h| h.square(),
            &|h| h.project_cone(Side::Outside, &p),
        ];
        for op in ops {
            let scale = op(&f).sup_norm().max(1.0);
            prop_assert!(max_abs_diff(&op(&reflect_x(&f)), &reflect_x(&op(&f))) <= 1e-12 * scale);
            prop_assert!(max_abs_diff(&op(&reflect_y(&f)), &reflect_y(&op(&f))) <= 1e-12 * scale);
        }
    }

    #[test]
    fn symmetrize_is_a_projection(seed in any::<u64>()) {
        let f = random_field(grid(), Frame::Physical, seed, 2.0);
        let s = f.symmetrize();
        prop_assert!(max_abs_diff(&s, &s.symmetrize()) <= 1e-14 * s.sup_norm().max(1.0));
        prop_assert!(s.asymmetry() <= 1e-13);
        prop_assert!(max_abs_diff(&s, &reflect_x(&s)) <= 1e-13 * s.sup_norm().max(1.0));
        prop_assert!(f.sub(&s).unwrap().dot(&s).unwrap().abs() <= 1e-12 * f.norm_l2().powi(2));
    }

    #[test]
    fn dealiased_product_is_bilinear_and_symmetric(seed in any::<u64>()) {
        let g = grid();
        let a = random_field(g, Frame::Physical, seed, 2.0);
        let b = random_field(g, Frame::Physical, seed ^ 0x5eed, 2.0);
        let ab = a.product(&b).unwrap();
        prop_assert!(rel_l2_diff(&ab, &b.product(&a).unwrap()) <= 1e-14);
        prop_assert!(rel_l2_diff(&a.product(&a).unwrap(), &a.square()) <= 1e-14);
        let lhs = a.add(&b).unwrap().square();
        let rhs = a.square().add(&b.square()).unwrap().axpy(2.0, &ab).unwrap();
        prop_assert!(rel_l2_diff(&lhs, &rhs) <= 1e-12);
    }
}

#[test]
fn cos_square_identity() {
    let g = Grid::new(std::f64::consts::PI, std::f64::consts::PI, 32, 32).unwrap();
    let s = Field::from_fn(g, Frame::Physical, |x, _| x.cos()).square();
    let expected = Field::from_fn(g, Frame::Physical, |x, _| 0.5 + 0.5 * (2.0 * x).cos());
    assert!(max_abs_diff(&s, &expected) < 1e-13);
}
