mod common;

use common::{max_abs_diff, random_even_field, random_field, rel_l2_diff};
use fdkp::lumps::sample_lump;
use fdkp::reduction::{JacobianMode, Reducer, SolverConfig};
use fdkp::spectral::{norm, Side};
use fdkp::symbols::mtilde_inverse;
use fdkp::{Field, Frame, Grid, NormKind, SymbolParams};
use proptest::prelude::*;

fn reducer(eps: f64) -> Reducer {
    Reducer::new(Grid::default(), SymbolParams::default().with_epsilon(eps), SolverConfig::default()).unwrap()
}

fn sweep_grid() -> Grid {
    Grid::new(100.0, 100.0, 512, 512).unwrap()
}

fn seed(red: &Reducer, k: usize) -> Field {
    let (s, _) = sample_lump(*red.grid(), k, Frame::KpScaled, red.params()).unwrap();
    red.project(&s).unwrap()
}

fn zero(red: &Reducer) -> Field {
    Field::zeros(*red.grid(), Frame::KpScaled)
}

#[test]
fn zero_inputs_give_zero() {
    let red = reducer(0.1);
    let z = zero(&red);
    assert_eq!(red.f_map(&z, &z).unwrap().norm_l2(), 0.0);
    assert_eq!(red.solve_u2(&z).unwrap().u2.norm_l2(), 0.0);
    assert_eq!(red.r_eps(&z).unwrap().norm_l2(), 0.0);
    assert_eq!(red.s_eps(&z).unwrap().norm_l2(), 0.0);
    let (r, n) = red.reduced_residual(&z).unwrap();
    assert_eq!((r.norm_l2(), n), (0.0, 0.0));
    let zeta = seed(&red, 1);
    assert_eq!(red.linearization_apply(&zeta, &z, false).unwrap().norm_l2(), 0.0);
    assert_eq!(red.fdkp_residual(&z, 0.99).unwrap().l2, 0.0);
}

#[test]
fn supports_follow_the_cone() {
    let red = reducer(0.1);
    let p = *red.params();
    let zeta = seed(&red, 1);
    let hf = red.f_map(&zeta, &zero(&red)).unwrap();
    assert!(hf.norm_l2() > 0.0);
    assert_eq!(hf.project_cone(Side::Inside, &p).norm_l2(), 0.0);
    for f in [red.r_eps(&zeta).unwrap(), red.s_eps(&zeta).unwrap()] {
        assert!(f.norm_l2() > 0.0);
        assert_eq!(f.project_cone(Side::Outside, &p).norm_l2(), 0.0);
    }
    let state = red.solve_u2(&zeta).unwrap();
    assert!(state.diagnostics.converged);
    assert!(state.diagnostics.contraction_factor <= 0.5);
    assert_eq!(state.u2.project_cone(Side::Inside, &p).norm_l2(), 0.0);
}

#[test]
fn lump_is_an_approximate_reduced_solution() {
    let res: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&e| {
            let red = Reducer::new(sweep_grid(), SymbolParams::default().with_epsilon(e), SolverConfig::default()).unwrap();
            let zeta = seed(&red, 1);
            red.reduced_residual(&zeta).unwrap().1 / zeta.norm_l2()
        })
        .collect();
    assert!(res[2] <= 0.1, "{res:?}");
    assert!(res[0] > res[1] && res[1] > res[2], "{res:?}");
}

#[test]
fn residual_preserves_symmetry() {
    let red = reducer(0.1);
    let zeta = seed(&red, 2);
    let (r, _) = red.reduced_residual(&zeta).unwrap();
    assert!(r.asymmetry() <= 1e-12);
}

#[test]
fn limit_linearization_matches_formula() {
    let red = reducer(0.1);
    let p = *red.params();
    let zeta = seed(&red, 1);
    let w = red.project(&random_even_field(*red.grid(), Frame::KpScaled, 7, 2.0)).unwrap();
    let got = red.linearization_apply(&zeta, &w, true).unwrap();
    let explicit = zeta
        .product(&w)
        .unwrap()
        .project_cone(Side::Inside, &p)
        .apply_multiplier(|a, b| mtilde_inverse(a, b, &p))
        .unwrap();
    let expected = w.axpy(2.0, &explicit).unwrap();
    assert!(rel_l2_diff(&expected, &got) <= 1e-10);
}

fn gradient_error(jacobian: JacobianMode, seed_id: u64) -> f64 {
    let cfg = SolverConfig { jacobian, ..SolverConfig::default() };
    let red = Reducer::new(Grid::default(), SymbolParams::default().with_epsilon(0.2), cfg).unwrap();
    let g = *red.grid();
    let pert = red.project(&random_even_field(g, Frame::KpScaled, seed_id, 1.5)).unwrap();
    let base = seed(&red, 1);
    let zeta = base.axpy(0.1 * base.norm_l2() / pert.norm_l2(), &pert).unwrap();
    let w = red.project(&random_even_field(g, Frame::KpScaled, seed_id + 1, 1.5)).unwrap();
    let w = w.scale(1.0 / w.norm_l2());
    let h = 1e-4;
    let plus = red.reduced_residual(&zeta.axpy(h, &w).unwrap()).unwrap().0;
    let minus = red.reduced_residual(&zeta.axpy(-h, &w).unwrap()).unwrap().0;
    let fd = plus.sub(&minus).unwrap().scale(0.5 / h);
    let lin = red.linearization_apply(&zeta, &w, false).unwrap();
    rel_l2_diff(&fd, &lin)
}

#[test]
fn gradient_check() {
    for s in [11, 12] {
        for mode in [JacobianMode::Exact, JacobianMode::FiniteDifference] {
            let err = gradient_error(mode, s);
            assert!(err <= 1e-5, "{mode:?} seed {s}: {err:e}");
        }
    }
}

#[test]
fn newton_assembly_and_split_system() {
    let red = reducer(0.1);
    let zeta0 = seed(&red, 1);
    let (zeta, diag) = red.newton_solve(&zeta0).unwrap();
    assert!(diag.converged);
    assert!(diag.steps() <= 10, "{diag:?}");
    assert!(diag.final_residual() <= 1e-10);
    let wave = red.assemble_solution(&zeta).unwrap();
    assert_eq!(wave.speed, 1.0 - 0.1 * 0.1);
    assert!(wave.profile.asymmetry() <= 1e-12);
    let full = red.fdkp_residual(&wave.profile, wave.speed).unwrap();
    assert!(full.relative <= 1e-8, "{full:?}");
    let (inner, outer) = red.split_residuals(&wave.low, &wave.high, wave.speed).unwrap();
    let total = inner.add(&outer).unwrap().norm_l2() / wave.profile.norm_l2();
    assert!((total - full.relative).abs() <= 1e-14 + 1e-12 * full.relative);
    assert_eq!(inner.dot(&outer).unwrap(), 0.0);
    let ablated = red.fdkp_residual(&wave.low, wave.speed).unwrap();
    assert!(ablated.relative >= 10.0 * full.relative, "{ablated:?} vs {full:?}");
    let p = red.params();
    let phys = wave.high.norm_l2() * 0.1f64.sqrt();
    assert!(phys > 0.0 && norm(&wave.high, NormKind::L2, p).unwrap() > 0.0);
}

#[test]
fn wrong_sign_seed_is_recorded() {
    let red = reducer(0.1);
    let zeta0 = seed(&red, 1).scale(-1.0);
    match red.newton_solve(&zeta0) {
        Ok((z, d)) => eprintln!("negative seed: converged={} to |zeta|={:.3e}", d.converged, z.norm_l2()),
        Err(e) => eprintln!("negative seed: {e}"),
    }
}

#[test]
fn mismatched_frame_is_rejected() {
    let red = reducer(0.1);
    let f = Field::zeros(*red.grid(), Frame::Physical);
    assert!(red.reduced_residual(&f).is_err());
    let other = Field::zeros(Grid::new(50.0, 50.0, 64, 64).unwrap(), Frame::KpScaled);
    assert!(red.solve_u2(&other).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tail_bound(seed in any::<u64>(), eps in 0.02f64..0.25, scale in 1.0f64..20.0) {
        let g = Grid::new(30.0, 30.0, 64, 64).unwrap();
        let p = SymbolParams::default().with_epsilon(eps);
        let zeta = random_field(g, Frame::KpScaled, seed, scale);
        let tail = zeta.project_cone(Side::Outside, &p).norm_l2();
        let y1 = norm(&zeta, NormKind::Y(1.0), &p).unwrap();
        prop_assert!(tail <= 2f64.sqrt() * eps / p.delta * y1);
    }

    #[test]
    fn symmetric_residual_for_random_even_input(seed in any::<u64>()) {
        let g = Grid::new(30.0, 30.0, 64, 64).unwrap();
        let red = Reducer::new(g, SymbolParams::default().with_epsilon(0.2), SolverConfig::default()).unwrap();
        let zeta = red.project(&random_even_field(g, Frame::KpScaled, seed, 1.0)).unwrap().scale(0.1);
        let (r, _) = red.reduced_residual(&zeta).unwrap();
        prop_assert!(max_abs_diff(&r, &r.symmetrize()) <= 1e-12 * r.sup_norm().max(1e-300));
    }
}
