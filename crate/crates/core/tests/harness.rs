use fdkp::harness::{
    dispersion_check, kp_deviation_fit, nondegeneracy_probe, resolvent_replacement_fit, run_sweep, verify_estimate,
    zero_potential_eigenvalue, CheckStatus, Estimate, DEFAULT_EPSILONS,
};
use fdkp::lumps::sample_lump;
use fdkp::reduction::SolverConfig;
use fdkp::spectral::norm;
use fdkp::symbols::{mtilde_inverse, mtilde_symbol};
use fdkp::{Error, Frame, Grid, NormKind, SymbolParams};

#[test]
fn dispersion_regimes() {
    let v = dispersion_check(&SymbolParams::default(), 10.0, 1000).unwrap();
    assert_eq!(v.speed_at_zero, 1.0);
    assert!(v.strictly_increasing);
    assert_eq!(v.status, CheckStatus::Pass);
    let weak = SymbolParams { beta: 0.1, ..SymbolParams::default() };
    let v = dispersion_check(&weak, 10.0, 1000).unwrap();
    assert!(!v.strictly_increasing);
    assert!(v.first_violation.is_some());
    assert_eq!(v.status, CheckStatus::NotApplicable);
}

#[test]
fn symbol_asymptotics() {
    let p = SymbolParams::default();
    let kp = kp_deviation_fit(&p).unwrap();
    assert!(kp.fitted_exponent >= 3.75, "{kp:?}");
    for theta in [0.0, 0.75] {
        let fit = resolvent_replacement_fit(&p, theta, &DEFAULT_EPSILONS).unwrap();
        assert!(fit.pass, "{fit:?}");
        assert!(fit.fitted_exponent >= 1.0 - theta - 0.25);
    }
    assert!(matches!(
        resolvent_replacement_fit(&p, 0.75, &[0.2, 0.1]),
        Err(Error::InsufficientData(_))
    ));
}

fn lump_residuals(g: Grid, p: &SymbolParams) -> (f64, f64, f64) {
    let (z, removed) = sample_lump(g, 1, Frame::KpScaled, p).unwrap();
    let direct = z.apply_multiplier(|a, b| mtilde_symbol(a, b, p)).unwrap().add(&z.square()).unwrap();
    let inverse = z.add(&z.square().apply_multiplier(|a, b| mtilde_inverse(a, b, p)).unwrap()).unwrap();
    (direct.norm_l2() / z.norm_l2(), inverse.norm_l2() / z.norm_l2(), removed)
}

#[test]
fn sampled_lump_residual_trends() {
    let p = SymbolParams::default();
    let (d0, _, f0) = lump_residuals(Grid::default(), &p);
    eprintln!("default-grid residual of m~ z + z^2: {d0:.3e} relative (target 5e-3)");
    assert!(f0 <= 1e-3, "{f0:e}");
    let boxes = [(50.0, 256), (100.0, 512), (200.0, 1024)];
    let rows: Vec<(f64, f64, f64)> = boxes.iter().map(|&(l, n)| lump_residuals(Grid::new(l, l, n, n).unwrap(), &p)).collect();
    for w in rows.windows(2) {
        assert!(w[1].0 < w[0].0, "{rows:?}");
        assert!(w[1].2 < w[0].2, "{rows:?}");
        assert!((w[1].1 / w[0].1 - 0.5).abs() <= 0.05, "{rows:?}");
    }
}

#[test]
fn sampled_lump_regularity() {
    let p = SymbolParams::default();
    let (z, _) = sample_lump(Grid::default(), 2, Frame::KpScaled, &p).unwrap();
    assert!(z.asymmetry() <= 1e-14);
    let y2 = |n: usize| {
        let (z, _) = sample_lump(Grid::new(100.0, 100.0, n, n).unwrap(), 1, Frame::KpScaled, &p).unwrap();
        norm(&z, NormKind::Y(2.0), &p).unwrap()
    };
    let (a, b) = (y2(256), y2(512));
    assert!(a.is_finite() && ((b - a) / a).abs() <= 0.02, "{a} {b}");
}

#[test]
fn short_sweeps() {
    let g = Grid::new(50.0, 50.0, 64, 64).unwrap();
    let p = SymbolParams::default();
    let cfg = SolverConfig::default();
    let two = run_sweep(1, &[0.2, 0.1], g, &p, &cfg).unwrap();
    assert_eq!(two.records.len(), 2);
    for e in Estimate::ALL {
        assert!(matches!(verify_estimate(e, &two), Err(Error::InsufficientData(_))));
    }
    assert!(run_sweep(1, &[0.1, 0.2], g, &p, &cfg).is_err());
    assert!(run_sweep(1, &[0.3], g, &p, &cfg).is_err());
    assert!(run_sweep(3, &[0.1], g, &p, &cfg).is_err());
}

#[test]
fn tail_estimate_on_coarse_sweep() {
    let g = Grid::new(50.0, 50.0, 64, 64).unwrap();
    let r = run_sweep(1, &DEFAULT_EPSILONS, g, &SymbolParams::default(), &SolverConfig::default()).unwrap();
    let v = verify_estimate(Estimate::TailBound, &r).unwrap();
    assert!(v.pass, "{v:?}");
    assert!((v.fitted_exponent - 1.0).abs() <= 0.25);
}

#[test]
fn probe_controls() {
    let p = SymbolParams::default();
    let g = Grid::new(50.0, 50.0, 64, 64).unwrap();
    assert_eq!(zero_potential_eigenvalue(g, &p).unwrap(), 1.0);
    assert!(matches!(nondegeneracy_probe(3, &[g], &p), Err(Error::UnknownLump(3))));
}
