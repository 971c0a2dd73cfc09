use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::estimates::{self, verify_estimate, Estimate, EstimateVerdict, FIT_POINTS};
use super::fit::loglog_fit;
use crate::error::{Error, Result};
use crate::lumps::{lump_for_mtilde, sample_lump};
use crate::reduction::{Reducer, SolverConfig};
use crate::spectral::{self, Field, Frame, Grid, NormKind};
use crate::symbols::SymbolParams;

/// Outcome of the high-frequency contraction for the projected lump seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionRecord {
    pub iterations: usize,
    pub contraction_factor: f64,
    pub converged: bool,
    pub outside_modes: usize,
}

/// Regime conditions of the existence theory, reported rather than enforced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryRegime {
    /// `eps < M^-2`.
    pub epsilon_in_range: bool,
    /// `|u1|_eps` of the projected seed.
    pub seed_eps_norm: f64,
    pub seed_in_unit_ball: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub newton_steps: usize,
    pub krylov_iterations: Vec<usize>,
    pub newton_residuals: Vec<f64>,
    pub quadratic_constant: Option<f64>,
    pub reduced_l2: f64,
    pub full_l2: f64,
    pub full_z: f64,
    pub full_relative: f64,
    /// Cone and complement residuals of the split system, relative to the profile.
    pub split_relative: [f64; 2],
    pub speed: f64,
    pub approx_error_sup: f64,
    pub y1theta_distance: f64,
    /// `sup |u2| / sup |u1|`.
    pub u2_sup_ratio: f64,
    pub asymmetry: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub epsilon: f64,
    pub contraction: Option<ContractionRecord>,
    pub theory_regime: Option<TheoryRegime>,
    pub estimate_ratios: BTreeMap<String, f64>,
    pub solution: Option<SolutionRecord>,
    pub failure: Option<String>,
}

impl SweepRecord {
    fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            contraction: None,
            theory_regime: None,
            estimate_ratios: BTreeMap::new(),
            solution: None,
            failure: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub k_index: usize,
    pub grid: Grid,
    pub params: SymbolParams,
    pub solver: SolverConfig,
    /// Energy fraction of the sampled seed removed by the forbidden modes.
    pub seed_removed_fraction: f64,
    pub records: Vec<SweepRecord>,
    pub estimates: Vec<EstimateVerdict>,
    /// Observed power of the approximation error over the smallest amplitudes.
    pub approx_error_exponent: Option<f64>,
    pub checks: Vec<CriterionCheck>,
}

impl SweepReport {
    pub fn check(&self, name: &str) -> Option<&CriterionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn solutions(&self) -> Vec<(f64, &SolutionRecord)> {
        self.records
            .iter()
            .filter_map(|r| r.solution.as_ref().map(|s| (r.epsilon, s)))
            .collect()
    }
}

/// Largest contraction factor tolerated at `eps <= 0.1`.
pub const CONTRACTION_LIMIT: f64 = 0.5;
/// Reduced residual below which a Newton solve counts as converged.
pub const REDUCED_TOL: f64 = 1e-10;
/// Largest admissible full relative residual of a reassembled wave.
pub const FULL_TOL: f64 = 1e-8;
/// Largest admissible asymmetry of a computed wave.
pub const ASYMMETRY_TOL: f64 = 1e-12;

/// Normalised sup distance between a wave and the scaled lump.
pub fn approximation_error(u: &Field, epsilon: f64, k_index: usize, p: &SymbolParams) -> Result<f64> {
    let lump = lump_for_mtilde(k_index, p)?;
    let g = *u.grid();
    let mut worst: f64 = 0.0;
    match u.frame() {
        Frame::KpScaled => {
            for ((i, j), v) in u.samples().indexed_iter() {
                worst = worst.max((v - lump.eval(g.x(i), g.y(j))).abs());
            }
        }
        Frame::Physical => {
            if !(epsilon > 0.0) {
                return Err(Error::param("epsilon", "physical comparison needs epsilon > 0"));
            }
            let e2 = epsilon * epsilon;
            for ((i, j), v) in u.samples().indexed_iter() {
                let target = e2 * lump.eval(epsilon * g.x(i), e2 * g.y(j));
                worst = worst.max((v - target).abs() / e2);
            }
        }
    }
    Ok(worst)
}

/// Solves the reduced problem at each amplitude and measures every estimate.
pub fn run_sweep(
    k_index: usize,
    epsilons: &[f64],
    grid: Grid,
    p: &SymbolParams,
    cfg: &SolverConfig,
) -> Result<SweepReport> {
    for w in epsilons.windows(2) {
        if w[1] >= w[0] {
            return Err(Error::param("epsilons", "must be strictly decreasing"));
        }
    }
    for &e in epsilons {
        if !(e > 0.0 && e < p.epsilon_max) {
            return Err(Error::param("epsilons", format!("{e} outside (0, {})", p.epsilon_max)));
        }
    }
    cfg.validate()?;
    lump_for_mtilde(k_index, p)?;
    let (seed, removed) = sample_lump(grid, k_index, Frame::KpScaled, p)?;
    let mut records = Vec::with_capacity(epsilons.len());
    for &e in epsilons {
        let mut rec = SweepRecord::new(e);
        if let Err(err) = measure_point(&mut rec, k_index, &seed, grid, &p.with_epsilon(e), cfg) {
            rec.failure = Some(err.to_string());
        }
        records.push(rec);
    }
    let mut report = SweepReport {
        k_index,
        grid,
        params: *p,
        solver: *cfg,
        seed_removed_fraction: removed,
        records,
        estimates: Vec::new(),
        approx_error_exponent: None,
        checks: Vec::new(),
    };
    summarise(&mut report);
    Ok(report)
}

fn measure_point(
    rec: &mut SweepRecord,
    k_index: usize,
    seed: &Field,
    grid: Grid,
    p: &SymbolParams,
    cfg: &SolverConfig,
) -> Result<()> {
    let red = Reducer::new(grid, *p, *cfg)?;
    let projected = red.project(seed)?;
    let state = red.solve_u2(&projected)?;
    rec.contraction = Some(ContractionRecord {
        iterations: state.diagnostics.iterations,
        contraction_factor: state.diagnostics.contraction_factor,
        converged: state.diagnostics.converged,
        outside_modes: state.diagnostics.outside_modes,
    });
    let seed_eps_norm = spectral::norm(&projected, NormKind::EpsScaled, p)?;
    rec.theory_regime = Some(TheoryRegime {
        epsilon_in_range: p.in_theory_regime(),
        seed_eps_norm,
        seed_in_unit_ball: seed_eps_norm <= 1.0,
    });
    rec.estimate_ratios = estimates::measure(&red, projected.coeffs())?;

    let (zeta, diag) = red.newton_solve(seed)?;
    let wave = red.assemble_solution(&zeta)?;
    let full = red.fdkp_residual(&wave.profile, wave.speed)?;
    let (_, reduced) = red.reduced_residual(&zeta)?;
    let (inner, outer) = red.split_residuals(&wave.low, &wave.high, wave.speed)?;
    let vn = wave.profile.norm_l2();
    let low_sup = wave.low.sup_norm();
    rec.solution = Some(SolutionRecord {
        newton_steps: diag.steps(),
        krylov_iterations: diag.krylov_iterations.clone(),
        newton_residuals: diag.residuals.clone(),
        quadratic_constant: diag.quadratic_constant,
        reduced_l2: reduced,
        full_l2: full.l2,
        full_z: full.z,
        full_relative: full.relative,
        split_relative: [inner.norm_l2() / vn, outer.norm_l2() / vn],
        speed: wave.speed,
        approx_error_sup: approximation_error(&wave.profile, p.epsilon, k_index, p)?,
        y1theta_distance: spectral::norm(&zeta.sub(seed)?, NormKind::Y(1.0 + p.theta), p)?,
        u2_sup_ratio: if low_sup > 0.0 { wave.high.sup_norm() / low_sup } else { 0.0 },
        asymmetry: wave.profile.asymmetry(),
    });
    Ok(())
}

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn summarise(report: &mut SweepReport) {
    let n = report.records.len();
    report.estimates = Estimate::ALL
        .iter()
        .filter_map(|&e| verify_estimate(e, report).ok())
        .collect();
    let sols = report.solutions();
    let mut exponent = None;
    if sols.len() >= FIT_POINTS {
        let mut pts: Vec<(f64, f64)> = sols.iter().map(|(e, s)| (*e, s.approx_error_sup)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let w = &pts[..FIT_POINTS];
        let xs: Vec<f64> = w.iter().map(|q| q.0).collect();
        let ys: Vec<f64> = w.iter().map(|q| q.1).collect();
        exponent = Some(loglog_fit(&xs, &ys).0);
    }
    let mut checks = Vec::new();

    let failures: Vec<String> = report
        .records
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("eps {}: {f}", r.epsilon)))
        .collect();

    let mut contraction_ok = n > 0;
    let mut worst_factor: f64 = 0.0;
    for r in &report.records {
        match &r.contraction {
            Some(c) if c.converged => {
                if r.epsilon <= 0.1 {
                    worst_factor = worst_factor.max(c.contraction_factor);
                    contraction_ok &= c.contraction_factor <= CONTRACTION_LIMIT;
                }
            }
            _ => contraction_ok = false,
        }
    }
    let u2 = report.estimates.iter().find(|v| v.name == Estimate::U2Bound);
    let u2_band = u2.map_or(f64::INFINITY, |v| v.band);
    checks.push(CriterionCheck {
        name: "contraction".into(),
        pass: contraction_ok && u2_band <= estimates::RATIO_BAND,
        detail: format!("max factor at eps<=0.1 {worst_factor:.3e}; u2 ratio band {u2_band:.3}"),
    });

    let newton_ok = n > 0
        && sols.len() == n
        && sols.iter().all(|(e, s)| {
            s.reduced_l2 <= REDUCED_TOL && s.full_relative <= FULL_TOL && s.speed == 1.0 - e * e
        });
    let worst_full = sols.iter().map(|(_, s)| s.full_relative).fold(0.0, f64::max);
    let worst_reduced = sols.iter().map(|(_, s)| s.reduced_l2).fold(0.0, f64::max);
    checks.push(CriterionCheck {
        name: "newton_existence".into(),
        pass: newton_ok,
        detail: format!(
            "{}/{n} converged; max reduced {worst_reduced:.2e}; max full relative {worst_full:.2e}{}",
            sols.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    });

    let errs: Vec<f64> = sols.iter().map(|(_, s)| s.approx_error_sup).collect();
    let dists: Vec<f64> = sols.iter().map(|(_, s)| s.y1theta_distance).collect();
    let first_last = match (errs.first(), errs.last()) {
        (Some(a), Some(b)) if errs.len() >= 2 => b / a,
        _ => f64::INFINITY,
    };
    checks.push(CriterionCheck {
        name: "approximation".into(),
        pass: newton_ok && strictly_decreasing(&errs) && strictly_decreasing(&dists) && first_last <= 0.5,
        detail: format!("errors {}; last/first {first_last:.3}; distances {}", sci(&errs), sci(&dists)),
    });

    let wanted = [
        Estimate::U2Bound,
        Estimate::REpsBound,
        Estimate::SEpsBound,
        Estimate::TEpsBound,
        Estimate::TailBound,
    ];
    let verdicts: Vec<String> = wanted
        .iter()
        .map(|w| match report.estimates.iter().find(|v| v.name == *w) {
            Some(v) => format!("{} slope {:.2} band {:.2}", w.key(), v.fitted_exponent, v.band),
            None => format!("{} missing", w.key()),
        })
        .collect();
    checks.push(CriterionCheck {
        name: "estimates".into(),
        pass: wanted
            .iter()
            .all(|w| report.estimates.iter().any(|v| v.name == *w && v.pass)),
        detail: verdicts.join("; "),
    });

    let worst_asym = sols.iter().map(|(_, s)| s.asymmetry).fold(0.0, f64::max);
    checks.push(CriterionCheck {
        name: "symmetry".into(),
        pass: !sols.is_empty() && worst_asym <= ASYMMETRY_TOL,
        detail: format!("max asymmetry {worst_asym:.2e}"),
    });
    report.approx_error_exponent = exponent;
    report.checks = checks;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(g: Grid, frame: Frame, p: &SymbolParams) -> Field {
        let lump = lump_for_mtilde(1, p).unwrap();
        let e = p.epsilon;
        let s = ndarray::Array2::from_shape_fn(g.shape(), |(i, j)| match frame {
            Frame::KpScaled => lump.eval(g.x(i), g.y(j)),
            Frame::Physical => e * e * lump.eval(e * g.x(i), e * e * g.y(j)),
        });
        Field::with_samples(g, frame, s).unwrap()
    }

    #[test]
    fn exact_lump_has_zero_error() {
        let p = SymbolParams::default().with_epsilon(0.1);
        let g = Grid::new(50.0, 50.0, 64, 64).unwrap();
        assert_eq!(approximation_error(&exact(g, Frame::KpScaled, &p), 0.1, 1, &p).unwrap(), 0.0);
        assert_eq!(approximation_error(&exact(g, Frame::Physical, &p), 0.1, 1, &p).unwrap(), 0.0);
    }

    #[test]
    fn error_is_reflection_invariant() {
        let p = SymbolParams::default().with_epsilon(0.1);
        let g = Grid::new(50.0, 50.0, 64, 64).unwrap();
        let lump = exact(g, Frame::KpScaled, &p);
        let s = lump.samples();
        let bump = ndarray::Array2::from_shape_fn(g.shape(), |(i, j)| {
            s[[i, j]] + 0.3 * (-(g.x(i) - 4.0).powi(2) - (g.y(j) + 2.0).powi(2)).exp()
        });
        let mirrored = ndarray::Array2::from_shape_fn(g.shape(), |(i, j)| bump[[g.mirror_x(i), g.mirror_y(j)]]);
        let a = approximation_error(&Field::with_samples(g, Frame::KpScaled, bump).unwrap(), 0.1, 1, &p).unwrap();
        let b = approximation_error(&Field::with_samples(g, Frame::KpScaled, mirrored).unwrap(), 0.1, 1, &p).unwrap();
        assert!(a > 0.1);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_sweep_gives_empty_report() {
        let p = SymbolParams::default();
        let g = Grid::new(50.0, 50.0, 32, 32).unwrap();
        let r = run_sweep(1, &[], g, &p, &SolverConfig::default()).unwrap();
        assert!(r.records.is_empty());
        assert!(r.estimates.is_empty());
    }
}
