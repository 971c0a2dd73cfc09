use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::fit::loglog_fit;
use super::SweepReport;
use crate::error::{Error, Result};
use crate::reduction::{tables, Reducer, Spec};
use crate::spectral::{self, NormKind};
use crate::symbols::SymbolParams;

/// Exponent slack allowed below the proven power.
pub const EXPONENT_SLACK: f64 = 0.25;
/// Largest admissible max/min spread of `ratio / eps^p` across a sweep.
pub const RATIO_BAND: f64 = 10.0;
/// Number of smallest amplitudes used for exponent fits.
pub const FIT_POINTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    /// `|u2|_X / |u1|_eps^2`, bounded by `eps`.
    U2Bound,
    /// `|du2[u1] v|_X / (|v|_eps |u1|_eps)`, bounded by `eps`.
    Du2Bound,
    /// `|R_eps(u1)|_L2 / |u1|_eps^3`, bounded by `eps^2`.
    #[serde(rename = "R_eps_bound")]
    REpsBound,
    /// `|S_eps(zeta)|_L2 / |zeta|_Y1^3`, bounded by `eps`.
    #[serde(rename = "S_eps_bound")]
    SEpsBound,
    /// `|T_eps(zeta)|_Y(1+theta) / |zeta|_Y1^2`, bounded by `eps^(1-theta)`.
    #[serde(rename = "T_eps_bound")]
    TEpsBound,
    /// Norm of `chi_eps - I` from `Y^1` to `L2` on the lattice, bounded by `sqrt(2) eps / delta`.
    TailBound,
}

impl Estimate {
    pub const ALL: [Estimate; 6] = [
        Estimate::U2Bound,
        Estimate::Du2Bound,
        Estimate::REpsBound,
        Estimate::SEpsBound,
        Estimate::TEpsBound,
        Estimate::TailBound,
    ];

    pub fn key(&self) -> &'static str {
        match self {
            Estimate::U2Bound => "u2_bound",
            Estimate::Du2Bound => "du2_bound",
            Estimate::REpsBound => "R_eps_bound",
            Estimate::SEpsBound => "S_eps_bound",
            Estimate::TEpsBound => "T_eps_bound",
            Estimate::TailBound => "tail_bound",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.key() == key)
    }

    /// Power of `eps` in the proven bound.
    pub fn exponent(&self, p: &SymbolParams) -> f64 {
        match self {
            Estimate::REpsBound => 2.0,
            Estimate::TEpsBound => 1.0 - p.theta,
            _ => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateVerdict {
    pub name: Estimate,
    pub required_exponent: f64,
    pub fitted_exponent: f64,
    pub fitted_constant: f64,
    /// Max/min of `ratio / eps^p` over every measured amplitude.
    pub band: f64,
    pub pass: bool,
}

/// Measures every estimate ratio for the cone-projected seed `zeta` at the reducer's amplitude.
pub(crate) fn measure(red: &Reducer, zeta: &Spec) -> Result<BTreeMap<String, f64>> {
    let t = &red.t;
    let p = *red.params();
    let eps = p.epsilon;
    let mut out = BTreeMap::new();
    let u1 = red.field(zeta.clone());
    let u1_eps = spectral::norm(&u1, NormKind::EpsScaled, &p)?;
    let zeta_y1 = spectral::norm(&u1, NormKind::Y(1.0), &p)?;
    let (w, _) = red.solve_w(zeta, None)?;
    out.insert(Estimate::U2Bound.key().into(), red.x_norm(&w) / u1_eps.powi(2));

    // direction with a different profile from the seed, normalised in the scaled norm
    let dir = t.project_iterate(&t.square(zeta));
    let dir_n = spectral::norm(&red.field(dir.clone()), NormKind::EpsScaled, &p)?;
    if dir_n > 0.0 {
        let h = red.cfg.jacobian_fd_step * u1_eps / dir_n;
        let shifted = tables::axpy(zeta, h, &dir);
        let (w_tight, _) = red.solve_w_to(zeta, Some(&w), red.derivative_tol())?;
        let w_shift = red.solve_w_shifted(&shifted, &w_tight)?;
        let dw = tables::axpy(&w_shift, -1.0, &w_tight).mapv(|c| c / h);
        out.insert(Estimate::Du2Bound.key().into(), red.x_norm(&dw) / (dir_n * u1_eps));
    }

    let s = red.s_spec(zeta, &w);
    let s_l2 = t.norm(&s);
    // R = eps^2 S as a scaled field, whose physical L2 norm carries sqrt(eps)
    out.insert(Estimate::REpsBound.key().into(), eps.sqrt() * eps * eps * s_l2 / u1_eps.powi(3));
    out.insert(Estimate::SEpsBound.key().into(), s_l2 / zeta_y1.powi(3));

    let sq = t.apply(&t.inside, &t.square(zeta));
    let diff = tables::Spec::from_shape_fn(sq.dim(), |(i, j)| sq[[i, j]] * (t.resolvent[[i, j]] - t.mtilde_inv[[i, j]]));
    let tsum = tables::add(&diff, &t.apply(&t.resolvent, &s));
    let t_norm = spectral::norm(&red.field(tsum), NormKind::Y(1.0 + p.theta), &p)?;
    out.insert(Estimate::TEpsBound.key().into(), t_norm / zeta_y1.powi(2));

    out.insert(Estimate::TailBound.key().into(), tail_operator_norm(red));
    Ok(out)
}

/// `sup (1 + k1^2 + k2^2/k1^2)^(-1/2)` over retained modes outside the scaled cone.
pub(crate) fn tail_operator_norm(red: &Reducer) -> f64 {
    let t = &red.t;
    let g = &t.grid;
    let mut best: f64 = 0.0;
    for ((i, j), &o) in t.outside.indexed_iter() {
        if o == 0.0 {
            continue;
        }
        let w = NormKind::Y(1.0).weight(g.k1(i), g.k2(j), &t.params);
        best = best.max(w.sqrt().recip());
    }
    best
}

/// Fits `ratio ~ C eps^a` over the smallest amplitudes and checks the exponent and the band.
pub fn verify_estimate(name: Estimate, report: &SweepReport) -> Result<EstimateVerdict> {
    let p = report.params;
    let mut points: Vec<(f64, f64)> = report
        .records
        .iter()
        .filter_map(|r| r.estimate_ratios.get(name.key()).map(|&v| (r.epsilon, v)))
        .filter(|&(e, v)| e > 0.0 && v > 0.0 && v.is_finite())
        .collect();
    if points.len() < FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} needs {FIT_POINTS} amplitudes, found {}",
            name.key(),
            points.len()
        )));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let required = name.exponent(&p);
    let window = &points[..FIT_POINTS];
    let (slope, intercept) = loglog_fit(
        &window.iter().map(|q| q.0).collect::<Vec<_>>(),
        &window.iter().map(|q| q.1).collect::<Vec<_>>(),
    );
    let scaled: Vec<f64> = points.iter().map(|&(e, v)| v / e.powf(required)).collect();
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    let band = hi / lo;
    Ok(EstimateVerdict {
        name,
        required_exponent: required,
        fitted_exponent: slope,
        fitted_constant: intercept.exp(),
        band,
        pass: slope >= required - EXPONENT_SLACK && band <= RATIO_BAND,
    })
}
