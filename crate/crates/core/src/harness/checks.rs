use serde::{Deserialize, Serialize};

use super::estimates::{EXPONENT_SLACK, FIT_POINTS};
use super::fit::loglog_fit;
use crate::error::{Error, Result};
use crate::symbols::{dispersion_speed, m_symbol, mtilde_inverse, mtilde_symbol, resolvent_symbol, SymbolParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Outside the FDKP-I regime; the scan is reported but not judged.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionVerdict {
    pub speed_at_zero: f64,
    pub strictly_increasing: bool,
    /// First sampled `k1` at which `c` fails to increase.
    pub first_violation: Option<f64>,
    pub minimum: f64,
    pub status: CheckStatus,
}

/// Scans `c(k1)` on `samples` equispaced points of `[0, k1_max]`.
pub fn dispersion_check(p: &SymbolParams, k1_max: f64, samples: usize) -> Result<DispersionVerdict> {
    if !(k1_max > 0.0 && k1_max.is_finite()) {
        return Err(Error::param("k1_max", format!("must be positive, got {k1_max}")));
    }
    if samples < 2 {
        return Err(Error::param("samples", "need at least two samples"));
    }
    let h = k1_max / (samples - 1) as f64;
    let c: Vec<f64> = (0..samples).map(|i| dispersion_speed(i as f64 * h, p)).collect();
    let first_violation = c.windows(2).position(|w| w[1] <= w[0]).map(|i| (i + 1) as f64 * h);
    let strictly_increasing = first_violation.is_none();
    let speed_at_zero = c[0];
    let status = if p.beta <= 1.0 / 3.0 {
        CheckStatus::NotApplicable
    } else if speed_at_zero == 1.0 && strictly_increasing {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(DispersionVerdict {
        speed_at_zero,
        strictly_increasing,
        first_violation,
        minimum: c.iter().cloned().fold(f64::INFINITY, f64::min),
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub name: String,
    pub required_exponent: f64,
    pub fitted_exponent: f64,
    pub pass: bool,
}

/// Directions `(k1, k2/k1)` along which the KP deviation is fitted.
pub const RAYS: [(f64, f64); 4] = [(1.0, 0.0), (1.0, 0.5), (0.5, 1.0), (0.2, 1.0)];

/// Fitted power of `|m - m~|` as `(k1, k2/k1) = t (a, b)` shrinks; the smallest over `RAYS`.
pub fn kp_deviation_fit(p: &SymbolParams) -> Result<AsymptoticFit> {
    let ts: Vec<f64> = (0..6).map(|i| 0.1 * 0.5f64.powi(i)).collect();
    let mut worst = f64::INFINITY;
    for (a, b) in RAYS {
        let dev: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let k1 = t * a;
                let k2 = t * b * k1;
                Ok((m_symbol(k1, k2, p)? - mtilde_symbol(k1, k2, p)?).abs())
            })
            .collect::<Result<_>>()?;
        worst = worst.min(loglog_fit(&ts[ts.len() - FIT_POINTS..], &dev[dev.len() - FIT_POINTS..]).0);
    }
    Ok(AsymptoticFit {
        name: "kp_deviation".into(),
        required_exponent: 4.0,
        fitted_exponent: worst,
        pass: worst >= 4.0 - EXPONENT_SLACK,
    })
}

/// `sup |eps^2/(eps^2 + n_eps) - 1/m~| (1 + |(k1, k2/k1)|^2)^((1+theta)/2)` over a
/// continuous sample of the scaled cone `|k1|, |k2/k1| < delta/eps`.
pub fn resolvent_deviation(p: &SymbolParams, theta: f64) -> Result<f64> {
    let edge = p.delta / p.epsilon;
    let axis: Vec<f64> = (0..=60)
        .map(|i| edge * 10f64.powf(-3.0 + 3.0 * i as f64 / 60.0) * (1.0 - 1e-9))
        .collect();
    let mut worst: f64 = 0.0;
    for &k1 in &axis {
        for &ratio in std::iter::once(&0.0).chain(axis.iter()) {
            let k2 = ratio * k1;
            let d = (resolvent_symbol(k1, k2, p)? - mtilde_inverse(k1, k2, p)?).abs();
            let q2 = k1 * k1 + ratio * ratio;
            worst = worst.max(d * (1.0 + q2).powf(0.5 * (1.0 + theta)));
        }
    }
    Ok(worst)
}

/// Fits the resolvent replacement bound against `eps`; required power `1 - theta`.
pub fn resolvent_replacement_fit(p: &SymbolParams, theta: f64, epsilons: &[f64]) -> Result<AsymptoticFit> {
    if epsilons.len() < FIT_POINTS {
        return Err(Error::InsufficientData(format!("need {FIT_POINTS} amplitudes")));
    }
    let mut e = epsilons.to_vec();
    e.sort_by(f64::total_cmp);
    let window = &e[..FIT_POINTS];
    let sups: Vec<f64> = window
        .iter()
        .map(|&eps| resolvent_deviation(&p.with_epsilon(eps), theta))
        .collect::<Result<_>>()?;
    let slope = loglog_fit(window, &sups).0;
    let required = 1.0 - theta;
    Ok(AsymptoticFit {
        name: format!("resolvent_replacement_theta_{theta}"),
        required_exponent: required,
        fitted_exponent: slope,
        pass: slope >= required - EXPONENT_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_default_and_negative_control() {
        let v = dispersion_check(&SymbolParams::default(), 10.0, 1000).unwrap();
        assert_eq!(v.status, CheckStatus::Pass);
        assert_eq!(v.speed_at_zero, 1.0);
        let weak = SymbolParams {
            beta: 0.1,
            ..SymbolParams::default()
        };
        let v = dispersion_check(&weak, 10.0, 1000).unwrap();
        assert_eq!(v.status, CheckStatus::NotApplicable);
        assert!(!v.strictly_increasing);
        assert!(dispersion_check(&weak, 0.0, 10).is_err());
    }

    #[test]
    fn symbol_fits() {
        let p = SymbolParams::default();
        let f = kp_deviation_fit(&p).unwrap();
        assert!(f.pass, "{f:?}");
        let eps = [0.2, 0.1, 0.05, 0.025];
        for theta in [0.0, 0.75] {
            let f = resolvent_replacement_fit(&p, theta, &eps).unwrap();
            assert!(f.pass, "{f:?}");
        }
        assert!(resolvent_replacement_fit(&p, 0.0, &eps[..2]).is_err());
    }
}
