//! Fourier symbols of the FDKP-I and KP-I equations.
//!
//! Physical wavevectors are written `k = (k1, k2)`; all symbols depend on them
//! only through `(k1, k2/k1)` since `|k|^2 = k1^2 (1 + (k2/k1)^2)`. The mean
//! mode `k = 0` takes the removable-limit values; the line `k1 = 0, k2 != 0`
//! is singular and reported as [`Error::NonFiniteSymbol`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical and numerical parameters shared by every multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    /// Bond number; FDKP-I requires `beta > 1/3`.
    pub beta: f64,
    /// Half-width of the spectral cone.
    pub delta: f64,
    /// Amplitude parameter, `c = 1 - epsilon^2`.
    pub epsilon: f64,
    pub theta: f64,
    pub sobolev_s: f64,
    /// Radius of the ball containing the lump seeds.
    pub ball_m: f64,
    /// Upper end `eps_0` of the admissible amplitude range.
    pub epsilon_max: f64,
}

impl Default for SymbolParams {
    fn default() -> Self {
        Self {
            beta: 2.0,
            delta: 0.5,
            epsilon: 0.1,
            theta: 0.75,
            sobolev_s: 1.9,
            ball_m: 50.0,
            epsilon_max: 0.25,
        }
    }
}

impl SymbolParams {
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    /// Coefficient `(beta - 1/3) / 2` of `D1^2` in the KP symbol.
    pub fn kp_coefficient(&self) -> f64 {
        0.5 * (self.beta - 1.0 / 3.0)
    }

    /// Checks the parameter invariants; the error names the first violation.
    pub fn validate(&self) -> Result<()> {
        let p = self;
        let finite = [
            ("beta", p.beta),
            ("delta", p.delta),
            ("epsilon", p.epsilon),
            ("theta", p.theta),
            ("sobolev_s", p.sobolev_s),
            ("ball_m", p.ball_m),
            ("epsilon_max", p.epsilon_max),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, format!("must be finite, got {v}")));
            }
        }
        if p.beta <= 1.0 / 3.0 {
            return Err(Error::param("beta", format!("must exceed 1/3 (FDKP-I regime), got {}", p.beta)));
        }
        if !(p.delta > 0.0 && p.delta < 1.0) {
            return Err(Error::param("delta", format!("must lie in (0, 1), got {}", p.delta)));
        }
        if !(p.theta > 0.5 && p.theta < 1.0) {
            return Err(Error::param("theta", format!("must lie in (1/2, 1), got {}", p.theta)));
        }
        if !(p.sobolev_s > 1.5 && p.sobolev_s < 2.0) {
            return Err(Error::param("sobolev_s", format!("must lie in (3/2, 2), got {}", p.sobolev_s)));
        }
        if p.sobolev_s <= 1.0 + p.theta {
            return Err(Error::param(
                "sobolev_s",
                format!("must exceed 1 + theta = {}, got {}", 1.0 + p.theta, p.sobolev_s),
            ));
        }
        if p.ball_m <= 1.0 {
            return Err(Error::param("ball_m", format!("must exceed 1, got {}", p.ball_m)));
        }
        if p.epsilon_max <= 0.0 {
            return Err(Error::param("epsilon_max", format!("must be positive, got {}", p.epsilon_max)));
        }
        if !(p.epsilon >= 0.0 && p.epsilon < p.epsilon_max) {
            return Err(Error::param(
                "epsilon",
                format!("must lie in [0, {}), got {}", p.epsilon_max, p.epsilon),
            ));
        }
        Ok(())
    }

    /// Whether `epsilon < M^-2`, the regime covered by the existence theory.
    /// Numerically the solver works well outside it, so this is reported, not enforced.
    pub fn in_theory_regime(&self) -> bool {
        self.epsilon < self.ball_m.powi(-2)
    }
}

/// `sinh(r)/r - 1`, by its Taylor series below 1 where the direct form cancels.
fn sinhc_minus_one(r: f64) -> f64 {
    if r < 1.0 {
        let r2 = r * r;
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..=12 {
            term *= r2 / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
        }
        sum
    } else {
        r.sinh() / r - 1.0
    }
}

/// `ln(tanh r / r) = ln(sinh r / r) - ln(cosh r)`, both terms to full relative precision.
fn ln_tanh_ratio(r: f64) -> f64 {
    if r > 20.0 {
        return -r.ln();
    }
    let half = (0.5 * r).sinh();
    sinhc_minus_one(r).ln_1p() - (2.0 * half * half).ln_1p()
}

fn singular(k1: f64, k2: f64) -> Error {
    Error::NonFiniteSymbol {
        k1,
        k2,
        value: f64::INFINITY,
    }
}

/// `n(k) = m(k) - 1`, evaluated as `expm1` of half the log-symbol so that
/// small values keep full relative precision.
pub fn n_symbol(k1: f64, k2: f64, p: &SymbolParams) -> Result<f64> {
    if k1 == 0.0 {
        return if k2 == 0.0 { Ok(0.0) } else { Err(singular(k1, k2)) };
    }
    let ratio = k2 / k1;
    let r2 = k1 * k1 * (1.0 + ratio * ratio);
    let r = r2.sqrt();
    let log_m = 0.5 * ((p.beta * r2).ln_1p() + ln_tanh_ratio(r) + (2.0 * ratio * ratio).ln_1p());
    Ok(log_m.exp_m1())
}

/// `m(k) = (1 + beta|k|^2)^1/2 (tanh|k| / |k|)^1/2 (1 + 2 k2^2/k1^2)^1/2`.
pub fn m_symbol(k1: f64, k2: f64, p: &SymbolParams) -> Result<f64> {
    Ok(1.0 + n_symbol(k1, k2, p)?)
}

/// `m~(k) - 1 = k2^2/k1^2 + (beta - 1/3) k1^2 / 2`.
pub fn mtilde_minus_one(k1: f64, k2: f64, p: &SymbolParams) -> Result<f64> {
    if k1 == 0.0 {
        return if k2 == 0.0 { Ok(0.0) } else { Err(singular(k1, k2)) };
    }
    let ratio = k2 / k1;
    Ok(ratio * ratio + p.kp_coefficient() * k1 * k1)
}

pub fn mtilde_symbol(k1: f64, k2: f64, p: &SymbolParams) -> Result<f64> {
    Ok(1.0 + mtilde_minus_one(k1, k2, p)?)
}

/// `1 / m~(k)`, in `(0, 1]`.
pub fn mtilde_inverse(k1: f64, k2: f64, p: &SymbolParams) -> Result<f64> {
    Ok(1.0 / mtilde_symbol(k1, k2, p)?)
}

/// `n_eps(K) = n(eps K1, eps^2 K2)` at a KP-scaled wavevector.
pub fn n_eps_symbol(k1: f64, k2: f64, p: &SymbolParams) -> Result<f64> {
    if k1 == 0.0 && k2 != 0.0 {
        return Err(singular(k1, k2));
    }
    let e = p.epsilon;
    n_symbol(e * k1, e * e * k2, p)
}

/// `eps^2 / (eps^2 + n_eps(K))`, in `(0, 1]`. Requires `eps > 0`.
pub fn resolvent_symbol(k1: f64, k2: f64, p: &SymbolParams) -> Result<f64> {
    if p.epsilon <= 0.0 {
        return Err(Error::param("epsilon", "the resolvent needs epsilon > 0"));
    }
    let n = n_eps_symbol(k1, k2, p)?;
    Ok(1.0 / (1.0 + n / (p.epsilon * p.epsilon)))
}

/// Phase speed `c(k1)` of two-dimensional wave trains; `c(0) = 1`.
pub fn dispersion_speed(k1: f64, p: &SymbolParams) -> f64 {
    let k = k1.abs();
    if k == 0.0 {
        return 1.0;
    }
    (0.5 * ((p.beta * k * k).ln_1p() + ln_tanh_ratio(k))).exp()
}

/// Indicator of the physical cone `|k1| <= delta, |k2/k1| <= delta`; the
/// origin is inside, the rest of the line `k1 = 0` is not.
pub fn cone_indicator(k1: f64, k2: f64, delta: f64) -> bool {
    if k1 == 0.0 {
        return k2 == 0.0;
    }
    k1.abs() <= delta && k2.abs() <= delta * k1.abs()
}

/// Scaled indicator `chi_eps(K) = chi(eps K1, eps^2 K2)`; the whole plane
/// (minus the singular line) at `eps = 0`.
pub fn scaled_cone_indicator(k1: f64, k2: f64, p: &SymbolParams) -> bool {
    let e = p.epsilon;
    if e == 0.0 {
        return k1 != 0.0 || k2 == 0.0;
    }
    cone_indicator(e * k1, e * e * k2, p.delta)
}
