//! Anisotropic Sobolev norms.
//!
//! `L2` is taken in the field's own coordinates, `Y(r)` in the KP-scaled
//! frame, and `EpsScaled`, `X(s)`, `Z(s)` in the physical frame. When the
//! field's frame differs, the exact change of variables under
//! `u(x, y) = eps^2 zeta(eps x, eps^2 y)` is applied to the weights.

use serde::{Deserialize, Serialize};

use super::{Field, Frame};
use crate::error::{Error, Result};
use crate::symbols::SymbolParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    /// `(1 + k1^2 + k2^2/k1^2)^r`.
    Y(f64),
    /// `1 + eps^-2 (k1^2 + k2^2/k1^2)`.
    EpsScaled,
    /// `1 + k2^2/k1^2 + k2^4/k1^2 + |k|^2s`.
    X(f64),
    /// `1 + |k| + k1^2 |k|^(2s-3)`.
    Z(f64),
}

impl NormKind {
    fn native_frame(&self) -> Option<Frame> {
        match self {
            NormKind::L2 => None,
            NormKind::Y(_) => Some(Frame::KpScaled),
            _ => Some(Frame::Physical),
        }
    }

    fn validate(&self, p: &SymbolParams) -> Result<()> {
        match *self {
            NormKind::Y(r) if !(r.is_finite() && r >= 0.0) => {
                Err(Error::param("r", format!("Y^r needs r >= 0, got {r}")))
            }
            NormKind::X(s) | NormKind::Z(s) if !(s > 1.5 && s < 2.0) => {
                Err(Error::param("sobolev_s", format!("must lie in (3/2, 2), got {s}")))
            }
            NormKind::EpsScaled if p.epsilon <= 0.0 => {
                Err(Error::param("epsilon", "the scaled norm needs epsilon > 0"))
            }
            _ => Ok(()),
        }
    }

    /// Weight at wavevector `k` given in this norm's native frame.
    pub fn weight(&self, k1: f64, k2: f64, p: &SymbolParams) -> f64 {
        let ratio2 = if k1 == 0.0 { 0.0 } else { (k2 / k1).powi(2) };
        match *self {
            NormKind::L2 => 1.0,
            NormKind::Y(r) => (1.0 + k1 * k1 + ratio2).powf(r),
            NormKind::EpsScaled => 1.0 + (k1 * k1 + ratio2) / (p.epsilon * p.epsilon),
            NormKind::X(s) => {
                let q2 = if k1 == 0.0 { 0.0 } else { k2.powi(4) / (k1 * k1) };
                1.0 + ratio2 + q2 + (k1 * k1 + k2 * k2).powf(s)
            }
            NormKind::Z(s) => {
                let k = (k1 * k1 + k2 * k2).sqrt();
                let tail = if k == 0.0 { 0.0 } else { k1 * k1 * k.powf(2.0 * s - 3.0) };
                1.0 + k + tail
            }
        }
    }
}

/// Norm of `f`, evaluated as the quadrature of its defining integral.
pub fn norm(f: &Field, kind: NormKind, p: &SymbolParams) -> Result<f64> {
    kind.validate(p)?;
    let grid = f.grid();
    let eps = p.epsilon;
    let native = kind.native_frame().unwrap_or(f.frame());
    // (a1, a2) maps lattice wavenumbers into the native frame; `measure` is the Jacobian factor.
    let (a1, a2, measure) = match (f.frame(), native) {
        (from, to) if from == to => (1.0, 1.0, 1.0),
        (Frame::KpScaled, Frame::Physical) => (eps, eps * eps, eps),
        (Frame::Physical, Frame::KpScaled) => (1.0 / eps, 1.0 / (eps * eps), 1.0 / eps),
        _ => unreachable!(),
    };
    if a1 != 1.0 && !(eps > 0.0) {
        return Err(Error::param("epsilon", "frame conversion needs epsilon > 0"));
    }
    let mut sum = 0.0;
    for ((i, j), c) in f.coeffs().indexed_iter() {
        let n2 = c.norm_sqr();
        if n2 == 0.0 {
            continue;
        }
        sum += kind.weight(a1 * grid.k1(i), a2 * grid.k2(j), p) * n2;
    }
    Ok((measure * sum * grid.dk1() * grid.dk2()).sqrt())
}
