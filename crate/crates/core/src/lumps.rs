//! Exact calculus for the symmetric KP-I lumps `zeta_k = -6 d_x^2 log tau_k`.
//!
//! Tau polynomials are integer coefficient tables and are differentiated
//! exactly. Derivatives of `log tau` follow from the Leibniz expansion of
//! `tau * d_i log tau = d_i tau`, so every derivative of the lump is a
//! closed-form combination of exact polynomial derivatives divided by powers
//! of `tau`; no finite differences are involved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{Field, Frame, Grid};
use crate::symbols::SymbolParams;

/// Highest total derivative order of `log tau` needed for fourth derivatives of a lump.
const LOG_ORDER: usize = 6;

/// Bivariate polynomial with integer coefficients; `coeffs[a][b]` multiplies `x^a y^b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauPolynomial {
    coeffs: Vec<Vec<i64>>,
}

impl TauPolynomial {
    /// From `(a, b, c)` triples meaning `c x^a y^b`.
    pub fn from_terms(terms: &[(usize, usize, i64)]) -> Self {
        let deg = terms.iter().map(|t| t.0.max(t.1)).max().unwrap_or(0);
        let mut coeffs = vec![vec![0i64; deg + 1]; deg + 1];
        for &(a, b, c) in terms {
            coeffs[a][b] += c;
        }
        Self { coeffs }
    }

    pub fn tau(k_index: usize) -> Result<Self> {
        match k_index {
            1 => Ok(Self::from_terms(&[(2, 0, 1), (0, 2, 1), (0, 0, 3)])),
            2 => Ok(Self::from_terms(&[
                (6, 0, 1),
                (4, 2, 3),
                (2, 4, 3),
                (0, 6, 1),
                (4, 0, 25),
                (2, 2, 90),
                (0, 4, 17),
                (2, 0, -125),
                (0, 2, 475),
                (0, 0, 1875),
            ])),
            k => Err(Error::UnknownLump(k)),
        }
    }

    /// Total degree.
    pub fn degree(&self) -> usize {
        let mut d = 0;
        for (a, row) in self.coeffs.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                if c != 0 {
                    d = d.max(a + b);
                }
            }
        }
        d
    }

    pub fn is_even(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(a, row)| row.iter().enumerate().all(|(b, &c)| c == 0 || (a % 2 == 0 && b % 2 == 0)))
    }

    pub fn coefficient(&self, a: usize, b: usize) -> i64 {
        self.coeffs.get(a).and_then(|r| r.get(b)).copied().unwrap_or(0)
    }

    /// Exact `d_x^p d_y^q` of the polynomial.
    pub fn derivative(&self, p: usize, q: usize) -> Self {
        let n = self.coeffs.len();
        let mut coeffs = vec![vec![0i64; n]; n];
        for a in p..n {
            for b in q..n {
                let c = self.coeffs[a][b];
                if c != 0 {
                    coeffs[a - p][b - q] = c * falling(a, p) * falling(b, q);
                }
            }
        }
        Self { coeffs }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            let inner = row.iter().rev().fold(0.0, |s, &c| s * y + c as f64);
            acc * x + inner
        })
    }
}

fn falling(n: usize, k: usize) -> i64 {
    ((n - k + 1)..=n).map(|v| v as i64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// A lump `-6 d_x^2 log tau` with tables of every tau derivative it needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LumpFamily {
    /// Family index; 0 for a custom tau.
    pub k_index: usize,
    pub tau: TauPolynomial,
    #[serde(skip)]
    tau_derivatives: Vec<Vec<Option<TauPolynomial>>>,
}

impl LumpFamily {
    pub fn new(k_index: usize) -> Result<Self> {
        let mut fam = Self::from_tau(TauPolynomial::tau(k_index)?);
        fam.k_index = k_index;
        Ok(fam)
    }

    /// Runs the same calculus on any tau; used for negative controls.
    pub fn from_tau(tau: TauPolynomial) -> Self {
        let mut tables = vec![vec![None; LOG_ORDER + 1]; LOG_ORDER + 1];
        for p in 0..=LOG_ORDER {
            for q in 0..=(LOG_ORDER - p) {
                tables[p][q] = Some(tau.derivative(p, q));
            }
        }
        Self {
            k_index: 0,
            tau,
            tau_derivatives: tables,
        }
    }

    /// Every `d_x^p d_y^q log tau` with `p + q <= 6` at `(x, y)`.
    fn log_derivatives(&self, x: f64, y: f64) -> [[f64; LOG_ORDER + 1]; LOG_ORDER + 1] {
        let t = self.tau.eval(x, y);
        let mut ratio = [[0.0; LOG_ORDER + 1]; LOG_ORDER + 1];
        for p in 0..=LOG_ORDER {
            for q in 0..=(LOG_ORDER - p) {
                let d = self.tau_derivatives[p][q].as_ref().expect("tabulated");
                ratio[p][q] = d.eval(x, y) / t;
            }
        }
        let mut log = [[0.0; LOG_ORDER + 1]; LOG_ORDER + 1];
        log[0][0] = t.ln();
        for total in 1..=LOG_ORDER {
            for p in 0..=total {
                let q = total - p;
                // differentiate tau * L_i = tau_i along i in {x, y}, with beta = alpha - e_i
                let (bp, bq, ex) = if p > 0 { (p - 1, q, true) } else { (p, q - 1, false) };
                let mut v = ratio[p][q];
                for gp in 0..=bp {
                    for gq in 0..=bq {
                        if gp + gq == 0 {
                            continue;
                        }
                        let (rp, rq) = if ex { (bp - gp + 1, bq - gq) } else { (bp - gp, bq - gq + 1) };
                        v -= binomial(bp, gp) * binomial(bq, gq) * ratio[gp][gq] * log[rp][rq];
                    }
                }
                log[p][q] = v;
            }
        }
        log
    }

    /// `d_x^a d_y^b zeta` at `(x, y)`, `a + b <= 4`.
    pub fn eval(&self, x: f64, y: f64, a: usize, b: usize) -> Result<f64> {
        if a + b > 4 {
            return Err(Error::DerivativeOrder { a, b });
        }
        Ok(-6.0 * self.log_derivatives(x, y)[a + 2][b])
    }

    pub fn zeta(&self, x: f64, y: f64) -> f64 {
        -6.0 * self.log_derivatives(x, y)[2][0]
    }

    /// Pointwise residual of `d_x^2(-d_x^2 zeta + zeta + zeta^2) + d_y^2 zeta`.
    pub fn kp_residual(&self, x: f64, y: f64) -> f64 {
        let l = self.log_derivatives(x, y);
        let z = -6.0 * l[2][0];
        let zx = -6.0 * l[3][0];
        let zxx = -6.0 * l[4][0];
        let zxxxx = -6.0 * l[6][0];
        let zyy = -6.0 * l[2][2];
        -zxxxx + zxx + 2.0 * z * zxx + 2.0 * zx * zx + zyy
    }
}

pub fn eval_tau(k_index: usize, x: f64, y: f64) -> Result<f64> {
    Ok(TauPolynomial::tau(k_index)?.eval(x, y))
}

pub fn eval_zeta_star(k_index: usize, x: f64, y: f64, a: usize, b: usize) -> Result<f64> {
    LumpFamily::new(k_index)?.eval(x, y, a, b)
}

pub fn kp_residual_exact(k_index: usize, x: f64, y: f64) -> Result<f64> {
    Ok(LumpFamily::new(k_index)?.kp_residual(x, y))
}

/// Exponent `e` in the rescaling `b = (kp coefficient)^e` that maps a
/// normalised lump to a solution of `m~(D) zeta + zeta^2 = 0`.
pub const MTILDE_SCALING_EXPONENT: f64 = -0.5;

/// The normalised lump rescaled by `b = (kp coefficient)^exponent`.
#[derive(Clone, Debug)]
pub struct LumpSampler {
    pub family: LumpFamily,
    pub scale: f64,
}

impl LumpSampler {
    pub fn with_exponent(k_index: usize, p: &SymbolParams, exponent: f64) -> Result<Self> {
        let a = p.kp_coefficient();
        if !(a > 0.0) {
            return Err(Error::param("beta", format!("must exceed 1/3, got {}", p.beta)));
        }
        Ok(Self {
            family: LumpFamily::new(k_index)?,
            scale: a.powf(exponent),
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.family.zeta(self.scale * x, self.scale * y)
    }
}

/// Sampler for the lump solving `m~(D) zeta + zeta^2 = 0`.
pub fn lump_for_mtilde(k_index: usize, p: &SymbolParams) -> Result<LumpSampler> {
    LumpSampler::with_exponent(k_index, p, MTILDE_SCALING_EXPONENT)
}

/// Samples a lump onto `grid`. In the `KpScaled` frame the grid carries the
/// m~-frame lump itself; in the `Physical` frame it carries
/// `eps^2 zeta(eps x, eps^2 y)`. Also returns the fraction of L2 energy removed
/// by projecting out the line `k1 = 0`.
pub fn sample_lump(grid: Grid, k_index: usize, frame: Frame, p: &SymbolParams) -> Result<(Field, f64)> {
    let sampler = lump_for_mtilde(k_index, p)?;
    sample_with(grid, &sampler, frame, p)
}

pub(crate) fn sample_with(grid: Grid, sampler: &LumpSampler, frame: Frame, p: &SymbolParams) -> Result<(Field, f64)> {
    let e = p.epsilon;
    if frame == Frame::Physical && !(e > 0.0) {
        return Err(Error::param("epsilon", "physical-frame lumps need epsilon > 0"));
    }
    let samples = ndarray::Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let (x, y) = (grid.x(i), grid.y(j));
        match frame {
            Frame::KpScaled => sampler.eval(x, y),
            Frame::Physical => e * e * sampler.eval(e * x, e * e * y),
        }
    });
    Field::from_physical_reporting(grid, frame, &samples)
}
