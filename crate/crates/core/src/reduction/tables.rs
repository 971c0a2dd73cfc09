use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{dealiased_product, symmetrized, Grid, NormKind};
use crate::symbols::{mtilde_inverse, n_eps_symbol, scaled_cone_indicator, SymbolParams};

/// Smallest admissible `n` on a retained outside-cone mode.
pub(crate) const DIVISION_FLOOR: f64 = 1e-10;

pub(crate) type Spec = Array2<Complex64>;

/// Every multiplier the reduction needs, tabulated on the KP-scaled lattice.
/// Forbidden modes carry 0 in every table.
#[derive(Clone, Debug)]
pub(crate) struct Tables {
    pub grid: Grid,
    pub params: SymbolParams,
    pub inside: Array2<f64>,
    pub outside: Array2<f64>,
    /// `-eps^2 / n_eps` outside the scaled cone, 0 inside.
    pub hf_gain: Array2<f64>,
    /// `eps^2 / (eps^2 + n_eps)`; `1/m~` when `eps = 0`.
    pub resolvent: Array2<f64>,
    pub mtilde_inv: Array2<f64>,
    /// `n_eps / eps^2`; `m~ - 1` when `eps = 0`.
    pub scaled_n: Array2<f64>,
    pub n_eps: Array2<f64>,
    /// Physical X-norm weight at the mapped wavevector, including the Jacobian `eps`.
    pub x_weight: Array2<f64>,
    pub min_outside_n: f64,
    pub outside_modes: usize,
}

impl Tables {
    pub fn new(grid: Grid, params: SymbolParams) -> Result<Self> {
        params.validate()?;
        let shape = grid.shape();
        let eps = params.epsilon;
        let mut t = Tables {
            grid,
            params,
            inside: Array2::zeros(shape),
            outside: Array2::zeros(shape),
            hf_gain: Array2::zeros(shape),
            resolvent: Array2::zeros(shape),
            mtilde_inv: Array2::zeros(shape),
            scaled_n: Array2::zeros(shape),
            n_eps: Array2::zeros(shape),
            x_weight: Array2::zeros(shape),
            min_outside_n: f64::INFINITY,
            outside_modes: 0,
        };
        for i in 0..shape.0 {
            for j in 0..shape.1 {
                if grid.is_forbidden(i, j) {
                    continue;
                }
                let (k1, k2) = (grid.k1(i), grid.k2(j));
                let minv = mtilde_inverse(k1, k2, &params)?;
                t.x_weight[[i, j]] = if eps > 0.0 {
                    eps * NormKind::X(params.sobolev_s).weight(eps * k1, eps * eps * k2, &params)
                } else {
                    1.0
                };
                t.mtilde_inv[[i, j]] = minv;
                let inside = scaled_cone_indicator(k1, k2, &params);
                if eps == 0.0 {
                    t.inside[[i, j]] = 1.0;
                    t.resolvent[[i, j]] = minv;
                    t.scaled_n[[i, j]] = 1.0 / minv - 1.0;
                    continue;
                }
                let n = n_eps_symbol(k1, k2, &params)?;
                t.n_eps[[i, j]] = n;
                t.scaled_n[[i, j]] = n / (eps * eps);
                t.resolvent[[i, j]] = 1.0 / (1.0 + n / (eps * eps));
                if inside {
                    t.inside[[i, j]] = 1.0;
                } else {
                    if n < DIVISION_FLOOR {
                        return Err(Error::DivisionHazard { k1, k2, value: n });
                    }
                    t.outside[[i, j]] = 1.0;
                    t.hf_gain[[i, j]] = -eps * eps / n;
                    t.min_outside_n = t.min_outside_n.min(n);
                    t.outside_modes += 1;
                }
            }
        }
        Ok(t)
    }

    pub fn apply(&self, table: &Array2<f64>, a: &Spec) -> Spec {
        Zip::from(a).and(table).map_collect(|&c, &s| c * s)
    }

    pub fn square(&self, a: &Spec) -> Spec {
        dealiased_product(&self.grid, a, None)
    }

    pub fn product(&self, a: &Spec, b: &Spec) -> Spec {
        dealiased_product(&self.grid, a, Some(b))
    }

    pub fn symmetrize(&self, a: &Spec) -> Spec {
        symmetrized(&self.grid, a)
    }

    /// Cone, band and reflection projection applied to every iterate.
    pub fn project_iterate(&self, a: &Spec) -> Spec {
        let mut out = self.symmetrize(a);
        for ((i, j), c) in out.indexed_iter_mut() {
            if self.inside[[i, j]] == 0.0 || !self.grid.in_dealias_band(i, j) {
                *c = Complex64::default();
            }
        }
        out
    }

    pub fn dot(&self, a: &Spec, b: &Spec) -> f64 {
        let s = Zip::from(a).and(b).fold(0.0, |acc, x, y| acc + (x.conj() * y).re);
        s * self.grid.dk1() * self.grid.dk2()
    }

    pub fn weighted_norm(&self, weight: &Array2<f64>, a: &Spec) -> f64 {
        let s = Zip::from(a).and(weight).fold(0.0, |acc, c, w| acc + w * c.norm_sqr());
        (s * self.grid.dk1() * self.grid.dk2()).sqrt()
    }

    pub fn norm(&self, a: &Spec) -> f64 {
        self.dot(a, a).max(0.0).sqrt()
    }
}

pub(crate) fn axpy(a: &Spec, alpha: f64, b: &Spec) -> Spec {
    Zip::from(a).and(b).map_collect(|&x, &y| x + alpha * y)
}

pub(crate) fn add(a: &Spec, b: &Spec) -> Spec {
    Zip::from(a).and(b).map_collect(|&x, &y| x + y)
}
