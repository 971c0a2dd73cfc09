use std::fmt;
use std::sync::OnceLock;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::transform::{self, backward_complex_inplace, forward_complex_inplace};
use super::Grid;
use crate::error::{Error, Result};
use crate::symbols::{cone_indicator, scaled_cone_indicator, SymbolParams};

/// Coordinates a field is expressed in.
///
/// A `KpScaled` field `f` on the grid stands for the physical function
/// `F(x, y) = eps^2 f(eps x, eps^2 y)`; norms convert between the two exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Physical,
    KpScaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Inside,
    Outside,
}

/// Real field on a [`Grid`], stored by its unitary spectral coefficients.
///
/// Coefficients are conjugate-symmetric and vanish on the Nyquist row and
/// column and on the line `k1 = 0, k2 != 0`. Samples are computed lazily.
#[derive(Clone)]
pub struct Field {
    grid: Grid,
    frame: Frame,
    coeffs: Array2<Complex64>,
    samples: OnceLock<Array2<f64>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("frame", &self.frame)
            .field("l2", &self.norm_l2())
            .finish()
    }
}

/// Zeroes every mode the field invariant forbids, returning the removed energy.
pub(crate) fn zero_forbidden(grid: &Grid, coeffs: &mut Array2<Complex64>) -> f64 {
    let mut removed = 0.0;
    for ((i, j), c) in coeffs.indexed_iter_mut() {
        if grid.is_forbidden(i, j) {
            removed += c.norm_sqr();
            *c = Complex64::default();
        }
    }
    removed * grid.dk1() * grid.dk2()
}

pub(crate) fn enforce_conjugate_symmetry(grid: &Grid, coeffs: &mut Array2<Complex64>) {
    let src = coeffs.clone();
    for ((i, j), c) in coeffs.indexed_iter_mut() {
        let mirror = src[[grid.mirror_x(i), grid.mirror_y(j)]];
        *c = 0.5 * (*c + mirror.conj());
    }
}

pub(crate) fn energy(grid: &Grid, coeffs: &Array2<Complex64>) -> f64 {
    coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dk1() * grid.dk2()
}

impl Field {
    pub fn zeros(grid: Grid, frame: Frame) -> Self {
        Self::from_clean(grid, frame, Array2::zeros(grid.shape()))
    }

    pub(crate) fn from_clean(grid: Grid, frame: Frame, coeffs: Array2<Complex64>) -> Self {
        Self {
            grid,
            frame,
            coeffs,
            samples: OnceLock::new(),
        }
    }

    /// Builds a field from physical samples, projecting out forbidden modes.
    pub fn from_physical(grid: Grid, frame: Frame, samples: &Array2<f64>) -> Result<Self> {
        Ok(Self::from_physical_reporting(grid, frame, samples)?.0)
    }

    /// As [`Field::from_physical`], also returning the fraction of L2 energy
    /// removed by the projection.
    pub fn from_physical_reporting(grid: Grid, frame: Frame, samples: &Array2<f64>) -> Result<(Self, f64)> {
        let mut coeffs = transform::forward(&grid, samples)?;
        let total = energy(&grid, &coeffs);
        let removed = zero_forbidden(&grid, &mut coeffs);
        let fraction = if total > 0.0 { removed / total } else { 0.0 };
        Ok((Self::from_clean(grid, frame, coeffs), fraction))
    }

    /// Samples `f(x, y)` on the grid.
    pub fn from_fn(grid: Grid, frame: Frame, f: impl Fn(f64, f64) -> f64) -> Self {
        let samples = Array2::from_shape_fn(grid.shape(), |(i, j)| f(grid.x(i), grid.y(j)));
        Self::from_physical(grid, frame, &samples).expect("shape matches grid")
    }

    /// Builds a field from arbitrary coefficients; the real part of the
    /// corresponding function is kept and forbidden modes are zeroed.
    pub fn from_spectral(grid: Grid, frame: Frame, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != grid.shape() {
            return Err(Error::Shape {
                expected: grid.shape(),
                found: coeffs.dim(),
            });
        }
        let mut coeffs = coeffs.as_standard_layout().to_owned();
        enforce_conjugate_symmetry(&grid, &mut coeffs);
        zero_forbidden(&grid, &mut coeffs);
        Ok(Self::from_clean(grid, frame, coeffs))
    }

    /// Keeps the given samples verbatim as the physical representation, so a
    /// stored field reads back bit-exactly.
    pub(crate) fn with_samples(grid: Grid, frame: Frame, samples: Array2<f64>) -> Result<Self> {
        let field = Self::from_physical(grid, frame, &samples)?;
        let _ = field.samples.set(samples);
        Ok(field)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }

    pub fn samples(&self) -> &Array2<f64> {
        self.samples.get_or_init(|| {
            let mut data = self.coeffs.clone();
            backward_complex_inplace(&self.grid, &mut data);
            data.mapv(|c| c.re)
        })
    }

    /// Same coefficients, relabelled frame.
    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    fn check(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid || self.frame != other.frame {
            return Err(Error::Mismatch);
        }
        Ok(())
    }

    fn map2(&self, other: &Field, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        self.check(other)?;
        let coeffs = Zip::from(&self.coeffs).and(&other.coeffs).map_collect(|&a, &b| f(a, b));
        Ok(Self::from_clean(self.grid, self.frame, coeffs))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.map2(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.map2(other, |a, b| a - b)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Field) -> Result<Field> {
        self.map2(other, |a, b| a + alpha * b)
    }

    pub fn scale(&self, alpha: f64) -> Field {
        Self::from_clean(self.grid, self.frame, self.coeffs.mapv(|c| c * alpha))
    }

    /// L2 inner product in the field's own coordinates.
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.check(other)?;
        let s: f64 = Zip::from(&self.coeffs)
            .and(&other.coeffs)
            .fold(0.0, |acc, a, b| acc + (a.conj() * b).re);
        Ok(s * self.grid.dk1() * self.grid.dk2())
    }

    pub fn norm_l2(&self) -> f64 {
        energy(&self.grid, &self.coeffs).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Multiplies the spectrum by `sigma(k1, k2)` on every retained mode.
    pub fn apply_multiplier(&self, sigma: impl Fn(f64, f64) -> Result<f64>) -> Result<Field> {
        let g = self.grid;
        let mut coeffs = self.coeffs.clone();
        for ((i, j), c) in coeffs.indexed_iter_mut() {
            if g.is_forbidden(i, j) {
                continue;
            }
            let (k1, k2) = (g.k1(i), g.k2(j));
            let s = sigma(k1, k2)?;
            if !s.is_finite() {
                return Err(Error::NonFiniteSymbol { k1, k2, value: s });
            }
            *c *= s;
        }
        Ok(Self::from_clean(g, self.frame, coeffs))
    }

    /// Multiplies the spectrum by a precomputed real table of grid shape.
    pub fn apply_table(&self, table: &Array2<f64>) -> Result<Field> {
        if table.dim() != self.grid.shape() {
            return Err(Error::Shape {
                expected: self.grid.shape(),
                found: table.dim(),
            });
        }
        let coeffs = Zip::from(&self.coeffs).and(table).map_collect(|&c, &s| c * s);
        Ok(Self::from_clean(self.grid, self.frame, coeffs))
    }

    /// Dealiased square.
    pub fn square(&self) -> Field {
        let coeffs = dealiased_product(&self.grid, &self.coeffs, None);
        Self::from_clean(self.grid, self.frame, coeffs)
    }

    /// Dealiased product.
    pub fn product(&self, other: &Field) -> Result<Field> {
        self.check(other)?;
        let coeffs = dealiased_product(&self.grid, &self.coeffs, Some(&other.coeffs));
        Ok(Self::from_clean(self.grid, self.frame, coeffs))
    }

    /// Cone projection: the physical cone for `Physical` fields, the scaled
    /// cone `chi_eps` for `KpScaled` fields.
    pub fn project_cone(&self, side: Side, p: &SymbolParams) -> Field {
        let mask = cone_mask(&self.grid, self.frame, p);
        let keep_inside = side == Side::Inside;
        let coeffs = Zip::from(&self.coeffs)
            .and(&mask)
            .map_collect(|&c, &inside| if inside == keep_inside { c } else { Complex64::default() });
        Self::from_clean(self.grid, self.frame, coeffs)
    }

    /// Average over the reflections in `x`, in `y` and in both.
    pub fn symmetrize(&self) -> Field {
        Self::from_clean(self.grid, self.frame, symmetrized(&self.grid, &self.coeffs))
    }

    /// Relative sup-norm distance from [`Field::symmetrize`]; 0 for the zero field.
    pub fn asymmetry(&self) -> f64 {
        let sup = self.sup_norm();
        if sup == 0.0 {
            return 0.0;
        }
        let sym = self.symmetrize();
        let dist = Zip::from(self.samples())
            .and(sym.samples())
            .fold(0.0f64, |m, a, b| m.max((a - b).abs()));
        dist / sup
    }
}

pub(crate) fn cone_mask(grid: &Grid, frame: Frame, p: &SymbolParams) -> Array2<bool> {
    Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let (k1, k2) = (grid.k1(i), grid.k2(j));
        match frame {
            Frame::Physical => cone_indicator(k1, k2, p.delta),
            Frame::KpScaled => scaled_cone_indicator(k1, k2, p),
        }
    })
}

pub(crate) fn symmetrized(grid: &Grid, coeffs: &Array2<Complex64>) -> Array2<Complex64> {
    Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let (mi, mj) = (grid.mirror_x(i), grid.mirror_y(j));
        0.25 * (coeffs[[i, j]] + coeffs[[mi, j]] + coeffs[[i, mj]] + coeffs[[mi, mj]])
    })
}

/// Two-thirds rule product of band-limited copies of `a` and `b` (or `a^2`).
pub(crate) fn dealiased_product(grid: &Grid, a: &Array2<Complex64>, b: Option<&Array2<Complex64>>) -> Array2<Complex64> {
    let to_samples = |c: &Array2<Complex64>| {
        let mut data = Array2::from_shape_fn(grid.shape(), |(i, j)| {
            if grid.in_dealias_band(i, j) {
                c[[i, j]]
            } else {
                Complex64::default()
            }
        });
        backward_complex_inplace(grid, &mut data);
        data
    };
    let sa = to_samples(a);
    let mut prod = match b {
        None => sa.mapv(|v| Complex64::new(v.re * v.re, 0.0)),
        Some(b) => {
            let sb = to_samples(b);
            Zip::from(&sa).and(&sb).map_collect(|x, y| Complex64::new(x.re * y.re, 0.0))
        }
    };
    forward_complex_inplace(grid, &mut prod);
    for ((i, j), c) in prod.indexed_iter_mut() {
        if !grid.in_dealias_band(i, j) || grid.is_forbidden(i, j) {
            *c = Complex64::default();
        }
    }
    prod
}
