use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lumps::sample_lump;
use crate::reduction::krylov::gmres;
use crate::reduction::{tables, Reducer, SolverConfig, Spec};
use crate::spectral::{Field, Frame, Grid};
use crate::symbols::SymbolParams;

/// Relative eigen-residual at which inverse iteration stops.
pub const EIGEN_TOL: f64 = 1e-8;
pub const EIGEN_MAX_ITER: usize = 300;
/// Largest admissible relative change of the eigenvalue under refinement.
pub const REFINEMENT_TOL: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeLevel {
    pub grid: Grid,
    pub eigenvalue: f64,
    pub iterations: usize,
    pub residual: f64,
    pub asymmetry: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralProbeResult {
    pub k_index: usize,
    pub levels: Vec<ProbeLevel>,
    /// `|lambda|` on the finest level.
    pub smallest_abs_eigenvalue: f64,
    pub eigenvector_asymmetry: f64,
    /// `|lambda_{i+1} - lambda_i| / |lambda_i|` between consecutive levels.
    pub refinement_deltas: Vec<f64>,
}

impl SpectralProbeResult {
    pub fn stable(&self) -> bool {
        !self.refinement_deltas.is_empty() && self.refinement_deltas.iter().all(|&d| d <= REFINEMENT_TOL)
    }
}

struct Eigenpair {
    value: f64,
    vector: Spec,
    iterations: usize,
    residual: f64,
}

/// Inverse iteration for the eigenvalue of `I + 2 m~^-1 (zeta .)` nearest zero on
/// the doubly even band-limited subspace, with the `m~`-weighted Rayleigh quotient
/// in which the operator is self-adjoint.
fn smallest_eigenpair(red: &Reducer, zeta: &Spec) -> Result<Eigenpair> {
    let t = &red.t;
    let g = t.grid;
    let weight = t.mtilde_inv.mapv(|m| if m > 0.0 { 1.0 / m } else { 0.0 });
    let wdot = |a: &Spec, b: &Spec| t.dot(a, &t.apply(&weight, b));
    let apply = |v: &Spec| tables::add(v, &t.project_iterate(&red.limit_perturbation(zeta, v)));
    let start = Field::from_fn(g, Frame::KpScaled, |x, y| (-(x * x + y * y) / 8.0).exp());
    let mut v = t.project_iterate(start.coeffs());
    let n = wdot(&v, &v).sqrt();
    v.mapv_inplace(|c| c / n);
    let mut op = |x: &Spec| Ok(apply(x));
    let dot = |a: &Spec, b: &Spec| t.dot(a, b);
    let mut value = f64::NAN;
    let mut residual = f64::INFINITY;
    for it in 1..=EIGEN_MAX_ITER {
        let av = apply(&v);
        value = wdot(&v, &av) / wdot(&v, &v);
        let r = tables::axpy(&av, -value, &v);
        residual = wdot(&r, &r).sqrt() / wdot(&v, &v).sqrt();
        if residual <= EIGEN_TOL * value.abs().max(f64::MIN_POSITIVE) || residual == 0.0 {
            return Ok(Eigenpair {
                value,
                vector: v,
                iterations: it,
                residual,
            });
        }
        let next = gmres(&mut op, &v, &dot, 1e-12, 400, 40)?.solution;
        let n = wdot(&next, &next).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            break;
        }
        v = next.mapv(|c| c / n);
    }
    Err(Error::Eigen(format!(
        "inverse iteration stopped at eigenvalue {value:e} with residual {residual:e}"
    )))
}

fn limit_reducer(grid: Grid, p: &SymbolParams) -> Result<Reducer> {
    Reducer::new(grid, p.with_epsilon(0.0), SolverConfig::default())
}

/// Smallest-magnitude symmetric eigenvalue of the linearised KP operator at
/// the lump on each grid level.
pub fn nondegeneracy_probe(k_index: usize, grid_levels: &[Grid], p: &SymbolParams) -> Result<SpectralProbeResult> {
    if !(1..=2).contains(&k_index) {
        return Err(Error::UnknownLump(k_index));
    }
    let mut levels = Vec::with_capacity(grid_levels.len());
    for &g in grid_levels {
        let red = limit_reducer(g, p)?;
        let (seed, _) = sample_lump(g, k_index, Frame::KpScaled, p)?;
        let zeta = red.project(&seed)?;
        let pair = smallest_eigenpair(&red, zeta.coeffs())?;
        let asymmetry = red.field(pair.vector).asymmetry();
        levels.push(ProbeLevel {
            grid: g,
            eigenvalue: pair.value,
            iterations: pair.iterations,
            residual: pair.residual,
            asymmetry,
        });
    }
    let refinement_deltas = levels
        .windows(2)
        .map(|w| (w[1].eigenvalue - w[0].eigenvalue).abs() / w[0].eigenvalue.abs())
        .collect();
    Ok(SpectralProbeResult {
        k_index,
        smallest_abs_eigenvalue: levels.last().map_or(f64::NAN, |l| l.eigenvalue.abs()),
        eigenvector_asymmetry: levels.iter().map(|l| l.asymmetry).fold(0.0, f64::max),
        levels,
        refinement_deltas,
    })
}

/// The same iteration with the lump replaced by zero, where the operator is the identity.
pub fn zero_potential_eigenvalue(grid: Grid, p: &SymbolParams) -> Result<f64> {
    let red = limit_reducer(grid, p)?;
    Ok(smallest_eigenpair(&red, &Spec::zeros(grid.shape()))?.value)
}
