//! High-frequency elimination, the reduced KP-scaled equation and its
//! Newton solution, and reassembly into a full solitary wave.
//!
//! All fields live in the [`Frame::KpScaled`] frame of one grid. The
//! low-frequency part `u1 = eps^2 zeta(eps x, eps^2 y)` is carried by `zeta`, the
//! high-frequency part `u2` by `w` with the same convention, and the
//! multipliers act through their substituted symbols `n(eps k1, eps^2 k2)`, so
//! no interpolation between frames ever happens.

pub(crate) mod krylov;
mod newton;
pub(crate) mod tables;

use ndarray::Zip;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{self, Field, Frame, Grid, NormKind, Side};
use crate::symbols::SymbolParams;

pub use newton::{NewtonDiagnostics, PicardMode, PicardOutcome};
pub(crate) use tables::{Spec, Tables};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub linear_solver_tol: f64,
    pub linear_solver_max_iter: usize,
    pub jacobian_fd_step: f64,
    pub max_halvings: usize,
    pub gmres_restart: usize,
    pub jacobian: JacobianMode,
}

/// How the derivative of the scaled remainder enters the Newton operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// One-sided difference quotient of the remainder.
    FiniteDifference,
    /// Linearised high-frequency fixed point.
    Exact,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            fixed_point_tol: 1e-12,
            fixed_point_max_iter: 200,
            newton_tol: 1e-10,
            newton_max_iter: 30,
            linear_solver_tol: 1e-8,
            linear_solver_max_iter: 400,
            jacobian_fd_step: 1e-7,
            max_halvings: 8,
            gmres_restart: 40,
            jacobian: JacobianMode::FiniteDifference,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let tols = [
            ("fixed_point_tol", self.fixed_point_tol),
            ("newton_tol", self.newton_tol),
            ("linear_solver_tol", self.linear_solver_tol),
            ("jacobian_fd_step", self.jacobian_fd_step),
        ];
        for (name, v) in tols {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        let counts = [
            ("fixed_point_max_iter", self.fixed_point_max_iter),
            ("newton_max_iter", self.newton_max_iter),
            ("linear_solver_max_iter", self.linear_solver_max_iter),
            ("gmres_restart", self.gmres_restart),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::param(name, "must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Record of one run of the high-frequency contraction.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FixedPointDiagnostics {
    pub iterations: usize,
    /// X-norm of each successive difference.
    pub increments: Vec<f64>,
    /// Largest ratio of successive increments above the roundoff floor.
    pub contraction_factor: f64,
    pub converged: bool,
    pub min_outside_symbol: f64,
    pub outside_modes: usize,
}

/// Split `u = u1 + u2` on the shared grid.
#[derive(Clone, Debug)]
pub struct ReductionState {
    pub u1: Field,
    pub u2: Field,
    pub epsilon: f64,
    pub diagnostics: FixedPointDiagnostics,
}

/// An assembled solitary wave: `u(x, y) = eps^2 v(eps x, eps^2 y)` with `v = zeta + w`.
#[derive(Clone, Debug)]
pub struct Wave {
    pub profile: Field,
    pub low: Field,
    pub high: Field,
    pub epsilon: f64,
    pub speed: f64,
}

impl Wave {
    /// Physical amplitude samples `eps^2 v` on the scaled grid.
    pub fn physical_samples(&self) -> ndarray::Array2<f64> {
        let e2 = self.epsilon * self.epsilon;
        self.profile.samples().mapv(|v| e2 * v)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FullResidual {
    /// Physical L2 norm of `-c u + m(D) u + u^2`.
    pub l2: f64,
    /// Physical Z norm of the same.
    pub z: f64,
    /// `l2 / |u|_L2`.
    pub relative: f64,
}

/// Symbol tables and solver settings for one `(grid, params)` pair.
#[derive(Clone, Debug)]
pub struct Reducer {
    pub(crate) t: Tables,
    pub cfg: SolverConfig,
}

/// Increments below this multiple of the tolerance are dominated by roundoff
/// and are left out of the contraction estimate.
const RATIO_FLOOR: f64 = 100.0;

const DERIVATIVE_RTOL: f64 = 1e-10;

impl Reducer {
    pub fn new(grid: Grid, params: SymbolParams, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            t: Tables::new(grid, params)?,
            cfg,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.t.grid
    }

    pub fn params(&self) -> &SymbolParams {
        &self.t.params
    }

    pub fn epsilon(&self) -> f64 {
        self.t.params.epsilon
    }

    pub(crate) fn field(&self, c: Spec) -> Field {
        Field::from_clean(self.t.grid, Frame::KpScaled, c)
    }

    fn spec_of<'a>(&self, f: &'a Field) -> Result<&'a Spec> {
        if *f.grid() != self.t.grid || f.frame() != Frame::KpScaled {
            return Err(Error::Mismatch);
        }
        Ok(f.coeffs())
    }

    /// Physical X norm of a scaled field.
    pub(crate) fn x_norm(&self, a: &Spec) -> f64 {
        self.t.weighted_norm(&self.t.x_weight, a)
    }

    pub(crate) fn f_map_spec(&self, zeta: &Spec, w: &Spec) -> Spec {
        let total = tables::add(zeta, w);
        let q = tables::add(w, &self.t.square(&total));
        self.t.apply(&self.t.hf_gain, &q)
    }

    /// High-frequency map `-n^-1 (1 - chi) (eps^2 u2 + (u1 + u2)^2)` in scaled form.
    pub fn f_map(&self, u1: &Field, u2: &Field) -> Result<Field> {
        let z = self.spec_of(u1)?;
        let w = self.spec_of(u2)?;
        Ok(self.field(self.f_map_spec(z, w)))
    }

    pub(crate) fn solve_w(&self, zeta: &Spec, start: Option<&Spec>) -> Result<(Spec, FixedPointDiagnostics)> {
        self.solve_w_to(zeta, start, self.cfg.fixed_point_tol)
    }

    /// Tolerance for the base solve a finite-difference derivative starts from.
    pub(crate) fn derivative_tol(&self) -> f64 {
        1e-3 * self.cfg.fixed_point_tol
    }

    /// High-frequency solve at a point `h` away from `start`'s base point; the
    /// iteration runs until the increment has dropped by `DERIVATIVE_RTOL`
    /// relative to the first one, since the whole difference is divided by `h`.
    pub(crate) fn solve_w_shifted(&self, zeta: &Spec, start: &Spec) -> Result<Spec> {
        let first = self.x_norm(&tables::axpy(&self.f_map_spec(zeta, start), -1.0, start));
        let tol = (DERIVATIVE_RTOL * first).min(self.derivative_tol());
        Ok(self.solve_w_to(zeta, Some(start), tol)?.0)
    }

    pub(crate) fn solve_w_to(&self, zeta: &Spec, start: Option<&Spec>, tol: f64) -> Result<(Spec, FixedPointDiagnostics)> {
        let mut diag = FixedPointDiagnostics {
            min_outside_symbol: self.t.min_outside_n,
            outside_modes: self.t.outside_modes,
            ..Default::default()
        };
        let mut w = start.cloned().unwrap_or_else(|| Spec::zeros(zeta.dim()));
        if self.t.outside_modes == 0 {
            diag.converged = true;
            diag.iterations = 1;
            diag.increments.push(0.0);
            return Ok((Spec::zeros(zeta.dim()), diag));
        }
        let mut growing = 0;
        for it in 0..self.cfg.fixed_point_max_iter {
            let next = self.f_map_spec(zeta, &w);
            let inc = self.x_norm(&tables::axpy(&next, -1.0, &w));
            w = next;
            diag.iterations = it + 1;
            if let Some(&prev) = diag.increments.last() {
                if prev > RATIO_FLOOR * tol {
                    let ratio = inc / prev;
                    diag.contraction_factor = diag.contraction_factor.max(ratio);
                    growing = if ratio >= 1.0 { growing + 1 } else { 0 };
                }
            }
            diag.increments.push(inc);
            if !inc.is_finite() || growing >= 3 {
                return Err(Error::FixedPoint {
                    reason: format!("no contraction after {} iterations", it + 1),
                    diagnostics: Box::new(diag),
                });
            }
            // an increment at roundoff level of the iterate ends the iteration too
            if inc <= tol || inc <= 64.0 * f64::EPSILON * self.x_norm(&w) {
                diag.converged = true;
                break;
            }
        }
        if !diag.converged {
            return Err(Error::FixedPoint {
                reason: format!("{} iterations exhausted", self.cfg.fixed_point_max_iter),
                diagnostics: Box::new(diag),
            });
        }
        if diag.contraction_factor > 0.9 {
            return Err(Error::FixedPoint {
                reason: format!("contraction factor {:.3} exceeds 0.9", diag.contraction_factor),
                diagnostics: Box::new(diag),
            });
        }
        Ok((w, diag))
    }

    /// Solves `u2 = F(u1, u2)` by Picard iteration from `u2 = 0`.
    pub fn solve_u2(&self, u1: &Field) -> Result<ReductionState> {
        let z = self.spec_of(u1)?;
        let (w, diagnostics) = self.solve_w(z, None)?;
        Ok(ReductionState {
            u1: u1.clone(),
            u2: self.field(w),
            epsilon: self.epsilon(),
            diagnostics,
        })
    }

    /// `chi_eps (2 zeta w + w^2)`, the remainder divided by `eps^4` in scaled coordinates.
    pub(crate) fn s_spec(&self, zeta: &Spec, w: &Spec) -> Spec {
        let two_zeta_plus_w = Zip::from(zeta).and(w).map_collect(|&a, &b| 2.0 * a + b);
        let q = self.t.product(&two_zeta_plus_w, w);
        self.t.apply(&self.t.inside, &q)
    }

    /// Remainder `chi (2 u1 u2 + u2^2)`, as a scaled field representing the physical function.
    pub fn r_eps(&self, u1: &Field) -> Result<Field> {
        let state = self.solve_u2(u1)?;
        let e2 = self.epsilon() * self.epsilon();
        let s = self.s_spec(state.u1.coeffs(), state.u2.coeffs());
        Ok(self.field(s.mapv(|c| c * e2)))
    }

    /// Scaled remainder `S_eps(zeta)`.
    pub fn s_eps(&self, zeta: &Field) -> Result<Field> {
        let z = self.spec_of(zeta)?;
        let (w, _) = self.solve_w(z, None)?;
        Ok(self.field(self.s_spec(z, &w)))
    }

    /// `zeta + eps^2 (n_eps + eps^2)^-1 (chi_eps zeta^2 + S(zeta))` with the
    /// high-frequency part it was computed from.
    pub(crate) fn residual_spec(&self, zeta: &Spec, warm: Option<&Spec>) -> Result<(Spec, Spec)> {
        let (w, _) = self.solve_w(zeta, warm)?;
        let q = tables::add(&self.t.apply(&self.t.inside, &self.t.square(zeta)), &self.s_spec(zeta, &w));
        Ok((tables::add(zeta, &self.t.apply(&self.t.resolvent, &q)), w))
    }

    /// Residual field of the reduced equation and its L2 norm.
    pub fn reduced_residual(&self, zeta: &Field) -> Result<(Field, f64)> {
        let z = self.spec_of(zeta)?;
        let (r, _) = self.residual_spec(z, None)?;
        let n = self.t.norm(&r);
        Ok((self.field(r), n))
    }

    /// `w_zeta` must be the high-frequency solution at `zeta` to [`Reducer::derivative_tol`].
    pub(crate) fn linearization_spec(&self, zeta: &Spec, w_zeta: &Spec, dir: &Spec, limit: bool) -> Result<Spec> {
        let dn = self.t.norm(dir);
        if dn == 0.0 {
            return Ok(Spec::zeros(dir.dim()));
        }
        if limit {
            return Ok(tables::add(dir, &self.limit_perturbation(zeta, dir)));
        }
        let zw = self.t.apply(&self.t.inside, &self.t.product(zeta, dir));
        let zn = self.t.norm(zeta);
        let mut q = zw.mapv(|c| 2.0 * c);
        if zn > 0.0 && self.t.outside_modes > 0 {
            let ds = match self.cfg.jacobian {
                JacobianMode::FiniteDifference => {
                    let h = self.cfg.jacobian_fd_step * zn / dn;
                    let shifted = tables::axpy(zeta, h, dir);
                    let w_shift = self.solve_w_shifted(&shifted, w_zeta)?;
                    let s0 = self.s_spec(zeta, w_zeta);
                    let s1 = self.s_spec(&shifted, &w_shift);
                    tables::axpy(&s1, -1.0, &s0).mapv(|c| c / h)
                }
                JacobianMode::Exact => self.ds_exact(zeta, w_zeta, dir)?,
            };
            q = tables::add(&q, &ds);
        }
        Ok(tables::add(dir, &self.t.apply(&self.t.resolvent, &q)))
    }

    /// `2 m~^-1 chi_eps (zeta dir)`, the compact part of the limit operator.
    pub(crate) fn limit_perturbation(&self, zeta: &Spec, dir: &Spec) -> Spec {
        let zw = self.t.apply(&self.t.inside, &self.t.product(zeta, dir));
        self.t.apply(&self.t.mtilde_inv, &zw).mapv(|c| 2.0 * c)
    }

    /// `dS[zeta] dir` through the linearised high-frequency fixed point
    /// `dw = -eps^2 n^-1 (1 - chi) (dw + 2 (zeta + w)(dir + dw))`.
    pub(crate) fn ds_exact(&self, zeta: &Spec, w: &Spec, dir: &Spec) -> Result<Spec> {
        let total = tables::add(zeta, w);
        let step = |dw: &Spec| {
            let q = tables::axpy(dw, 2.0, &self.t.product(&total, &tables::add(dir, dw)));
            self.t.apply(&self.t.hf_gain, &q)
        };
        let mut dw = step(&Spec::zeros(zeta.dim()));
        let first = self.x_norm(&dw);
        for it in 0..self.cfg.fixed_point_max_iter {
            let next = step(&dw);
            let inc = self.x_norm(&tables::axpy(&next, -1.0, &dw));
            dw = next;
            if inc <= DERIVATIVE_RTOL * first || inc <= 64.0 * f64::EPSILON * self.x_norm(&dw) {
                break;
            }
            if it + 1 == self.cfg.fixed_point_max_iter || !inc.is_finite() {
                return Err(Error::FixedPoint {
                    reason: "linearised high-frequency iteration did not converge".into(),
                    diagnostics: Box::default(),
                });
            }
        }
        let a = self.t.product(dir, w);
        let b = self.t.product(&total, &dw);
        Ok(self.t.apply(&self.t.inside, &tables::add(&a, &b).mapv(|c| 2.0 * c)))
    }

    /// Derivative of the reduced residual at `zeta` in direction `w`. With
    /// `limit` set, the eps -> 0 operator `w + 2 m~^-1 chi_eps (zeta w)`.
    pub fn linearization_apply(&self, zeta: &Field, w: &Field, limit: bool) -> Result<Field> {
        let z = self.spec_of(zeta)?;
        let d = self.spec_of(w)?;
        let (wz, _) = if limit {
            (Spec::zeros(z.dim()), FixedPointDiagnostics::default())
        } else {
            self.solve_w_to(z, None, self.derivative_tol())?
        };
        Ok(self.field(self.linearization_spec(z, &wz, d, limit)?))
    }

    /// Reassembles `u = u1 + u2(u1)` and its speed `c = 1 - eps^2`.
    pub fn assemble_solution(&self, zeta: &Field) -> Result<Wave> {
        let state = self.solve_u2(zeta)?;
        let eps = self.epsilon();
        let profile = state.u1.add(&state.u2)?;
        Ok(Wave {
            profile,
            low: state.u1,
            high: state.u2,
            epsilon: eps,
            speed: 1.0 - eps * eps,
        })
    }

    /// `(1 - c + n_eps) v + eps^2 v^2`, the full residual of the profile `v`
    /// divided by `eps^2`, in scaled coordinates.
    pub(crate) fn full_residual_spec(&self, v: &Spec, c: f64) -> Spec {
        let e2 = self.epsilon() * self.epsilon();
        let lin = Zip::from(v)
            .and(&self.t.n_eps)
            .map_collect(|&a, &n| a * (1.0 - c + n));
        tables::axpy(&lin, e2, &self.t.square(v))
    }

    /// Norms of `-c u + m(D) u + u^2` for the wave with scaled profile `u`.
    pub fn fdkp_residual(&self, u: &Field, c: f64) -> Result<FullResidual> {
        let v = self.spec_of(u)?;
        let rho = self.full_residual_spec(v, c);
        let eps = self.epsilon();
        let (rn, vn) = (self.t.norm(&rho), self.t.norm(v));
        if vn == 0.0 {
            return Ok(FullResidual::default());
        }
        // the stored residual is eps^-2 times the physical one, itself a KP-scaled field
        let physical = self.field(rho.mapv(|c| c * eps * eps));
        let p = &self.t.params;
        Ok(FullResidual {
            l2: spectral::norm(&physical, NormKind::L2, p)? * eps.sqrt(),
            z: spectral::norm(&physical, NormKind::Z(p.sobolev_s), p)?,
            relative: rn / vn,
        })
    }

    /// Residuals of the cone and complement equations for a split `(u1, u2)`,
    /// normalised like [`Reducer::fdkp_residual`].
    pub fn split_residuals(&self, u1: &Field, u2: &Field, c: f64) -> Result<(Field, Field)> {
        let z = self.spec_of(u1)?;
        let w = self.spec_of(u2)?;
        let e2 = self.epsilon() * self.epsilon();
        let sq = self.t.square(&tables::add(z, w));
        let lin = |a: &Spec| Zip::from(a).and(&self.t.n_eps).map_collect(|&x, &n| x * (1.0 - c + n));
        let inner = tables::axpy(&lin(z), e2, &self.t.apply(&self.t.inside, &sq));
        let outer = tables::axpy(&lin(w), e2, &self.t.apply(&self.t.outside, &sq));
        Ok((self.field(inner), self.field(outer)))
    }

    /// Seeds and iterates are restricted to the cone, the dealiasing band and
    /// the doubly even subspace.
    pub fn project(&self, f: &Field) -> Result<Field> {
        Ok(self.field(self.t.project_iterate(self.spec_of(f)?)))
    }

    pub fn cone_split(&self, f: &Field) -> Result<(Field, Field)> {
        let p = self.params();
        Ok((f.project_cone(Side::Inside, p), f.project_cone(Side::Outside, p)))
    }
}

pub fn f_map(u1: &Field, u2: &Field, p: &SymbolParams, cfg: &SolverConfig) -> Result<Field> {
    Reducer::new(*u1.grid(), *p, *cfg)?.f_map(u1, u2)
}

pub fn solve_u2(u1: &Field, p: &SymbolParams, cfg: &SolverConfig) -> Result<ReductionState> {
    Reducer::new(*u1.grid(), *p, *cfg)?.solve_u2(u1)
}

pub fn r_eps(u1: &Field, p: &SymbolParams, cfg: &SolverConfig) -> Result<Field> {
    Reducer::new(*u1.grid(), *p, *cfg)?.r_eps(u1)
}

pub fn s_eps(zeta: &Field, p: &SymbolParams, cfg: &SolverConfig) -> Result<Field> {
    Reducer::new(*zeta.grid(), *p, *cfg)?.s_eps(zeta)
}

pub fn reduced_residual(zeta: &Field, p: &SymbolParams, cfg: &SolverConfig) -> Result<(Field, f64)> {
    Reducer::new(*zeta.grid(), *p, *cfg)?.reduced_residual(zeta)
}

pub fn newton_solve(zeta0: &Field, p: &SymbolParams, cfg: &SolverConfig) -> Result<(Field, NewtonDiagnostics)> {
    Reducer::new(*zeta0.grid(), *p, *cfg)?.newton_solve(zeta0)
}

pub fn assemble_solution(zeta: &Field, p: &SymbolParams, cfg: &SolverConfig) -> Result<Wave> {
    Reducer::new(*zeta.grid(), *p, *cfg)?.assemble_solution(zeta)
}

pub fn fdkp_residual(u: &Field, c: f64, p: &SymbolParams) -> Result<FullResidual> {
    Reducer::new(*u.grid(), *p, SolverConfig::default())?.fdkp_residual(u, c)
}
