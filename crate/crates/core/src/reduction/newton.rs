use serde::{Deserialize, Serialize};

use super::krylov::gmres;
use super::tables::{axpy, Spec};
use super::Reducer;
use crate::error::{Error, Result};
use crate::spectral::Field;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct NewtonDiagnostics {
    /// Reduced L2 residual before each step and after the last one.
    pub residuals: Vec<f64>,
    pub krylov_iterations: Vec<usize>,
    /// Step length accepted by the line search at each step.
    pub step_lengths: Vec<f64>,
    pub converged: bool,
    /// Largest `r_{n+1} / r_n^2` once the residual is below `1e-4`.
    pub quadratic_constant: Option<f64>,
}

impl NewtonDiagnostics {
    pub fn steps(&self) -> usize {
        self.residuals.len().saturating_sub(1)
    }

    pub fn final_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::NAN)
    }

    fn fit_quadratic_constant(&mut self) {
        let mut k: Option<f64> = None;
        for w in self.residuals.windows(2) {
            if w[0] < 1e-4 && w[0] > 0.0 && w[1] > 0.0 {
                let c = w[1] / (w[0] * w[0]);
                k = Some(k.map_or(c, |v: f64| v.max(c)));
            }
        }
        self.quadratic_constant = k;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardMode {
    /// `zeta <- -R (chi zeta^2 + S(zeta))` as written.
    Plain,
    /// The same map rescaled by the squared Petviashvili stabilising factor.
    Petviashvili,
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub zeta: Field,
    pub residuals: Vec<f64>,
    pub converged: bool,
    /// Final stabilising factor (1 for the plain iteration).
    pub stabilizer: f64,
}

impl Reducer {
    /// Damped Newton-Krylov solution of the reduced equation from `zeta0`.
    pub fn newton_solve(&self, zeta0: &Field) -> Result<(Field, NewtonDiagnostics)> {
        let t = &self.t;
        let mut zeta = t.project_iterate(self.spec_of(zeta0)?);
        let mut diag = NewtonDiagnostics::default();
        let (mut r, mut w) = self.residual_spec(&zeta, None)?;
        let mut rn = t.norm(&r);
        diag.residuals.push(rn);
        let fail = |reason: String, best: &Spec, mut diag: NewtonDiagnostics| {
            diag.fit_quadratic_constant();
            Err(Error::Newton {
                reason,
                best: Box::new(self.field(best.clone())),
                diagnostics: Box::new(diag),
            })
        };
        for _ in 0..self.cfg.newton_max_iter {
            if rn <= self.cfg.newton_tol {
                break;
            }
            let (w_tight, _) = self.solve_w_to(&zeta, Some(&w), self.derivative_tol())?;
            // roundoff leaves the residual slightly outside the iterate subspace the operator maps into
            let rhs = t.project_iterate(&r).mapv(|c| -c);
            let mut op = |v: &Spec| -> Result<Spec> {
                let jv = self.linearization_spec(&zeta, &w_tight, v, false)?;
                Ok(t.project_iterate(&jv))
            };
            let dot = |a: &Spec, b: &Spec| t.dot(a, b);
            let krylov = match gmres(
                &mut op,
                &rhs,
                &dot,
                self.cfg.linear_solver_tol,
                self.cfg.linear_solver_max_iter,
                self.cfg.gmres_restart,
            ) {
                Ok(k) => k,
                Err(e) => return fail(format!("linear solve failed: {e}"), &zeta, diag),
            };
            diag.krylov_iterations.push(krylov.iterations);
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..=self.cfg.max_halvings {
                let trial = t.project_iterate(&axpy(&zeta, step, &krylov.solution));
                if let Ok((tr, tw)) = self.residual_spec(&trial, Some(&w)) {
                    let tn = t.norm(&tr);
                    if tn < (1.0 - 1e-4 * step) * rn {
                        accepted = Some((trial, tr, tw, tn));
                        break;
                    }
                }
                step *= 0.5;
            }
            match accepted {
                Some((z, nr, nw, nn)) => {
                    zeta = z;
                    r = nr;
                    w = nw;
                    rn = nn;
                    diag.step_lengths.push(step);
                    diag.residuals.push(rn);
                }
                None => {
                    return fail(
                        format!("residual {rn:e} not reduced after {} halvings", self.cfg.max_halvings),
                        &zeta,
                        diag,
                    )
                }
            }
        }
        if rn > self.cfg.newton_tol {
            return fail(
                format!("residual {rn:e} above tolerance after {} steps", self.cfg.newton_max_iter),
                &zeta,
                diag,
            );
        }
        diag.converged = true;
        diag.fit_quadratic_constant();
        Ok((self.field(zeta), diag))
    }

    /// Direct iteration of the fixed-point form of the reduced equation.
    pub fn picard_solve(&self, zeta0: &Field, mode: PicardMode, max_iter: usize) -> Result<PicardOutcome> {
        let t = &self.t;
        let mut zeta = t.project_iterate(self.spec_of(zeta0)?);
        let mut residuals = Vec::new();
        let mut w: Option<Spec> = None;
        let mut stabilizer = 1.0;
        let mut converged = false;
        for _ in 0..max_iter {
            let (ws, _) = self.solve_w(&zeta, w.as_ref())?;
            let nonlinear = super::tables::add(&t.apply(&t.inside, &t.square(&zeta)), &self.s_spec(&zeta, &ws));
            let image = t.project_iterate(&t.apply(&t.resolvent, &nonlinear)).mapv(|c| -c);
            let rn = t.norm(&axpy(&zeta, -1.0, &image));
            residuals.push(rn);
            if !rn.is_finite() || rn > 1e6 {
                break;
            }
            if rn <= self.cfg.newton_tol {
                converged = true;
                break;
            }
            stabilizer = match mode {
                PicardMode::Plain => 1.0,
                PicardMode::Petviashvili => {
                    // <zeta, L zeta> / <zeta, N(zeta)> with L = R^-1 and N = -(chi zeta^2 + S)
                    let lz = t.apply(&t.resolvent.mapv(|r| if r > 0.0 { 1.0 / r } else { 0.0 }), &zeta);
                    let num = t.dot(&zeta, &lz);
                    let den = -t.dot(&zeta, &nonlinear);
                    if den == 0.0 {
                        1.0
                    } else {
                        (num / den).powi(2)
                    }
                }
            };
            zeta = image.mapv(|c| c * stabilizer);
            w = Some(ws);
        }
        Ok(PicardOutcome {
            zeta: self.field(zeta),
            residuals,
            converged,
            stabilizer,
        })
    }
}
