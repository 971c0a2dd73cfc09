//! Restarted GMRES on spectral arrays with a real inner product.

use super::tables::{axpy, Spec};
use crate::error::{Error, Result};

pub(crate) struct KrylovOutcome {
    pub solution: Spec,
    pub iterations: usize,
}

/// Solves `A x = b` to `|b - A x| <= tol |b|`, starting from `x = 0`.
pub(crate) fn gmres(
    op: &mut dyn FnMut(&Spec) -> Result<Spec>,
    b: &Spec,
    dot: &dyn Fn(&Spec, &Spec) -> f64,
    tol: f64,
    max_iter: usize,
    restart: usize,
) -> Result<KrylovOutcome> {
    let norm = |v: &Spec| dot(v, v).max(0.0).sqrt();
    let b_norm = norm(b);
    let mut x = Spec::zeros(b.dim());
    if b_norm == 0.0 {
        return Ok(KrylovOutcome {
            solution: x,
            iterations: 0,
        });
    }
    let mut total = 0;
    let mut r = b.clone();
    let mut rel = 1.0;
    while total < max_iter {
        let beta = norm(&r);
        rel = beta / b_norm;
        if rel <= tol {
            break;
        }
        let m = restart.min(max_iter - total);
        let mut basis: Vec<Spec> = vec![r.mapv(|c| c / beta)];
        let mut h = vec![vec![0.0f64; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            let mut w = op(&basis[j])?;
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[i][j] = hij;
                w = axpy(&w, -hij, v);
            }
            // second Gram-Schmidt pass keeps the basis orthogonal to roundoff
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i][j] += c;
                w = axpy(&w, -c, v);
            }
            let wn = norm(&w);
            h[j + 1][j] = wn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / d;
                sn[j] = h[j + 1][j] / d;
            }
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            total += 1;
            if (g[j + 1].abs() / b_norm) <= tol || wn == 0.0 {
                break;
            }
            basis.push(w.mapv(|c| c / wn));
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in (i + 1)..used {
                s -= h[i][k] * y[k];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        for (i, yi) in y.iter().enumerate() {
            x = axpy(&x, *yi, &basis[i]);
        }
        let ax = op(&x)?;
        r = axpy(b, -1.0, &ax);
        rel = norm(&r) / b_norm;
        if rel <= tol {
            break;
        }
    }
    if rel > tol {
        return Err(Error::Krylov {
            iterations: total,
            relative_residual: rel,
        });
    }
    Ok(KrylovOutcome {
        solution: x,
        iterations: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn real_dot(a: &Spec, b: &Spec) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
    }

    #[test]
    fn solves_a_nonsymmetric_diagonal_plus_shift() {
        let n = 6;
        let diag: Vec<f64> = (0..n * n).map(|i| 1.0 + 0.1 * i as f64).collect();
        let mut op = |v: &Spec| -> Result<Spec> {
            let mut out = v.clone();
            let flat: Vec<Complex64> = v.iter().copied().collect();
            for (k, o) in out.iter_mut().enumerate() {
                *o = flat[k] * diag[k] + 0.3 * flat[(k + 1) % (n * n)];
            }
            Ok(out)
        };
        let b = Spec::from_shape_fn((n, n), |(i, j)| Complex64::new((i + 2 * j) as f64, 0.5));
        let out = gmres(&mut op, &b, &real_dot, 1e-12, 200, 10).unwrap();
        let r = axpy(&b, -1.0, &op(&out.solution).unwrap());
        assert!(real_dot(&r, &r).sqrt() < 1e-10 * real_dot(&b, &b).sqrt());
    }

    #[test]
    fn zero_rhs_and_stall() {
        let mut id = |v: &Spec| Ok(v.clone());
        let z = Spec::zeros((4, 4));
        assert_eq!(gmres(&mut id, &z, &real_dot, 1e-8, 5, 5).unwrap().iterations, 0);
        let mut nil = |v: &Spec| Ok(v.mapv(|_| Complex64::default()));
        let b = Spec::from_elem((4, 4), Complex64::new(1.0, 0.0));
        assert!(matches!(gmres(&mut nil, &b, &real_dot, 1e-8, 5, 5), Err(Error::Krylov { .. })));
    }
}
