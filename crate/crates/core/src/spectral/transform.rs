//! Unitary discrete Fourier transform on a [`Grid`].
//!
//! Coefficients approximate samples of the unitary transform
//! `u_hat(k) = (2 pi)^-1 \int u(x) e^{-i k.x} dx` on the wavenumber lattice, so
//! that `sum |u|^2 dx dy == sum |u_hat|^2 dk1 dk2` exactly (discrete Parseval).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

pub(crate) struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

type PlanCache = Mutex<HashMap<(usize, usize), Arc<Fft2>>>;

pub(crate) fn plan(nx: usize, ny: usize) -> Arc<Fft2> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry((nx, ny))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft2 {
                nx,
                ny,
                fwd_x: planner.plan_fft_forward(nx),
                inv_x: planner.plan_fft_inverse(nx),
                fwd_y: planner.plan_fft_forward(ny),
                inv_y: planner.plan_fft_inverse(ny),
            })
        })
        .clone()
}

impl Fft2 {
    fn run(&self, data: &mut Array2<Complex64>, dir: Direction) {
        let (fx, fy) = match dir {
            Direction::Forward => (&self.fwd_x, &self.fwd_y),
            Direction::Backward => (&self.inv_x, &self.inv_y),
        };
        let (nx, ny) = (self.nx, self.ny);
        let scratch_len = fx
            .get_inplace_scratch_len()
            .max(fy.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::default(); scratch_len];

        // rows are contiguous: transform along y in one call
        let buf = data.as_slice_mut().expect("standard layout");
        fy.process_with_scratch(buf, &mut scratch);

        // columns via a transposed copy
        let mut t = vec![Complex64::default(); nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                t[j * nx + i] = buf[i * ny + j];
            }
        }
        fx.process_with_scratch(&mut t, &mut scratch);
        for j in 0..ny {
            for i in 0..nx {
                buf[i * ny + j] = t[j * nx + i];
            }
        }
    }
}

fn check_shape<T>(grid: &Grid, a: &Array2<T>) -> Result<()> {
    let found = a.dim();
    if found != grid.shape() {
        return Err(Error::Shape {
            expected: grid.shape(),
            found,
        });
    }
    Ok(())
}

/// Physical samples to unitary spectral coefficients.
pub fn forward(grid: &Grid, samples: &Array2<f64>) -> Result<Array2<Complex64>> {
    check_shape(grid, samples)?;
    let mut data = samples.mapv(|v| Complex64::new(v, 0.0));
    if !data.is_standard_layout() {
        data = data.as_standard_layout().to_owned();
    }
    forward_complex_inplace(grid, &mut data);
    Ok(data)
}

/// Spectral coefficients back to real samples. Any imaginary residue (from
/// coefficients lacking conjugate symmetry) is discarded.
pub fn backward(grid: &Grid, coeffs: &Array2<Complex64>) -> Result<Array2<f64>> {
    check_shape(grid, coeffs)?;
    let mut data = coeffs.as_standard_layout().to_owned();
    backward_complex_inplace(grid, &mut data);
    Ok(data.mapv(|c| c.re))
}

pub(crate) fn forward_complex_inplace(grid: &Grid, data: &mut Array2<Complex64>) {
    plan(grid.points_x, grid.points_y).run(data, Direction::Forward);
    let scale = grid.dx() * grid.dy() / (2.0 * PI);
    apply_phase(data, scale);
}

pub(crate) fn backward_complex_inplace(grid: &Grid, data: &mut Array2<Complex64>) {
    let scale = 2.0 * PI / grid.area();
    apply_phase(data, scale);
    plan(grid.points_x, grid.points_y).run(data, Direction::Backward);
}

// Samples start at (-Lx, -Ly); the (-1)^(i+j) factor re-centres coefficients on the origin.
fn apply_phase(data: &mut Array2<Complex64>, scale: f64) {
    for ((i, j), c) in data.indexed_iter_mut() {
        *c *= if (i + j) % 2 == 0 { scale } else { -scale };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_samples(grid: &Grid, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn(grid.shape(), |_| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn constant_goes_to_the_zero_mode() {
        let g = Grid::new(PI, 2.0 * PI, 16, 32).unwrap();
        let c = forward(&g, &Array2::from_elem(g.shape(), 1.0)).unwrap();
        for ((i, j), v) in c.indexed_iter() {
            if i == 0 && j == 0 {
                // 1 * area / (2 pi)
                assert!((v.re - g.area() / (2.0 * PI)).abs() < 1e-12);
            } else {
                assert!(v.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn cosine_has_two_modes() {
        let g = Grid::new(PI, PI, 16, 16).unwrap();
        let s = Array2::from_shape_fn(g.shape(), |(i, _)| (3.0 * g.x(i)).cos());
        let c = forward(&g, &s).unwrap();
        let nonzero: Vec<_> = c
            .indexed_iter()
            .filter(|(_, v)| v.norm() > 1e-12)
            .map(|((i, j), _)| (g.index_x(i), g.index_y(j)))
            .collect();
        assert_eq!(nonzero.len(), 2);
        assert!(nonzero.contains(&(3, 0)) && nonzero.contains(&(-3, 0)));
        // centred phase convention: an even real function has real coefficients
        for v in c.iter() {
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = Grid::new(7.0, 3.0, 64, 32).unwrap();
        for seed in 0..100 {
            let s = random_samples(&g, seed);
            let c = forward(&g, &s).unwrap();
            let back = backward(&g, &c).unwrap();
            let err = (&back - &s).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
            let scale = s.mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
            assert!(err / scale <= 1e-12, "round trip {}", err / scale);

            let phys: f64 = s.iter().map(|v| v * v).sum::<f64>() * g.dx() * g.dy();
            let spec: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dk1() * g.dk2();
            assert!(((phys - spec) / phys).abs() <= 1e-12);
        }
    }

    #[test]
    fn shape_is_checked() {
        let g = Grid::new(1.0, 1.0, 16, 16).unwrap();
        assert!(forward(&g, &Array2::zeros((16, 32))).is_err());
    }
}
