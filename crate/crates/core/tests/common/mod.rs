#![allow(dead_code)]

use fdkp::{Field, Frame, Grid};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random real field whose spectrum decays like a Gaussian of width `scale`.
pub fn random_field(grid: Grid, frame: Frame, seed: u64, scale: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Array2::from_shape_fn(grid.shape(), |(i, j)| {
        let (k1, k2) = (grid.k1(i), grid.k2(j));
        let env = (-(k1 * k1 + k2 * k2) / (scale * scale)).exp();
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * env
    });
    Field::from_spectral(grid, frame, c).unwrap()
}

/// Random doubly even field.
pub fn random_even_field(grid: Grid, frame: Frame, seed: u64, scale: f64) -> Field {
    random_field(grid, frame, seed, scale).symmetrize()
}

pub fn reflect_x(f: &Field) -> Field {
    let g = *f.grid();
    let s = f.samples();
    let r = Array2::from_shape_fn(g.shape(), |(i, j)| s[[g.mirror_x(i), j]]);
    Field::from_physical(g, f.frame(), &r).unwrap()
}

pub fn reflect_y(f: &Field) -> Field {
    let g = *f.grid();
    let s = f.samples();
    let r = Array2::from_shape_fn(g.shape(), |(i, j)| s[[i, g.mirror_y(j)]]);
    Field::from_physical(g, f.frame(), &r).unwrap()
}

pub fn max_abs_diff(a: &Field, b: &Field) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples().iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn rel_l2_diff(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().norm_l2() / a.norm_l2().max(f64::MIN_POSITIVE)
}
