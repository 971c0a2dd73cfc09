use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular periodic box `[-Lx, Lx) x [-Ly, Ly)` with `Nx x Ny` samples.
///
/// Arrays on the grid have shape `(Nx, Ny)`: the first index runs along `x`,
/// the second along `y`. Spectral arrays use FFT ordering along each axis, so
/// index `n` carries the signed lattice index `n` for `n < N/2` and `n - N`
/// otherwise; the wavenumber is that signed index times `pi / L`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub half_width_x: f64,
    pub half_width_y: f64,
    pub points_x: usize,
    pub points_y: usize,
}

impl Grid {
    pub fn new(half_width_x: f64, half_width_y: f64, points_x: usize, points_y: usize) -> Result<Self> {
        for (name, l) in [("half_width_x", half_width_x), ("half_width_y", half_width_y)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} must be positive and finite, got {l}")));
            }
        }
        for (name, n) in [("points_x", points_x), ("points_y", points_y)] {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::InvalidGrid(format!("{name} must be a power of two >= 16, got {n}")));
            }
        }
        Ok(Self {
            half_width_x,
            half_width_y,
            points_x,
            points_y,
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.points_x, self.points_y)
    }

    pub fn len(&self) -> usize {
        self.points_x * self.points_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width_x / self.points_x as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_width_y / self.points_y as f64
    }

    /// Area of the periodic box.
    pub fn area(&self) -> f64 {
        4.0 * self.half_width_x * self.half_width_y
    }

    /// Spacing of the wavenumber lattice along `x`.
    pub fn dk1(&self) -> f64 {
        PI / self.half_width_x
    }

    pub fn dk2(&self) -> f64 {
        PI / self.half_width_y
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width_x + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        -self.half_width_y + j as f64 * self.dy()
    }

    /// Signed lattice index of FFT slot `i` along `x`.
    pub fn index_x(&self, i: usize) -> i64 {
        signed_index(i, self.points_x)
    }

    pub fn index_y(&self, j: usize) -> i64 {
        signed_index(j, self.points_y)
    }

    pub fn k1(&self, i: usize) -> f64 {
        self.index_x(i) as f64 * self.dk1()
    }

    pub fn k2(&self, j: usize) -> f64 {
        self.index_y(j) as f64 * self.dk2()
    }

    /// Signed lattice indices along `x` in ascending order, `-Nx/2 .. Nx/2 - 1`.
    pub fn lattice_x(&self) -> Vec<i64> {
        let half = (self.points_x / 2) as i64;
        (-half..half).collect()
    }

    pub fn lattice_y(&self) -> Vec<i64> {
        let half = (self.points_y / 2) as i64;
        (-half..half).collect()
    }

    /// FFT slot of the mirror mode `-k` along `x`.
    pub fn mirror_x(&self, i: usize) -> usize {
        (self.points_x - i) % self.points_x
    }

    pub fn mirror_y(&self, j: usize) -> usize {
        (self.points_y - j) % self.points_y
    }

    pub fn is_nyquist(&self, i: usize, j: usize) -> bool {
        i == self.points_x / 2 || j == self.points_y / 2
    }

    /// Modes every field must leave empty: the Nyquist row and column, and the
    /// line `k1 = 0, k2 != 0` on which the `k2^2/k1^2` weights are singular.
    pub fn is_forbidden(&self, i: usize, j: usize) -> bool {
        self.is_nyquist(i, j) || (i == 0 && j != 0)
    }

    /// Two-thirds band kept by dealiased quadratic products.
    pub fn in_dealias_band(&self, i: usize, j: usize) -> bool {
        let cx = (self.points_x / 3) as i64;
        let cy = (self.points_y / 3) as i64;
        self.index_x(i).abs() <= cx && self.index_y(j).abs() <= cy
    }

    /// Largest retained wavenumber magnitude along each axis after dealiasing.
    pub fn dealias_cutoff(&self) -> (f64, f64) {
        (
            (self.points_x / 3) as f64 * self.dk1(),
            (self.points_y / 3) as f64 * self.dk2(),
        )
    }

    /// Same box with twice the resolution in each direction.
    pub fn refined(&self) -> Self {
        Self {
            points_x: 2 * self.points_x,
            points_y: 2 * self.points_y,
            ..*self
        }
    }
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            half_width_x: 100.0,
            half_width_y: 100.0,
            points_x: 256,
            points_y: 256,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_spacing_on_pi_box() {
        let g = Grid::new(PI, PI, 16, 16).unwrap();
        assert_eq!(g.lattice_x(), (-8..8).collect::<Vec<_>>());
        assert!((g.dk1() - 1.0).abs() < 1e-15);
        assert_eq!(g.k1(3), 3.0);
        assert_eq!(g.k1(13), -3.0);
        assert_eq!(g.k1(8), -8.0);
    }

    #[test]
    fn spacing_and_size() {
        let g = Grid::new(100.0, 100.0, 256, 256).unwrap();
        assert!((g.dk1() - PI / 100.0).abs() < 1e-16);
        let g = Grid::new(50.0, 100.0, 128, 256).unwrap();
        assert_eq!(g.len(), 32768);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Grid::new(1.0, 1.0, 100, 128).is_err());
        assert!(Grid::new(1.0, 1.0, 8, 8).is_err());
        assert!(Grid::new(0.0, 1.0, 16, 16).is_err());
        assert!(Grid::new(1.0, -2.0, 16, 16).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 16, 16).is_err());
    }

    #[test]
    fn samples_are_reflection_symmetric() {
        let g = Grid::new(3.0, 5.0, 32, 16).unwrap();
        for i in 0..32 {
            let m = g.mirror_x(i);
            let sum = g.x(i) + g.x(m);
            // -x_i coincides with x_{N-i} modulo the period
            assert!(sum.abs() < 1e-12 || (sum + 2.0 * g.half_width_x).abs() < 1e-12);
        }
        assert_eq!(g.x(16), 0.0);
        assert_eq!(g.y(8), 0.0);
    }

    #[test]
    fn dealias_band_is_two_thirds() {
        let g = Grid::new(PI, PI, 256, 256).unwrap();
        assert!(g.in_dealias_band(85, 0));
        assert!(!g.in_dealias_band(86, 0));
        assert!(g.in_dealias_band(256 - 85, 0));
        assert!(!g.in_dealias_band(256 - 86, 0));
    }
}
