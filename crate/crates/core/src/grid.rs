//! Periodic computational box `[-L, L)^d` and its frequency lattice.
//!
//! Points are stored in row-major order: axis 0 varies slowest. The point with
//! multi-index `j` sits at `x_i = -L + j_i h`, so the origin is index `n/2`
//! on every axis. Frequencies follow the usual FFT layout: index `j` carries
//! the integer wave number `m = j` for `j < n/2` and `m = j - n` otherwise,
//! with physical frequency `xi = (pi / L) m`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Upper bound on the number of lattice points of a single field.
pub const MAX_POINTS: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    d: usize,
    n: usize,
    half_len: f64,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, half_len: f64) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        if !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} is not a power of two")));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!("n = {n} is below the minimum of 4")));
        }
        if !(half_len.is_finite() && half_len > 0.0) {
            return Err(Error::InvalidGrid(format!("box half-length {half_len} must be positive")));
        }
        let points = n.checked_pow(d as u32).filter(|&p| p <= MAX_POINTS);
        if points.is_none() {
            return Err(Error::InvalidGrid(format!("n^d = {n}^{d} exceeds the memory guard 2^26")));
        }
        Ok(Self { d, n, half_len })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn half_len(&self) -> f64 {
        self.half_len
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_len / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `h^d`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Box volume `(2L)^d`.
    #[inline]
    pub fn volume(&self) -> f64 {
        (2.0 * self.half_len).powi(self.d as i32)
    }

    /// Frequency lattice spacing `pi / L`.
    #[inline]
    pub fn dk(&self) -> f64 {
        PI / self.half_len
    }

    /// Nyquist frequency `pi / h`.
    #[inline]
    pub fn nyquist(&self) -> f64 {
        PI / self.spacing()
    }

    #[inline]
    pub fn wave_index(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Multi-index of a flat index (axis 0 first).
    #[inline]
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0usize; MAX_DIM];
        for axis in (0..self.d).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    #[inline]
    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.d).fold(0, |acc, &j| acc * self.n + j)
    }

    /// Physical coordinates of a lattice point; unused trailing slots are 0.
    #[inline]
    pub fn position(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.d {
            x[axis] = -self.half_len + idx[axis] as f64 * h;
        }
        x
    }

    /// Frequency vector of a spectral index.
    #[inline]
    pub fn frequency(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unravel(flat);
        let dk = self.dk();
        let mut xi = [0.0; MAX_DIM];
        for axis in 0..self.d {
            xi[axis] = dk * self.wave_index(idx[axis]) as f64;
        }
        xi
    }

    #[inline]
    pub fn frequency_norm_sq(&self, flat: usize) -> f64 {
        self.frequency(flat).iter().map(|v| v * v).sum()
    }

    /// Squared integer wave-number norm `|m|^2`; `|xi|^2 = (pi/L)^2 |m|^2`.
    #[inline]
    pub fn wave_norm_sq(&self, flat: usize) -> u64 {
        let idx = self.unravel(flat);
        (0..self.d)
            .map(|a| {
                let m = self.wave_index(idx[a]);
                (m * m) as u64
            })
            .sum()
    }

    /// Displacement represented by a point when the grid is read as a lattice
    /// of differences `x - y`: identical to `position`, which places the zero
    /// displacement at index `n/2`.
    #[inline]
    pub fn displacement(&self, flat: usize) -> [f64; MAX_DIM] {
        self.position(flat)
    }

    /// Flat index of the lattice point closest to `x` (periodic).
    pub fn nearest_index(&self, x: &[f64]) -> usize {
        let h = self.spacing();
        let n = self.n as i64;
        let mut idx = [0usize; MAX_DIM];
        for axis in 0..self.d {
            let j = ((x[axis] + self.half_len) / h).round() as i64;
            idx[axis] = j.rem_euclid(n) as usize;
        }
        self.ravel(&idx[..self.d])
    }

    pub fn same_as(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Euclidean norm over the first `d` slots.
#[inline]
pub fn norm(v: &[f64; MAX_DIM], d: usize) -> f64 {
    v.iter().take(d).map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_lattice() {
        let g = GridSpec::new(1, 8, PI).unwrap();
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
        let xi: Vec<f64> = (0..8).map(|j| g.frequency(j)[0]).collect();
        let mut sorted = xi.clone();
        sorted.sort_by(f64::total_cmp);
        let expected: Vec<f64> = (-4..4).map(|m| m as f64).collect();
        for (a, b) in sorted.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn four_dimensional_unit_spacing() {
        let g = GridSpec::new(4, 32, 16.0).unwrap();
        assert_eq!(g.len(), 1_048_576);
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.spacing() * g.n() as f64, 2.0 * g.half_len());
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(GridSpec::new(2, 6, 1.0), Err(Error::InvalidGrid(_))));
        assert!(GridSpec::new(5, 8, 1.0).is_err());
        assert!(GridSpec::new(4, 256, 1.0).is_err());
        assert!(GridSpec::new(2, 8, 0.0).is_err());
        assert!(GridSpec::new(2, 2, 1.0).is_err());
    }

    #[test]
    fn origin_is_center_index() {
        let g = GridSpec::new(3, 8, 2.0).unwrap();
        let c = g.ravel(&[4, 4, 4]);
        assert_eq!(g.position(c), [0.0; 4]);
        assert_eq!(g.nearest_index(&[0.0, 0.0, 0.0]), c);
        assert_eq!(g.unravel(c)[..3], [4, 4, 4]);
    }

    #[test]
    fn nyquist_appears_once_per_axis() {
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        let ms: Vec<i64> = (0..16).map(|j| g.wave_index(j)).collect();
        assert_eq!(ms.iter().filter(|&&m| m == -8).count(), 1);
        assert!(!ms.contains(&8));
        for m in 1..8 {
            assert!(ms.contains(&m) && ms.contains(&-m));
        }
    }
}
