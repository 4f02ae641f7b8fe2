//! Grid functions: complex snapshots, real densities and spectra.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{GridSpec, MAX_DIM};

/// Complex grid function `u(t, .)` at a single time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    t: f64,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, t: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(format!("field value at index {i}")));
        }
        Ok(Self { grid, t, values })
    }

    pub(crate) fn from_vec_unchecked(grid: GridSpec, t: f64, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, t, values }
    }

    pub fn zeros(grid: GridSpec, t: f64) -> Self {
        Self { grid, t, values: vec![Complex64::default(); grid.len()] }
    }

    pub fn from_fn<F>(grid: GridSpec, t: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64; MAX_DIM]) -> Complex64,
    {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self::new(grid, t, values)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut coefficients = self.values.clone();
        fft::forward(&mut coefficients, &self.grid);
        Spectrum { grid: self.grid, coefficients }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_vec_unchecked(self.grid, self.t, self.values.iter().map(|v| v * c).collect())
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self::from_vec_unchecked(self.grid, self.t, values))
    }

    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self::from_vec_unchecked(self.grid, self.t, values))
    }

    /// `|u|^2` as a real density.
    pub fn density(&self) -> RealField {
        RealField::from_vec_unchecked(self.grid, self.values.iter().map(|v| v.norm_sqr()).collect())
    }

    pub fn modulus(&self) -> RealField {
        RealField::from_vec_unchecked(self.grid, self.values.iter().map(|v| v.norm()).collect())
    }

    /// `||u||_{L^p}` with volume element `h^d`; `p = f64::INFINITY` is the grid maximum.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(self.values.iter().map(|v| v.norm()), p, self.grid.cell_volume())
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    pub fn mass(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Relative L2 distance `||self - other|| / ||other||` (absolute when `other` vanishes).
    pub fn relative_distance(&self, other: &ComplexField) -> Result<f64> {
        self.grid.same_as(&other.grid)?;
        let diff: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        let base: f64 = other.values.iter().map(|v| v.norm_sqr()).sum();
        Ok(if base > 0.0 { (diff / base).sqrt() } else { diff.sqrt() })
    }
}

/// Real grid function, e.g. a density `|u|^2` or a sampled kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("real field value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn<F>(grid: GridSpec, f: F) -> Result<Self>
    where
        F: Fn(&[f64; MAX_DIM]) -> f64,
    {
        let values = (0..grid.len()).map(|i| f(&grid.position(i))).collect();
        Self::new(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `h^d sum f`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(self.values.iter().map(|v| v.abs()), p, self.grid.cell_volume())
    }

    /// `h^d sum f g`.
    pub fn pairing(&self, other: &RealField) -> Result<f64> {
        self.grid.same_as(&other.grid)?;
        Ok(self.grid.cell_volume() * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>())
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField::from_vec_unchecked(
            self.grid,
            0.0,
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }
}

/// Unnormalized DFT coefficients of a grid function, in FFT index layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::InvalidArgument("spectrum length does not match grid".into()));
        }
        Ok(Self { grid, coefficients })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    pub fn to_field(&self, t: f64) -> ComplexField {
        let mut values = self.coefficients.clone();
        fft::inverse(&mut values, &self.grid);
        ComplexField::from_vec_unchecked(self.grid, t, values)
    }

    /// `||f||_2` evaluated on the spectral side, `(h^d / n^d sum |F|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        (scale * self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `(h^d / n^d sum |xi|^{2s} |F|^2)^{1/2}`, i.e. the homogeneous `H^s` norm.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        let sum: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k2 = self.grid.frequency_norm_sq(i);
                if k2 == 0.0 {
                    if s == 0.0 {
                        c.norm_sqr()
                    } else {
                        0.0
                    }
                } else {
                    k2.powf(s) * c.norm_sqr()
                }
            })
            .sum();
        (scale * sum).sqrt()
    }
}

/// `(h^d sum |v|^p)^{1/p}`, or `max |v|` for `p = inf`.
pub fn lp_norm<I: Iterator<Item = f64>>(abs_values: I, p: f64, cell_volume: f64) -> f64 {
    if p.is_infinite() {
        abs_values.fold(0.0, f64::max)
    } else if p == 2.0 {
        (cell_volume * abs_values.map(|a| a * a).sum::<f64>()).sqrt()
    } else {
        (cell_volume * abs_values.map(|a| a.powf(p)).sum::<f64>()).powf(1.0 / p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_length_and_nan() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        assert!(ComplexField::new(g, 0.0, vec![Complex64::default(); 7]).is_err());
        let mut v = vec![Complex64::default(); 8];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(ComplexField::new(g, 0.0, v), Err(Error::NonFinite(_))));
    }

    #[test]
    fn parseval_holds() {
        let g = GridSpec::new(2, 16, 3.0).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |x| {
            Complex64::new((x[0] * 1.3).sin() + x[1], (x[0] * x[1]).cos())
        })
        .unwrap();
        let phys = f.l2_norm();
        let spec = f.spectrum().l2_norm();
        assert!((phys - spec).abs() / phys < 1e-12);
    }

    #[test]
    fn spectrum_round_trip() {
        let g = GridSpec::new(3, 8, 1.5).unwrap();
        let f = ComplexField::from_fn(g, 0.25, |x| Complex64::new(x[0] - x[2], x[1] * x[1])).unwrap();
        let back = f.spectrum().to_field(0.25);
        assert!(back.relative_distance(&f).unwrap() < 1e-12);
    }
}
