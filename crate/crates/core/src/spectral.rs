//! Fourier multipliers, fractional derivatives, the free propagator and
//! FFT-based periodic convolution.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::{ComplexField, RealField};
use crate::grid::{GridSpec, MAX_DIM};

/// Applies `m(xi)` to `f`. `m` receives the frequency vector and spectral index.
pub fn apply_multiplier<M>(f: &ComplexField, m: M) -> Result<ComplexField>
where
    M: Fn(&[f64; MAX_DIM], usize) -> Complex64,
{
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    for (i, c) in spec.iter_mut().enumerate() {
        let xi = grid.frequency(i);
        let v = m(&xi, i);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite(format!("multiplier value at frequency {:?}", &xi[..grid.dim()])));
        }
        *c *= v;
    }
    fft::inverse(&mut spec, &grid);
    Ok(ComplexField::from_vec_unchecked(grid, f.t(), spec))
}

/// Same as [`apply_multiplier`] with a real symbol.
pub fn apply_real_multiplier<M>(f: &ComplexField, m: M) -> Result<ComplexField>
where
    M: Fn(&[f64; MAX_DIM]) -> f64,
{
    apply_multiplier(f, |xi, _| Complex64::new(m(xi), 0.0))
}

/// Symbol `|xi|^s`; the zero mode maps to 1 for `s = 0` and to 0 otherwise.
#[inline]
pub fn fractional_symbol(k2: f64, s: f64) -> f64 {
    if k2 == 0.0 {
        if s == 0.0 {
            1.0
        } else {
            0.0
        }
    } else if s == 2.0 {
        k2
    } else {
        k2.powf(0.5 * s)
    }
}

/// `|nabla|^s f`, `s >= -2`.
pub fn fractional_derivative(f: &ComplexField, s: f64) -> Result<ComplexField> {
    if !s.is_finite() || s < -2.0 {
        return Err(Error::InvalidArgument(format!("fractional order s = {s} must be >= -2")));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    apply_real_multiplier(f, |xi| fractional_symbol(grid_norm_sq(xi, grid.dim()), s))
}

/// `e^{it Delta} f`, symbol `e^{-it|xi|^2}`.
pub fn free_propagate(f: &ComplexField, t: f64) -> Result<ComplexField> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("propagation time {t}")));
    }
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    propagate_spectrum(&mut spec, &grid, t);
    fft::inverse(&mut spec, &grid);
    Ok(ComplexField::from_vec_unchecked(grid, f.t() + t, spec))
}

/// Multiplies spectral coefficients in place by `e^{-it|xi|^2}`.
pub fn propagate_spectrum(spec: &mut [Complex64], grid: &GridSpec, t: f64) {
    let phases = PhaseTable::new(grid, t);
    for (i, c) in spec.iter_mut().enumerate() {
        *c *= phases.get(grid, i);
    }
}

/// `e^{-it|xi|^2}` factorizes over axes; this caches the 1-D factors.
pub(crate) struct PhaseTable {
    axis: Vec<Complex64>,
}

impl PhaseTable {
    pub(crate) fn new(grid: &GridSpec, t: f64) -> Self {
        let dk = grid.dk();
        let axis = (0..grid.n())
            .map(|j| {
                let k = dk * grid.wave_index(j) as f64;
                Complex64::from_polar(1.0, -t * k * k)
            })
            .collect();
        Self { axis }
    }

    #[inline]
    pub(crate) fn get(&self, grid: &GridSpec, flat: usize) -> Complex64 {
        let idx = grid.unravel(flat);
        let mut v = Complex64::new(1.0, 0.0);
        for &j in idx.iter().take(grid.dim()) {
            v *= self.axis[j];
        }
        v
    }

    /// Full table in flat order.
    pub(crate) fn expand(&self, grid: &GridSpec) -> Vec<Complex64> {
        (0..grid.len()).map(|i| self.get(grid, i)).collect()
    }
}

/// Spectral partial derivative `d/dx_axis`. The Nyquist mode of that axis
/// is dropped so that real inputs give real outputs.
pub fn partial_derivative(f: &ComplexField, axis: usize) -> Result<ComplexField> {
    let grid = *f.grid();
    if axis >= grid.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    differentiate_spectrum(&mut spec, &grid, axis);
    fft::inverse(&mut spec, &grid);
    Ok(ComplexField::from_vec_unchecked(grid, f.t(), spec))
}

/// Gradient of `f` from a single forward transform.
pub fn gradient(f: &ComplexField) -> Vec<ComplexField> {
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    (0..grid.dim())
        .map(|axis| {
            let mut s = spec.clone();
            differentiate_spectrum(&mut s, &grid, axis);
            fft::inverse(&mut s, &grid);
            ComplexField::from_vec_unchecked(grid, f.t(), s)
        })
        .collect()
}

pub(crate) fn differentiate_spectrum(spec: &mut [Complex64], grid: &GridSpec, axis: usize) {
    let n = grid.n();
    let dk = grid.dk();
    for (i, c) in spec.iter_mut().enumerate() {
        let j = grid.unravel(i)[axis];
        if j == n / 2 {
            *c = Complex64::default();
        } else {
            let k = dk * grid.wave_index(j) as f64;
            *c *= Complex64::new(0.0, k);
        }
    }
}

#[inline]
fn grid_norm_sq(xi: &[f64; MAX_DIM], d: usize) -> f64 {
    xi.iter().take(d).map(|v| v * v).sum()
}

/// Forward transform of a real grid function.
pub fn real_spectrum(f: &RealField) -> Vec<Complex64> {
    let mut spec: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::forward(&mut spec, f.grid());
    spec
}

/// Transfer function of a convolution kernel: `hat K(xi) ~ int K(z) e^{-i xi z} dz`.
///
/// Convolution with it realizes `(K * rho)(x) = h^d sum_y K(x - y) rho(y)`
/// when built from lattice samples, or the continuum convolution of the
/// trigonometric interpolant of `rho` when built from an exact symbol.
#[derive(Debug, Clone)]
pub struct KernelSpectrum {
    grid: GridSpec,
    symbol: Vec<Complex64>,
}

impl KernelSpectrum {
    /// From samples `K(z)` on the displacement lattice (zero displacement at index n/2).
    pub fn from_samples(kernel: &RealField) -> Self {
        let grid = *kernel.grid();
        let mut data = ifftshift(kernel.values(), &grid);
        fft::forward(&mut data, &grid);
        let hd = grid.cell_volume();
        data.iter_mut().for_each(|c| *c *= hd);
        Self { grid, symbol: data }
    }

    pub fn from_symbol(grid: GridSpec, symbol: Vec<Complex64>) -> Result<Self> {
        if symbol.len() != grid.len() {
            return Err(Error::InvalidArgument("kernel symbol length does not match grid".into()));
        }
        if symbol.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("kernel symbol".into()));
        }
        Ok(Self { grid, symbol })
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    /// Lattice kernel whose sampled convolution reproduces this transfer function.
    pub fn lattice_kernel(&self) -> RealField {
        let mut data = self.symbol.clone();
        fft::inverse(&mut data, &self.grid);
        let inv_hd = 1.0 / self.grid.cell_volume();
        let shifted = fftshift(&data, &self.grid);
        RealField::from_vec_unchecked(self.grid, shifted.iter().map(|c| c.re * inv_hd).collect())
    }

    /// `K * rho` for a density given by its forward transform.
    pub fn convolve_spectrum(&self, rho_hat: &[Complex64]) -> RealField {
        let mut data: Vec<Complex64> = rho_hat.iter().zip(&self.symbol).map(|(a, k)| a * k).collect();
        fft::inverse(&mut data, &self.grid);
        RealField::from_vec_unchecked(self.grid, data.iter().map(|c| c.re).collect())
    }

    pub fn convolve(&self, rho: &RealField) -> Result<RealField> {
        self.grid.same_as(rho.grid())?;
        Ok(self.convolve_spectrum(&real_spectrum(rho)))
    }

    /// `h^{2d} sum_x sum_y a(y) K(x - y) b(x)` for real `a`, `b` given by
    /// their forward transforms.
    pub fn bilinear(&self, a_hat: &[Complex64], b_hat: &[Complex64]) -> f64 {
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        let sum: f64 = self
            .symbol
            .iter()
            .zip(a_hat)
            .zip(b_hat)
            .map(|((k, a), b)| (k * a * b.conj()).re)
            .sum();
        scale * sum
    }
}

/// `output(x) = h^d sum_y kernel(x - y) rho(y)`, kernel indexed by displacement.
pub fn convolve_periodic(rho: &RealField, kernel: &RealField) -> Result<RealField> {
    rho.grid().same_as(kernel.grid())?;
    KernelSpectrum::from_samples(kernel).convolve(rho)
}

/// Moves the zero displacement from index n/2 to index 0 on every axis.
pub fn ifftshift(values: &[f64], grid: &GridSpec) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::default(); values.len()];
    for (i, &v) in values.iter().enumerate() {
        let mut idx = grid.unravel(i);
        for j in idx.iter_mut().take(grid.dim()) {
            *j = (*j + n / 2) % n;
        }
        out[grid.ravel(&idx[..grid.dim()])] = Complex64::new(v, 0.0);
    }
    out
}

/// Inverse of [`ifftshift`] (identical for even n).
pub fn fftshift(values: &[Complex64], grid: &GridSpec) -> Vec<Complex64> {
    let n = grid.n();
    let mut out = vec![Complex64::default(); values.len()];
    for (i, &v) in values.iter().enumerate() {
        let mut idx = grid.unravel(i);
        for j in idx.iter_mut().take(grid.dim()) {
            *j = (*j + n / 2) % n;
        }
        out[grid.ravel(&idx[..grid.dim()])] = v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: GridSpec, seed: u64) -> ComplexField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..grid.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        ComplexField::new(grid, 0.0, v).unwrap()
    }

    fn plane_wave(grid: GridSpec, m: &[i64]) -> ComplexField {
        let dk = grid.dk();
        ComplexField::from_fn(grid, 0.0, |x| {
            let phase: f64 = m.iter().enumerate().map(|(a, &mi)| dk * mi as f64 * x[a]).sum();
            Complex64::from_polar(1.0, phase)
        })
        .unwrap()
    }

    #[test]
    fn identity_multiplier() {
        let g = GridSpec::new(2, 16, 2.0).unwrap();
        let f = random_field(g, 1);
        let out = apply_real_multiplier(&f, |_| 1.0).unwrap();
        assert!(out.relative_distance(&f).unwrap() < 1e-12);
    }

    #[test]
    fn plane_wave_is_eigenfunction() {
        let g = GridSpec::new(2, 16, 3.0).unwrap();
        let f = plane_wave(g, &[2, -3]);
        let k = [2.0 * g.dk(), -3.0 * g.dk()];
        let m = |xi: &[f64; 4], _: usize| Complex64::new(xi[0] - 0.5 * xi[1], xi[0] * xi[1]);
        let out = apply_multiplier(&f, m).unwrap();
        let expect = f.scaled(m(&[k[0], k[1], 0.0, 0.0], 0));
        assert!(out.relative_distance(&expect).unwrap() < 1e-12);

        let k_abs = (k[0] * k[0] + k[1] * k[1]).sqrt();
        let d = fractional_derivative(&f, 1.5).unwrap();
        assert!(d.relative_distance(&f.scaled(Complex64::new(k_abs.powf(1.5), 0.0))).unwrap() < 1e-12);

        let t = 0.37;
        let p = free_propagate(&f, t).unwrap();
        let expect = f.scaled(Complex64::from_polar(1.0, -k_abs * k_abs * t));
        assert!(p.relative_distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn non_finite_symbol_is_an_error() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let f = random_field(g, 2);
        let r = apply_real_multiplier(&f, |xi| 1.0 / xi[0]);
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn half_lattice_indicator_is_idempotent() {
        let g = GridSpec::new(2, 16, 1.0).unwrap();
        let f = random_field(g, 3);
        let ind = |xi: &[f64; 4]| if xi[0] + 0.3 * xi[1] >= 0.0 { 1.0 } else { 0.0 };
        let once = apply_real_multiplier(&f, ind).unwrap();
        let twice = apply_real_multiplier(&once, ind).unwrap();
        assert!(twice.relative_distance(&once).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_order_below_minus_two() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let f = random_field(g, 4);
        assert!(fractional_derivative(&f, -2.5).is_err());
        assert!(fractional_derivative(&f, -2.0).is_ok());
        assert_eq!(fractional_derivative(&f, 0.0).unwrap(), f);
    }

    #[test]
    fn gaussian_closed_form_propagation() {
        let g = GridSpec::new(2, 128, 12.0).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |x| Complex64::new((-(x[0] * x[0] + x[1] * x[1]) / 2.0).exp(), 0.0)).unwrap();
        let t = 0.5;
        let out = free_propagate(&f, t).unwrap();
        let z = Complex64::new(1.0, 2.0 * t);
        let expect = ComplexField::from_fn(g, t, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (-r2 / (2.0 * z)).exp() / z
        })
        .unwrap();
        let err = out.values().iter().zip(expect.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-8, "err = {err}");
    }

    #[test]
    fn delta_convolution_returns_scaled_kernel() {
        let g = GridSpec::new(2, 8, 2.0).unwrap();
        let c = g.nearest_index(&[0.0, 0.0]);
        let mut delta = vec![0.0; g.len()];
        delta[c] = 1.0;
        let delta = RealField::new(g, delta).unwrap();
        let kernel = RealField::from_fn(g, |x| (x[0] + 2.0 * x[1]).sin() + 0.5).unwrap();
        let out = convolve_periodic(&delta, &kernel).unwrap();
        let hd = g.cell_volume();
        for (a, b) in out.values().iter().zip(kernel.values()) {
            assert!((a - hd * b).abs() < 1e-12);
        }
        let ones = RealField::from_fn(g, |_| 1.0).unwrap();
        let rho = RealField::from_fn(g, |x| x[0] * x[0] - x[1]).unwrap();
        let out = convolve_periodic(&rho, &ones).unwrap();
        let total = rho.integral();
        assert!(out.values().iter().all(|v| (v - total).abs() < 1e-10));
    }

    #[test]
    fn lattice_kernel_round_trip() {
        let g = GridSpec::new(2, 8, 2.0).unwrap();
        let kernel = RealField::from_fn(g, |x| (-(x[0] - 0.3).powi(2) - x[1] * x[1]).exp()).unwrap();
        let back = KernelSpectrum::from_samples(&kernel).lattice_kernel();
        for (a, b) in back.values().iter().zip(kernel.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
