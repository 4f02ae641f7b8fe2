//! Windowed ball masses and the Gaussian-sandwich kernel decay.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evolve::{boundary_shell_ratio, fit_slope, Trajectory};
use crate::fft;
use crate::field::{ComplexField, RealField};
use crate::grid::{norm, GridSpec, MAX_DIM};
use crate::norms::trapezoid_weights;
use crate::scale::ScaleFunction;
use crate::spectral::{propagate_spectrum, KernelSpectrum};

/// Output shell may carry at most this fraction of the supremum.
pub const SANDWICH_WRAP_TOL: f64 = 1e-3;

/// Random source points besides the origin.
pub const SANDWICH_SOURCES: usize = 8;

pub fn ball_indicator(grid: &GridSpec, radius: f64) -> RealField {
    let v = (0..grid.len())
        .map(|i| if norm(&grid.position(i), grid.dim()) <= radius { 1.0 } else { 0.0 })
        .collect();
    RealField::from_vec_unchecked(*grid, v)
}

/// Radii below `L/2` are windows; radii covering the whole torus are allowed as the full box.
fn check_radius(grid: &GridSpec, radius: f64) -> Result<()> {
    let l = grid.half_len();
    let full = l * (grid.dim() as f64).sqrt();
    if !(radius >= 0.0) || (radius >= 0.5 * l && radius < full) {
        return Err(Error::SupportViolation { support: radius, limit: 0.5 * l });
    }
    Ok(())
}

/// `sup_x int_{|x-y| <= lambda} |u(y)|^2 dy` for one snapshot.
pub fn ball_mass_max(f: &ComplexField, radius: f64) -> Result<f64> {
    check_radius(f.grid(), radius)?;
    let kernel = KernelSpectrum::from_samples(&ball_indicator(f.grid(), radius));
    Ok(kernel.convolve(&f.density())?.max())
}

/// Per-sample ball-mass suprema with radius `lambda(t)`, and their trapezoid integral.
pub fn ball_mass_sup(traj: &Trajectory, lambda: &ScaleFunction) -> Result<(Vec<f64>, f64)> {
    let series = traj
        .samples()
        .iter()
        .map(|s| ball_mass_max(s, lambda.eval(s.t())?))
        .collect::<Result<Vec<f64>>>()?;
    let w = trapezoid_weights(series.len(), traj.dt_sample());
    let integral = series.iter().zip(&w).map(|(a, b)| a * b).sum();
    Ok((series, integral))
}

/// `sup_x |(e^{it Delta} e^{-|x|^2/lambda^2} e^{is Delta})(x, y)|` for one source `y`.
pub fn sandwich_kernel_sup(grid: &GridSpec, lambda: f64, t: f64, s: f64, source: usize) -> Result<f64> {
    if !(lambda > 0.0 && t > 0.0 && s > 0.0) {
        return Err(Error::InvalidArgument("lambda, t and s must be positive".into()));
    }
    let mut v = vec![Complex64::default(); grid.len()];
    v[source] = Complex64::new(1.0 / grid.cell_volume(), 0.0);
    fft::forward(&mut v, grid);
    propagate_spectrum(&mut v, grid, s);
    fft::inverse(&mut v, grid);
    let inv_l2 = 1.0 / (lambda * lambda);
    for (i, c) in v.iter_mut().enumerate() {
        let x = grid.position(i);
        *c *= (-norm(&x, grid.dim()).powi(2) * inv_l2).exp();
    }
    fft::forward(&mut v, grid);
    propagate_spectrum(&mut v, grid, t);
    fft::inverse(&mut v, grid);
    let out = ComplexField::from_vec_unchecked(*grid, t + s, v);
    let ratio = boundary_shell_ratio(&out);
    if ratio > SANDWICH_WRAP_TOL {
        return Err(Error::WrapAround { ratio });
    }
    Ok(out.max_abs())
}

/// Origin plus `SANDWICH_SOURCES` random lattice points within eight cells of it.
pub fn sandwich_sources(grid: &GridSpec, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = 8.0 * grid.spacing();
    let mut out = vec![grid.nearest_index(&[0.0; MAX_DIM])];
    for _ in 0..SANDWICH_SOURCES {
        let mut y = [0.0; MAX_DIM];
        for c in y.iter_mut().take(grid.dim()) {
            *c = rng.gen_range(-reach..=reach);
        }
        out.push(grid.nearest_index(&y));
    }
    out
}

/// Kernel norm (max over sources) for each pair.
pub fn sandwich_norms(grid: &GridSpec, lambda: f64, pairs: &[(f64, f64)], seed: u64) -> Result<Vec<f64>> {
    let sources = sandwich_sources(grid, seed);
    pairs
        .iter()
        .map(|&(t, s)| {
            sources
                .iter()
                .map(|&y| sandwich_kernel_sup(grid, lambda, t, s, y))
                .try_fold(0.0f64, |m, v| Ok(m.max(v?)))
        })
        .collect()
}

/// Fitted slope of `log norm` against `log(s + t)`, with the norms.
pub fn gaussian_sandwich_exponent(
    grid: &GridSpec,
    lambda: f64,
    pairs: &[(f64, f64)],
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    if pairs.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: pairs.len() });
    }
    let norms = sandwich_norms(grid, lambda, pairs, seed)?;
    let x: Vec<f64> = pairs.iter().map(|(t, s)| (t + s).ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    Ok((fit_slope(&x, &y), norms))
}

/// The Gaussian and both propagators factor over axes, so the `d`-dimensional
/// kernel supremum is the `d`-th power of the one-dimensional one.
pub fn separable_sandwich_exponent(
    grid_1d: &GridSpec,
    d: usize,
    lambda: f64,
    pairs: &[(f64, f64)],
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    if grid_1d.dim() != 1 {
        return Err(Error::InvalidArgument("separable evaluation needs a 1-D grid".into()));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("d must be positive".into()));
    }
    let (slope, norms) = gaussian_sandwich_exponent(grid_1d, lambda, pairs, seed)?;
    Ok((d as f64 * slope, norms.iter().map(|v| v.powi(d as i32)).collect()))
}
