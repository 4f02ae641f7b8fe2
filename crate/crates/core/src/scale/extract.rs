use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ScaleFunction, ScaleKind};
use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::fft;
use crate::field::{lp_norm, ComplexField};
use crate::grid::{GridSpec, MAX_DIM};
use crate::lp::{bump, DYADIC_MAX_EXP, DYADIC_MIN_EXP};
use crate::spectral::fractional_symbol;

/// Almost-periodicity parameters of a single snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scales {
    pub n: f64,
    pub x: [f64; MAX_DIM],
    pub c_big: f64,
    pub c_small: f64,
}

/// Periodic distance from `x` to `c` on the box.
fn torus_distance(grid: &GridSpec, x: &[f64; MAX_DIM], c: &[f64; MAX_DIM]) -> f64 {
    let period = 2.0 * grid.half_len();
    let mut r2 = 0.0;
    for a in 0..grid.dim() {
        let mut dx = (x[a] - c[a]).rem_euclid(period);
        if dx > 0.5 * period {
            dx -= period;
        }
        r2 += dx * dx;
    }
    r2.sqrt()
}

/// Circular mean of a density per axis.
fn circular_centroid(grid: &GridSpec, density: &[f64]) -> [f64; MAX_DIM] {
    let l = grid.half_len();
    let mut acc = [Complex64::default(); MAX_DIM];
    for (i, &w) in density.iter().enumerate() {
        let x = grid.position(i);
        for a in 0..grid.dim() {
            acc[a] += Complex64::from_polar(w, PI * x[a] / l);
        }
    }
    let mut c = [0.0; MAX_DIM];
    for a in 0..grid.dim() {
        c[a] = if acc[a].norm() > 0.0 { acc[a].arg() * l / PI } else { 0.0 };
    }
    c
}

/// `N`, `x`, `C(eta)` and `c(eta)` from the `|nabla|^{3/2}` energy of `f`.
pub fn extract_scales(f: &ComplexField, eta: f64) -> Result<Scales> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta = {eta} must lie in (0, 1)")));
    }
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    let scale = grid.cell_volume() / grid.len() as f64;
    // (|xi|, |xi|^3 |hat u|^2) pairs
    let shells: Vec<(f64, f64)> = spec
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k2 = grid.frequency_norm_sq(i);
            (k2.sqrt(), scale * k2.powf(1.5) * c.norm_sqr())
        })
        .collect();
    let total: f64 = shells.iter().map(|s| s.1).sum();
    if total == 0.0 {
        return Err(Error::ZeroField);
    }
    let freq_tail = |k: f64| shells.iter().filter(|s| s.0 > k).map(|s| s.1).sum::<f64>();

    let mut energy_field = spec.clone();
    for (i, c) in energy_field.iter_mut().enumerate() {
        *c *= fractional_symbol(grid.frequency_norm_sq(i), 1.5);
    }
    fft::inverse(&mut energy_field, &grid);
    let hd = grid.cell_volume();
    let density: Vec<f64> = energy_field.iter().map(|c| hd * c.norm_sqr()).collect();
    let x = circular_centroid(&grid, &density);

    let n = (DYADIC_MIN_EXP..=DYADIC_MAX_EXP)
        .map(|k| 2f64.powi(k))
        .find(|&n| freq_tail(n) <= 0.5 * eta * total)
        .unwrap_or(2f64.powi(DYADIC_MAX_EXP));

    let distances: Vec<f64> = (0..grid.len()).map(|i| torus_distance(&grid, &grid.position(i), &x)).collect();
    let space_tail =
        |r: f64| distances.iter().zip(&density).filter(|(d, _)| **d > r).map(|(_, w)| *w).sum::<f64>();
    let c_big = (DYADIC_MIN_EXP..=2 * DYADIC_MAX_EXP)
        .map(|k| 2f64.powi(k))
        .find(|&c| space_tail(c / n) < eta * total && freq_tail(c * n) < eta * total)
        .unwrap_or(2f64.powi(2 * DYADIC_MAX_EXP));

    let low_energy = |c: f64| {
        shells.iter().map(|&(k, e)| bump(k / (c * n)).powi(2) * e).sum::<f64>()
    };
    let c_small = (DYADIC_MIN_EXP..=DYADIC_MAX_EXP)
        .rev()
        .map(|k| 2f64.powi(k))
        .find(|&c| low_energy(c) <= eta * total)
        .unwrap_or(2f64.powi(DYADIC_MIN_EXP));

    Ok(Scales { n, x, c_big, c_small })
}

/// `P_{>n} f` for an arbitrary positive threshold (not necessarily dyadic).
pub fn high_pass(f: &ComplexField, n: f64) -> Result<ComplexField> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold {n} must be positive")));
    }
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    for (i, c) in spec.iter_mut().enumerate() {
        *c *= 1.0 - bump(grid.frequency_norm_sq(i).sqrt() / n);
    }
    fft::inverse(&mut spec, &grid);
    Ok(ComplexField::from_vec_unchecked(grid, f.t(), spec))
}

/// `n_0(t) = || P_{> K^{-1/5}} u(t) ||_4^{-2}` interpolated linearly between samples.
pub fn n0_from_traj(traj: &Trajectory, k: f64) -> Result<ScaleFunction> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidArgument(format!("K = {k} must be positive")));
    }
    let threshold = k.powf(-0.2);
    let mut bps = Vec::with_capacity(traj.len());
    let mut vals = Vec::with_capacity(traj.len());
    for s in traj.samples() {
        let hi = high_pass(s, threshold)?;
        let norm = lp_norm(hi.values().iter().map(|v| v.norm()), 4.0, hi.grid().cell_volume());
        if norm == 0.0 {
            return Err(Error::InvalidArgument(format!("high-frequency part vanishes at t = {}", s.t())));
        }
        bps.push(s.t());
        vals.push(norm.powi(-2));
    }
    let end = *bps.last().unwrap();
    ScaleFunction::new(ScaleKind::PiecewiseLinear, bps, vals, end)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstancyReport {
    /// `max / min` over each breakpoint's window.
    pub ratios: Vec<f64>,
    pub worst: f64,
}

/// Variation of `scale` over `[t_0 - delta v_0^{-2}, t_0 + delta v_0^{-2}]` at each breakpoint.
pub fn local_constancy_check(scale: &ScaleFunction, delta: f64) -> Result<ConstancyReport> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be non-negative")));
    }
    let ratios: Vec<f64> = scale
        .breakpoints()
        .iter()
        .zip(scale.values())
        .map(|(&t0, &v0)| {
            let w = delta / (v0 * v0);
            let (lo, hi) = scale.extrema_on(t0 - w, t0 + w);
            hi / lo
        })
        .collect();
    let worst = ratios.iter().copied().fold(1.0, f64::max);
    Ok(ConstancyReport { ratios, worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::InitialData;

    #[test]
    fn constant_scale_has_unit_ratio() {
        let s = ScaleFunction::constant(0.0, 3.0, 2.0).unwrap();
        assert_eq!(local_constancy_check(&s, 10.0).unwrap().worst, 1.0);
        let jump = ScaleFunction::new(ScaleKind::PiecewiseConstant, vec![0.0, 1.0], vec![1.0, 2.0], 2.0).unwrap();
        assert_eq!(local_constancy_check(&jump, 10.0).unwrap().worst, 2.0);
    }

    #[test]
    fn zero_field_is_an_error() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        assert!(matches!(extract_scales(&ComplexField::zeros(g, 0.0), 0.5), Err(Error::ZeroField)));
    }

    #[test]
    fn single_band_scale() {
        let g = GridSpec::new(2, 64, 16.0 * PI).unwrap();
        // dk = 1/16; band N0 = 1
        let f = InitialData::DyadicBand { mass: 1.0, n: 1.0, seed: 5 }.build(&g).unwrap();
        let s = extract_scales(&f, 0.5).unwrap();
        assert!(s.n >= 0.5 && s.n <= 2.0, "N = {}", s.n);
    }

    #[test]
    fn n0_values() {
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        let f = InitialData::PlaneWave { amplitude: 1.0, mode: [3, 0, 0, 0] }.build(&g).unwrap();
        // |k| = 3 pi is far above the threshold 1, so P_hi u = u and ||u||_4 = 2^{1/4}
        let traj = Trajectory::from_samples(vec![f.clone(), f.with_time(1.0)], 1.0, 4).unwrap();
        let n0 = n0_from_traj(&traj, 1.0).unwrap();
        assert!((n0.values()[0] - 2f64.powf(-0.5)).abs() < 1e-12);
    }
}
