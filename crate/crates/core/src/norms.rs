//! Space-time norms along trajectories: mixed Lebesgue norms, scattering
//! size, square sums over Littlewood–Paley pieces, the endpoint and maximal
//! functionals and the long-time Strichartz quantities `A`, `B_q`, `K`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evolve::{InitialData, Trajectory};
use crate::fft;
use crate::field::{lp_norm, ComplexField};
use crate::grid::GridSpec;
use crate::lp::{dyadic_exponent, lattice_window, Band};
use crate::scale::ScaleFunction;
use crate::spectral::{fractional_symbol, PhaseTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedNormSpec {
    pub q: f64,
    pub r: f64,
}

impl MixedNormSpec {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        if !(q >= 1.0 && r >= 1.0) {
            return Err(Error::InvalidArgument(format!("exponents must be >= 1, got q = {q}, r = {r}")));
        }
        Ok(Self { q, r })
    }

    /// `2/q + d/r = d/2` with `q, r >= 2`.
    pub fn admissible_in(&self, d: usize) -> bool {
        let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
        let d = d as f64;
        self.q >= 2.0 && self.r >= 2.0 && (2.0 * inv(self.q) + d * inv(self.r) - d / 2.0).abs() < 1e-12
    }

    pub fn admissible(&self) -> bool {
        self.admissible_in(4)
    }
}

/// Trapezoid weights on `n` uniform nodes; a lone sample gets unit weight.
pub fn trapezoid_weights(n: usize, dt: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let mut w = vec![dt; n];
            w[0] = 0.5 * dt;
            w[n - 1] = 0.5 * dt;
            w
        }
    }
}

/// `(sum_i w_i |v_i|^q)^{1/q}`, or `max |v_i|` for `q = inf`.
pub fn time_norm(values: &[f64], weights: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    } else {
        values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn traj_weights(traj: &Trajectory) -> Vec<f64> {
    trapezoid_weights(traj.len(), traj.dt_sample())
}

pub fn mixed_norm(traj: &Trajectory, spec: MixedNormSpec) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: traj.len() });
    }
    let per_t: Vec<f64> = traj.samples().iter().map(|s| s.lp_norm(spec.r)).collect();
    Ok(time_norm(&per_t, &traj_weights(traj), spec.q))
}

/// `S_I(u) = int_I int |u|^12 dx dt`.
pub fn scattering_size(traj: &Trajectory) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: traj.len() });
    }
    let hd = traj.grid().cell_volume();
    let per_t: Vec<f64> =
        traj.samples().iter().map(|s| hd * s.values().iter().map(|v| v.norm_sqr().powi(6)).sum::<f64>()).collect();
    Ok(per_t.iter().zip(traj_weights(traj)).map(|(v, w)| v * w).sum())
}

/// `|| |nabla|^s P u(t) ||_r` at every sample for each band.
pub fn band_series(traj: &Trajectory, bands: &[Band], s: f64, r: f64) -> Result<Vec<Vec<f64>>> {
    for b in bands {
        b.validate()?;
    }
    let grid = *traj.grid();
    let hd = grid.cell_volume();
    let deriv: Vec<f64> = (0..grid.len()).map(|i| fractional_symbol(grid.frequency_norm_sq(i), s)).collect();
    let radii: Vec<f64> = (0..grid.len()).map(|i| grid.frequency_norm_sq(i).sqrt()).collect();
    let mut out = vec![Vec::with_capacity(traj.len()); bands.len()];
    let mut work = vec![Complex64::default(); grid.len()];
    for sample in traj.samples() {
        let mut spec = sample.values().to_vec();
        fft::forward(&mut spec, &grid);
        for (b, band) in bands.iter().enumerate() {
            let mut any = false;
            for i in 0..grid.len() {
                let m = band.symbol(radii[i]) * deriv[i];
                any |= m != 0.0 && spec[i] != Complex64::default();
                work[i] = spec[i] * m;
            }
            let norm = if any {
                fft::inverse(&mut work, &grid);
                lp_norm(work.iter().map(|c| c.norm()), r, hd)
            } else {
                0.0
            };
            out[b].push(norm);
        }
    }
    Ok(out)
}

/// `(sum_N || |nabla|^s P_N u ||_{L^q_t L^r_x}^2)^{1/2}` over `window`
/// (the lattice window of the grid when `None`).
pub fn besov_strichartz_sum(traj: &Trajectory, s: f64, spec: MixedNormSpec, window: Option<&[f64]>) -> Result<f64> {
    let owned;
    let window = match window {
        Some(w) => w,
        None => {
            owned = lattice_window(traj.grid());
            &owned
        }
    };
    let bands: Vec<Band> = window.iter().map(|&n| Band::At(n)).collect();
    let series = band_series(traj, &bands, s, spec.r)?;
    let w = traj_weights(traj);
    Ok(series.iter().map(|v| time_norm(v, &w, spec.q).powi(2)).sum::<f64>().sqrt())
}

/// Sides of the endpoint estimate
/// `||u||_{L^4_t L^inf_x} <~ || |nabla|^{3/2} u ||_{L^inf L^2}^{1/2} (sum_N || |nabla|^{3/2} u_N ||_{L^2 L^4}^2)^{1/4}`.
pub fn endpoint_sides(traj: &Trajectory) -> Result<(f64, f64)> {
    let w = traj_weights(traj);
    let sup: Vec<f64> = traj.samples().iter().map(|s| s.max_abs()).collect();
    let lhs = time_norm(&sup, &w, 4.0);
    let grid = *traj.grid();
    let energy: Vec<f64> = traj
        .samples()
        .iter()
        .map(|s| s.spectrum().sobolev_norm(1.5))
        .collect();
    let a = time_norm(&energy, &w, f64::INFINITY);
    let bands: Vec<Band> = lattice_window(&grid).into_iter().map(Band::At).collect();
    let series = band_series(traj, &bands, 1.5, 4.0)?;
    let sq: f64 = series.iter().map(|v| time_norm(v, &w, 2.0).powi(2)).sum();
    Ok((lhs, a.sqrt() * sq.powf(0.25)))
}

pub fn endpoint_ratio(traj: &Trajectory) -> Result<f64> {
    let (lhs, rhs) = endpoint_sides(traj)?;
    if rhs == 0.0 {
        return Err(Error::ZeroRhs);
    }
    Ok(lhs / rhs)
}

/// `|| sup_{N in window} N^{4/q - 2} || P_N u(t) ||_q ||_{L^2_t}`.
pub fn maximal_functional(traj: &Trajectory, q: f64) -> Result<f64> {
    if !(q > 4.0) {
        return Err(Error::InvalidArgument(format!("maximal functional needs q > 4, got {q}")));
    }
    let window = lattice_window(traj.grid());
    let bands: Vec<Band> = window.iter().map(|&n| Band::At(n)).collect();
    let series = band_series(traj, &bands, 0.0, q)?;
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    let sup: Vec<f64> = (0..traj.len())
        .map(|t| {
            window
                .iter()
                .zip(&series)
                .map(|(n, v)| n.powf(4.0 * inv_q - 2.0) * v[t])
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(time_norm(&sup, &traj_weights(traj), 2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtsQuantities {
    pub a: f64,
    pub b: f64,
    pub k: f64,
}

/// `A(N)`, `B_q(N)` over the lattice window and `K = int_I N(t)^{-3} dt`.
pub fn lts_quantities(traj: &Trajectory, n: f64, q: f64, scale: &ScaleFunction) -> Result<LtsQuantities> {
    dyadic_exponent(n)?;
    if !(q > 4.0) {
        return Err(Error::InvalidArgument(format!("B_q needs q in (4, inf], got {q}")));
    }
    let window = lattice_window(traj.grid());
    if window.is_empty() {
        return Err(Error::BandEmpty);
    }
    let w = traj_weights(traj);
    let low: Vec<f64> = window.iter().copied().filter(|&m| m <= n).collect();
    let high: Vec<f64> = window.iter().copied().filter(|&m| m > n).collect();

    let a = if low.is_empty() {
        0.0
    } else {
        let bands: Vec<Band> = low.iter().map(|&m| Band::At(m)).collect();
        let series = band_series(traj, &bands, 1.5, 4.0)?;
        series.iter().map(|v| time_norm(v, &w, 2.0).powi(2)).sum::<f64>().sqrt()
    };

    let b = if high.is_empty() {
        0.0
    } else {
        let bands: Vec<Band> = high.iter().map(|&m| Band::At(m)).collect();
        let series = band_series(traj, &bands, 0.0, q)?;
        let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
        let sup: Vec<f64> = (0..traj.len())
            .map(|t| high.iter().zip(&series).map(|(m, v)| m.powf(4.0 * inv_q - 2.0) * v[t]).fold(0.0, f64::max))
            .collect();
        n.powf(2.5) * time_norm(&sup, &w, 2.0)
    };

    let k = scale_time_integral(traj, scale, -3.0)?;
    Ok(LtsQuantities { a, b, k })
}

/// `int_I N(t)^e dt` by the trapezoid rule on the sample times.
pub fn scale_time_integral(traj: &Trajectory, scale: &ScaleFunction, e: f64) -> Result<f64> {
    let w = traj_weights(traj);
    let mut total = 0.0;
    for (s, wi) in traj.samples().iter().zip(&w) {
        let v = scale.eval(s.t())?;
        total += wi * v.powf(e);
    }
    Ok(total)
}

/// Both sides of `int_I N(t)^2 dt <~ || |nabla|^{3/2} u ||_{L^2_t L^4_x}^2`.
pub fn sb_report(traj: &Trajectory, scale: &ScaleFunction) -> Result<(f64, f64)> {
    let lhs = scale_time_integral(traj, scale, 2.0)?;
    let grid = *traj.grid();
    let per_t: Vec<f64> = traj
        .samples()
        .iter()
        .map(|s| {
            let mut spec = s.values().to_vec();
            fft::forward(&mut spec, &grid);
            for (i, c) in spec.iter_mut().enumerate() {
                *c *= fractional_symbol(grid.frequency_norm_sq(i), 1.5);
            }
            fft::inverse(&mut spec, &grid);
            lp_norm(spec.iter().map(|c| c.norm()), 4.0, grid.cell_volume())
        })
        .collect();
    let rhs = time_norm(&per_t, &traj_weights(traj), 2.0).powi(2);
    Ok((lhs, rhs))
}

/// Free evolution `e^{it Delta} f` sampled at `samples` uniform times on `[0, t_end]`.
pub fn free_trajectory(f: &ComplexField, t_end: f64, samples: usize) -> Result<Trajectory> {
    if samples < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: samples });
    }
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    let dt = t_end / (samples - 1) as f64;
    let out = (0..samples)
        .map(|i| {
            let t = i as f64 * dt;
            let ph = PhaseTable::new(&grid, t);
            let mut s: Vec<Complex64> = spec.iter().enumerate().map(|(j, c)| c * ph.get(&grid, j)).collect();
            fft::inverse(&mut s, &grid);
            ComplexField::from_vec_unchecked(grid, t, s)
        })
        .collect();
    Trajectory::from_samples(out, 0.0, 4)
}

/// Randomized Gaussian data: centre within `L/8`, width in `[w_min, 2 w_min]`,
/// drift components up to `1 / w_min`. Independent of `n`, so refinements see the same data.
pub fn random_gaussian(grid: &GridSpec, seed: u64, w_min: f64) -> Result<ComplexField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let mut center = [0.0; 4];
    let mut velocity = [0.0; 4];
    let l = grid.half_len();
    let vmax = 1.0 / w_min;
    for a in 0..d {
        center[a] = rng.gen_range(-l / 8.0..l / 8.0);
        velocity[a] = rng.gen_range(-vmax..vmax);
    }
    let width = rng.gen_range(w_min..2.0 * w_min);
    let amplitude = rng.gen_range(0.5..1.5);
    InitialData::Gaussian { amplitude, center, width, velocity }.build(grid)
}

/// `max_seed || e^{it Delta} f ||_{L^q L^r} / || f ||_2` over random Gaussians.
pub fn strichartz_ratio_ensemble(
    grid: &GridSpec,
    seeds: u64,
    spec: MixedNormSpec,
    t_end: f64,
    samples: usize,
    w_min: f64,
) -> Result<f64> {
    if !spec.admissible_in(grid.dim()) {
        return Err(Error::InvalidArgument(format!("(q, r) = ({}, {}) is not admissible", spec.q, spec.r)));
    }
    let mut worst: f64 = 0.0;
    for seed in 0..seeds {
        let f = random_gaussian(grid, seed, w_min)?;
        let traj = free_trajectory(&f, t_end, samples)?;
        worst = worst.max(mixed_norm(&traj, spec)? / f.l2_norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_traj(f: &ComplexField, times: &[f64]) -> Trajectory {
        let s = times.iter().map(|&t| f.clone().with_time(t)).collect();
        Trajectory::from_samples(s, 1.0, 4).unwrap()
    }

    #[test]
    fn constant_field_l2() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |x| Complex64::new(x[0], 1.0 - x[1])).unwrap();
        let traj = constant_traj(&f, &[0.0, 0.5, 1.0]);
        let v = mixed_norm(&traj, MixedNormSpec::new(2.0, 2.0).unwrap()).unwrap();
        assert!((v - f.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn scattering_size_of_unit_field() {
        let g = GridSpec::new(2, 8, 1.5).unwrap();
        let f = ComplexField::from_fn(g, 0.0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let traj = constant_traj(&f, &[0.0, 1.0, 2.0]);
        let s = scattering_size(&traj).unwrap();
        assert!((s - 2.0 * g.volume()).abs() < 1e-12);
    }

    #[test]
    fn admissibility() {
        assert!(MixedNormSpec::new(2.0, 4.0).unwrap().admissible());
        assert!(MixedNormSpec::new(f64::INFINITY, 2.0).unwrap().admissible());
        assert!(!MixedNormSpec::new(4.0, 4.0).unwrap().admissible());
        let g = GridSpec::new(4, 8, 4.0).unwrap();
        let r = strichartz_ratio_ensemble(&g, 1, MixedNormSpec::new(4.0, 4.0).unwrap(), 1.0, 3, 1.0);
        assert!(r.is_err());
    }

    #[test]
    fn unitarity_gives_unit_ratio() {
        let g = GridSpec::new(2, 32, 8.0).unwrap();
        let r = strichartz_ratio_ensemble(&g, 3, MixedNormSpec::new(f64::INFINITY, 2.0).unwrap(), 1.0, 5, 1.0)
            .unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximal_rejects_small_q() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        let traj = constant_traj(&ComplexField::zeros(g, 0.0), &[0.0, 1.0]);
        assert!(maximal_functional(&traj, 4.0).is_err());
        assert_eq!(maximal_functional(&traj, 8.0).unwrap(), 0.0);
        assert!(matches!(endpoint_ratio(&traj), Err(Error::ZeroRhs)));
    }
}
