//! Direct `O(N^2)` and recursive reference implementations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::field::{ComplexField, RealField};
use crate::grid::{norm, GridSpec, MAX_DIM};
use crate::morawetz::{momentum_density, packed_index, potential_coefficient, sampled_values, KernelValues, RhsTerms};
use crate::norms::trapezoid_weights;
use crate::scale::{high_pass, ScaleFunction};
use crate::spectral::gradient;
use crate::weight::WeightProfile;

/// Largest lattice the pair sums accept.
pub const ORACLE_MAX_POINTS: usize = 4096;

fn check_size(grid: &GridSpec) -> Result<()> {
    if grid.len() > ORACLE_MAX_POINTS {
        return Err(Error::InvalidArgument(format!("{} points exceed the oracle limit {ORACLE_MAX_POINTS}", grid.len())));
    }
    Ok(())
}

/// Periodic displacement `x - y` in lattice units, each component in `[-n/2, n/2)`.
fn displacement(grid: &GridSpec, x: usize, y: usize) -> [i64; MAX_DIM] {
    let n = grid.n() as i64;
    let (ix, iy) = (grid.unravel(x), grid.unravel(y));
    let mut m = [0i64; MAX_DIM];
    for a in 0..grid.dim() {
        let v = (ix[a] as i64 - iy[a] as i64).rem_euclid(n);
        m[a] = if v >= n / 2 { v - n } else { v };
    }
    m
}

fn to_position(grid: &GridSpec, m: &[i64; MAX_DIM]) -> [f64; MAX_DIM] {
    let mut z = [0.0; MAX_DIM];
    for a in 0..grid.dim() {
        z[a] = m[a] as f64 * grid.spacing();
    }
    z
}

/// Displacement stored at slot `i` of a table indexed by `(x - y) mod n`.
fn table_displacement(grid: &GridSpec, i: usize) -> [i64; MAX_DIM] {
    let n = grid.n() as i64;
    let idx = grid.unravel(i);
    let mut m = [0i64; MAX_DIM];
    for a in 0..grid.dim() {
        let v = idx[a] as i64;
        m[a] = if v >= n / 2 { v - n } else { v };
    }
    m
}

/// `sum_x sum_y h^{2d} a(x) K(x - y) b(y)` with `K` read from a table of displacements.
fn pair_sum<K: Fn(usize) -> f64>(grid: &GridSpec, a: &[f64], b: &[f64], kernel: K) -> f64 {
    let (d, n) = (grid.dim(), grid.n());
    let coords: Vec<[usize; MAX_DIM]> = (0..grid.len()).map(|i| grid.unravel(i)).collect();
    let hd = grid.cell_volume();
    let mut total = 0.0;
    for (x, cx) in coords.iter().enumerate() {
        if a[x] == 0.0 {
            continue;
        }
        let mut inner = 0.0;
        for (y, cy) in coords.iter().enumerate() {
            let mut idx = 0;
            for ax in 0..d {
                idx = idx * n + (cx[ax] + n - cy[ax]) % n;
            }
            inner += kernel(idx) * b[y];
        }
        total += a[x] * inner;
    }
    total * hd * hd
}

fn kernel_table(grid: &GridSpec, profile: &WeightProfile, n: f64, n_prime: f64) -> Result<Vec<KernelValues>> {
    let h0 = 0.5 * grid.spacing();
    (0..grid.len())
        .map(|i| sampled_values(profile, grid.dim(), n, n_prime, &to_position(grid, &table_displacement(grid, i)), h0))
        .collect()
}

struct RawDensities {
    rho: Vec<f64>,
    momentum: Vec<Vec<f64>>,
    grads: Vec<ComplexField>,
}

fn raw_densities(f: &ComplexField) -> RawDensities {
    RawDensities {
        rho: f.values().iter().map(|u| u.norm_sqr()).collect(),
        momentum: momentum_density(f).into_iter().map(RealField::into_values).collect(),
        grads: gradient(f),
    }
}

pub fn action_direct(f: &ComplexField, profile: &WeightProfile, n: f64) -> Result<f64> {
    let grid = *f.grid();
    check_size(&grid)?;
    let table = kernel_table(&grid, profile, n, 0.0)?;
    let dens = raw_densities(f);
    Ok((0..grid.dim()).map(|k| pair_sum(&grid, &dens.momentum[k], &dens.rho, |i| table[i].grad[k])).sum())
}

pub fn rhs_terms_direct(
    f: &ComplexField,
    profile: &WeightProfile,
    n: f64,
    n_prime: f64,
    mu: f64,
    p: u32,
) -> Result<RhsTerms> {
    let grid = *f.grid();
    check_size(&grid)?;
    let d = grid.dim();
    let table = kernel_table(&grid, profile, n, n_prime)?;
    let dens = raw_densities(f);
    let dta = (0..d).map(|k| pair_sum(&grid, &dens.momentum[k], &dens.rho, |i| table[i].dt_grad[k])).sum();
    let mut stress = vec![Vec::new(); d * (d + 1) / 2];
    for j in 0..d {
        for k in j..d {
            stress[packed_index(d, j, k)] = dens.grads[j]
                .values()
                .iter()
                .zip(dens.grads[k].values())
                .map(|(a, b)| (b.conj() * a).re)
                .collect();
        }
    }
    let mut scary = 0.0;
    for j in 0..d {
        for k in 0..d {
            let kern = |i: usize| table[i].hessian[j][k];
            scary += 4.0 * pair_sum(&grid, &stress[packed_index(d, j, k)], &dens.rho, kern);
            scary -= pair_sum(&grid, &dens.momentum[k], &dens.momentum[j], kern);
        }
    }
    let e = 0.5 * (p + 2) as f64;
    let pot: Vec<f64> = dens.rho.iter().map(|r| r.powf(e)).collect();
    let potential = if mu == 0.0 {
        0.0
    } else {
        mu * potential_coefficient(p) * pair_sum(&grid, &pot, &dens.rho, |i| table[i].lap)
    };
    let massmass = pair_sum(&grid, &dens.rho, &dens.rho, |i| table[i].neg_bilap);
    Ok(RhsTerms { dta, scary, potential, massmass })
}

fn ball_max_direct(f: &ComplexField, radius: f64) -> f64 {
    let grid = f.grid();
    let rho: Vec<f64> = f.values().iter().map(|u| u.norm_sqr()).collect();
    let mut best: f64 = 0.0;
    for x in 0..grid.len() {
        let mut acc = 0.0;
        for y in 0..grid.len() {
            if norm(&to_position(grid, &displacement(grid, x, y)), grid.dim()) <= radius {
                acc += rho[y];
            }
        }
        best = best.max(acc * grid.cell_volume());
    }
    best
}

/// Per-sample suprema and trapezoid integral of the windowed ball mass.
pub fn ball_mass_sup_direct(traj: &Trajectory, lambda: &ScaleFunction) -> Result<(Vec<f64>, f64)> {
    check_size(traj.grid())?;
    let series = traj
        .samples()
        .iter()
        .map(|s| Ok(ball_max_direct(s, lambda.eval(s.t())?)))
        .collect::<Result<Vec<f64>>>()?;
    let w = trapezoid_weights(series.len(), traj.dt_sample());
    Ok((series.clone(), series.iter().zip(&w).map(|(a, b)| a * b).sum()))
}

fn inverse_cube_pairs(f: &ComplexField, radius: f64) -> f64 {
    let grid = f.grid();
    let h0 = 0.5 * grid.spacing();
    let rho: Vec<f64> = f.values().iter().map(|u| u.norm_sqr()).collect();
    pair_sum(grid, &rho, &rho, |i| {
        let r = norm(&to_position(grid, &table_displacement(grid, i)), grid.dim());
        if r > radius {
            0.0
        } else {
            r.max(h0).powi(-3)
        }
    })
}

/// `int iint |u(x)|^2 |u(y)|^2 |x - y|^{-3}` with the kernel truncated at `|x - y| <= L`.
pub fn im4_lhs_direct(traj: &Trajectory) -> Result<f64> {
    check_size(traj.grid())?;
    let l = traj.grid().half_len();
    let w = trapezoid_weights(traj.len(), traj.dt_sample());
    Ok(traj.samples().iter().zip(&w).map(|(s, wi)| wi * inverse_cube_pairs(s, l)).sum())
}

pub fn localized_interaction_direct(traj: &Trajectory, radius: &ScaleFunction, k: f64) -> Result<f64> {
    check_size(traj.grid())?;
    let w = trapezoid_weights(traj.len(), traj.dt_sample());
    let mut total = 0.0;
    for (s, wi) in traj.samples().iter().zip(&w) {
        let r = radius.eval(s.t())?;
        if r == 0.0 {
            continue;
        }
        let hi = if k.is_infinite() { s.clone() } else { high_pass(s, k.powf(-0.2))? };
        total += wi * inverse_cube_pairs(&hi, r);
    }
    Ok(total)
}

/// Direct DFT of a lattice field (forward, unnormalized), for small grids.
pub fn dft_direct(values: &[Complex64], grid: &GridSpec) -> Result<Vec<Complex64>> {
    check_size(grid)?;
    let n = grid.n() as f64;
    let d = grid.dim();
    let mut out = vec![Complex64::default(); grid.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let ik = grid.unravel(k);
        for (x, v) in values.iter().enumerate() {
            let ix = grid.unravel(x);
            let phase: f64 = (0..d).map(|a| (ik[a] * ix[a]) as f64).sum::<f64>() * -2.0 * std::f64::consts::PI / n;
            *o += v * Complex64::from_polar(1.0, phase);
        }
    }
    Ok(out)
}

/// Brute-force valley filler: rescans the sequence from scratch on every pass.
pub fn fill_valleys_recursive(values: &[f64], passes: usize) -> Vec<f64> {
    if passes == 0 {
        return values.to_vec();
    }
    let mut out = values.to_vec();
    let len = values.len();
    let mut i = 1;
    while i + 1 < len {
        let mut j = i;
        while j + 1 < len && values[j + 1] == values[i] {
            j += 1;
        }
        if j + 1 < len && values[i - 1] > values[i] && values[j + 1] > values[i] {
            for slot in out.iter_mut().take(j + 1).skip(i) {
                *slot = values[i - 1];
            }
        }
        i = j + 1;
    }
    if out == values {
        return out;
    }
    fill_valleys_recursive(&out, passes - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn displacements_wrap_to_the_short_side() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let x = g.ravel(&[7, 0]);
        let y = g.ravel(&[0, 1]);
        assert_eq!(&displacement(&g, x, y)[..2], &[-1, -1]);
        assert_eq!(&displacement(&g, y, x)[..2], &[1, 1]);
        assert_eq!(&table_displacement(&g, g.ravel(&[4, 3]))[..2], &[-4, 3]);
    }

    #[test]
    fn pair_sum_of_delta_kernel_is_inner_product() {
        let g = GridSpec::new(1, 8, 2.0).unwrap();
        let a: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..8).map(|i| 1.0 - 0.1 * i as f64).collect();
        let direct: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() * g.cell_volume().powi(2);
        assert!((pair_sum(&g, &a, &b, |i| if i == 0 { 1.0 } else { 0.0 }) - direct).abs() < 1e-14);
    }
}
