//! Multi-dimensional complex FFT on row-major power-of-two grids.
//!
//! The forward transform is unnormalized; the inverse divides by `n^d` so
//! that `inverse(forward(f)) == f`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::GridSpec;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, direction == FftDirection::Forward);
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

fn transform(data: &mut [Complex64], grid: &GridSpec, direction: FftDirection) {
    let n = grid.n();
    let d = grid.dim();
    debug_assert_eq!(data.len(), grid.len());
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

    // last axis is contiguous
    fft.process_with_scratch(data, &mut scratch);
    if d == 1 {
        return;
    }

    let total = data.len();
    let mut lines = vec![Complex64::default(); total];
    for axis in 0..d - 1 {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = n * stride;
        // gather: line (b, j) holds data[b*block + k*stride + j], k = 0..n
        let mut w = 0;
        for b in (0..total).step_by(block) {
            for j in 0..stride {
                for k in 0..n {
                    lines[w] = data[b + k * stride + j];
                    w += 1;
                }
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        let mut r = 0;
        for b in (0..total).step_by(block) {
            for j in 0..stride {
                for k in 0..n {
                    data[b + k * stride + j] = lines[r];
                    r += 1;
                }
            }
        }
    }
}

pub fn forward(data: &mut [Complex64], grid: &GridSpec) {
    transform(data, grid, FftDirection::Forward);
}

pub fn inverse(data: &mut [Complex64], grid: &GridSpec) {
    transform(data, grid, FftDirection::Inverse);
    let scale = 1.0 / grid.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_dft_in_2d() {
        let g = GridSpec::new(2, 4, 1.0).unwrap();
        let data: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let mut fast = data.clone();
        forward(&mut fast, &g);
        for k in 0..16 {
            let (k0, k1) = (k / 4, k % 4);
            let mut acc = Complex64::default();
            for j in 0..16 {
                let (j0, j1) = (j / 4, j % 4);
                let phase = -2.0 * std::f64::consts::PI * ((k0 * j0 + k1 * j1) as f64) / 4.0;
                acc += data[j] * Complex64::from_polar(1.0, phase);
            }
            assert!((acc - fast[k]).norm() < 1e-12);
        }
        inverse(&mut fast, &g);
        for (a, b) in fast.iter().zip(&data) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
