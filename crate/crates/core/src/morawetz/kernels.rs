use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::RealField;
use crate::grid::{norm, GridSpec, MAX_DIM};
use crate::spectral::KernelSpectrum;
use crate::weight::{weight_at_dim, WeightProfile};

/// How the derivatives of `a` are placed on the lattice.
///
/// `Sampled` evaluates the closed forms at lattice displacements, with the
/// origin read at radius `h/2`. `Spectral` uses the exact Fourier symbols of
/// the compactly supported kernels, so that `a_jk = d_j a_k`, `Delta a` and
/// `Delta Delta a` hold as spectral identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    Sampled,
    Spectral,
}

/// Values of the kernels at one displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub grad: [f64; MAX_DIM],
    pub dt_grad: [f64; MAX_DIM],
    pub hessian: [[f64; MAX_DIM]; MAX_DIM],
    pub lap: f64,
    pub neg_bilap: f64,
}

/// Closed-form kernel values at displacement `z`; `z = 0` is read at `|z| = h0`.
pub fn sampled_values(
    profile: &WeightProfile,
    d: usize,
    n: f64,
    n_prime: f64,
    z: &[f64; MAX_DIM],
    h0: f64,
) -> Result<KernelValues> {
    let r = norm(z, d);
    let mut out = KernelValues {
        grad: [0.0; MAX_DIM],
        dt_grad: [0.0; MAX_DIM],
        hessian: [[0.0; MAX_DIM]; MAX_DIM],
        lap: 0.0,
        neg_bilap: 0.0,
    };
    if r == 0.0 {
        let w = weight_at_dim(profile, d, n, n_prime, h0)?;
        let diag = (w.a_rr - w.a_r / h0) / d as f64 + w.a_r / h0;
        for j in 0..d {
            out.hessian[j][j] = diag;
        }
        out.lap = w.lap;
        out.neg_bilap = -w.bilap;
        return Ok(out);
    }
    let w = weight_at_dim(profile, d, n, n_prime, r)?;
    let tangential = w.a_r / r;
    for j in 0..d {
        out.grad[j] = w.a_r * z[j] / r;
        out.dt_grad[j] = w.dt_a_r * z[j] / r;
        for k in 0..d {
            out.hessian[j][k] = (w.a_rr - tangential) * z[j] * z[k] / (r * r);
        }
        out.hessian[j][j] += tangential;
    }
    out.lap = w.lap;
    out.neg_bilap = -w.bilap;
    Ok(out)
}

/// Index of `(j, k)` in the packed upper triangle.
pub fn packed_index(d: usize, j: usize, k: usize) -> usize {
    let (j, k) = if j <= k { (j, k) } else { (k, j) };
    j * d - j * j.saturating_sub(1) / 2 + (k - j)
}

/// Radius of `supp nabla a`.
pub fn support_radius(profile: &WeightProfile, n: f64) -> f64 {
    profile.outer_radius() / n
}

pub fn check_support(grid: &GridSpec, profile: &WeightProfile, n: f64) -> Result<()> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument(format!("n = {n} must be positive")));
    }
    let support = support_radius(profile, n);
    let limit = 0.5 * grid.half_len();
    if support >= limit {
        return Err(Error::SupportViolation { support, limit });
    }
    Ok(())
}

/// All kernels entering the action and its time derivative.
#[derive(Debug, Clone)]
pub struct MorawetzKernels {
    grid: GridSpec,
    mode: KernelMode,
    grad: Vec<KernelSpectrum>,
    dt_grad: Vec<KernelSpectrum>,
    hessian: Vec<KernelSpectrum>,
    lap: KernelSpectrum,
    neg_bilap: KernelSpectrum,
}

impl MorawetzKernels {
    pub fn build(grid: &GridSpec, profile: &WeightProfile, n: f64, n_prime: f64, mode: KernelMode) -> Result<Self> {
        check_support(grid, profile, n)?;
        if !n_prime.is_finite() {
            return Err(Error::NonFinite("n'".into()));
        }
        match mode {
            KernelMode::Sampled => Self::sampled(grid, profile, n, n_prime),
            KernelMode::Spectral => Self::spectral(grid, profile, n, n_prime),
        }
    }

    fn sampled(grid: &GridSpec, profile: &WeightProfile, n: f64, n_prime: f64) -> Result<Self> {
        let d = grid.dim();
        let len = grid.len();
        let npacked = d * (d + 1) / 2;
        let mut grad = vec![vec![0.0; len]; d];
        let mut dt_grad = vec![vec![0.0; len]; d];
        let mut hessian = vec![vec![0.0; len]; npacked];
        let mut lap = vec![0.0; len];
        let mut neg_bilap = vec![0.0; len];
        let h0 = 0.5 * grid.spacing();
        let support = support_radius(profile, n);
        for i in 0..len {
            let z = grid.position(i);
            if norm(&z, d) > support {
                continue;
            }
            let v = sampled_values(profile, d, n, n_prime, &z, h0)?;
            for j in 0..d {
                grad[j][i] = v.grad[j];
                dt_grad[j][i] = v.dt_grad[j];
                for k in j..d {
                    hessian[packed_index(d, j, k)][i] = v.hessian[j][k];
                }
            }
            lap[i] = v.lap;
            neg_bilap[i] = v.neg_bilap;
        }
        let to_spec = |v: Vec<f64>| KernelSpectrum::from_samples(&RealField::from_vec_unchecked(*grid, v));
        Ok(Self {
            grid: *grid,
            mode: KernelMode::Sampled,
            grad: grad.into_iter().map(to_spec).collect(),
            dt_grad: dt_grad.into_iter().map(to_spec).collect(),
            hessian: hessian.into_iter().map(to_spec).collect(),
            lap: to_spec(lap),
            neg_bilap: to_spec(neg_bilap),
        })
    }

    fn spectral(grid: &GridSpec, profile: &WeightProfile, n: f64, n_prime: f64) -> Result<Self> {
        let d = grid.dim();
        let len = grid.len();
        let npacked = d * (d + 1) / 2;
        let dk = grid.dk();
        let nyq = -(grid.n() as i64) / 2;
        let transform = RadialTransform::for_profile(profile, d, n);
        let radial = |r: f64| {
            let s = n * r;
            let b = if n_prime == 0.0 { 0.0 } else { n_prime * r * profile.w_r_derivative(s, 1) };
            (profile.w_r(s), b)
        };
        let mut table: HashMap<u64, (f64, f64)> = HashMap::new();
        let zero = Complex64::default();
        let mut grad = vec![vec![zero; len]; d];
        let mut dt_grad = vec![vec![zero; len]; d];
        let mut hessian = vec![vec![zero; len]; npacked];
        let mut lap = vec![zero; len];
        let mut neg_bilap = vec![zero; len];
        for i in 0..len {
            let m2 = grid.wave_norm_sq(i);
            if m2 == 0 {
                continue;
            }
            let rho = dk * (m2 as f64).sqrt();
            let (v, vb) = *table.entry(m2).or_insert_with(|| transform.eval(rho, radial));
            let idx = grid.unravel(i);
            let xi = grid.frequency(i);
            let at_nyq: Vec<bool> = (0..d).map(|a| grid.wave_index(idx[a]) == nyq).collect();
            for j in 0..d {
                if !at_nyq[j] {
                    grad[j][i] = Complex64::new(0.0, -xi[j] * v / rho);
                    dt_grad[j][i] = Complex64::new(0.0, -xi[j] * vb / rho);
                }
                for k in j..d {
                    if j == k || !(at_nyq[j] || at_nyq[k]) {
                        hessian[packed_index(d, j, k)][i] = Complex64::new(xi[j] * xi[k] * v / rho, 0.0);
                    }
                }
            }
            lap[i] = Complex64::new(rho * v, 0.0);
            neg_bilap[i] = Complex64::new(rho.powi(3) * v, 0.0);
        }
        let to_spec = |s: Vec<Complex64>| KernelSpectrum::from_symbol(*grid, s);
        Ok(Self {
            grid: *grid,
            mode: KernelMode::Spectral,
            grad: grad.into_iter().map(to_spec).collect::<Result<_>>()?,
            dt_grad: dt_grad.into_iter().map(to_spec).collect::<Result<_>>()?,
            hessian: hessian.into_iter().map(to_spec).collect::<Result<_>>()?,
            lap: to_spec(lap)?,
            neg_bilap: to_spec(neg_bilap)?,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    /// `a_k`.
    pub fn grad(&self, k: usize) -> &KernelSpectrum {
        &self.grad[k]
    }

    /// `d_t a_k`.
    pub fn dt_grad(&self, k: usize) -> &KernelSpectrum {
        &self.dt_grad[k]
    }

    /// `a_jk`.
    pub fn hessian(&self, j: usize, k: usize) -> &KernelSpectrum {
        &self.hessian[packed_index(self.grid.dim(), j, k)]
    }

    pub fn lap(&self) -> &KernelSpectrum {
        &self.lap
    }

    pub fn neg_bilap(&self) -> &KernelSpectrum {
        &self.neg_bilap
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `J_{d/2}(x)`.
fn bessel_half_dim(d: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    match d {
        1 => (2.0 / (PI * x)).sqrt() * x.sin(),
        2 => libm::j1(x),
        3 => {
            if x < 1e-3 {
                // series: x^{3/2} sqrt(2/pi) (1/3 - x^2/30)
                (2.0 / PI).sqrt() * x.powf(1.5) * (1.0 / 3.0 - x * x / 30.0)
            } else {
                (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos())
            }
        }
        4 => libm::jn(2, x),
        _ => unreachable!("dimension checked by GridSpec"),
    }
}

const GL_ORDER: usize = 16;

/// `V_f(rho) = (2 pi)^{d/2} rho^{1-d/2} int f(r) J_{d/2}(rho r) r^{d/2} dr`; the Fourier
/// symbol of the vector field `f(r) x / r` is `-i xi V_f / rho`. Evaluated for two
/// radial parts at once on panels split at `cuts`.
struct RadialTransform {
    d: usize,
    segments: Vec<(f64, f64)>,
    nodes: Vec<(f64, f64)>,
}

impl RadialTransform {
    fn new(d: usize, cuts: &[f64]) -> Self {
        let segments = cuts.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect();
        Self { d, segments, nodes: gauss_legendre(GL_ORDER) }
    }

    fn for_profile(profile: &WeightProfile, d: usize, n: f64) -> Self {
        let mut cuts = vec![0.0];
        cuts.extend(profile.knots().iter().map(|k| k / n));
        Self::new(d, &cuts)
    }

    fn eval<F: Fn(f64) -> (f64, f64)>(&self, rho: f64, f: F) -> (f64, f64) {
        let half = 0.5 * self.d as f64;
        let (mut va, mut vb) = (0.0, 0.0);
        for &(a, b) in &self.segments {
            let panels = (rho * (b - a) / PI).ceil() as usize + 1;
            let width = (b - a) / panels as f64;
            for p in 0..panels {
                let lo = a + p as f64 * width;
                for &(x, w) in &self.nodes {
                    let r = lo + 0.5 * width * (x + 1.0);
                    let common = 0.5 * width * w * bessel_half_dim(self.d, rho * r) * r.powf(half);
                    let (fa, fb) = f(r);
                    va += common * fa;
                    vb += common * fb;
                }
            }
        }
        let pre = (2.0 * PI).powf(half) * rho.powf(1.0 - half);
        (pre * va, pre * vb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_is_a_bijection() {
        for d in 1..=4 {
            let mut seen: Vec<usize> = (0..d).flat_map(|j| (j..d).map(move |k| packed_index(d, j, k))).collect();
            seen.sort();
            assert_eq!(seen, (0..d * (d + 1) / 2).collect::<Vec<_>>());
        }
    }

    #[test]
    fn quadrature_nodes() {
        let nodes = gauss_legendre(GL_ORDER);
        let integral: f64 = nodes.iter().map(|(x, w)| w * x.powi(30)).sum();
        assert!((integral - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn bessel_orders() {
        // J_{3/2}(1) and J_2(1)
        assert!((bessel_half_dim(3, 1.0) - 0.240_297_839_123_427_2).abs() < 1e-14);
        assert!((bessel_half_dim(4, 1.0) - 0.114_903_484_931_900_5).abs() < 1e-14);
        let (lo, hi) = (bessel_half_dim(3, 1e-3 * (1.0 - 1e-12)), bessel_half_dim(3, 1e-3 * (1.0 + 1e-12)));
        assert!((lo - hi).abs() < 1e-6 * lo);
    }

    #[test]
    fn gaussian_transform() {
        // grad exp(-r^2/2) has radial part -r exp(-r^2/2) and symbol i xi (2 pi)^{d/2} exp(-rho^2/2)
        for d in 1..=4 {
            let tr = RadialTransform::new(d, &[0.0, 6.0, 13.0]);
            for rho in [0.1, 0.7, 1.5, 3.0] {
                let (v, _) = tr.eval(rho, |r| (-r * (-r * r / 2.0).exp(), 0.0));
                let want = -(2.0 * PI).powf(0.5 * d as f64) * rho * (-rho * rho / 2.0).exp();
                assert!((v - want).abs() < 1e-12, "d = {d}, rho = {rho}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn support_guard() {
        let g = GridSpec::new(2, 16, 8.0).unwrap();
        let p = WeightProfile::new(1.0, 2).unwrap();
        // R e^2 / n = 7.39 / n must stay below L/2 = 4
        assert!(matches!(check_support(&g, &p, 1.0), Err(Error::SupportViolation { .. })));
        assert!(check_support(&g, &p, 2.0).is_ok());
    }

    #[test]
    fn spectral_symbols_are_consistent() {
        let g = GridSpec::new(3, 8, 8.0).unwrap();
        let p = WeightProfile::new(0.5, 2).unwrap();
        let k = MorawetzKernels::build(&g, &p, 1.0, 0.2, KernelMode::Spectral).unwrap();
        let nyq = -(g.n() as i64) / 2;
        for i in 0..g.len() {
            let xi = g.frequency(i);
            let idx = g.unravel(i);
            let trace: f64 = (0..3).map(|j| k.hessian(j, j).symbol()[i].re).sum();
            assert!((trace - k.lap().symbol()[i].re).abs() < 1e-12 * (1.0 + trace.abs()));
            for j in 0..3 {
                for m in 0..3 {
                    if g.wave_index(idx[j]) == nyq || g.wave_index(idx[m]) == nyq {
                        continue;
                    }
                    // a_jk = d_j a_k
                    let want = Complex64::new(0.0, xi[j]) * k.grad(m).symbol()[i];
                    assert!((k.hessian(j, m).symbol()[i] - want).norm() < 1e-12);
                }
            }
        }
    }
}
