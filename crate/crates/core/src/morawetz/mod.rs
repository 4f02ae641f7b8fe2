//! Interaction Morawetz action `M(t) = iint |u(y)|^2 a_k(x - y) p_k(x)`, the
//! four terms of its time derivative, and related two-point functionals.

mod interaction;
mod kernels;

pub use interaction::{
    concentration_lower_bound, im4_report, inverse_cube_kernel, localized_interaction, ConcentrationReport,
    Im4Report,
};
pub use kernels::{check_support, packed_index, sampled_values, support_radius, KernelMode, KernelValues, MorawetzKernels};

use std::fmt::Write as _;

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{check_mu_p, Trajectory};
use crate::field::{ComplexField, RealField};
use crate::scale::ScaleFunction;
use crate::spectral::{gradient, real_spectrum};
use crate::weight::WeightProfile;

/// `p_k = 2 Im(conj(u) d_k u)`.
pub fn momentum_density(f: &ComplexField) -> Vec<RealField> {
    let grid = *f.grid();
    gradient(f)
        .iter()
        .map(|g| {
            let v = f.values().iter().zip(g.values()).map(|(u, du)| 2.0 * (u.conj() * du).im).collect();
            RealField::from_vec_unchecked(grid, v)
        })
        .collect()
}

/// Spectra of the densities paired against the kernels.
struct Densities {
    rho: Vec<Complex64>,
    momentum: Vec<Vec<Complex64>>,
    /// `Re(conj(d_k u) d_j u)`, packed.
    stress: Vec<Vec<Complex64>>,
    /// `|u|^{p+2}`
    potential: Vec<Complex64>,
}

impl Densities {
    fn new(f: &ComplexField, p: u32, with_rhs: bool) -> Self {
        let grid = *f.grid();
        let d = grid.dim();
        let spec = |v: Vec<f64>| real_spectrum(&RealField::from_vec_unchecked(grid, v));
        let rho_vals: Vec<f64> = f.values().iter().map(|u| u.norm_sqr()).collect();
        let grads = gradient(f);
        let momentum = grads
            .iter()
            .map(|g| spec(f.values().iter().zip(g.values()).map(|(u, du)| 2.0 * (u.conj() * du).im).collect()))
            .collect();
        let mut stress = Vec::new();
        let mut potential = Vec::new();
        if with_rhs {
            for j in 0..d {
                for k in j..d {
                    let v = grads[j].values().iter().zip(grads[k].values()).map(|(a, b)| (b.conj() * a).re).collect();
                    stress.push(spec(v));
                }
            }
            let e = 0.5 * (p + 2) as f64;
            potential = spec(rho_vals.iter().map(|r| r.powf(e)).collect());
        }
        Self { rho: spec(rho_vals), momentum, stress, potential }
    }
}

pub fn action_with(f: &ComplexField, kernels: &MorawetzKernels) -> Result<f64> {
    f.grid().same_as(kernels.grid())?;
    let dens = Densities::new(f, 4, false);
    Ok((0..f.grid().dim()).map(|k| kernels.grad(k).bilinear(&dens.rho, &dens.momentum[k])).sum())
}

/// `M(a)` with lattice-sampled kernels.
pub fn action(f: &ComplexField, profile: &WeightProfile, n_val: f64) -> Result<f64> {
    let kernels = MorawetzKernels::build(f.grid(), profile, n_val, 0.0, KernelMode::Sampled)?;
    action_with(f, &kernels)
}

/// `d/dt M = dta + scary + potential + massmass`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RhsTerms {
    pub dta: f64,
    pub scary: f64,
    pub potential: f64,
    pub massmass: f64,
}

impl RhsTerms {
    pub fn sum(&self) -> f64 {
        self.dta + self.scary + self.potential + self.massmass
    }

    pub fn max_abs(&self) -> f64 {
        [self.dta, self.scary, self.potential, self.massmass].iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `2p / (p + 2)`.
pub fn potential_coefficient(p: u32) -> f64 {
    2.0 * p as f64 / (p + 2) as f64
}

fn terms_from(dens: &Densities, kernels: &MorawetzKernels, mu: f64, p: u32) -> RhsTerms {
    let d = kernels.grid().dim();
    let dta = (0..d).map(|k| kernels.dt_grad(k).bilinear(&dens.rho, &dens.momentum[k])).sum();
    let mut scary = 0.0;
    for j in 0..d {
        for k in 0..d {
            let a = kernels.hessian(j, k);
            scary += 4.0 * a.bilinear(&dens.rho, &dens.stress[packed_index(d, j, k)]);
            scary -= a.bilinear(&dens.momentum[j], &dens.momentum[k]);
        }
    }
    let potential = if mu == 0.0 {
        0.0
    } else {
        mu * potential_coefficient(p) * kernels.lap().bilinear(&dens.rho, &dens.potential)
    };
    let massmass = kernels.neg_bilap().bilinear(&dens.rho, &dens.rho);
    RhsTerms { dta, scary, potential, massmass }
}

pub fn rhs_terms_with(f: &ComplexField, kernels: &MorawetzKernels, mu: f64, p: u32) -> Result<RhsTerms> {
    check_mu_p(mu, p)?;
    f.grid().same_as(kernels.grid())?;
    Ok(terms_from(&Densities::new(f, p, true), kernels, mu, p))
}

/// The four terms with lattice-sampled kernels.
pub fn rhs_terms(
    f: &ComplexField,
    profile: &WeightProfile,
    n_val: f64,
    n_prime: f64,
    mu: f64,
    p: u32,
) -> Result<RhsTerms> {
    check_mu_p(mu, p)?;
    let kernels = MorawetzKernels::build(f.grid(), profile, n_val, n_prime, KernelMode::Sampled)?;
    rhs_terms_with(f, &kernels, mu, p)
}

/// Symmetrized pointwise form `Re(Z Z^*)` with `Z = conj(u(y)) grad u(x) + u(x) grad conj(u(y))`,
/// whose contraction with the Hessian of `|x|` is the integrand of the scary term.
pub fn scary_form(u_x: Complex64, grad_x: &[Complex64], u_y: Complex64, grad_y: &[Complex64]) -> Matrix4<f64> {
    let d = grad_x.len();
    let z: Vec<Complex64> = (0..d).map(|j| u_y.conj() * grad_x[j] + u_x * grad_y[j].conj()).collect();
    let mut m = Matrix4::zeros();
    for j in 0..d {
        for k in 0..d {
            m[(j, k)] = (z[j] * z[k].conj()).re;
        }
    }
    m
}

pub fn min_eigenvalue(m: &Matrix4<f64>) -> f64 {
    SymmetricEigen::new(*m).eigenvalues.min()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorawetzReport {
    pub times: Vec<f64>,
    pub action: Vec<f64>,
    pub terms: Vec<RhsTerms>,
    /// `|dM/dt - sum of terms| / max |term|` at interior samples (`None` at the ends).
    pub residual: Vec<Option<f64>>,
    pub max_residual: f64,
    /// Residual at doubled sample spacing over residual at the native spacing.
    pub halving_ratio: Option<f64>,
    pub order: Option<f64>,
}

impl MorawetzReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,M,T_dta,T_scary,T_potential,T_massmass,residual\n");
        for i in 0..self.times.len() {
            let t = &self.terms[i];
            let r = self.residual[i].map(|v| format!("{v:e}")).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{:e},{}",
                self.times[i], self.action[i], t.dta, t.scary, t.potential, t.massmass, r
            );
        }
        s
    }
}

fn residuals(action: &[f64], terms: &[RhsTerms], dt: f64, stride: usize, scale: f64) -> Vec<Option<f64>> {
    let len = action.len();
    (0..len)
        .map(|i| {
            if i < stride || i + stride >= len || i % stride != 0 {
                return None;
            }
            let fd = (action[i + stride] - action[i - stride]) / (2.0 * stride as f64 * dt);
            let r = (fd - terms[i].sum()).abs();
            Some(if scale > 0.0 { r / scale } else { r })
        })
        .collect()
}

/// Central-difference check of `dM/dt` against the four terms, with spectral kernels.
pub fn identity_residual(
    traj: &Trajectory,
    profile: &WeightProfile,
    n: &ScaleFunction,
    mu: f64,
    p: u32,
) -> Result<MorawetzReport> {
    identity_residual_with(traj, profile, n, mu, p, KernelMode::Spectral)
}

pub fn identity_residual_with(
    traj: &Trajectory,
    profile: &WeightProfile,
    n: &ScaleFunction,
    mu: f64,
    p: u32,
    mode: KernelMode,
) -> Result<MorawetzReport> {
    check_mu_p(mu, p)?;
    if traj.mu != mu || traj.p != p {
        return Err(Error::InvalidArgument(format!(
            "trajectory has (mu, p) = ({}, {}), requested ({mu}, {p})",
            traj.mu, traj.p
        )));
    }
    if traj.len() < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: traj.len() });
    }
    let grid = *traj.grid();
    let times = traj.times();
    let mut action = Vec::with_capacity(traj.len());
    let mut terms = Vec::with_capacity(traj.len());
    let mut cached: Option<((u64, u64), MorawetzKernels)> = None;
    for s in traj.samples() {
        let nv = n.eval(s.t())?;
        let np = n.derivative(s.t())?;
        let key = (nv.to_bits(), np.to_bits());
        if cached.as_ref().map(|c| c.0) != Some(key) {
            cached = Some((key, MorawetzKernels::build(&grid, profile, nv, np, mode)?));
        }
        let kernels = &cached.as_ref().unwrap().1;
        let dens = Densities::new(s, p, true);
        action.push((0..grid.dim()).map(|k| kernels.grad(k).bilinear(&dens.rho, &dens.momentum[k])).sum());
        terms.push(terms_from(&dens, kernels, mu, p));
    }
    let scale = terms.iter().map(RhsTerms::max_abs).fold(0.0, f64::max);
    let dt = traj.dt_sample();
    let residual = residuals(&action, &terms, dt, 1, scale);
    let max_residual = residual.iter().flatten().copied().fold(0.0, f64::max);
    let coarse = residuals(&action, &terms, dt, 2, scale);
    let (mut fine_max, mut coarse_max) = (0.0f64, 0.0f64);
    for (f, c) in residual.iter().zip(&coarse) {
        if let (Some(f), Some(c)) = (f, c) {
            fine_max = fine_max.max(*f);
            coarse_max = coarse_max.max(*c);
        }
    }
    let halving_ratio = (fine_max > 0.0 && coarse_max > 0.0).then(|| coarse_max / fine_max);
    Ok(MorawetzReport {
        times,
        action,
        terms,
        residual,
        max_residual,
        halving_ratio,
        order: halving_ratio.map(f64::log2),
    })
}
