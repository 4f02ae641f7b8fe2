use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::field::{ComplexField, RealField};
use crate::grid::{norm, GridSpec, MAX_DIM};
use crate::norms::trapezoid_weights;
use crate::scale::{high_pass, ScaleFunction};
use crate::spectral::{gradient, real_spectrum, KernelSpectrum};

/// `|z|^{-3}` on `|z| <= radius`, read at `|z| = h/2` at the origin.
pub fn inverse_cube_kernel(grid: &GridSpec, radius: f64) -> RealField {
    let h0 = 0.5 * grid.spacing();
    let v = (0..grid.len())
        .map(|i| {
            let r = norm(&grid.position(i), grid.dim());
            if r > radius {
                0.0
            } else {
                r.max(h0).powi(-3)
            }
        })
        .collect();
    RealField::from_vec_unchecked(*grid, v)
}

fn pair_energy(kernel: &KernelSpectrum, f: &ComplexField) -> f64 {
    let rho = real_spectrum(&f.density());
    kernel.bilinear(&rho, &rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Im4Report {
    /// `iint |u(x)|^2 |u(y)|^2 / |x - y|^3` per sample.
    pub series: Vec<f64>,
    pub lhs: f64,
    /// `sup ||u||_2^3 sup ||grad u||_2`.
    pub rhs: f64,
}

impl Im4Report {
    pub fn ratio(&self) -> Option<f64> {
        (self.rhs > 0.0).then(|| self.lhs / self.rhs)
    }
}

/// Two sides of the classical interaction Morawetz bound; the kernel is truncated at `|z| <= L`.
pub fn im4_report(traj: &Trajectory) -> Result<Im4Report> {
    if traj.mu < 0.0 {
        return Err(Error::InvalidArgument("the bound is stated for defocusing data".into()));
    }
    let grid = *traj.grid();
    let kernel = KernelSpectrum::from_samples(&inverse_cube_kernel(&grid, grid.half_len()));
    let series: Vec<f64> = traj.samples().iter().map(|s| pair_energy(&kernel, s)).collect();
    let weights = trapezoid_weights(series.len(), traj.dt_sample());
    let lhs = series.iter().zip(&weights).map(|(v, w)| v * w).sum();
    let mut l2: f64 = 0.0;
    let mut grad: f64 = 0.0;
    for s in traj.samples() {
        l2 = l2.max(s.l2_norm());
        let g2: f64 = gradient(s).iter().map(|g| g.l2_norm().powi(2)).sum();
        grad = grad.max(g2.sqrt());
    }
    Ok(Im4Report { series, lhs, rhs: l2.powi(3) * grad })
}

fn radius_guard(grid: &GridSpec, radius: f64) -> Result<()> {
    let limit = 0.5 * grid.half_len();
    if !(radius >= 0.0) || radius >= limit {
        return Err(Error::SupportViolation { support: radius, limit });
    }
    Ok(())
}

/// `P_{> K^{-1/5}} u`; `K = inf` leaves `u` unprojected.
fn high_part(f: &ComplexField, k: f64) -> Result<ComplexField> {
    if k.is_infinite() && k > 0.0 {
        return Ok(f.clone());
    }
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("K = {k} must be positive")));
    }
    high_pass(f, k.powf(-0.2))
}

/// `int iint_{|x-y| <= radius(t)} |u_hi(x)|^2 |u_hi(y)|^2 / |x-y|^3`.
pub fn localized_interaction(traj: &Trajectory, radius: &ScaleFunction, k: f64) -> Result<f64> {
    let grid = *traj.grid();
    let weights = trapezoid_weights(traj.len(), traj.dt_sample());
    let mut total = 0.0;
    for (s, w) in traj.samples().iter().zip(&weights) {
        let r = radius.eval(s.t())?;
        radius_guard(&grid, r)?;
        if r == 0.0 {
            continue;
        }
        let kernel = KernelSpectrum::from_samples(&inverse_cube_kernel(&grid, r));
        total += w * pair_energy(&kernel, &high_part(s, k)?);
    }
    Ok(total)
}

/// Mass of `f` in the closed periodic ball of radius `r` about `center`.
pub fn ball_mass_at(f: &ComplexField, center: &[f64; MAX_DIM], r: f64) -> f64 {
    let grid = f.grid();
    let period = 2.0 * grid.half_len();
    let hd = grid.cell_volume();
    f.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let x = grid.position(*i);
            let mut r2 = 0.0;
            for a in 0..grid.dim() {
                let mut dx = (x[a] - center[a]).rem_euclid(period);
                if dx > 0.5 * period {
                    dx -= period;
                }
                r2 += dx * dx;
            }
            r2 <= r * r
        })
        .map(|(_, u)| hd * u.norm_sqr())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    /// Ball mass of `u_hi` over `N(t)^{-3}` per sample.
    pub ratios: Vec<f64>,
    pub min: f64,
    /// `int` ball mass `dt`.
    pub mass_integral: f64,
    /// `int N(t)^{-3} dt`.
    pub lb_integral: f64,
}

/// Ball mass of `u_hi` about `centers[i]` with radius `C / N(t)`, against `N(t)^{-3}`.
pub fn concentration_lower_bound(
    traj: &Trajectory,
    scale: &ScaleFunction,
    centers: &[[f64; MAX_DIM]],
    c: f64,
    k: f64,
) -> Result<ConcentrationReport> {
    if centers.len() != traj.len() {
        return Err(Error::InvalidArgument(format!("{} centers for {} samples", centers.len(), traj.len())));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("C = {c} must be positive")));
    }
    let grid = *traj.grid();
    let weights = trapezoid_weights(traj.len(), traj.dt_sample());
    let mut ratios = Vec::with_capacity(traj.len());
    let (mut mass_integral, mut lb_integral) = (0.0, 0.0);
    for ((s, center), w) in traj.samples().iter().zip(centers).zip(&weights) {
        let nt = scale.eval(s.t())?;
        let r = c / nt;
        radius_guard(&grid, r)?;
        let m = ball_mass_at(&high_part(s, k)?, center, r);
        let lb = nt.powi(-3);
        ratios.push(m / lb);
        mass_integral += w * m;
        lb_integral += w * lb;
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ConcentrationReport { ratios, min, mass_integral, lb_integral })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::InitialData;

    fn traj_of(f: ComplexField) -> Trajectory {
        Trajectory::from_samples(vec![f.clone(), f.with_time(0.5)], 1.0, 4).unwrap()
    }

    #[test]
    fn zero_data() {
        let g = GridSpec::new(2, 16, 8.0).unwrap();
        let t = traj_of(ComplexField::zeros(g, 0.0));
        let r = im4_report(&t).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let radius = ScaleFunction::constant(0.0, 0.5, 1.0).unwrap();
        assert_eq!(localized_interaction(&t, &radius, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn focusing_rejected() {
        let g = GridSpec::new(1, 16, 8.0).unwrap();
        let f = ComplexField::zeros(g, 0.0);
        let t = Trajectory::from_samples(vec![f], -1.0, 4).unwrap();
        assert!(im4_report(&t).is_err());
    }

    #[test]
    fn unit_bump_ratio() {
        let g = GridSpec::new(2, 64, 8.0).unwrap();
        let f = InitialData::Gaussian { amplitude: 1.0, center: [0.0; 4], width: 0.5, velocity: [0.0; 4] }
            .build(&g)
            .unwrap();
        let f = f.scaled((1.0 / f.mass().sqrt()).into());
        let t = traj_of(f);
        let n = ScaleFunction::constant(0.0, 0.5, 1.0).unwrap();
        let rep = concentration_lower_bound(&t, &n, &[[0.0; 4]; 2], 3.5, f64::INFINITY).unwrap();
        assert!(rep.ratios.iter().all(|r| (r - 1.0).abs() < 1e-10), "{:?}", rep.ratios);
        let wider = concentration_lower_bound(&t, &n, &[[0.0; 4]; 2], 3.9, f64::INFINITY).unwrap();
        assert!(wider.min >= rep.min);
    }

    #[test]
    fn radius_guard_trips() {
        let g = GridSpec::new(1, 16, 8.0).unwrap();
        let t = traj_of(ComplexField::zeros(g, 0.0));
        let radius = ScaleFunction::constant(0.0, 0.5, 4.0).unwrap();
        assert!(matches!(localized_interaction(&t, &radius, 1.0), Err(Error::SupportViolation { .. })));
    }
}
