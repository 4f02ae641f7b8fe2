//! Strang split-step integrator for `(i d_t + Delta) u = mu |u|^p u` and
//! solution diagnostics: conserved quantities, Duhamel residual and the
//! dispersive decay rate of the free flow.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fft;
use crate::field::ComplexField;
use crate::grid::{GridSpec, MAX_DIM};
use crate::lp::Band;
use crate::spectral::{self, PhaseTable};

/// Relative mass allowed outside `|x| <= L/2` before a run is flagged.
pub const BOUNDARY_MASS_TOL: f64 = 1e-8;

/// Relative sup on the boundary shell tolerated by the dispersive fit.
pub const WRAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Zero,
    /// `A exp(-|x - c|^2 / (2 w^2)) e^{i v.x}`
    Gaussian { amplitude: f64, center: [f64; MAX_DIM], width: f64, velocity: [f64; MAX_DIM] },
    /// `A e^{i k.x}` with `k = (pi / L) m`.
    PlaneWave { amplitude: f64, mode: [i64; MAX_DIM] },
    /// Random complex coefficients restricted to `P_N`, normalized to the given mass.
    DyadicBand { mass: f64, n: f64, seed: u64 },
    /// Two Gaussians at `x_0 = -+ separation/2` with drifts `+-velocity` along axis 0.
    TwoBump { amplitude: f64, separation: f64, width: f64, velocity: f64 },
    Field(ComplexField),
}

impl InitialData {
    pub fn build(&self, grid: &GridSpec) -> Result<ComplexField> {
        let d = grid.dim();
        match self {
            InitialData::Zero => Ok(ComplexField::zeros(*grid, 0.0)),
            InitialData::Gaussian { amplitude, center, width, velocity } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidArgument("Gaussian width must be positive".into()));
                }
                ComplexField::from_fn(*grid, 0.0, |x| {
                    let mut r2 = 0.0;
                    let mut phase = 0.0;
                    for a in 0..d {
                        r2 += (x[a] - center[a]).powi(2);
                        phase += velocity[a] * x[a];
                    }
                    Complex64::from_polar(amplitude * (-r2 / (2.0 * width * width)).exp(), phase)
                })
            }
            InitialData::PlaneWave { amplitude, mode } => {
                let dk = grid.dk();
                ComplexField::from_fn(*grid, 0.0, |x| {
                    let phase: f64 = (0..d).map(|a| dk * mode[a] as f64 * x[a]).sum();
                    Complex64::from_polar(*amplitude, phase)
                })
            }
            InitialData::DyadicBand { mass, n, seed } => dyadic_band(grid, *n, *mass, *seed),
            InitialData::TwoBump { amplitude, separation, width, velocity } => {
                if !(*width > 0.0) {
                    return Err(Error::InvalidArgument("bump width must be positive".into()));
                }
                ComplexField::from_fn(*grid, 0.0, |x| {
                    let rest: f64 = (1..d).map(|a| x[a] * x[a]).sum();
                    let w2 = 2.0 * width * width;
                    let left = (-((x[0] + separation / 2.0).powi(2) + rest) / w2).exp();
                    let right = (-((x[0] - separation / 2.0).powi(2) + rest) / w2).exp();
                    Complex64::from_polar(amplitude * left, velocity * x[0])
                        + Complex64::from_polar(amplitude * right, -velocity * x[0])
                })
            }
            InitialData::Field(f) => {
                grid.same_as(f.grid())?;
                Ok(f.clone().with_time(0.0))
            }
        }
    }
}

fn dyadic_band(grid: &GridSpec, n: f64, mass: f64, seed: u64) -> Result<ComplexField> {
    let band = Band::At(n);
    band.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let (re, im): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            Complex64::new(re, im) * band.symbol(grid.frequency_norm_sq(i).sqrt())
        })
        .collect();
    fft::inverse(&mut spec, grid);
    let f = ComplexField::from_vec_unchecked(*grid, 0.0, spec);
    let m = f.mass();
    if m == 0.0 {
        return Err(Error::BandEmpty);
    }
    Ok(f.scaled(Complex64::new((mass / m).sqrt(), 0.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub grid: GridSpec,
    pub mu: f64,
    pub p: u32,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub initial: InitialData,
    pub dealias: bool,
}

impl EvolveConfig {
    pub fn new(grid: GridSpec, initial: InitialData) -> Self {
        Self { grid, mu: 1.0, p: 4, dt: 1e-3, t_end: 0.1, sample_every: 10, initial, dealias: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidArgument(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidArgument("sample_every must be >= 1".into()));
        }
        check_mu_p(self.mu, self.p)?;
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::InvalidArgument("t_end must be an integer multiple of dt".into()));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// Accuracy guard `dt <= h^2 / pi`.
    pub fn cfl_ok(&self) -> bool {
        let h = self.grid.spacing();
        self.dt <= h * h / std::f64::consts::PI
    }
}

pub fn check_mu_p(mu: f64, p: u32) -> Result<()> {
    if !(mu == 1.0 || mu == -1.0 || mu == 0.0) {
        return Err(Error::InvalidArgument(format!("mu = {mu} must be +1, -1 or 0")));
    }
    if ![2, 4, 6].contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} must be 2, 4 or 6")));
    }
    Ok(())
}

/// Uniformly sampled solution with its conservation record.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: Option<EvolveConfig>,
    pub mu: f64,
    pub p: u32,
    samples: Vec<ComplexField>,
    pub mass: Vec<f64>,
    pub energy: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    /// Wraps externally produced samples; times must be strictly increasing and uniform.
    pub fn from_samples(samples: Vec<ComplexField>, mu: f64, p: u32) -> Result<Self> {
        check_mu_p(mu, p)?;
        if samples.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        let grid = *samples[0].grid();
        for s in &samples[1..] {
            grid.same_as(s.grid())?;
        }
        if samples.len() >= 2 {
            let dt = samples[1].t() - samples[0].t();
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument("sample times must increase".into()));
            }
            for w in samples.windows(2) {
                let step = w[1].t() - w[0].t();
                if !(step > 0.0) || (step - dt).abs() > 1e-9 * dt.max(1.0) {
                    return Err(Error::InvalidArgument("sample times must be uniformly spaced".into()));
                }
            }
        }
        let (mass, energy) = samples.iter().map(|s| conserved_quantities(s, mu, p)).unzip();
        Ok(Self { config: None, mu, p, samples, mass, energy, warnings: Vec::new() })
    }

    #[inline]
    pub fn samples(&self) -> &[ComplexField] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn grid(&self) -> &GridSpec {
        self.samples[0].grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t()).collect()
    }

    pub fn dt_sample(&self) -> f64 {
        if self.samples.len() < 2 {
            0.0
        } else {
            self.samples[1].t() - self.samples[0].t()
        }
    }

    /// Every `k`-th sample starting from the first.
    pub fn subsample(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("subsample stride must be >= 1".into()));
        }
        let idx: Vec<usize> = (0..self.samples.len()).step_by(k).collect();
        Ok(Self {
            config: self.config.clone(),
            mu: self.mu,
            p: self.p,
            samples: idx.iter().map(|&i| self.samples[i].clone()).collect(),
            mass: idx.iter().map(|&i| self.mass[i]).collect(),
            energy: idx.iter().map(|&i| self.energy[i]).collect(),
            warnings: self.warnings.clone(),
        })
    }

    pub fn max_relative_drift(series: &[f64]) -> f64 {
        let Some(&first) = series.first() else { return 0.0 };
        let scale = first.abs();
        series
            .iter()
            .map(|v| if scale > 0.0 { (v - first).abs() / scale } else { (v - first).abs() })
            .fold(0.0, f64::max)
    }

    pub fn mass_drift(&self) -> f64 {
        Self::max_relative_drift(&self.mass)
    }

    pub fn energy_drift(&self) -> f64 {
        Self::max_relative_drift(&self.energy)
    }
}

/// Fraction of the mass outside the ball `|x| <= L/2`.
pub fn boundary_mass_fraction(f: &ComplexField) -> f64 {
    let g = f.grid();
    let r2max = (g.half_len() / 2.0).powi(2);
    let d = g.dim();
    let mut outside = 0.0;
    let mut total = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let x = g.position(i);
        let r2: f64 = x.iter().take(d).map(|c| c * c).sum();
        let m = v.norm_sqr();
        total += m;
        if r2 > r2max {
            outside += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        outside / total
    }
}

struct Stepper {
    grid: GridSpec,
    mu: f64,
    p: u32,
    dt: f64,
    phases: Vec<Complex64>,
    dealias: Option<Vec<bool>>,
}

impl Stepper {
    fn new(config: &EvolveConfig) -> Self {
        let grid = config.grid;
        let phases = PhaseTable::new(&grid, config.dt).expand(&grid);
        let dealias = config.dealias.then(|| {
            let cut = grid.n() as i64 / 3;
            (0..grid.len())
                .map(|i| {
                    let idx = grid.unravel(i);
                    (0..grid.dim()).all(|a| grid.wave_index(idx[a]).abs() <= cut)
                })
                .collect()
        });
        Self { grid, mu: config.mu, p: config.p, dt: config.dt, phases, dealias }
    }

    #[inline]
    fn nonlinear(&self, u: &mut [Complex64], tau: f64) -> bool {
        if self.mu == 0.0 {
            return u.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        }
        let c = -self.mu * tau;
        let half_p = (self.p / 2) as i32;
        let mut finite = true;
        for v in u.iter_mut() {
            let m = v.norm_sqr().powi(half_p);
            *v *= Complex64::from_polar(1.0, c * m);
            finite &= v.re.is_finite() && v.im.is_finite();
        }
        finite
    }

    fn step(&self, u: &mut [Complex64]) -> bool {
        self.nonlinear(u, 0.5 * self.dt);
        fft::forward(u, &self.grid);
        for (c, ph) in u.iter_mut().zip(&self.phases) {
            *c *= ph;
        }
        if let Some(mask) = &self.dealias {
            for (c, &keep) in u.iter_mut().zip(mask) {
                if !keep {
                    *c = Complex64::default();
                }
            }
        }
        fft::inverse(u, &self.grid);
        self.nonlinear(u, 0.5 * self.dt)
    }
}

pub fn evolve(config: &EvolveConfig) -> Result<Trajectory> {
    config.validate()?;
    let u0 = config.initial.build(&config.grid)?;
    let stepper = Stepper::new(config);
    let steps = config.steps();
    let mut warnings = Vec::new();
    if !config.cfl_ok() {
        warnings.push(format!("dt = {} exceeds the accuracy guard h^2/pi", config.dt));
    }
    if config.dealias {
        warnings.push("2/3 dealiasing active".to_string());
    }
    let mut samples = vec![u0.clone()];
    let mut u = u0.into_values();
    let mut boundary_flagged = false;
    for step in 1..=steps {
        if !stepper.step(&mut u) {
            return Err(Error::Blowup { step });
        }
        if step % config.sample_every == 0 {
            let t = step as f64 * config.dt;
            let s = ComplexField::from_vec_unchecked(config.grid, t, u.clone());
            if !boundary_flagged && boundary_mass_fraction(&s) > BOUNDARY_MASS_TOL {
                warnings.push(format!("boundary mass above {BOUNDARY_MASS_TOL:e} at t = {t}"));
                boundary_flagged = true;
            }
            samples.push(s);
        }
    }
    if boundary_mass_fraction(&samples[0]) > BOUNDARY_MASS_TOL && !boundary_flagged {
        warnings.push("initial data carries boundary mass".to_string());
    }
    let mut traj = Trajectory::from_samples(samples, config.mu, config.p)?;
    traj.config = Some(config.clone());
    traj.warnings = warnings;
    Ok(traj)
}

/// `(mass, energy)` with `energy = h^d sum (|grad u|^2 / 2 + mu |u|^{p+2} / (p+2))`.
pub fn conserved_quantities(f: &ComplexField, mu: f64, p: u32) -> (f64, f64) {
    let grid = f.grid();
    let hd = grid.cell_volume();
    let mass = f.mass();
    let grad = spectral::gradient(f);
    let kinetic: f64 = grad.iter().map(|g| g.values().iter().map(|v| v.norm_sqr()).sum::<f64>()).sum();
    let potential: f64 = if mu == 0.0 {
        0.0
    } else {
        let e = (p / 2 + 1) as i32;
        f.values().iter().map(|v| v.norm_sqr().powi(e)).sum()
    };
    (mass, hd * (0.5 * kinetic + mu / (p as f64 + 2.0) * potential))
}

/// Quadrature weights for `int_{t_0}^{t_i}` on uniform nodes `0..=i` (spacing 1):
/// composite Simpson, a 3/8 tail for odd `i >= 3`, and the three-point
/// formula on `[t_0, t_1]` for `i = 1`.
pub fn simpson_weights(i: usize) -> Vec<(usize, f64)> {
    match i {
        0 => Vec::new(),
        1 => vec![(0, 5.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        _ => {
            let mut w = vec![0.0; i + 1];
            let simpson_end = if i.is_multiple_of(2) { i } else { i - 3 };
            let mut k = 0;
            while k < simpson_end {
                w[k] += 1.0 / 3.0;
                w[k + 1] += 4.0 / 3.0;
                w[k + 2] += 1.0 / 3.0;
                k += 2;
            }
            if i % 2 == 1 {
                let s = simpson_end;
                for (o, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[s + o] += 3.0 / 8.0 * c;
                }
            }
            w.into_iter().enumerate().collect()
        }
    }
}

/// Max over samples of the relative Duhamel residual.
pub fn duhamel_residual(traj: &Trajectory) -> Result<f64> {
    Ok(duhamel_residual_series(traj)?.into_iter().fold(0.0, f64::max))
}

/// Relative Duhamel residual at every sample after the first.
pub fn duhamel_residual_series(traj: &Trajectory) -> Result<Vec<f64>> {
    let samples = traj.samples();
    if samples.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: samples.len() });
    }
    let grid = *traj.grid();
    let t0 = samples[0].t();
    let ds = traj.dt_sample();
    let half_p = (traj.p / 2) as i32;

    // spectra of e^{-i(s - t0) Delta} F(s) and of e^{-i(t - t0) Delta} u(t)
    let mut pulled_f = Vec::with_capacity(samples.len());
    let mut pulled_u = Vec::with_capacity(samples.len());
    for s in samples {
        let tau = s.t() - t0;
        let back = PhaseTable::new(&grid, -tau).expand(&grid);
        let mut f: Vec<Complex64> =
            s.values().iter().map(|v| traj.mu * v.norm_sqr().powi(half_p) * v).collect();
        fft::forward(&mut f, &grid);
        f.iter_mut().zip(&back).for_each(|(c, b)| *c *= b);
        pulled_f.push(f);
        let mut u = s.values().to_vec();
        fft::forward(&mut u, &grid);
        u.iter_mut().zip(&back).for_each(|(c, b)| *c *= b);
        pulled_u.push(u);
    }
    let u0 = &pulled_u[0];
    let mut out = Vec::with_capacity(samples.len() - 1);
    for i in 1..samples.len() {
        // residual in the pulled-back frame has the same L2 norm
        let mut r: Vec<Complex64> = pulled_u[i].iter().zip(u0).map(|(a, b)| a - b).collect();
        for (j, w) in simpson_weights(i) {
            let c = Complex64::new(0.0, ds * w);
            r.iter_mut().zip(&pulled_f[j]).for_each(|(acc, f)| *acc += c * f);
        }
        let num: f64 = r.iter().map(|c| c.norm_sqr()).sum();
        let den: f64 = pulled_u[i].iter().map(|c| c.norm_sqr()).sum();
        out.push(if den == 0.0 { if num == 0.0 { 0.0 } else { f64::INFINITY } } else { (num / den).sqrt() });
    }
    Ok(out)
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Largest modulus on the shell `max_i |x_i| >= 3L/4` relative to the global sup.
pub fn boundary_shell_ratio(f: &ComplexField) -> f64 {
    let g = f.grid();
    let cut = 0.75 * g.half_len();
    let mut shell: f64 = 0.0;
    let mut sup: f64 = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        let a = v.norm();
        sup = sup.max(a);
        let x = g.position(i);
        if x.iter().take(g.dim()).any(|c| c.abs() >= cut) {
            shell = shell.max(a);
        }
    }
    if sup == 0.0 {
        0.0
    } else {
        shell / sup
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: times.len() });
    }
    if times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidArgument("decay times must be positive".into()));
    }
    Ok(())
}

/// Decay slope of `||e^{it Delta} f||_inf` against `t` in log-log coordinates.
pub fn dispersive_decay_exponent(f: &ComplexField, times: &[f64]) -> Result<f64> {
    Ok(dispersive_decay_profile(f, times)?.0)
}

/// Slope together with the per-time sup values.
pub fn dispersive_decay_profile(f: &ComplexField, times: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_times(times)?;
    if f.is_zero() {
        return Err(Error::ZeroField);
    }
    let frac = boundary_mass_fraction(f);
    if frac > BOUNDARY_MASS_TOL {
        return Err(Error::NotLocalized(format!("{frac:.3e} of the mass lies outside |x| <= L/2")));
    }
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    let mut sups = Vec::with_capacity(times.len());
    for &t in times {
        let mut s = spec.clone();
        spectral::propagate_spectrum(&mut s, &grid, t);
        fft::inverse(&mut s, &grid);
        let g = ComplexField::from_vec_unchecked(grid, t, s);
        let ratio = boundary_shell_ratio(&g);
        if ratio > WRAP_TOL {
            return Err(Error::WrapAround { ratio });
        }
        sups.push(g.max_abs());
    }
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
    Ok((fit_slope(&x, &y), sups))
}

/// Decay slope for the tensor product `f(x_1) ... f(x_d)` of a one-dimensional
/// profile: the free flow factorizes, so the `d`-dimensional sup is the
/// one-dimensional sup to the power `d`.
pub fn separable_decay_exponent(profile: &ComplexField, d: usize, times: &[f64]) -> Result<(f64, Vec<f64>)> {
    if profile.grid().dim() != 1 {
        return Err(Error::InvalidArgument("separable profile must be one-dimensional".into()));
    }
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidArgument(format!("target dimension {d} outside 1..=4")));
    }
    let (_, sups) = dispersive_decay_profile(profile, times)?;
    let sups: Vec<f64> = sups.iter().map(|s| s.powi(d as i32)).collect();
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = sups.iter().map(|s| s.ln()).collect();
    Ok((fit_slope(&x, &y), sups))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: GridSpec, width: f64) -> InitialData {
        let _ = grid;
        InitialData::Gaussian { amplitude: 1.0, center: [0.0; 4], width, velocity: [0.0; 4] }
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = GridSpec::new(2, 16, 4.0).unwrap();
        let mut c = EvolveConfig::new(g, InitialData::Zero);
        c.t_end = 0.05;
        c.sample_every = 5;
        let traj = evolve(&c).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.samples().iter().all(|s| s.is_zero()));
        assert_eq!(conserved_quantities(&traj.samples()[3], 1.0, 4), (0.0, 0.0));
    }

    #[test]
    fn plane_wave_energy_formula() {
        let g = GridSpec::new(2, 8, 2.0).unwrap();
        let f = InitialData::PlaneWave { amplitude: 1.0, mode: [1, -2, 0, 0] }.build(&g).unwrap();
        let (m, e) = conserved_quantities(&f, 1.0, 4);
        let v = g.volume();
        let k2 = 5.0 * g.dk().powi(2);
        assert!((m - v).abs() < 1e-12 * v);
        assert!((e - (0.5 * k2 * v + v / 6.0)).abs() < 1e-12 * e);
    }

    #[test]
    fn plane_wave_exact_solution() {
        let g = GridSpec::new(1, 16, 3.0).unwrap();
        let amp = 0.8;
        let mode = [3, 0, 0, 0];
        let mut c = EvolveConfig::new(g, InitialData::PlaneWave { amplitude: amp, mode });
        c.dt = 1e-3;
        c.t_end = 0.5;
        c.sample_every = 500;
        let traj = evolve(&c).unwrap();
        let k = 3.0 * g.dk();
        let t = 0.5;
        let u0 = traj.samples()[0].clone();
        let expect = u0.scaled(Complex64::from_polar(1.0, -(k * k + amp.powi(4)) * t));
        // constant modulus: the splitting is exact up to round-off
        assert!(traj.samples()[1].relative_distance(&expect).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_bad_config() {
        let g = GridSpec::new(1, 16, 3.0).unwrap();
        let mut c = EvolveConfig::new(g, InitialData::Zero);
        c.mu = 0.5;
        assert!(evolve(&c).is_err());
        c.mu = 1.0;
        c.p = 3;
        assert!(evolve(&c).is_err());
        c.p = 4;
        c.sample_every = 0;
        assert!(evolve(&c).is_err());
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for i in 1..9 {
            let w = simpson_weights(i);
            let top = if i == 1 { 3 } else { 4 };
            for deg in 0..top {
                let approx: f64 = w.iter().map(|&(j, c)| c * (j as f64).powi(deg)).sum();
                let exact = (i as f64).powi(deg + 1) / (deg + 1) as f64;
                assert!((approx - exact).abs() < 1e-12, "i = {i}, deg = {deg}");
            }
        }
    }

    #[test]
    fn linear_duhamel_residual_vanishes() {
        let g = GridSpec::new(2, 32, 8.0).unwrap();
        let mut c = EvolveConfig::new(g, gaussian(g, 1.0));
        c.mu = 0.0;
        c.t_end = 0.1;
        c.sample_every = 10;
        let traj = evolve(&c).unwrap();
        assert!(duhamel_residual(&traj).unwrap() < 1e-10);
        let zero = evolve(&EvolveConfig { initial: InitialData::Zero, ..c.clone() }).unwrap();
        assert_eq!(duhamel_residual(&zero).unwrap(), 0.0);
    }

    #[test]
    fn plane_wave_is_not_localized() {
        let g = GridSpec::new(2, 16, 8.0).unwrap();
        let f = InitialData::PlaneWave { amplitude: 1.0, mode: [1, 0, 0, 0] }.build(&g).unwrap();
        assert!(matches!(dispersive_decay_exponent(&f, &[0.5, 1.0]), Err(Error::NotLocalized(_))));
    }

    #[test]
    fn two_dimensional_gaussian_decay() {
        let g = GridSpec::new(2, 1024, 128.0).unwrap();
        let f = gaussian(g, 0.5).build(&g).unwrap();
        let times: Vec<f64> = (0..10).map(|i| 0.5 + 2.5 * i as f64 / 9.0).collect();
        let slope = dispersive_decay_exponent(&f, &times).unwrap();
        assert!((slope + 1.0).abs() < 0.05, "slope = {slope}");
    }
}
