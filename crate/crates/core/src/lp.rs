//! Littlewood–Paley projectors built from a fixed radial bump.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::fft;
use crate::grid::GridSpec;
use crate::spectral::fractional_symbol;

/// Smallest and largest admissible dyadic frequency.
pub const DYADIC_MIN_EXP: i32 = -20;
pub const DYADIC_MAX_EXP: i32 = 20;

/// Outer edge of the bump transition.
pub const BUMP_EDGE: f64 = 1.1;

#[inline]
fn e_fn(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = e_fn(x);
        a / (a + e_fn(1.0 - x))
    }
}

/// Radial bump: 1 on `r <= 1`, 0 on `r >= 11/10`.
#[inline]
pub fn bump(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= BUMP_EDGE {
        0.0
    } else {
        smooth_step((BUMP_EDGE - r) / (BUMP_EDGE - 1.0))
    }
}

/// Frequency window of a projector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Band {
    AtMost(f64),
    At(f64),
    Above(f64),
    /// `(N1, N2]`
    Range(f64, f64),
}

/// Exponent `k` with `n = 2^k`, if `n` is an admissible dyadic number.
pub fn dyadic_exponent(n: f64) -> Result<i32> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument(format!("dyadic value {n} must be positive")));
    }
    let k = n.log2().round();
    if 2f64.powi(k as i32) != n {
        return Err(Error::InvalidArgument(format!("{n} is not a power of two")));
    }
    let k = k as i32;
    if !(DYADIC_MIN_EXP..=DYADIC_MAX_EXP).contains(&k) {
        return Err(Error::InvalidArgument(format!("dyadic value 2^{k} outside [2^-20, 2^20]")));
    }
    Ok(k)
}

impl Band {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Band::AtMost(n) | Band::At(n) | Band::Above(n) => dyadic_exponent(n).map(|_| ()),
            Band::Range(a, b) => {
                let (ka, kb) = (dyadic_exponent(a)?, dyadic_exponent(b)?);
                if ka >= kb {
                    return Err(Error::InvalidArgument(format!("range band needs N1 < N2, got ({a}, {b}]")));
                }
                Ok(())
            }
        }
    }

    /// Multiplier value at `|xi|`.
    pub fn symbol(&self, k: f64) -> f64 {
        match *self {
            Band::AtMost(n) => bump(k / n),
            Band::At(n) => bump(k / n) - bump(2.0 * k / n),
            Band::Above(n) => 1.0 - bump(k / n),
            Band::Range(a, b) => {
                let (ka, kb) = (a.log2().round() as i32, b.log2().round() as i32);
                (ka + 1..=kb).map(|j| Band::At(2f64.powi(j)).symbol(k)).sum()
            }
        }
    }

    /// Largest frequency where the symbol may be nonzero (infinite for `Above`).
    pub fn upper_edge(&self) -> f64 {
        match *self {
            Band::AtMost(n) | Band::At(n) => BUMP_EDGE * n,
            Band::Above(_) => f64::INFINITY,
            Band::Range(_, b) => BUMP_EDGE * b,
        }
    }
}

/// Applies the band symbol to spectral coefficients in place.
pub fn project_spectrum(spec: &mut [Complex64], grid: &GridSpec, band: &Band) {
    for (i, c) in spec.iter_mut().enumerate() {
        let s = band.symbol(grid.frequency_norm_sq(i).sqrt());
        if s != 1.0 {
            *c *= s;
        }
    }
}

pub fn lp_project(f: &ComplexField, band: Band) -> Result<ComplexField> {
    band.validate()?;
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    project_spectrum(&mut spec, &grid, &band);
    fft::inverse(&mut spec, &grid);
    Ok(ComplexField::from_vec_unchecked(grid, f.t(), spec))
}

/// `|nabla|^s P f` from a single transform pair.
pub fn lp_derivative(f: &ComplexField, band: Band, s: f64) -> Result<ComplexField> {
    band.validate()?;
    if s < -2.0 {
        return Err(Error::InvalidArgument(format!("fractional order s = {s} must be >= -2")));
    }
    let grid = *f.grid();
    let mut spec = f.values().to_vec();
    fft::forward(&mut spec, &grid);
    for (i, c) in spec.iter_mut().enumerate() {
        let k2 = grid.frequency_norm_sq(i);
        *c *= band.symbol(k2.sqrt()) * fractional_symbol(k2, s);
    }
    fft::inverse(&mut spec, &grid);
    Ok(ComplexField::from_vec_unchecked(grid, f.t(), spec))
}

/// Dyadic values `2^k` whose `P_N` symbol touches the lattice (zero mode excluded).
pub fn lattice_window(grid: &GridSpec) -> Vec<f64> {
    let kmin = grid.dk();
    let kmax = grid.nyquist() * (grid.dim() as f64).sqrt();
    let lo = ((kmin / BUMP_EDGE).log2().floor() as i32).max(DYADIC_MIN_EXP);
    let hi = ((2.0 * kmax).log2().ceil() as i32).min(DYADIC_MAX_EXP);
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

/// Ratio of the two sides of a Bernstein estimate on `f`.
///
/// For `AtMost`, `At` and `Range` bands this is
/// `|| |nabla|^s P f ||_q / (N^{s + d/r - d/q} || P f ||_r)` with `N` the top
/// of the band. For `Above` it is the reverse estimate
/// `|| P f ||_r / (N^{-s} || |nabla|^s P f ||_r)` and requires `r = q`.
pub fn bernstein_ratio(f: &ComplexField, band: Band, s: f64, r: f64, q: f64) -> Result<f64> {
    band.validate()?;
    if !(r >= 1.0 && q >= r) {
        return Err(Error::InvalidArgument(format!("need 1 <= r <= q, got r = {r}, q = {q}")));
    }
    if s < 0.0 {
        return Err(Error::InvalidArgument("Bernstein order s must be >= 0".into()));
    }
    let projected = lp_project(f, band)?;
    let d = f.grid().dim() as f64;
    let derived = if s == 0.0 { projected.clone() } else { lp_derivative(f, band, s)? };
    let inv = |p: f64| if p.is_infinite() { 0.0 } else { 1.0 / p };
    let (num, den) = match band {
        Band::Above(n) => {
            if r != q {
                return Err(Error::InvalidArgument("reverse Bernstein estimate needs r = q".into()));
            }
            (projected.lp_norm(r), n.powf(-s) * derived.lp_norm(r))
        }
        Band::AtMost(n) | Band::At(n) | Band::Range(_, n) => {
            (derived.lp_norm(q), n.powf(s + d * (inv(r) - inv(q))) * projected.lp_norm(r))
        }
    };
    if den == 0.0 || !den.is_finite() {
        return Err(Error::BandEmpty);
    }
    Ok(num / den)
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

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 1.0);
        assert_eq!(bump(1.1), 0.0);
        assert_eq!(bump(2.1), 0.0);
        assert!((bump(1.05) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = bump(1.0 + 0.1 * i as f64 / 1000.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn bump_is_c2_numerically() {
        let h = 1e-4;
        let mut max2: f64 = 0.0;
        for i in 1..2000 {
            let r = 0.95 + 0.2 * i as f64 / 2000.0;
            let d2 = (bump(r + h) - 2.0 * bump(r) + bump(r - h)) / (h * h);
            max2 = max2.max(d2.abs());
        }
        assert!(max2.is_finite() && max2 < 1e4);
    }

    #[test]
    fn rejects_non_dyadic() {
        assert!(Band::AtMost(3.0).validate().is_err());
        assert!(Band::AtMost(2f64.powi(21)).validate().is_err());
        assert!(Band::Range(4.0, 2.0).validate().is_err());
        assert!(Band::At(0.125).validate().is_ok());
    }

    #[test]
    fn mode_at_105_n() {
        // dk = 1/20 so that m = 21 sits at |k| = 1.05
        let g = GridSpec::new(1, 64, 20.0 * std::f64::consts::PI).unwrap();
        let k = 21.0 * g.dk();
        let f = ComplexField::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, k * x[0])).unwrap();
        let out = lp_project(&f, Band::At(1.0)).unwrap();
        assert_eq!(bump(2.0 * k), 0.0);
        let expect = f.scaled(Complex64::new(bump(k), 0.0));
        assert!(out.relative_distance(&expect).unwrap() < 1e-12);
        assert!((bump(k) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn band_limited_is_fixed_by_low_projector() {
        let g = GridSpec::new(2, 16, 8.0).unwrap();
        let f = random_field(g, 7);
        let low = lp_project(&f, Band::AtMost(0.5)).unwrap();
        let again = lp_project(&low, Band::AtMost(1.0)).unwrap();
        assert!(again.relative_distance(&low).unwrap() < 1e-12);
    }

    #[test]
    fn single_mode_bernstein() {
        let g = GridSpec::new(1, 32, std::f64::consts::PI * 4.0).unwrap();
        let k = 8.0 * g.dk();
        let n = 2.0 * k;
        let f = ComplexField::from_fn(g, 0.0, |x| Complex64::from_polar(1.0, k * x[0])).unwrap();
        let r = bernstein_ratio(&f, Band::AtMost(n), 1.0, 2.0, 2.0).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        let zero = ComplexField::zeros(g, 0.0);
        assert!(matches!(bernstein_ratio(&zero, Band::AtMost(n), 1.0, 2.0, 2.0), Err(Error::BandEmpty)));
    }
}
