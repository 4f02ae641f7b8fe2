//! Truncated Morawetz weight.
//!
//! The radial derivative `w_r` is a profile `g` of `s = log(r / R)`:
//! 1 on `s <= 0`, `1 - s/J` on `[1, J-1]`, 0 on `s >= J`, with quintic
//! Hermite fill-ins on `[0, 1]` and `[J-1, J]` matching value, first and
//! second derivative. The weight itself is `w(r) = int_0^r w_r`, and the
//! rescaled weight is `a(x) = w(n |x|) / n`.

use crate::error::{Error, Result};
use crate::scale::ScaleFunction;

/// Certified `sup_r J r^k |d_r^k w_r|`, k = 1, 2, 3, rounded up.
pub const DERIVATIVE_BOUNDS: [f64; 3] = [1.52, 4.68, 36.01];

/// Upper limit asserted on the certified bounds.
pub const DERIVATIVE_BOUND_LIMIT: f64 = 50.0;

/// Samples used by [`certify_derivative_bounds`].
pub const CERTIFY_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    s0: f64,
    s1: f64,
    /// `g(s0 + y) = sum c_i y^i`
    coeffs: [f64; 6],
    /// `int_0^{s0} g(s) e^s ds`
    cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    r: f64,
    j: u32,
    pieces: Vec<Piece>,
    /// `int_0^J g(s) e^s ds`
    total: f64,
}

fn poly_eval(c: &[f64; 6], y: f64, k: usize) -> f64 {
    // k-th derivative by Horner on the differentiated coefficients
    let mut acc = 0.0;
    for i in (k..6).rev() {
        let mut f = 1.0;
        for m in 0..k {
            f *= (i - m) as f64;
        }
        acc = acc * y + f * c[i];
    }
    acc
}

/// `int_0^y P(t) e^t dt = e^y Q(y) - Q(0)` with `Q = P - P' + P'' - ...`.
fn poly_exp_integral(c: &[f64; 6], y: f64) -> f64 {
    let q = |x: f64| (0..6).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * poly_eval(c, x, k)).sum::<f64>();
    y.exp() * q(y) - q(0.0)
}

/// `p(x) = 6x^3 - 8x^4 + 3x^5`: `p = p' = p'' = 0` at 0, `p = p' = 1`, `p'' = 0` at 1.
const HERMITE: [f64; 6] = [0.0, 0.0, 0.0, 6.0, -8.0, 3.0];

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl WeightProfile {
    pub fn new(r: f64, j: u32) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!("R = {r} must be positive")));
        }
        if j < 2 {
            return Err(Error::InvalidArgument(format!("J = {j} must be >= 2")));
        }
        let jf = j as f64;
        let mut inner = [0.0; 6];
        inner[0] = 1.0;
        for i in 0..6 {
            inner[i] -= HERMITE[i] / jf;
        }
        let band = [1.0 - 1.0 / jf, -1.0 / jf, 0.0, 0.0, 0.0, 0.0];
        // p(1 - y) / J
        let mut outer = [0.0; 6];
        for (i, &c) in HERMITE.iter().enumerate() {
            for m in 0..=i {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                outer[m] += c * binomial(i, m) * sign / jf;
            }
        }
        let spans = [(0.0, 1.0, inner), (1.0, jf - 1.0, band), (jf - 1.0, jf, outer)];
        let mut pieces = Vec::new();
        let mut cumulative = 0.0;
        for (s0, s1, coeffs) in spans {
            if s1 > s0 {
                pieces.push(Piece { s0, s1, coeffs, cumulative });
                cumulative += s0.exp() * poly_exp_integral(&coeffs, s1 - s0);
            }
        }
        Ok(Self { r, j, pieces, total: cumulative })
    }

    #[inline]
    pub fn inner_radius(&self) -> f64 {
        self.r
    }

    #[inline]
    pub fn j(&self) -> u32 {
        self.j
    }

    /// `R e^J`, beyond which `w` is constant.
    pub fn outer_radius(&self) -> f64 {
        self.r * (self.j as f64).exp()
    }

    fn piece(&self, s: f64) -> Option<&Piece> {
        if s <= 0.0 || s >= self.j as f64 {
            return None;
        }
        self.pieces.iter().find(|p| s <= p.s1).or(self.pieces.last())
    }

    /// `d^k g / ds^k` for `k <= 5`.
    pub fn g(&self, s: f64, k: usize) -> f64 {
        if s <= 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        match self.piece(s) {
            Some(p) => poly_eval(&p.coeffs, s - p.s0, k),
            None => 0.0,
        }
    }

    /// `d_r^k w_r` at `rho > 0` for `k = 0..=3`.
    pub fn w_r_derivative(&self, rho: f64, k: usize) -> f64 {
        if rho <= self.r {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let s = (rho / self.r).ln();
        let g = |m| self.g(s, m);
        match k {
            0 => g(0),
            1 => g(1) / rho,
            2 => (g(2) - g(1)) / (rho * rho),
            3 => (g(3) - 3.0 * g(2) + 2.0 * g(1)) / rho.powi(3),
            4 => (g(4) - 6.0 * g(3) + 11.0 * g(2) - 6.0 * g(1)) / rho.powi(4),
            _ => panic!("derivative order {k} not supported"),
        }
    }

    pub fn w_r(&self, rho: f64) -> f64 {
        self.w_r_derivative(rho, 0)
    }

    /// `w(rho) = int_0^rho w_r`.
    pub fn w(&self, rho: f64) -> f64 {
        if rho <= self.r {
            return rho.max(0.0);
        }
        let s = (rho / self.r).ln();
        let integral = match self.piece(s) {
            Some(p) => p.cumulative + p.s0.exp() * poly_exp_integral(&p.coeffs, s - p.s0),
            None => self.total,
        };
        self.r * (1.0 + integral)
    }

    /// Knots `R`, `Re`, `Re^{J-1}`, `Re^J`.
    pub fn knots(&self) -> [f64; 4] {
        let j = self.j as f64;
        [self.r, self.r * 1f64.exp(), self.r * (j - 1.0).exp(), self.r * j.exp()]
    }
}

/// `a = w(n r) / n` and its radial derivatives in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightAt {
    pub a: f64,
    pub a_r: f64,
    pub a_rr: f64,
    pub a_rrr: f64,
    pub a_rrrr: f64,
    pub lap: f64,
    pub bilap: f64,
    pub dt_a_r: f64,
}

impl WeightAt {
    /// Hessian eigenvalues: `a_rr` (radial) and `a_r / r` (tangential).
    pub fn hessian_eigenvalues(&self, r: f64) -> (f64, f64) {
        (self.a_rr, self.a_r / r)
    }
}

pub fn weight_at_dim(profile: &WeightProfile, d: usize, n: f64, n_prime: f64, r: f64) -> Result<WeightAt> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument(format!("n = {n} must be positive")));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidArgument(format!("r = {r} must be non-negative")));
    }
    if r == 0.0 {
        return Err(Error::InvalidArgument(
            "r = 0 lies on the distributional support of the bilaplacian".into(),
        ));
    }
    let rho = n * r;
    let a = profile.w(rho) / n;
    let a_r = profile.w_r_derivative(rho, 0);
    let a_rr = n * profile.w_r_derivative(rho, 1);
    let a_rrr = n * n * profile.w_r_derivative(rho, 2);
    let a_rrrr = n.powi(3) * profile.w_r_derivative(rho, 3);
    let df = d as f64;
    let lap = a_rr + (df - 1.0) * a_r / r;
    let bilap = a_rrrr + 2.0 * (df - 1.0) * a_rrr / r + (df - 1.0) * (df - 3.0) * (a_rr / (r * r) - a_r / r.powi(3));
    let dt_a_r = profile.w_r_derivative(rho, 1) * r * n_prime;
    Ok(WeightAt { a, a_r, a_rr, a_rrr, a_rrrr, lap, bilap, dt_a_r })
}

/// [`weight_at_dim`] in four dimensions.
pub fn weight_at(profile: &WeightProfile, n: f64, n_prime: f64, r: f64) -> Result<WeightAt> {
    weight_at_dim(profile, 4, n, n_prime, r)
}

/// `sup J r^k |d_r^k w_r|` over a log-uniform sample of `[R/10, 10 R e^J]` plus the knots.
pub fn certify_derivative_bounds(profile: &WeightProfile, k: usize) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidArgument(format!("k = {k} must be 1, 2 or 3")));
    }
    let lo = (profile.inner_radius() / 10.0).ln();
    let hi = (profile.outer_radius() * 10.0).ln();
    let jf = profile.j() as f64;
    let eval = |rho: f64| jf * rho.powi(k as i32) * profile.w_r_derivative(rho, k).abs();
    let mut sup: f64 = 0.0;
    for i in 0..CERTIFY_SAMPLES {
        let rho = (lo + (hi - lo) * i as f64 / (CERTIFY_SAMPLES - 1) as f64).exp();
        sup = sup.max(eval(rho));
    }
    for knot in profile.knots() {
        for rho in [knot * (1.0 - 1e-12), knot * (1.0 + 1e-12)] {
            sup = sup.max(eval(rho));
        }
    }
    Ok(sup)
}

/// Radial data needed by [`positivity_certificate`].
pub trait RadialWeight {
    /// `(w_r, d_r w_r, d_r^2 w_r, d_r^3 w_r)` at `rho`.
    fn radial(&self, rho: f64) -> [f64; 4];
    fn inner_radius(&self) -> f64;
    fn outer_radius(&self) -> f64;
    fn j(&self) -> u32;
}

impl RadialWeight for WeightProfile {
    fn radial(&self, rho: f64) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.w_r_derivative(rho, k))
    }
    fn inner_radius(&self) -> f64 {
        WeightProfile::inner_radius(self)
    }
    fn outer_radius(&self) -> f64 {
        WeightProfile::outer_radius(self)
    }
    fn j(&self) -> u32 {
        WeightProfile::j(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositivityReport {
    pub samples: usize,
    pub violations: Vec<(f64, String)>,
}

impl PositivityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `r` log-uniformly on `[1e-3 lambda_0, 10 R e^J / n]` (with all rescaled
/// knots) and checks, in four dimensions:
/// `a_r >= 0` everywhere; `a_rr >= 0`, `a_r / r >= 0` and `-Delta Delta a = 3 / r^3`
/// on `r <= lambda_0 = R / n`; `J r |a_rr| <= C_1` beyond `lambda_0`.
pub fn positivity_certificate<W: RadialWeight>(profile: &W, n: f64) -> Result<PositivityReport> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::InvalidArgument(format!("n = {n} must be positive")));
    }
    let lambda0 = profile.inner_radius() / n;
    let lo = (lambda0 * 1e-3).ln();
    let hi = (10.0 * profile.outer_radius() / n).ln();
    let count = 4000;
    let mut radii: Vec<f64> = (0..count).map(|i| (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp()).collect();
    let jf = profile.j() as f64;
    let knots = [profile.inner_radius(), profile.inner_radius() * 1f64.exp(), profile.inner_radius() * (jf - 1.0).exp(), profile.outer_radius()];
    radii.extend(knots.iter().map(|k| k / n));
    radii.sort_by(f64::total_cmp);

    let mut violations = Vec::new();
    for &r in &radii {
        let [w0, w1, w2, w3] = profile.radial(n * r);
        let a_r = w0;
        let a_rr = n * w1;
        let a_rrr = n * n * w2;
        let a_rrrr = n.powi(3) * w3;
        let bilap = a_rrrr + 6.0 * a_rrr / r + 3.0 * (a_rr / (r * r) - a_r / r.powi(3));
        if a_r < 0.0 {
            violations.push((r, format!("a_r = {a_r:e} < 0")));
        }
        if r <= lambda0 {
            if a_rr < 0.0 || a_r / r < 0.0 {
                violations.push((r, format!("Hessian eigenvalues ({a_rr:e}, {:e}) not >= 0", a_r / r)));
            }
            let expect = 3.0 / r.powi(3);
            if (-bilap - expect).abs() > 1e-12 * expect {
                violations.push((r, format!("-bilaplacian {:e} != 3/r^3 = {expect:e}", -bilap)));
            }
        } else if jf * r * a_rr.abs() > DERIVATIVE_BOUNDS[0] {
            violations.push((r, format!("J r |a_rr| = {:e} above C_1", jf * r * a_rr.abs())));
        }
    }
    Ok(PositivityReport { samples: radii.len(), violations })
}

/// Weight parameters from `K` and `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub r: f64,
    pub j: u32,
    pub m: u32,
}

impl Parameters {
    /// `lambda_j(t) = R e^j / n_m(t)`.
    pub fn lambda(&self, j: u32, nm: &ScaleFunction, t: f64) -> Result<f64> {
        Ok(self.r * (j as f64).exp() / nm.eval(t)?)
    }
}

/// `R = K^alpha`, `J = max(2, round(alpha ln R))`, `m = max(1, round(4/5 (1 + alpha) log2 R))`.
pub fn choose_parameters(k: f64, alpha: f64) -> Result<Parameters> {
    if !(k.is_finite() && k > 1.0) {
        return Err(Error::InvalidArgument(format!("K = {k} must exceed 1")));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1/2)")));
    }
    let r = k.powf(alpha);
    let j = (alpha * r.ln()).round().max(2.0) as u32;
    let m = (0.8 * (1.0 + alpha) * r.log2()).round().max(1.0) as u32;
    Ok(Parameters { r, j, m })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mandated_values() {
        let p = WeightProfile::new(3.0, 4).unwrap();
        assert_eq!(p.w_r(1.5), 1.0);
        assert_eq!(p.w_r(3.0 * 2f64.exp()), 1.0 - 2.0 / 4.0);
        assert_eq!(p.w_r(2.0 * p.outer_radius()), 0.0);
        assert_eq!(p.w(1.0), 1.0);
        assert_eq!(p.w(0.0), 0.0);
    }

    #[test]
    fn hermite_fill_matches_band() {
        let p = WeightProfile::new(1.0, 5).unwrap();
        for s in [1.0, 4.0] {
            let band = |m: usize| match m {
                0 => 1.0 - s / 5.0,
                1 => -0.2,
                _ => 0.0,
            };
            for m in 0..3 {
                let left = p.g(s - 1e-13, m);
                assert!((left - band(m)).abs() < 1e-10, "s = {s}, m = {m}");
            }
        }
    }

    #[test]
    fn antiderivative_matches_quadrature() {
        let p = WeightProfile::new(0.7, 3).unwrap();
        let rmax = 1.2 * p.outer_radius();
        let n = 200_000;
        let h = rmax / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            acc += h / 6.0 * (p.w_r(a) + 4.0 * p.w_r(0.5 * (a + b)) + p.w_r(b));
        }
        assert!((acc - p.w(rmax)).abs() < 1e-9 * acc);
    }

    #[test]
    fn cone_region_values() {
        let p = WeightProfile::new(2.0, 3).unwrap();
        let n = 4.0;
        let r = 0.3;
        let w = weight_at(&p, n, 0.0, r).unwrap();
        assert_eq!((w.a, w.a_r, w.a_rr), (r, 1.0, 0.0));
        assert!((w.lap - 3.0 / r).abs() < 1e-14);
        assert!((-w.bilap - 3.0 / r.powi(3)).abs() < 1e-12 * 3.0 / r.powi(3));
        assert!(weight_at(&p, n, 0.0, 0.0).is_err());
        let far = weight_at(&p, n, 1.0, 2.0 * p.outer_radius() / n).unwrap();
        assert_eq!((far.a_r, far.a_rr, far.lap, far.bilap, far.dt_a_r), (0.0, 0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn parameter_example() {
        let p = choose_parameters(1e8, 0.25).unwrap();
        assert!((p.r - 100.0).abs() < 1e-9);
        assert_eq!((p.j, p.m), (2, 7));
    }

    #[test]
    fn certified_bounds_hold() {
        let p = WeightProfile::new(1.0, 6).unwrap();
        for k in 1..=3 {
            let c = certify_derivative_bounds(&p, k).unwrap();
            assert!(c <= DERIVATIVE_BOUNDS[k - 1] && c <= DERIVATIVE_BOUND_LIMIT, "k = {k}: {c}");
        }
    }
}
