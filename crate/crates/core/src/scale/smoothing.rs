use std::collections::BTreeMap;

use super::{ScaleFunction, ScaleKind};
use crate::error::{Error, Result};

/// Most breakpoints `build_n1` will generate before giving up.
const MAX_BREAKPOINTS: usize = 1 << 22;

fn exact_log2(v: f64) -> Option<i32> {
    if !(v > 0.0 && v.is_finite()) {
        return None;
    }
    let k = v.log2().round() as i32;
    (2f64.powi(k) == v).then_some(k)
}

/// `sup { k : v >= 2^k }`.
fn floor_log2(v: f64) -> i32 {
    let mut k = v.log2().floor() as i32;
    while 2f64.powi(k + 1) <= v {
        k += 1;
    }
    while 2f64.powi(k) > v {
        k -= 1;
    }
    k
}

/// `n_1` on `I` from `n_0`: breakpoints `t_{l+1} = t_l + delta n_0(t_l)^{-2}` and
/// values `2^{k_l}` with `k_l = sup { k : inf_{J_l} n_0 >= 2^k }`.
///
/// The step is accepted only if `sup / inf <= 2` on every `J_l`.
pub fn build_n1(n0: &ScaleFunction, delta: f64) -> Result<ScaleFunction> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let (start, end) = (n0.start(), n0.end());
    let mut bps = Vec::new();
    let mut vals = Vec::new();
    let mut t = start;
    loop {
        let v = n0.eval(t)?;
        let next = t + delta / (v * v);
        let (lo, hi) = n0.extrema_on(t, next);
        if hi > 2.0 * lo {
            return Err(Error::DeltaCheck(format!(
                "n0 varies by {:.3}x on [{t}, {next}]; use a smaller delta",
                hi / lo
            )));
        }
        bps.push(t);
        vals.push(2f64.powi(floor_log2(lo)));
        if bps.len() > MAX_BREAKPOINTS {
            return Err(Error::DeltaCheck("delta too small: breakpoint budget exhausted".into()));
        }
        if next > end || next == t {
            break;
        }
        t = next;
    }
    ScaleFunction::new(ScaleKind::PiecewiseLinear, bps, vals, end)
}

/// Largest `delta = 2^{-k}`, `k >= -20`, accepted by [`build_n1`].
pub fn default_delta(n0: &ScaleFunction) -> Result<f64> {
    for k in -20..=60 {
        let delta = 2f64.powi(-k);
        match build_n1(n0, delta) {
            Ok(_) => return Ok(delta),
            Err(Error::DeltaCheck(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DeltaCheck("no delta >= 2^-60 passes the variation check".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slope {
    pub start: usize,
    pub end: usize,
    /// Touches the first or last breakpoint.
    pub boundary: bool,
}

/// Index intervals (inclusive) into the breakpoints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Morphology {
    pub peaks: Vec<(usize, usize)>,
    pub valleys: Vec<(usize, usize)>,
    pub slopes: Vec<Slope>,
}

impl Morphology {
    /// Peaks and valleys in index order, `true` for valleys.
    pub fn extrema(&self) -> Vec<(usize, usize, bool)> {
        let mut all: Vec<(usize, usize, bool)> = self
            .peaks
            .iter()
            .map(|&(a, b)| (a, b, false))
            .chain(self.valleys.iter().map(|&(a, b)| (a, b, true)))
            .collect();
        all.sort();
        all
    }

    pub fn alternates(&self) -> bool {
        self.extrema().windows(2).all(|w| w[0].2 != w[1].2)
    }
}

fn validate_n1_type(values: &[f64]) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if exact_log2(v).is_none() {
            return Err(Error::MalformedScale(format!("value {v} at index {i} is not a power of two")));
        }
    }
    for (i, w) in values.windows(2).enumerate() {
        let r = w[1] / w[0];
        if !(r == 0.5 || r == 1.0 || r == 2.0) {
            return Err(Error::MalformedScale(format!(
                "adjacent ratio {r} between indices {i} and {} is outside {{1/2, 1, 2}}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Maximal runs of equal values, as inclusive index pairs.
fn flat_runs(values: &[f64]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut a = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] != values[a] {
            runs.push((a, i - 1));
            a = i;
        }
    }
    runs
}

pub fn classify(scale: &ScaleFunction) -> Result<Morphology> {
    let v = scale.values();
    validate_n1_type(v)?;
    let last = v.len() - 1;
    let mut m = Morphology::default();
    for (a, b) in flat_runs(v) {
        if a == 0 || b == last {
            continue;
        }
        let (left, right, here) = (v[a - 1], v[b + 1], v[a]);
        if left > here && right > here {
            m.valleys.push((a, b));
        } else if left < here && right < here {
            m.peaks.push((a, b));
        }
    }
    let ext = m.extrema();
    if ext.is_empty() {
        if v.iter().any(|&x| x != v[0]) {
            m.slopes.push(Slope { start: 0, end: last, boundary: true });
        }
        return Ok(m);
    }
    if ext[0].0 > 0 {
        m.slopes.push(Slope { start: 0, end: ext[0].0, boundary: true });
    }
    for w in ext.windows(2) {
        m.slopes.push(Slope { start: w[0].1, end: w[1].0, boundary: false });
    }
    let tail = ext[ext.len() - 1].1;
    if tail < last {
        m.slopes.push(Slope { start: tail, end: last, boundary: true });
    }
    Ok(m)
}

/// One valley-filling pass: every valley takes its flanking value.
pub fn fill_pass(scale: &ScaleFunction) -> Result<ScaleFunction> {
    let morph = classify(scale)?;
    let mut v = scale.values().to_vec();
    for &(a, b) in &morph.valleys {
        let flank = v[a - 1];
        v[a..=b].iter_mut().for_each(|x| *x = flank);
    }
    scale.with_values(v)
}

/// `n_m` from an `n_1`-type input: `m - 1` filling passes.
pub fn smooth(scale: &ScaleFunction, m: usize) -> Result<ScaleFunction> {
    if m == 0 {
        return Err(Error::InvalidArgument("smoothing index m must be >= 1".into()));
    }
    let mut out = scale.clone();
    classify(&out)?;
    for _ in 1..m {
        let next = fill_pass(&out)?;
        if next == out {
            break;
        }
        out = next;
    }
    Ok(out)
}

/// `int_I |n'| / n^6 dt` for the linear interpolant, summed segment-wise as
/// `(1/5) |v_end^{-5} - v_start^{-5}|`. Piecewise-constant input gives 0.
pub fn slope_integral(scale: &ScaleFunction) -> f64 {
    if scale.kind() == ScaleKind::PiecewiseConstant {
        return 0.0;
    }
    scale.values().windows(2).map(|w| (w[1].powi(-5) - w[0].powi(-5)).abs() / 5.0).sum()
}

/// `n_m' = 0` or `n_m = n_1` on every segment of the interpolant.
pub fn dichotomy_holds(nm: &ScaleFunction, n1: &ScaleFunction) -> bool {
    if nm.breakpoints() != n1.breakpoints() {
        return false;
    }
    let (a, b) = (nm.values(), n1.values());
    (0..a.len().saturating_sub(1)).all(|i| a[i] == a[i + 1] || (a[i] == b[i] && a[i + 1] == b[i + 1]))
}

/// Exact signed sum of terms `c 2^e`.
#[derive(Debug, Clone, Default)]
pub struct DyadicSum {
    coeffs: BTreeMap<i32, i64>,
}

impl DyadicSum {
    pub fn add_pow2(&mut self, e: i32, c: i64) {
        *self.coeffs.entry(e).or_insert(0) += c;
    }

    pub fn add(&mut self, other: &DyadicSum, sign: i64) {
        for (&e, &c) in &other.coeffs {
            self.add_pow2(e, sign * c);
        }
    }

    /// Multiplies by `2^s`.
    pub fn shifted(&self, s: i32) -> DyadicSum {
        DyadicSum { coeffs: self.coeffs.iter().map(|(&e, &c)| (e + s, c)).collect() }
    }

    /// Sign of the represented number, by binary carry propagation.
    pub fn signum(&self) -> i32 {
        let (Some(&lo), Some(&hi)) = (self.coeffs.keys().next(), self.coeffs.keys().next_back()) else {
            return 0;
        };
        let mut carry: i64 = 0;
        let mut any_bit = false;
        let mut e = lo;
        loop {
            let c = carry + self.coeffs.get(&e).copied().unwrap_or(0);
            any_bit |= c.rem_euclid(2) != 0;
            carry = c.div_euclid(2);
            e += 1;
            if e > hi && (carry == 0 || carry == -1) {
                break;
            }
        }
        if carry == -1 {
            -1
        } else if any_bit {
            1
        } else {
            0
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.coeffs.iter().map(|(&e, &c)| c as f64 * 2f64.powi(e)).sum()
    }
}

/// `5 * slope_integral` restricted to `[start, end]` as an exact dyadic sum.
fn slope_sum(values: &[f64], start: usize, end: usize) -> DyadicSum {
    let mut s = DyadicSum::default();
    for i in start..end {
        let (a, b) = (exact_log2(values[i]).unwrap(), exact_log2(values[i + 1]).unwrap());
        if a != b {
            // |2^{-5b} - 2^{-5a}|
            let (big, small) = if a < b { (a, b) } else { (b, a) };
            s.add_pow2(-5 * big, 1);
            s.add_pow2(-5 * small, -1);
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct PassContraction {
    pub before_interior: f64,
    pub before_boundary: f64,
    pub after: f64,
    /// `after <= 2^{-5} before_interior + before_boundary`, decided exactly.
    pub holds: bool,
}

/// Compares the slope integral after one filling pass against
/// `2^{-5}` times the interior slopes before it plus the boundary slopes.
pub fn pass_contraction(scale: &ScaleFunction) -> Result<PassContraction> {
    let morph = classify(scale)?;
    let v = scale.values();
    let mut interior = DyadicSum::default();
    let mut boundary = DyadicSum::default();
    for s in &morph.slopes {
        let part = slope_sum(v, s.start, s.end);
        if s.boundary {
            boundary.add(&part, 1);
        } else {
            interior.add(&part, 1);
        }
    }
    let next = fill_pass(scale)?;
    let after = slope_sum(next.values(), 0, v.len() - 1);
    let mut slack = interior.shifted(-5);
    slack.add(&boundary, 1);
    slack.add(&after, -1);
    Ok(PassContraction {
        before_interior: interior.to_f64() / 5.0,
        before_boundary: boundary.to_f64() / 5.0,
        after: after.to_f64() / 5.0,
        holds: slack.signum() >= 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(values: &[f64]) -> ScaleFunction {
        let bps = (0..values.len()).map(|i| i as f64).collect();
        ScaleFunction::linear(bps, values.to_vec()).unwrap()
    }

    #[test]
    fn n1_of_constant() {
        let n0 = ScaleFunction::constant(0.0, 1.0, 1.0).unwrap();
        let n1 = build_n1(&n0, 0.25).unwrap();
        assert_eq!(n1.breakpoints(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(n1.values().iter().all(|&v| v == 1.0));
        let n0 = ScaleFunction::constant(0.0, 1.0, 3.0).unwrap();
        let n1 = build_n1(&n0, 0.25).unwrap();
        assert!(n1.values().iter().all(|&v| v == 2.0));
    }

    #[test]
    fn n1_rejects_coarse_delta() {
        let n0 = ScaleFunction::linear(vec![0.0, 1.0], vec![1.0, 8.0]).unwrap();
        assert!(matches!(build_n1(&n0, 1.0), Err(Error::DeltaCheck(_))));
        let d = default_delta(&n0).unwrap();
        assert!(build_n1(&n0, d).is_ok());
        assert!(build_n1(&n0, 2.0 * d).is_err());
    }

    #[test]
    fn classify_examples() {
        let m = classify(&seq(&[4.0, 2.0, 2.0, 4.0])).unwrap();
        assert_eq!(m.valleys, vec![(1, 2)]);
        assert!(m.peaks.is_empty());
        let m = classify(&seq(&[1.0, 2.0, 4.0, 8.0])).unwrap();
        assert!(m.valleys.is_empty() && m.peaks.is_empty());
        assert_eq!(m.slopes, vec![Slope { start: 0, end: 3, boundary: true }]);
        let m = classify(&seq(&[2.0, 4.0, 2.0])).unwrap();
        assert_eq!(m.peaks, vec![(1, 1)]);
        assert!(classify(&seq(&[1.0, 4.0])).is_err());
        assert!(classify(&seq(&[1.0, 3.0])).is_err());
    }

    #[test]
    fn smoothing_examples() {
        let out = smooth(&seq(&[4.0, 2.0, 2.0, 4.0]), 2).unwrap();
        assert_eq!(out.values(), &[4.0, 4.0, 4.0, 4.0]);
        let mono = seq(&[1.0, 2.0, 4.0, 8.0]);
        assert_eq!(smooth(&mono, 5).unwrap(), mono);
        assert_eq!(smooth(&mono, 1).unwrap(), mono);
    }

    #[test]
    fn slope_identity() {
        let s = seq(&[2.0, 1.0]);
        assert_eq!(slope_integral(&s), 31.0 / 160.0);
        assert_eq!(slope_integral(&seq(&[2.0, 2.0, 2.0])), 0.0);
    }

    #[test]
    fn dyadic_sum_sign() {
        let mut s = DyadicSum::default();
        assert_eq!(s.signum(), 0);
        s.add_pow2(-300, 1);
        assert_eq!(s.signum(), 1);
        s.add_pow2(0, -1);
        assert_eq!(s.signum(), -1);
        s.add_pow2(-1, 1);
        s.add_pow2(-1, 1);
        assert_eq!(s.signum(), 1);
        s.add_pow2(-300, -1);
        assert_eq!(s.signum(), 0);
        let mut t = DyadicSum::default();
        t.add_pow2(3, 3);
        t.add_pow2(4, -1);
        t.add_pow2(3, -1);
        assert_eq!(t.signum(), 0);
    }

    #[test]
    fn contraction_on_simple_valley() {
        let c = pass_contraction(&seq(&[8.0, 4.0, 2.0, 4.0, 8.0, 4.0])).unwrap();
        assert!(c.holds);
        assert!(c.after < c.before_interior + c.before_boundary);
    }
}
