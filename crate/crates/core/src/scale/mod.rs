//! Positive functions of time: frequency scales extracted from solutions and
//! the `n_0 -> n_1 -> n_m` construction with valley filling.

mod extract;
mod smoothing;

pub use extract::{extract_scales, high_pass, local_constancy_check, n0_from_traj, ConstancyReport, Scales};
pub use smoothing::{
    build_n1, classify, default_delta, dichotomy_holds, fill_pass, pass_contraction, slope_integral, smooth,
    DyadicSum, Morphology, PassContraction, Slope,
};

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleKind {
    PiecewiseConstant,
    PiecewiseLinear,
}

impl ScaleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScaleKind::PiecewiseConstant => "piecewise-constant",
            ScaleKind::PiecewiseLinear => "piecewise-linear",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "piecewise-constant" => Ok(ScaleKind::PiecewiseConstant),
            "piecewise-linear" => Ok(ScaleKind::PiecewiseLinear),
            other => Err(Error::MalformedScale(format!("unknown kind '{other}'"))),
        }
    }
}

/// Positive function on `I = [t_0, end]` given by breakpoints `t_0 < ... < t_M`.
///
/// Piecewise-constant functions take `v_l` on `[t_l, t_{l+1})`; piecewise-linear
/// ones interpolate. Both are constant between `t_M` and `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFunction {
    kind: ScaleKind,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    end: f64,
}

impl ScaleFunction {
    pub fn new(kind: ScaleKind, breakpoints: Vec<f64>, values: Vec<f64>, end: f64) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::MalformedScale(format!(
                "{} breakpoints for {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) || !end.is_finite() {
            return Err(Error::MalformedScale("non-finite breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::MalformedScale("breakpoints must be strictly increasing".into()));
        }
        if end < *breakpoints.last().unwrap() {
            return Err(Error::MalformedScale("domain ends before the last breakpoint".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::MalformedScale(format!("value {v} is not positive")));
        }
        Ok(Self { kind, breakpoints, values, end })
    }

    pub fn linear(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let end = *breakpoints.last().ok_or_else(|| Error::MalformedScale("no breakpoints".into()))?;
        Self::new(ScaleKind::PiecewiseLinear, breakpoints, values, end)
    }

    pub fn constant(start: f64, end: f64, value: f64) -> Result<Self> {
        Self::new(ScaleKind::PiecewiseConstant, vec![start], vec![value], end)
    }

    #[inline]
    pub fn kind(&self) -> ScaleKind {
        self.kind
    }

    #[inline]
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.kind, self.breakpoints.clone(), values, self.end)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let tol = 1e-12 * (self.end - self.start()).abs().max(1.0);
        if !(t >= self.start() - tol && t <= self.end + tol) {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside [{}, {}]",
                self.start(),
                self.end
            )));
        }
        Ok(self.eval_clamped(t))
    }

    /// Time derivative; the mean of the one-sided slopes at an interior breakpoint.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.eval(t)?;
        if self.kind == ScaleKind::PiecewiseConstant {
            return Ok(0.0);
        }
        let bp = &self.breakpoints;
        let last = bp.len() - 1;
        let slope = |i: usize| {
            if i < last {
                (self.values[i + 1] - self.values[i]) / (bp[i + 1] - bp[i])
            } else {
                0.0
            }
        };
        if t <= bp[0] {
            return Ok(slope(0));
        }
        if t > bp[last] {
            return Ok(0.0);
        }
        let i = bp.partition_point(|&b| b < t);
        if bp[i] == t {
            if i == last && t == self.end {
                return Ok(slope(i - 1));
            }
            return Ok(0.5 * (slope(i - 1) + slope(i)));
        }
        Ok(slope(i - 1))
    }

    fn eval_clamped(&self, t: f64) -> f64 {
        let bp = &self.breakpoints;
        let last = bp.len() - 1;
        if t >= bp[last] {
            return self.values[last];
        }
        if t <= bp[0] {
            return self.values[0];
        }
        let i = bp.partition_point(|&b| b <= t) - 1;
        match self.kind {
            ScaleKind::PiecewiseConstant => self.values[i],
            ScaleKind::PiecewiseLinear => {
                let s = (t - bp[i]) / (bp[i + 1] - bp[i]);
                self.values[i] + s * (self.values[i + 1] - self.values[i])
            }
        }
    }

    /// Infimum and supremum over `[a, b] ∩ I`, exact for both kinds.
    pub fn extrema_on(&self, a: f64, b: f64) -> (f64, f64) {
        let a = a.max(self.start());
        let b = b.min(self.end);
        let mut lo = self.eval_clamped(a);
        let mut hi = lo;
        let mut visit = |v: f64| {
            lo = lo.min(v);
            hi = hi.max(v);
        };
        visit(self.eval_clamped(b));
        for (i, &t) in self.breakpoints.iter().enumerate() {
            if t > a && t <= b {
                visit(self.values[i]);
            }
            // left limit of a constant piece ending inside (a, b]
            if self.kind == ScaleKind::PiecewiseConstant && t > a && t <= b && i > 0 {
                visit(self.values[i - 1]);
            }
        }
        (lo, hi)
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("t,value # {} end={}\n", self.kind.name(), self.end);
        for (t, v) in self.breakpoints.iter().zip(&self.values) {
            let _ = writeln!(s, "{t},{v}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::MalformedScale("empty scale file".into()))?;
        let meta = header
            .split_once('#')
            .map(|(_, m)| m.trim())
            .ok_or_else(|| Error::MalformedScale("header lacks '# <kind> end=<t>'".into()))?;
        let mut parts = meta.split_whitespace();
        let kind = ScaleKind::parse(parts.next().unwrap_or(""))?;
        let mut end = None;
        for p in parts {
            if let Some(v) = p.strip_prefix("end=") {
                end = Some(v.parse::<f64>().map_err(|e| Error::MalformedScale(format!("end: {e}")))?);
            }
        }
        let mut bps = Vec::new();
        let mut vals = Vec::new();
        for (i, line) in lines.enumerate() {
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| Error::MalformedScale(format!("row {}: expected 't,value'", i + 1)))?;
            let parse = |x: &str| {
                x.trim().parse::<f64>().map_err(|e| Error::MalformedScale(format!("row {}: {e}", i + 1)))
            };
            bps.push(parse(t)?);
            vals.push(parse(v)?);
        }
        let end = match end {
            Some(e) => e,
            None => *bps.last().ok_or_else(|| Error::MalformedScale("no rows".into()))?,
        };
        Self::new(kind, bps, vals, end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_and_extrema() {
        let f = ScaleFunction::linear(vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(f.eval(0.5).unwrap(), 2.0);
        assert_eq!(f.eval(2.0).unwrap(), 2.0);
        assert!(f.eval(2.5).is_err());
        assert_eq!(f.extrema_on(0.5, 1.5), (2.0, 3.0));
        let c = ScaleFunction::new(ScaleKind::PiecewiseConstant, vec![0.0, 1.0], vec![1.0, 2.0], 2.0).unwrap();
        assert_eq!(c.eval(0.999).unwrap(), 1.0);
        assert_eq!(c.eval(1.5).unwrap(), 2.0);
        assert_eq!(c.extrema_on(0.5, 1.5), (1.0, 2.0));
    }

    #[test]
    fn rejects_malformed() {
        assert!(ScaleFunction::linear(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(ScaleFunction::linear(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(ScaleFunction::linear(vec![], vec![]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let f = ScaleFunction::new(ScaleKind::PiecewiseLinear, vec![0.0, 0.25, 0.5], vec![1.0, 2.0, 4.0], 1.0)
            .unwrap();
        let back = ScaleFunction::from_csv(&f.to_csv()).unwrap();
        assert_eq!(back, f);
    }
}
