//! Flat `key = value` text with `[section]` headers.
//!
//! ```text
//! # comment
//! [grid]
//! d = 4
//! n = 16
//! L = 6.0
//!
//! [evolve]
//! mu = 1          # +1 defocusing, -1 focusing, 0 linear
//! p = 4
//! dt = 5e-4
//! t_end = 0.1
//! sample_every = 10
//! dealias = false
//!
//! [initial]
//! kind = gaussian  # zero | gaussian | plane_wave | dyadic_band | two_bump
//! amplitude = 1.0
//! center = 0, 0, 0, 0
//! width = 1.5
//! velocity = 0, 0, 0, 0
//!
//! [run]
//! seed = 7
//! ```
//!
//! Keys before the first header belong to the section `""`. Vectors are
//! comma-separated. Unknown sections and keys are rejected.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evolve::{EvolveConfig, InitialData};
use crate::grid::{GridSpec, MAX_DIM};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvDoc {
    /// section -> key -> (value, line)
    pub sections: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl KvDoc {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = KvDoc::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config { line: line_no, reason: "unterminated section header".into() })?;
                section = name.trim().to_string();
                doc.sections.entry(section.clone()).or_default();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config { line: line_no, reason: format!("expected 'key = value', got '{line}'") })?;
            let key = k.trim();
            if key.is_empty() {
                return Err(Error::Config { line: line_no, reason: "empty key".into() });
            }
            let entry = doc.sections.entry(section.clone()).or_default();
            if entry.insert(key.to_string(), (v.trim().to_string(), line_no)).is_some() {
                return Err(Error::Config { line: line_no, reason: format!("duplicate key '{key}'") });
            }
        }
        Ok(doc)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&(String, usize)> {
        self.sections.get(section).and_then(|s| s.get(key))
    }

    pub fn str_or(&self, section: &str, key: &str, default: &str) -> String {
        self.get(section, key).map(|v| v.0.clone()).unwrap_or_else(|| default.to_string())
    }

    pub fn parse_or<T: std::str::FromStr>(&self, section: &str, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(section, key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse()
                .map_err(|e| Error::Config { line: *line, reason: format!("{section}.{key} = '{v}': {e}") }),
        }
    }

    pub fn require<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self
            .get(section, key)
            .ok_or_else(|| Error::Config { line: 0, reason: format!("missing {section}.{key}") })?;
        v.parse().map_err(|e| Error::Config { line: *line, reason: format!("{section}.{key} = '{v}': {e}") })
    }

    pub fn vector_or<const N: usize, T>(&self, section: &str, key: &str, default: [T; N]) -> Result<[T; N]>
    where
        T: std::str::FromStr + Copy,
        T::Err: std::fmt::Display,
    {
        let Some((v, line)) = self.get(section, key) else { return Ok(default) };
        let mut out = default;
        let parts: Vec<&str> = v.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if parts.len() > N {
            return Err(Error::Config { line: *line, reason: format!("{section}.{key}: at most {N} components") });
        }
        for (slot, p) in out.iter_mut().zip(parts) {
            *slot = p
                .parse()
                .map_err(|e| Error::Config { line: *line, reason: format!("{section}.{key} component '{p}': {e}") })?;
        }
        Ok(out)
    }

    /// Rejects sections or keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[(&str, &[&str])]) -> Result<()> {
        for (section, keys) in &self.sections {
            let Some((_, ok)) = allowed.iter().find(|(s, _)| s == section) else {
                let line = keys.values().map(|v| v.1).min().unwrap_or(0);
                return Err(Error::Config { line, reason: format!("unknown section [{section}]") });
            };
            for (k, (_, line)) in keys {
                if !ok.contains(&k.as_str()) {
                    return Err(Error::Config { line: *line, reason: format!("unknown key '{k}' in [{section}]") });
                }
            }
        }
        Ok(())
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["d", "n", "L"]),
    ("evolve", &["mu", "p", "dt", "t_end", "sample_every", "dealias"]),
    (
        "initial",
        &["kind", "amplitude", "center", "width", "velocity", "mode", "mass", "n", "seed", "separation"],
    ),
    ("run", &["seed", "name"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub evolve: EvolveConfig,
    pub seed: u64,
    pub name: String,
    pub text: String,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let doc = KvDoc::parse(text)?;
        doc.check_keys(KEYS)?;
        let grid = GridSpec::new(doc.require("grid", "d")?, doc.require("grid", "n")?, doc.require("grid", "L")?)?;
        let seed: u64 = doc.parse_or("run", "seed", 0)?;
        let kind = doc.str_or("initial", "kind", "zero");
        let amplitude = doc.parse_or("initial", "amplitude", 1.0)?;
        let initial = match kind.as_str() {
            "zero" => InitialData::Zero,
            "gaussian" => InitialData::Gaussian {
                amplitude,
                center: doc.vector_or("initial", "center", [0.0; MAX_DIM])?,
                width: doc.parse_or("initial", "width", 1.0)?,
                velocity: doc.vector_or("initial", "velocity", [0.0; MAX_DIM])?,
            },
            "plane_wave" => InitialData::PlaneWave { amplitude, mode: doc.vector_or("initial", "mode", [0i64; MAX_DIM])? },
            "dyadic_band" => InitialData::DyadicBand {
                mass: doc.parse_or("initial", "mass", 1.0)?,
                n: doc.parse_or("initial", "n", 1.0)?,
                seed: doc.parse_or("initial", "seed", seed)?,
            },
            "two_bump" => InitialData::TwoBump {
                amplitude,
                separation: doc.parse_or("initial", "separation", 4.0)?,
                width: doc.parse_or("initial", "width", 1.0)?,
                velocity: doc.vector_or::<1, f64>("initial", "velocity", [0.0])?[0],
            },
            other => {
                let line = doc.get("initial", "kind").map(|v| v.1).unwrap_or(0);
                return Err(Error::Config { line, reason: format!("unknown initial kind '{other}'") });
            }
        };
        let mut evolve = EvolveConfig::new(grid, initial);
        evolve.mu = doc.parse_or("evolve", "mu", evolve.mu)?;
        evolve.p = doc.parse_or("evolve", "p", evolve.p)?;
        evolve.dt = doc.parse_or("evolve", "dt", evolve.dt)?;
        evolve.t_end = doc.parse_or("evolve", "t_end", evolve.t_end)?;
        evolve.sample_every = doc.parse_or("evolve", "sample_every", evolve.sample_every)?;
        evolve.dealias = doc.parse_or("evolve", "dealias", evolve.dealias)?;
        evolve.validate()?;
        Ok(Self { evolve, seed, name: doc.str_or("run", "name", "run"), text: text.to_string() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "[grid]\nd = 2\nn = 16\nL = 4.0\n\n[evolve]\nmu = -1 # focusing\ndt = 1e-3\nt_end = 0.01\n\n[initial]\nkind = gaussian\ncenter = 0.5, -0.5\n";

    #[test]
    fn parses_sample() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.evolve.mu, -1.0);
        assert_eq!(c.evolve.grid.n(), 16);
        match c.evolve.initial {
            InitialData::Gaussian { center, .. } => assert_eq!(center, [0.5, -0.5, 0.0, 0.0]),
            _ => panic!("wrong initial data"),
        }
    }

    #[test]
    fn reports_lines() {
        let bad = SAMPLE.replace("dt = 1e-3", "dt = fast");
        match RunConfig::parse(&bad) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 8),
            other => panic!("{other:?}"),
        }
        assert!(matches!(RunConfig::parse("[grid]\nd = 2\nn = 16\nL = 4\nfoo = 1\n"), Err(Error::Config { line: 5, .. })));
        assert!(RunConfig::parse("[grid\n").is_err());
    }
}
