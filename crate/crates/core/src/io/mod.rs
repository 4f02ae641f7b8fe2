//! Snapshots, run configuration, manifests, CSV tables and SVG plots.

mod config;
mod plot;
mod snapshot;

pub use config::{KvDoc, RunConfig};
pub use plot::LinePlot;
pub use snapshot::{decode_snapshot, encode_snapshot, read_snapshot, write_snapshot, HEADER_LEN, MAGIC, VERSION};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::GridSpec;

/// Environment variable naming the directory relative run paths resolve against.
pub const RUN_ROOT_ENV: &str = "NLS4_RUN_ROOT";

pub fn resolve_run_dir(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(RUN_ROOT_ENV) {
        Some(root) => Path::new(&root).join(path),
        None => path.to_path_buf(),
    }
}

pub fn snapshot_name(i: usize) -> String {
    format!("snap_{i:05}.nls4")
}

/// Snapshots of a run directory in index order.
pub fn read_run_snapshots(dir: &Path) -> Result<Vec<ComplexField>> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "nls4"))
        .collect();
    names.sort();
    names.iter().map(|p| read_snapshot(p)).collect()
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\n', "\\n").replace('#', "\\h")
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('h') => out.push('#'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub config: String,
    pub version: String,
    pub seed: u64,
    pub grid: Option<GridSpec>,
    pub status: String,
    pub guards: Vec<String>,
    pub baselines: Vec<(String, f64)>,
    /// Wall-clock seconds per phase.
    pub phases: Vec<(String, f64)>,
}

impl RunManifest {
    pub fn new(config: &str, seed: u64, grid: Option<GridSpec>) -> Self {
        Self {
            config: config.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            grid,
            status: "running".into(),
            ..Default::default()
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("[run]\n");
        let _ = writeln!(s, "version = {}", escape(&self.version));
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "status = {}", escape(&self.status));
        if let Some(g) = &self.grid {
            let _ = writeln!(s, "grid = {}, {}, {:?}", g.dim(), g.n(), g.half_len());
        }
        let _ = writeln!(s, "config = {}", escape(&self.config));
        s.push_str("\n[guards]\n");
        for (i, g) in self.guards.iter().enumerate() {
            let _ = writeln!(s, "{i} = {}", escape(g));
        }
        s.push_str("\n[baselines]\n");
        for (k, v) in &self.baselines {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        s.push_str("\n[phases]\n");
        for (k, v) in &self.phases {
            let _ = writeln!(s, "{k} = {v:?}");
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc = KvDoc::parse(text)?;
        let get = |k: &str| doc.get("run", k).map(|v| unescape(&v.0)).unwrap_or_default();
        let grid = match doc.get("run", "grid") {
            None => None,
            Some((v, line)) => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                let bad = || Error::Config { line: *line, reason: format!("grid '{v}'") };
                if parts.len() != 3 {
                    return Err(bad());
                }
                Some(GridSpec::new(
                    parts[0].parse().map_err(|_| bad())?,
                    parts[1].parse().map_err(|_| bad())?,
                    parts[2].parse().map_err(|_| bad())?,
                )?)
            }
        };
        let ordered = |section: &str| -> Vec<(String, (String, usize))> {
            let mut v: Vec<_> = doc.sections.get(section).map(|m| m.clone().into_iter().collect()).unwrap_or_default();
            v.sort_by_key(|(_, (_, line))| *line);
            v
        };
        let numbers = |section: &str| -> Result<Vec<(String, f64)>> {
            ordered(section)
                .into_iter()
                .map(|(k, (v, line))| {
                    v.parse()
                        .map(|x| (k.clone(), x))
                        .map_err(|_| Error::Config { line, reason: format!("{section}.{k} = '{v}'") })
                })
                .collect()
        };
        Ok(Self {
            config: get("config"),
            version: get("version"),
            seed: doc.parse_or("run", "seed", 0)?,
            grid,
            status: get("status"),
            guards: ordered("guards").into_iter().map(|(_, (v, _))| unescape(&v)).collect(),
            baselines: numbers("baselines")?,
            phases: numbers("phases")?,
        })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join("manifest.txt"), self.to_text())?;
        Ok(())
    }
}

/// CSV text with a header row; column names carry their units in brackets.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    fs::write(path, csv_string(header, rows))?;
    Ok(())
}

/// Header and numeric rows; empty cells read as NaN.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Config { line: 1, reason: "empty CSV".into() })?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let row = l
            .split(',')
            .map(|c| {
                let c = c.trim();
                if c.is_empty() {
                    Ok(f64::NAN)
                } else {
                    c.parse::<f64>().map_err(|e| Error::Config { line: i + 2, reason: format!("'{c}': {e}") })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let mut m = RunManifest::new("[grid]\nd = 2 # comment\nn = 8", 42, Some(GridSpec::new(2, 8, 1.5).unwrap()));
        m.status = "failed: guard".into();
        m.guards.push("boundary mass 2e-7 # over".into());
        m.baselines.push(("im4_ratio".into(), 0.125));
        m.phases.push(("evolve".into(), 1.5));
        m.phases.push(("diagnose".into(), 0.25));
        let back = RunManifest::parse(&m.to_text()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn csv_round_trip() {
        let text = csv_string(&["t[time]", "M[action]"], &[vec![0.0, 1.5], vec![0.5, -2.0]]);
        let (h, rows) = parse_csv(&text).unwrap();
        assert_eq!(h, vec!["t[time]", "M[action]"]);
        assert_eq!(rows[1], vec![0.5, -2.0]);
    }
}
