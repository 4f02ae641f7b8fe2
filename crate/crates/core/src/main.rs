#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use nls4::evolve::{evolve, Trajectory};
use nls4::io::{
    csv_string, read_run_snapshots, resolve_run_dir, snapshot_name, write_csv, write_snapshot, LinePlot, RunConfig,
    RunManifest,
};
use nls4::mass::ball_mass_max;
use nls4::morawetz::{identity_residual, im4_report, localized_interaction};
use nls4::norms::{scattering_size, trapezoid_weights};
use nls4::scale::{build_n1, default_delta, extract_scales, smooth, ScaleFunction};
use nls4::verify::{acceptance, baselines};
use nls4::weight::{
    certify_derivative_bounds, choose_parameters, positivity_certificate, weight_at, WeightProfile, DERIVATIVE_BOUNDS,
};
use nls4::{Error, Result};

#[derive(Parser)]
#[command(name = "nls4", version, about = "Quintic NLS simulator and harmonic-analysis diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a config and write snapshots plus a manifest.
    Simulate {
        config: PathBuf,
        /// Run directory (default: the config's run name).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-sample norms, ball masses and scales to diagnostics.csv.
    Diagnose {
        rundir: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Morawetz identity residual, IM4 ratio and localized interaction.
    Morawetz {
        rundir: PathBuf,
        #[arg(long = "R", default_value_t = 0.3)]
        r: f64,
        #[arg(long = "J", default_value_t = 2)]
        j: u32,
        /// Choose R and J from K = int N(t)^{-3} dt and this exponent.
        #[arg(long = "from-K")]
        from_k: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
    },
    /// Smooth a scale function CSV into n_m.
    Smooth {
        scale: PathBuf,
        #[arg(short = 'm', default_value_t = 1)]
        m: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the weight profile and its certificates.
    Weights {
        #[arg(long = "R")]
        r: f64,
        #[arg(long = "J")]
        j: u32,
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Check {
        /// Only these criteria (1-based).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
}

fn is_guard(e: &Error) -> bool {
    matches!(
        e,
        Error::Guard(_) | Error::SupportViolation { .. } | Error::WrapAround { .. } | Error::NotLocalized(_)
    )
}

/// Loads a run directory: its manifest, config and trajectory.
fn load_run(dir: &Path) -> Result<(RunManifest, RunConfig, Trajectory)> {
    let manifest = RunManifest::parse(&fs::read_to_string(dir.join("manifest.txt"))?)?;
    let config = RunConfig::parse(&manifest.config)?;
    let traj = Trajectory::from_samples(read_run_snapshots(dir)?, config.evolve.mu, config.evolve.p)?;
    Ok((manifest, config, traj))
}

fn simulate(config_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let text = fs::read_to_string(config_path)?;
    let config = RunConfig::parse(&text)?;
    let dir = resolve_run_dir(&out.unwrap_or_else(|| PathBuf::from(&config.name)));
    fs::create_dir_all(&dir)?;
    let mut manifest = RunManifest::new(&text, config.seed, Some(config.evolve.grid));
    manifest.write(&dir)?;
    let start = Instant::now();
    let traj = match evolve(&config.evolve) {
        Ok(t) => t,
        Err(e) => {
            manifest.status = format!("failed: {e}");
            manifest.write(&dir)?;
            return Err(e);
        }
    };
    manifest.phases.push(("evolve".into(), start.elapsed().as_secs_f64()));
    let start = Instant::now();
    for (i, s) in traj.samples().iter().enumerate() {
        write_snapshot(s, &dir.join(snapshot_name(i)))?;
    }
    manifest.phases.push(("write".into(), start.elapsed().as_secs_f64()));
    manifest.guards = traj.warnings.iter().filter(|w| w.contains("boundary mass")).cloned().collect();
    let breached = !manifest.guards.is_empty();
    manifest.status = if breached { "guard breached".into() } else { "ok".into() };
    manifest.write(&dir)?;
    println!("{} samples written to {}", traj.len(), dir.display());
    if breached {
        return Err(Error::Guard(manifest.guards.join("; ")));
    }
    Ok(())
}

/// Appends a note to the manifest of `dir` and passes the error through.
fn note_failure(dir: &Path, phase: &str, e: Error) -> Error {
    if let Ok(text) = fs::read_to_string(dir.join("manifest.txt")) {
        if let Ok(mut m) = RunManifest::parse(&text) {
            m.guards.push(format!("{phase}: {e}"));
            if is_guard(&e) {
                m.status = "guard breached".into();
            }
            let _ = m.write(dir);
        }
    }
    e
}

fn diagnose(dir: &Path, eta: f64, lambda: f64) -> Result<()> {
    let (mut manifest, _, traj) = load_run(dir)?;
    let start = Instant::now();
    let mut rows = Vec::with_capacity(traj.len());
    for (i, s) in traj.samples().iter().enumerate() {
        let (n, c_big, c_small) = match extract_scales(s, eta) {
            Ok(sc) => (sc.n, sc.c_big, sc.c_small),
            Err(Error::ZeroField) => (0.0, 0.0, 0.0),
            Err(e) => return Err(e),
        };
        rows.push(vec![s.t(), traj.mass[i], traj.energy[i], s.max_abs(), ball_mass_max(s, lambda)?, n, c_big, c_small]);
    }
    let header = ["t[time]", "mass[L2^2]", "energy", "sup[abs]", "ball_mass[L2^2]", "N[freq]", "C[scale]", "c[scale]"];
    write_csv(&dir.join("diagnostics.csv"), &header, &rows)?;
    let s_total = scattering_size(&traj)?;
    let plot = LinePlot::new("mass and energy", "t", "value")
        .with_series("mass", rows.iter().map(|r| (r[0], r[1])).collect())
        .with_series("energy", rows.iter().map(|r| (r[0], r[2])).collect());
    fs::write(dir.join("diagnostics.svg"), plot.render())?;
    manifest.phases.push(("diagnose".into(), start.elapsed().as_secs_f64()));
    manifest.write(dir)?;
    println!("scattering size {s_total:e}; {} rows in diagnostics.csv", rows.len());
    Ok(())
}

fn morawetz(dir: &Path, r: f64, j: u32, from_k: Option<f64>, eta: f64) -> Result<()> {
    let (mut manifest, config, traj) = load_run(dir)?;
    let start = Instant::now();
    let times = traj.times();
    let (r, j) = match from_k {
        None => (r, j),
        Some(alpha) => {
            let scales: Vec<f64> = traj.samples().iter().map(|s| extract_scales(s, eta).map(|x| x.n)).collect::<Result<_>>()?;
            let w = trapezoid_weights(scales.len(), traj.dt_sample());
            let k: f64 = scales.iter().zip(&w).map(|(n, w)| w * n.powi(-3)).sum();
            let p = choose_parameters(k, alpha)?;
            println!("K = {k:e}: R = {}, J = {}, m = {}", p.r, p.j, p.m);
            (p.r, p.j)
        }
    };
    let profile = WeightProfile::new(r, j)?;
    let unit = ScaleFunction::constant(times[0], times[times.len() - 1], 1.0)?;
    let report = identity_residual(&traj, &profile, &unit, config.evolve.mu, config.evolve.p)?;
    fs::write(dir.join("morawetz.csv"), report.to_csv())?;
    let plot = LinePlot::new("interaction Morawetz action", "t", "M(t)")
        .with_series("M", times.iter().copied().zip(report.action.iter().copied()).collect());
    fs::write(dir.join("morawetz.svg"), plot.render())?;
    let residual_plot = LinePlot::new("identity residual", "t", "relative residual").log_axes(false, true).with_series(
        "residual",
        times.iter().zip(&report.residual).filter_map(|(t, r)| r.map(|v| (*t, v))).collect(),
    );
    fs::write(dir.join("morawetz_residual.svg"), residual_plot.render())?;

    let mut summary = vec![
        ("max_residual", report.max_residual),
        ("halving_ratio", report.halving_ratio.unwrap_or(f64::NAN)),
    ];
    if config.evolve.mu >= 0.0 {
        let im4 = im4_report(&traj)?;
        summary.push(("im4_lhs", im4.lhs));
        summary.push(("im4_rhs", im4.rhs));
        summary.push(("im4_ratio", im4.ratio().unwrap_or(f64::NAN)));
    }
    let radius = ScaleFunction::constant(times[0], times[times.len() - 1], profile.outer_radius())?;
    summary.push(("localized_interaction", localized_interaction(&traj, &radius, f64::INFINITY)?));
    let header: Vec<&str> = summary.iter().map(|s| s.0).collect();
    fs::write(dir.join("morawetz_summary.csv"), csv_string(&header, &[summary.iter().map(|s| s.1).collect()]))?;
    manifest.phases.push(("morawetz".into(), start.elapsed().as_secs_f64()));
    manifest.baselines.push(("im4".into(), baselines::IM4));
    manifest.write(dir)?;
    println!("max residual {:e}, halving ratio {:?}", report.max_residual, report.halving_ratio);
    Ok(())
}

fn smooth_cmd(path: &Path, m: usize, out: Option<PathBuf>) -> Result<()> {
    let input = ScaleFunction::from_csv(&fs::read_to_string(path)?)?;
    let n1 = match smooth(&input, 1) {
        Ok(_) => input,
        Err(Error::MalformedScale(_)) => build_n1(&input, default_delta(&input)?)?,
        Err(e) => return Err(e),
    };
    let text = smooth(&n1, m)?.to_csv();
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn weights_cmd(r: f64, j: u32, samples: usize, out: Option<PathBuf>) -> Result<()> {
    let profile = WeightProfile::new(r, j)?;
    let (lo, hi) = ((0.1 * r).ln(), (2.0 * profile.outer_radius()).ln());
    let mut radii: Vec<f64> = (0..samples).map(|i| (lo + (hi - lo) * i as f64 / (samples - 1).max(1) as f64).exp()).collect();
    radii.extend((0..=j).map(|s| r * (s as f64).exp()));
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let rows: Vec<Vec<f64>> = radii
        .iter()
        .map(|&rho| {
            let w = weight_at(&profile, 1.0, 0.0, rho)?;
            Ok(vec![rho, profile.w(rho), profile.w_r(rho), w.a_rr, w.lap, w.bilap])
        })
        .collect::<Result<_>>()?;
    let text = csv_string(&["r", "w", "w_r", "a_rr", "lap_a", "bilap_a"], &rows);
    match out {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    for k in 1..=3 {
        let c = certify_derivative_bounds(&profile, k)?;
        eprintln!("J r^{k} |d^{k} w_r| <= {c:.4} (constant {})", DERIVATIVE_BOUNDS[k - 1]);
    }
    let cert = positivity_certificate(&profile, 1.0)?;
    eprintln!("cone certificate: {} samples, {} violations", cert.samples, cert.violations.len());
    if !cert.passed() {
        return Err(Error::Guard(format!("{} positivity violations", cert.violations.len())));
    }
    Ok(())
}

fn check(only: &[usize]) -> bool {
    let ids: Vec<usize> = if only.is_empty() { (1..=acceptance::CRITERIA).collect() } else { only.to_vec() };
    let mut ok = true;
    for id in ids {
        if !(1..=acceptance::CRITERIA).contains(&id) {
            eprintln!("no criterion {id}");
            return false;
        }
        let r = acceptance::run(id);
        println!("{r}");
        ok &= r.passed;
    }
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Diagnose { rundir, eta, lambda } => {
            let dir = resolve_run_dir(&rundir);
            diagnose(&dir, eta, lambda).map_err(|e| note_failure(&dir, "diagnose", e))
        }
        Command::Morawetz { rundir, r, j, from_k, eta } => {
            let dir = resolve_run_dir(&rundir);
            morawetz(&dir, r, j, from_k, eta).map_err(|e| note_failure(&dir, "morawetz", e))
        }
        Command::Smooth { scale, m, out } => smooth_cmd(&scale, m, out),
        Command::Weights { r, j, samples, out } => weights_cmd(r, j, samples, out),
        Command::Check { only } => {
            return if check(&only) { ExitCode::SUCCESS } else { ExitCode::FAILURE };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_guard(&e) { 3 } else { 1 })
        }
    }
}
