use nls4::evolve::{evolve, EvolveConfig, InitialData, Trajectory};
use nls4::fft;
use nls4::mass::ball_mass_sup;
use nls4::morawetz::{action, im4_report, rhs_terms};
use nls4::scale::ScaleFunction;
use nls4::verify::oracle;
use nls4::weight::WeightProfile;
use nls4::GridSpec;

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn run(grid: GridSpec) -> Trajectory {
    let init = InitialData::Gaussian { amplitude: 1.0, center: [0.4, -0.3, 0.2, 0.0], width: 1.2, velocity: [0.7, 0.2, -0.5, 0.1] };
    let mut c = EvolveConfig::new(grid, init);
    c.dt = 1e-2;
    c.t_end = 0.04;
    c.sample_every = 2;
    evolve(&c).unwrap()
}

#[test]
fn fft_matches_direct_dft() {
    for (d, n) in [(1, 16), (2, 8), (3, 4)] {
        let grid = GridSpec::new(d, n, 2.0).unwrap();
        let f = run(grid).samples()[1].clone();
        let mut fast = f.values().to_vec();
        fft::forward(&mut fast, &grid);
        let slow = oracle::dft_direct(f.values(), &grid).unwrap();
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-10 * (1.0 + b.norm()));
        }
    }
}

#[test]
fn morawetz_terms_match_pair_sums() {
    for (d, n) in [(2, 16), (3, 8)] {
        let grid = GridSpec::new(d, n, 4.0).unwrap();
        let profile = WeightProfile::new(0.2, 2).unwrap();
        let traj = run(grid);
        let f = &traj.samples()[2];
        let a = action(f, &profile, 1.0).unwrap();
        let b = oracle::action_direct(f, &profile, 1.0).unwrap();
        assert!(rel(a, b) <= 1e-8, "action {a} vs {b}");
        let fast = rhs_terms(f, &profile, 1.0, 0.3, 1.0, 4).unwrap();
        let slow = oracle::rhs_terms_direct(f, &profile, 1.0, 0.3, 1.0, 4).unwrap();
        for (x, y) in [(fast.dta, slow.dta), (fast.scary, slow.scary), (fast.potential, slow.potential), (fast.massmass, slow.massmass)] {
            assert!(rel(x, y) <= 1e-8, "{x} vs {y}");
        }
    }
}

#[test]
fn ball_mass_and_im4_match_pair_sums() {
    let grid = GridSpec::new(2, 16, 4.0).unwrap();
    let traj = run(grid);
    let lambda = ScaleFunction::linear(vec![0.0, 0.04], vec![0.6, 1.4]).unwrap();
    let (series, total) = ball_mass_sup(&traj, &lambda).unwrap();
    let (s2, t2) = oracle::ball_mass_sup_direct(&traj, &lambda).unwrap();
    assert!(rel(total, t2) <= 1e-8);
    for (a, b) in series.iter().zip(&s2) {
        assert!(rel(*a, *b) <= 1e-8);
    }
    let lhs = im4_report(&traj).unwrap().lhs;
    assert!(rel(lhs, oracle::im4_lhs_direct(&traj).unwrap()) <= 1e-8);
}

#[test]
fn oracles_refuse_large_grids() {
    let grid = GridSpec::new(2, 128, 4.0).unwrap();
    let f = nls4::ComplexField::zeros(grid, 0.0);
    assert!(oracle::action_direct(&f, &WeightProfile::new(0.2, 2).unwrap(), 1.0).is_err());
}

#[test]
fn brute_force_filler_examples() {
    assert_eq!(oracle::fill_valleys_recursive(&[4.0, 2.0, 2.0, 4.0], 1), vec![4.0; 4]);
    assert_eq!(oracle::fill_valleys_recursive(&[2.0, 1.0, 2.0, 4.0, 2.0], 3), vec![2.0, 2.0, 2.0, 4.0, 2.0]);
    assert_eq!(oracle::fill_valleys_recursive(&[1.0, 2.0, 4.0], 5), vec![1.0, 2.0, 4.0]);
    // a valley inside a valley takes two passes
    let v = [8.0, 4.0, 2.0, 4.0, 8.0];
    assert_eq!(oracle::fill_valleys_recursive(&v, 1), vec![8.0, 4.0, 4.0, 4.0, 8.0]);
    assert_eq!(oracle::fill_valleys_recursive(&v, 2), vec![8.0; 5]);
}
