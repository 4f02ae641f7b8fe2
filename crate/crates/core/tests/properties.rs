use nls4::evolve::{evolve, EvolveConfig, InitialData};
use nls4::io::{decode_snapshot, encode_snapshot};
use nls4::lp::{lp_project, Band};
use nls4::mass::ball_mass_max;
use nls4::norms::{free_trajectory, mixed_norm, MixedNormSpec};
use nls4::scale::{classify, smooth, ScaleFunction};
use nls4::spectral::{apply_real_multiplier, fractional_derivative, free_propagate};
use nls4::verify::oracle::fill_valleys_recursive;
use nls4::weight::{weight_at, WeightProfile};
use nls4::{ComplexField, GridSpec};
use num_complex::Complex64;
use proptest::prelude::*;
use std::path::Path;

fn field(grid: GridSpec, coeffs: &[(f64, f64)]) -> ComplexField {
    let values = (0..grid.len()).map(|i| {
        let (a, b) = coeffs[i % coeffs.len()];
        Complex64::new(a + 0.1 * (i as f64).sin(), b)
    });
    ComplexField::new(grid, 0.0, values.collect()).unwrap()
}

fn grids() -> impl Strategy<Value = GridSpec> {
    prop_oneof![
        Just(GridSpec::new(1, 64, 4.0).unwrap()),
        Just(GridSpec::new(2, 16, 3.0).unwrap()),
        Just(GridSpec::new(3, 8, 2.0).unwrap()),
        Just(GridSpec::new(4, 4, 2.0).unwrap()),
    ]
}

fn field_strategy() -> impl Strategy<Value = ComplexField> {
    (grids(), prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 7..40)).prop_map(|(g, c)| field(g, &c))
}

fn max_dev(a: &ComplexField, b: &ComplexField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-2i32..=3).prop_map(|k| 2f64.powi(k))
}

/// Sequences `2^{k_i}` with `|k_{i+1} - k_i| <= 1`.
fn n1_values() -> impl Strategy<Value = Vec<f64>> {
    (-3i32..=3, prop::collection::vec(-1i32..=1, 1..40)).prop_map(|(k0, steps)| {
        let mut k = k0;
        let mut out = vec![2f64.powi(k)];
        for s in steps {
            k += s;
            out.push(2f64.powi(k));
        }
        out
    })
}

fn linear(values: &[f64]) -> ScaleFunction {
    ScaleFunction::linear((0..values.len()).map(|i| i as f64).collect(), values.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_propagation_is_unitary(f in field_strategy(), t in -100.0..100.0f64) {
        let g = free_propagate(&f, t).unwrap();
        prop_assert!((g.l2_norm() / f.l2_norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn multipliers_commute(f in field_strategy(), a in 0.1..3.0f64, b in -2.0..2.0f64) {
        let m1 = |k2: f64| (-a * k2).exp();
        let m2 = |k2: f64| 1.0 + b * k2.sqrt();
        let s1 = |xi: &[f64; 4]| m1(xi.iter().map(|x| x * x).sum());
        let s2 = |xi: &[f64; 4]| m2(xi.iter().map(|x| x * x).sum());
        let x = apply_real_multiplier(&apply_real_multiplier(&f, s1).unwrap(), s2).unwrap();
        let y = apply_real_multiplier(&apply_real_multiplier(&f, s2).unwrap(), s1).unwrap();
        prop_assert!(max_dev(&x, &y) <= 1e-12 * f.max_abs().max(1.0) * (1.0 + b.abs() * 10.0));
    }

    #[test]
    fn partition_nesting_telescoping(f in field_strategy(), n in dyadic()) {
        let low = lp_project(&f, Band::AtMost(n)).unwrap();
        let high = lp_project(&f, Band::Above(n)).unwrap();
        prop_assert!(max_dev(&low.add(&high).unwrap(), &f) <= 1e-12);
        let nested = lp_project(&lp_project(&f, Band::AtMost(2.0 * n)).unwrap(), Band::AtMost(n)).unwrap();
        prop_assert!(max_dev(&nested, &low) <= 1e-12);
        let top = lp_project(&f, Band::AtMost(8.0 * n)).unwrap();
        let range = lp_project(&f, Band::Range(n, 8.0 * n)).unwrap();
        prop_assert!(max_dev(&range, &top.sub(&low).unwrap()) <= 1e-12);
    }

    #[test]
    fn projectors_commute_with_flow_and_derivatives(f in field_strategy(), n in dyadic(), t in -2.0..2.0f64, s in -1.0..2.0f64) {
        let band = Band::At(n);
        let a = free_propagate(&lp_project(&f, band).unwrap(), t).unwrap();
        let b = lp_project(&free_propagate(&f, t).unwrap(), band).unwrap();
        prop_assert!(max_dev(&a, &b) <= 1e-12);
        let a = fractional_derivative(&lp_project(&f, band).unwrap(), s).unwrap();
        let b = lp_project(&fractional_derivative(&f, s).unwrap(), band).unwrap();
        prop_assert!(max_dev(&a, &b) <= 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn mixed_norm_is_homogeneous(f in field_strategy(), lambda in -5.0..5.0f64, q in 1.0..8.0f64, r in 1.0..8.0f64) {
        let traj = free_trajectory(&f, 0.5, 5).unwrap();
        let scaled = free_trajectory(&f.scaled(Complex64::new(lambda, 0.0)), 0.5, 5).unwrap();
        let spec = MixedNormSpec::new(q, r).unwrap();
        let a = mixed_norm(&traj, spec).unwrap();
        let b = mixed_norm(&scaled, spec).unwrap();
        prop_assert!((b - lambda.abs() * a).abs() <= 1e-12 * (1.0 + b));
    }

    #[test]
    fn ball_mass_grows_with_radius(f in field_strategy(), x in 0.05..0.33f64) {
        let r = x * f.grid().half_len();
        let small = ball_mass_max(&f, r).unwrap();
        let big = ball_mass_max(&f, 1.5 * r).unwrap();
        prop_assert!(big >= small);
        let full = ball_mass_max(&f, 2.0 * f.grid().half_len()).unwrap();
        prop_assert!((full - f.mass()).abs() <= 1e-12 * f.mass());
    }

    #[test]
    fn snapshot_round_trip_is_bitwise(f in field_strategy(), t in -10.0..10.0f64) {
        let f = f.with_time(t);
        let back = decode_snapshot(&encode_snapshot(&f), Path::new("mem")).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn smoothing_matches_brute_force(values in n1_values(), m in 1usize..=5) {
        let out = smooth(&linear(&values), m).unwrap();
        let expected = fill_valleys_recursive(&values, m - 1);
        prop_assert_eq!(out.values(), expected.as_slice());
    }

    #[test]
    fn smoothing_passes_rise_at_most_twofold(values in n1_values(), m in 1usize..=4) {
        let a = smooth(&linear(&values), m).unwrap();
        let b = smooth(&linear(&values), m + 1).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!(y >= x && *y <= 2.0 * x);
        }
    }

    #[test]
    fn peaks_and_valleys_alternate(values in n1_values()) {
        prop_assert!(classify(&linear(&values)).unwrap().alternates());
    }

    #[test]
    fn weight_is_monotone_and_scales(r0 in 0.2..5.0f64, j in 2u32..6, n in 0.25..4.0f64, x in 0.01..1.0f64) {
        let w = WeightProfile::new(r0, j).unwrap();
        let outer = w.outer_radius();
        let grid: Vec<f64> = (0..200).map(|i| r0 * 0.5 * (2.0 * outer / r0).powf(i as f64 / 199.0)).collect();
        for p in grid.windows(2) {
            prop_assert!(w.w_r(p[1]) <= w.w_r(p[0]));
        }
        let r = x * outer;
        let lhs = weight_at(&w, n, 0.0, r).unwrap().a;
        let rhs = weight_at(&w, 1.0, 0.0, n * r).unwrap().a / n;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn evolution_is_gauge_covariant(theta in 0.0..std::f64::consts::TAU, amp in 0.2..1.0f64) {
        let grid = GridSpec::new(2, 16, 4.0).unwrap();
        let init = InitialData::Gaussian { amplitude: amp, center: [0.3, -0.2, 0.0, 0.0], width: 0.8, velocity: [0.5, 0.0, 0.0, 0.0] };
        let u0 = init.build(&grid).unwrap();
        let phase = Complex64::from_polar(1.0, theta);
        let run = |f: ComplexField| {
            let mut c = EvolveConfig::new(grid, InitialData::Field(f));
            c.t_end = 0.05;
            c.sample_every = 25;
            evolve(&c).unwrap()
        };
        let a = run(u0.clone());
        let b = run(u0.scaled(phase));
        for (x, y) in a.samples().iter().zip(b.samples()) {
            prop_assert!(max_dev(&x.scaled(phase), y) <= 1e-12);
        }
    }
}
