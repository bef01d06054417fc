// ============================================================
// Cascade laws: exact testing values, average preservation,
// sibling flatness, stopping mass vs. the hitting recursion,
// and the Monte Carlo cross-check
// ============================================================

use dyadic_core::Cube;
use proptest::prelude::*;
use weights::{
    cascade, exact_testing_value, haar_coefficient, hitting_mc, hitting_probability_exact,
    stopping_cubes, stopping_mass, CascadeParams, StepWeight,
};

fn build(a: f64, epsilon: f64, depth: u32) -> StepWeight {
    cascade(&CascadeParams { a, epsilon, depth, interval: Cube::unit(1) }).unwrap()
}

fn gamma_oracle(u: &StepWeight, v: &StepWeight) -> f64 {
    let root = u.root().clone();
    let mut total = 0.0;
    for l in 0..u.depth() {
        for q in root.grandchildren(l).unwrap() {
            let c = haar_coefficient(u, &q, 1).unwrap();
            total += c * c * v.average(&q).unwrap();
        }
    }
    total / root.volume()
}

// --- exact testing value -------------------------------------------------

#[test]
fn testing_value_closed_form_matches_haar_sum() {
    for &a in &[0.3, 0.5, 1.0] {
        for &eps in &[0.1, 0.5, 0.8] {
            for depth in 1..=7u32 {
                let u = build(a, eps, depth);
                let v = build(1.0, -eps, depth);
                let gamma = gamma_oracle(&u, &v);
                let closed = exact_testing_value(a, eps, depth);
                assert!(
                    (gamma - closed).abs() <= 1e-12,
                    "a={a} eps={eps} N={depth}: {gamma} vs {closed}"
                );
            }
        }
    }
}

#[test]
fn pinned_testing_value_example() {
    // a = 0.5, ε = 0.5, N = 2 → 0.25·(1 − 0.75²) = 0.109375
    let u = build(0.5, 0.5, 2);
    let v = build(1.0, -0.5, 2);
    assert!((gamma_oracle(&u, &v) - 0.109375).abs() <= 1e-15);
}

// --- martingale structure ------------------------------------------------

#[test]
fn cascade_averages_are_depth_independent() {
    for &(a, eps) in &[(0.5, 0.2), (0.9, 0.7), (0.25, -0.4)] {
        let deep = build(a, eps, 9);
        for shallow_depth in [0u32, 1, 4, 7] {
            let direct = build(a, eps, shallow_depth);
            let coarse = deep.coarsen(shallow_depth).unwrap();
            for (x, y) in coarse.values().iter().zip(direct.values()) {
                assert!((x - y).abs() <= 1e-13 * y.abs().max(1.0));
            }
        }
    }
}

#[test]
fn sibling_ratios_stay_in_the_tilt_interval() {
    for &(a, eps) in &[(0.5, 0.3), (0.8, 0.05), (0.3, 0.6)] {
        let w = build(a, eps, 8);
        let pyramid = w.average_pyramid();
        let hi = (1.0 + eps) / (1.0 - eps);
        let lo = 1.0 / hi;
        for level in pyramid.iter().skip(1) {
            for pair in level.chunks(2) {
                let r = pair[1] / pair[0];
                assert!(r >= lo - 1e-12 && r <= hi + 1e-12, "ratio {r} at eps={eps}");
                // cascades achieve the bound exactly: right/left = (1+ε)/(1−ε)
                assert!((r - hi).abs() <= 1e-12 * hi);
            }
        }
    }
}

// --- stopping families ---------------------------------------------------

#[test]
fn stopping_mass_equals_hitting_recursion() {
    for &(a, eps) in &[(0.3, 0.5), (0.5, 0.5), (0.5, 0.2), (0.7, 0.3)] {
        for depth in [6u32, 10, 14] {
            let w = build(a, eps, depth);
            let mass = stopping_mass(&w, eps).unwrap();
            let p = hitting_probability_exact(a, eps, depth).unwrap();
            assert!(
                (mass - p).abs() <= 1e-12,
                "a={a} eps={eps} depth={depth}: {mass} vs {p}"
            );
        }
    }
}

#[test]
fn stopping_mass_is_monotone_in_depth_and_approaches_a() {
    let (a, eps) = (0.5, 0.5);
    let mut last = 0.0;
    for depth in 0..=14u32 {
        let p = hitting_probability_exact(a, eps, depth).unwrap();
        assert!(p >= last - 1e-15, "depth {depth}");
        last = p;
    }
    // the limit P(T < ∞) is at least a; depth 30 is already within 1e-3
    assert!(hitting_probability_exact(a, eps, 30).unwrap() >= a - 1e-3);
    // materialized agreement at a depth where both paths exist
    let w = build(a, eps, 18);
    let mass = stopping_mass(&w, eps).unwrap();
    let p = hitting_probability_exact(a, eps, 18).unwrap();
    assert!((mass - p).abs() <= 1e-12);
}

#[test]
fn stopping_cubes_have_qualifying_averages_and_no_qualifying_ancestors() {
    let (a, eps) = (0.4, 0.5);
    let w = build(a, eps, 10);
    let threshold = 1.0 / (1.0 + eps);
    let cubes = stopping_cubes(&w, eps).unwrap();
    assert!(!cubes.is_empty());
    for k in &cubes {
        assert!(w.average(k).unwrap() >= threshold);
        let mut anc = k.parent();
        while let Some(p) = anc {
            if p.level() < w.root().level() {
                break;
            }
            assert!(w.average(&p).unwrap() < threshold, "non-maximal stopping cube");
            anc = p.parent();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stopping_family_is_disjoint_with_mass_in_unit_range(
        a in 0.05f64..0.95,
        eps in 0.05f64..0.9,
    ) {
        let w = build(a, eps, 8);
        let cubes = stopping_cubes(&w, eps).unwrap();
        let mass = stopping_mass(&w, eps).unwrap();
        prop_assert!((0.0..=1.0).contains(&mass));
        let total: f64 = cubes.iter().map(|k| k.volume()).sum();
        prop_assert!((total - mass).abs() <= 1e-12);
        for (i, x) in cubes.iter().enumerate() {
            for y in cubes.iter().skip(i + 1) {
                prop_assert!(x.upper(0) <= y.lower(0) || y.upper(0) <= x.lower(0));
            }
        }
    }
}

// --- Monte Carlo cross-check ---------------------------------------------

#[test]
fn monte_carlo_matches_exact_recursion_within_sampling_error() {
    let (a, eps) = (0.5, 0.5);
    let horizon = 300u32;
    let est = hitting_mc(a, eps, 200_000, horizon, 20_260_823).unwrap();
    let p = hitting_probability_exact(a, eps, horizon).unwrap();
    let sigma = est.std_error.max(1e-6);
    assert!(
        (est.estimate - p).abs() <= 4.0 * sigma,
        "estimate {} vs exact {p} (sigma {sigma})",
        est.estimate
    );
    assert!(est.wilson_low <= p + 4.0 * sigma && p - 4.0 * sigma <= est.wilson_high);
}
