// ============================================================
// Stopped-cascade pair construction: testing-value targeting,
// A₂ control, flatness, and the doubling variant
// ============================================================

use dyadic_core::Cube;
use weights::{
    cascade, gamma_pair_exact, haar_coefficient, hitting_probability_exact,
    large_doubling_variant, nazarov_pair, CascadeParams, StepWeight,
};

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

/// sup over all dyadic cells (every level down to the resolution) of
/// (E_I u)(E_I v).
fn a2_dyadic_sup(u: &StepWeight, v: &StepWeight) -> f64 {
    let pu = u.average_pyramid();
    let pv = v.average_pyramid();
    let mut sup = f64::NEG_INFINITY;
    for (lu, lv) in pu.iter().zip(&pv) {
        for (x, y) in lu.iter().zip(lv) {
            sup = sup.max(x * y);
        }
    }
    sup
}

/// max over sibling cell pairs of max(ratio, 1/ratio), i.e. the dyadic
/// adjacency constant of a 1D step weight.
fn sibling_adjacency_constant(w: &StepWeight) -> f64 {
    let pyramid = w.average_pyramid();
    let mut worst = 1.0f64;
    for level in pyramid.iter().skip(1) {
        for pair in level.chunks(2) {
            let r = pair[1] / pair[0];
            worst = worst.max(r.max(1.0 / r));
        }
    }
    worst
}

// --- targeting -----------------------------------------------------------

#[test]
fn pair_hits_target_across_the_region() {
    for &x1 in &[0.2, 0.5, 0.8] {
        for &ratio in &[0.2, 0.6] {
            let x3 = ratio * x1 / 4.0;
            let tau = 0.9;
            let pair = nazarov_pair(x1, x3, tau).unwrap();
            assert!(
                (pair.gamma - x3).abs() <= 1e-8,
                "x1={x1} x3={x3}: gamma {}",
                pair.gamma
            );
            assert!(pair.epsilon > 0.0 && pair.epsilon < tau / 3.0);
            assert!((pair.u.mean() - x1).abs() <= 1e-12);
            assert!((pair.v.mean() - 1.0).abs() <= 1e-12);
            assert!(a2_dyadic_sup(&pair.u, &pair.v) <= 1.0 + 1e-12);
            let bound = (1.0 + pair.epsilon) / (1.0 - pair.epsilon);
            assert!(sibling_adjacency_constant(&pair.u) <= bound + 1e-12);
            assert!(sibling_adjacency_constant(&pair.v) <= bound + 1e-12);
            assert!(bound < 1.0 + tau);
        }
    }
}

#[test]
fn achieved_gamma_agrees_with_independent_oracle() {
    // use a target small enough to resolve at the first depth rung
    let pair = nazarov_pair(0.5, 0.02, 0.9).unwrap();
    assert!(pair.depth <= 14, "expected a shallow rung, got {}", pair.depth);
    let slow = gamma_oracle(&pair.u, &pair.v);
    assert!((slow - pair.gamma).abs() <= 1e-12);
    assert!((slow - 0.02).abs() <= 1e-8);
}

#[test]
fn epsilon_shrinks_with_the_target() {
    let mut last = f64::INFINITY;
    for &x3 in &[0.06, 0.02, 0.005, 0.001] {
        let pair = nazarov_pair(0.5, x3, 0.9).unwrap();
        assert!(pair.epsilon < last, "x3={x3}: {} !< {last}", pair.epsilon);
        last = pair.epsilon;
    }
    assert!(last < 0.05);
}

// --- full-depth lower bound ---------------------------------------------

#[test]
fn untruncated_gamma_dominates_x1_over_one_plus_eps_squared() {
    for &(x1, x3) in &[(0.5, 0.1), (0.8, 0.15)] {
        let pair = nazarov_pair(x1, x3, 0.9).unwrap();
        let eps = pair.epsilon;
        // depth at which nearly all stopping mass has appeared
        let mut d_prime = 64u32;
        while hitting_probability_exact(x1, eps, d_prime).unwrap() < x1 - 1e-3 {
            d_prime += 64;
            assert!(d_prime <= 4096, "stopping mass slow to converge at eps={eps}");
        }
        let tail = (1e-3f64).ln() / (1.0 - eps * eps).ln();
        let depth = d_prime + tail.ceil() as u32;
        let g = gamma_pair_exact(x1, eps, depth);
        let bound = x1 / ((1.0 + eps) * (1.0 + eps));
        assert!(
            g >= bound * (1.0 - 5e-3),
            "x1={x1} eps={eps}: gamma {g} below {bound}"
        );
    }
}

// --- doubling variant ----------------------------------------------------

#[test]
fn glued_pair_keeps_at_least_half_the_testing_value() {
    let half = {
        let root = dyadic_core::RootBox::new(
            vec![dyadic_core::Dyadic::ZERO],
            dyadic_core::Dyadic::new(1, 1),
        )
        .unwrap();
        Cube::root_cube(root)
    };
    let u = cascade(&CascadeParams { a: 0.5, epsilon: 0.4, depth: 8, interval: half.clone() })
        .unwrap();
    let v = cascade(&CascadeParams { a: 1.0, epsilon: -0.4, depth: 8, interval: half }).unwrap();
    let g0 = gamma_oracle(&u, &v);
    for m in [1.0, 10.0, 100.0] {
        let (vg, ug) = large_doubling_variant(&v, &u, m).unwrap();
        let g1 = gamma_oracle(&ug, &vg);
        assert!(
            g1 >= 0.5 * g0 - 1e-12,
            "M={m}: glued gamma {g1} vs half of {g0}"
        );
    }
}
