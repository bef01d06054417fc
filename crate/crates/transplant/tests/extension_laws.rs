use dyadic_core::Cube;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transplant::{global_extension, mu_tau_unit_mass, reflect, reflect_tile, TransplantError};
use weights::StepWeight;

fn random_unit_weight(dim: usize, depth: u32, seed: u64) -> StepWeight {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = (1usize << depth).pow(dim as u32);
    let values = (0..cells).map(|_| rng.gen_range(0.5..1.5)).collect();
    StepWeight::new(Cube::unit(dim), depth, values).unwrap()
}

// level of a window weight at which cells are unit cubes
fn unit_level(l: u32) -> u32 {
    1 + l.trailing_zeros()
}

// averages over the integer-corner unit cubes of a window weight, in
// row-major order over corners −L..L per axis
fn unit_cube_averages(w: &StepWeight, l: u32) -> Vec<f64> {
    w.root()
        .grandchildren(unit_level(l))
        .unwrap()
        .iter()
        .map(|q| w.average(q).unwrap())
        .collect()
}

// ====================================================================
// reflection and tiling
// ====================================================================

#[test]
fn reflected_tiling_preserves_unit_cell_masses_exactly() {
    // summation over a mirrored block pairs the same values in a symmetric
    // tree, so every unit cell of the window reproduces the original mean
    // bit for bit
    let w = random_unit_weight(2, 2, 51);
    let t = reflect_tile(&w, 2).unwrap();
    let mean = w.mean();
    for (i, avg) in unit_cube_averages(&t, 2).iter().enumerate() {
        assert_eq!(*avg, mean, "unit cell {i}");
    }
}

#[test]
fn planar_reflection_lays_out_mirror_blocks() {
    let w = StepWeight::new(Cube::unit(2), 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let r = reflect(&w).unwrap();
    #[rustfmt::skip]
    let want = [
        1.0, 2.0, 2.0, 1.0,
        3.0, 4.0, 4.0, 3.0,
        3.0, 4.0, 4.0, 3.0,
        1.0, 2.0, 2.0, 1.0,
    ];
    assert_eq!(r.values(), &want);
}

#[test]
fn window_total_mass_scales_with_volume() {
    let w = random_unit_weight(1, 3, 52);
    let t = reflect_tile(&w, 4).unwrap();
    let want = 8.0 * w.total_mass();
    assert!((t.total_mass() - want).abs() < 1e-12 * want);
}

// ====================================================================
// damped pair
// ====================================================================

#[test]
fn damping_matches_the_cell_mass_ratios() {
    let sigma = random_unit_weight(1, 2, 53);
    let omega = random_unit_weight(1, 2, 54);
    let tau = 0.1;
    let (s, o) = global_extension(&sigma, &omega, tau, 2).unwrap();
    let cell_masses: Vec<f64> = (-2..2).map(|a| mu_tau_unit_mass(&[a], tau).unwrap()).collect();
    for w in [&s, &o] {
        let avgs = unit_cube_averages(w, 2);
        // undamped unit-cell masses are all equal, so adjacent damped masses
        // are in exactly the measure's cell-mass ratios
        for i in 0..avgs.len() - 1 {
            let got = avgs[i] / avgs[i + 1];
            let want = cell_masses[i] / cell_masses[i + 1];
            assert!((got - want).abs() < 1e-12, "cells {i}, {}", i + 1);
        }
    }
    // the ratio across the first two positive cells
    let avgs = unit_cube_averages(&s, 2);
    assert!((avgs[2] / avgs[3] - 1.054).abs() < 2e-3);
}

#[test]
fn zero_decay_leaves_the_tiling_untouched() {
    let sigma = random_unit_weight(1, 2, 55);
    let omega = random_unit_weight(1, 2, 56);
    let (s, o) = global_extension(&sigma, &omega, 0.0, 2).unwrap();
    assert_eq!(s.values(), reflect_tile(&sigma, 2).unwrap().values());
    assert_eq!(o.values(), reflect_tile(&omega, 2).unwrap().values());
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let sigma = random_unit_weight(1, 2, 57);
    let omega = random_unit_weight(2, 2, 58);
    assert!(matches!(
        global_extension(&sigma, &omega, 0.1, 2),
        Err(TransplantError::BadParameter(_))
    ));
}
