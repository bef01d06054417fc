use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singular_ops::{fft_multiplier, GridFn, KernelSpec};
use std::f64::consts::TAU;

// ================================================================
// helpers: band-limited seeded signals and operator composition
// ================================================================

// sum of a few plane waves with mode numbers well inside Nyquist, so the
// multiplier identities hold without DC/Nyquist truncation effects
fn band_limited(dims: &[usize], max_mode: i64, modes: usize, seed: u64) -> GridFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen: Vec<(Vec<i64>, f64, f64)> = (0..modes)
        .map(|_| {
            let k: Vec<i64> = loop {
                let k: Vec<i64> =
                    dims.iter().map(|_| rng.gen_range(-max_mode..=max_mode)).collect();
                if k.iter().any(|&c| c != 0) {
                    break k;
                }
            };
            (k, rng.gen_range(0.3..1.0), rng.gen_range(0.0..TAU))
        })
        .collect();
    GridFn::from_fn(dims.to_vec(), |idx| {
        chosen
            .iter()
            .map(|(k, amp, phase)| {
                let arg: f64 = idx
                    .iter()
                    .zip(k.iter().zip(dims))
                    .map(|(&i, (&kj, &nj))| kj as f64 * i as f64 / nj as f64)
                    .sum();
                amp * (TAU * arg + phase).cos()
            })
            .sum()
    })
    .unwrap()
}

fn riesz(axis: usize, dim: usize, g: &GridFn) -> GridFn {
    fft_multiplier(&KernelSpec::riesz(axis, dim).unwrap(), g).unwrap().0
}

fn riesz_power(axis: usize, dim: usize, times: u32, g: &GridFn) -> GridFn {
    let mut out = g.clone();
    for _ in 0..times {
        out = riesz(axis, dim, &out);
    }
    out
}

fn max_abs_diff(a: &GridFn, b: &GridFn) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn axpy(alpha: f64, x: &GridFn, y: &mut GridFn) {
    for (yi, xi) in y.data_mut().iter_mut().zip(x.data()) {
        *yi += alpha * xi;
    }
}

// ================================================================
// algebraic identities of the symbols
// ================================================================

#[test]
fn hilbert_twice_negates_band_limited_signals() {
    let g = band_limited(&[64], 13, 6, 7);
    let h = fft_multiplier(&KernelSpec::hilbert(), &g).unwrap().0;
    let hh = fft_multiplier(&KernelSpec::hilbert(), &h).unwrap().0;
    for (a, b) in hh.data().iter().zip(g.data()) {
        assert!((a + b).abs() < 1e-10);
    }
}

#[test]
fn riesz_squares_sum_to_minus_the_identity() {
    for (dims, max_mode) in [(vec![32usize, 32], 8i64), (vec![16, 16, 16], 5)] {
        let n = dims.len();
        let g = band_limited(&dims, max_mode, 10, 40 + n as u64);
        let mut acc = g.clone();
        for axis in 1..=n {
            let rr = riesz_power(axis, n, 2, &g);
            axpy(1.0, &rr, &mut acc);
        }
        let worst = acc.data().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-10, "dims {dims:?}: residual {worst}");
    }
}

// R₁^N = (−1)^m R₁^{N−2m} + Σ_{i=1}^m (−1)^i Σ_{j=2}^n R₁^{N−2i} R_j²,
// with m = ⌊N/2⌋ — the first-axis power rewritten so every term has
// order ≤ 1 in R₁ beyond squares, which telescopes via Σ R_j² = −I
#[test]
fn reduction_formula_matches_the_direct_power() {
    for (dims, max_mode) in [(vec![32usize, 32], 8i64), (vec![16, 16, 16], 5)] {
        let n = dims.len();
        let g = band_limited(&dims, max_mode, 8, 90 + n as u64);
        for big_n in 1..=5u32 {
            let m = big_n / 2;
            let direct = riesz_power(1, n, big_n, &g);
            let sign_m = if m % 2 == 0 { 1.0 } else { -1.0 };
            let mut rhs = riesz_power(1, n, big_n - 2 * m, &g);
            for v in rhs.data_mut() {
                *v *= sign_m;
            }
            for i in 1..=m {
                let sign_i = if i % 2 == 0 { 1.0 } else { -1.0 };
                for j in 2..=n {
                    let term = riesz_power(1, n, big_n - 2 * i, &riesz_power(j, n, 2, &g));
                    axpy(sign_i, &term, &mut rhs);
                }
            }
            let worst = max_abs_diff(&direct, &rhs);
            assert!(worst < 1e-10, "n={n}, N={big_n}: residual {worst}");
        }
    }
}

#[test]
fn iterated_multiplier_equals_the_composition() {
    // 2D: R^(2,1) = R₁∘R₁∘R₂ and R^(0,3) = R₂³
    let g2 = band_limited(&[32, 32], 8, 8, 140);
    for (beta, factors) in [(vec![2u32, 1], vec![1usize, 1, 2]), (vec![0, 3], vec![2, 2, 2])] {
        let spec = KernelSpec::iterated(beta.clone(), 2).unwrap();
        let single = fft_multiplier(&spec, &g2).unwrap().0;
        let mut composed = g2.clone();
        for axis in factors {
            composed = riesz(axis, 2, &composed);
        }
        assert!(
            max_abs_diff(&single, &composed) < 1e-12,
            "beta {beta:?} disagrees with its composition"
        );
    }
    // 3D: R^(1,1,1) = R₁∘R₂∘R₃
    let g3 = band_limited(&[16, 16, 16], 5, 8, 141);
    let spec = KernelSpec::iterated(vec![1, 1, 1], 3).unwrap();
    let single = fft_multiplier(&spec, &g3).unwrap().0;
    let composed = riesz(3, 3, &riesz(2, 3, &riesz(1, 3, &g3)));
    assert!(max_abs_diff(&single, &composed) < 1e-12);
}
