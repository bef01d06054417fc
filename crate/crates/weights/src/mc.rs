use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::WeightError;

/// Result of the hitting-time Monte Carlo: fraction of walks that reach the
/// stopping threshold within the horizon, with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub std_error: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Wilson 95% score interval for a binomial proportion.
pub fn wilson_interval(hits: u64, trials: u64) -> (f64, f64) {
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Simulate `trials` independent walks Y_n = Π (1 ± ε) and count how many
/// satisfy a·Y_n ≥ 1/(1+ε) within `horizon` steps.
///
/// Each trial uses its own ChaCha8 stream (`set_stream(trial)`) over a fixed
/// seed, so the result is bit-identical regardless of evaluation order.
pub fn hitting_mc(
    a: f64,
    epsilon: f64,
    trials: u64,
    horizon: u32,
    seed: u64,
) -> Result<McEstimate, WeightError> {
    if trials == 0 {
        return Err(WeightError::BadParameter("trials must be >= 1".into()));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(WeightError::BadParameter(format!("a={a} outside (0,1]")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(WeightError::BadParameter(format!("epsilon={epsilon} outside (0,1)")));
    }
    let threshold = 1.0 / ((1.0 + epsilon) * a);
    let up = 1.0 + epsilon;
    let down = 1.0 - epsilon;
    // Give-up barrier: if y can no longer reach the threshold even with all
    // remaining steps up, the trial is a miss.  The (1−1e−9) slack keeps the
    // prune conservative against the rounding of powi.
    let mut cutoff = vec![0.0f64; horizon as usize + 1];
    for (n, c) in cutoff.iter_mut().enumerate() {
        let remaining = horizon as i32 - n as i32;
        *c = threshold / up.powi(remaining) * (1.0 - 1e-9);
    }

    let mut hits = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        rng.set_stream(trial);
        rng.set_word_pos(0);
        if threshold <= 1.0 {
            hits += 1; // Y_0 = 1 already qualifies
            continue;
        }
        let mut y = 1.0f64;
        let mut word = 0u64;
        let mut bits_left = 0u32;
        for n in 0..horizon {
            if bits_left == 0 {
                word = rng.next_u64();
                bits_left = 64;
            }
            let s = word & 1;
            word >>= 1;
            bits_left -= 1;
            y *= if s == 1 { up } else { down };
            if y >= threshold {
                hits += 1;
                break;
            }
            if y < cutoff[n as usize + 1] {
                break;
            }
        }
    }
    let estimate = hits as f64 / trials as f64;
    let std_error = (estimate * (1.0 - estimate) / trials as f64).sqrt();
    let (wilson_low, wilson_high) = wilson_interval(hits, trials);
    Ok(McEstimate { hits, trials, estimate, std_error, wilson_low, wilson_high })
}
