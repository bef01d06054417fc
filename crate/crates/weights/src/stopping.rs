use dyadic_core::Cube;

use crate::step_weight::StepWeight;
use crate::WeightError;

/// Walk the average pyramid top-down and call `emit` for every maximal
/// dyadic cube with average ≥ 1/(1+ε); below such a cube the walk stops.
fn walk_stopping<F: FnMut(u32, usize)>(
    w: &StepWeight,
    epsilon: f64,
    mut emit: F,
) -> Result<(), WeightError> {
    if !(1.0 + epsilon > 0.0) {
        return Err(WeightError::BadParameter(format!(
            "stopping threshold needs 1+epsilon > 0, got epsilon={epsilon}"
        )));
    }
    let threshold = 1.0 / (1.0 + epsilon);
    let pyramid = w.average_pyramid();
    let dim = w.dim() as u32;
    // DFS in index order; children of flat f at the next level are the
    // 2^dim cells with per-axis indices 2i+b.
    let mut stack: Vec<(u32, usize)> = vec![(0, 0)];
    while let Some((level, flat)) = stack.pop() {
        if pyramid[level as usize][flat] >= threshold {
            emit(level, flat);
            continue;
        }
        if level == w.depth() {
            continue;
        }
        let side = 1usize << level;
        let fine_side = side * 2;
        let mut idx = vec![0usize; dim as usize];
        let mut rem = flat;
        for j in (0..dim as usize).rev() {
            idx[j] = rem % side;
            rem /= side;
        }
        // push in reverse so the walk emits in ascending index order
        for theta in (0..(1usize << dim)).rev() {
            let mut fine_flat = 0usize;
            for (j, &ij) in idx.iter().enumerate() {
                let fij = 2 * ij + (theta >> j & 1);
                fine_flat = fine_flat * fine_side + fij;
            }
            stack.push((level + 1, fine_flat));
        }
    }
    Ok(())
}

/// The maximal dyadic subcubes I of the root with E_I W ≥ 1/(1+ε), scanned
/// top-down.  Maximality makes them pairwise disjoint.
pub fn stopping_cubes(w: &StepWeight, epsilon: f64) -> Result<Vec<Cube>, WeightError> {
    let mut found = Vec::new();
    let dim = w.dim();
    let root_level = w.root().level();
    let root_index = w.root().index().to_vec();
    let shared = w.root().shared_root();
    walk_stopping(w, epsilon, |level, flat| {
        let side = 1usize << level;
        let mut idx = vec![0usize; dim];
        let mut rem = flat;
        for j in (0..dim).rev() {
            idx[j] = rem % side;
            rem /= side;
        }
        let abs: Vec<u64> = idx
            .iter()
            .zip(&root_index)
            .map(|(&i, &r)| (r << level) + i as u64)
            .collect();
        found.push(Cube::new(shared.clone(), root_level + level, abs).expect("index in range"));
    })?;
    Ok(found)
}

/// Σ |I| / |root| over the stopping cubes.  Each term is a power of two, so
/// the accumulation is exact at the depths this library materializes.
pub fn stopping_mass(w: &StepWeight, epsilon: f64) -> Result<f64, WeightError> {
    let dim = w.dim() as i32;
    let mut mass = 0.0;
    walk_stopping(w, epsilon, |level, _| {
        mass += (0.5f64).powi(dim * level as i32);
    })?;
    Ok(mass)
}

/// Exact finite-horizon hitting probability of the cascade walk:
/// P(T_a ≤ horizon) for T_a = inf{n ≥ 0 : a·Y_n ≥ 1/(1+ε)}, where Y_n is the
/// product of independent (1±ε) factors.  This equals the stopping mass of
/// the depth-`horizon` cascade, but runs in O(horizon²) by tracking the
/// still-alive probability mass per up-step count (all masses are dyadic
/// rationals, exact in f64 up to horizon ≈ 50).
pub fn hitting_probability_exact(a: f64, epsilon: f64, horizon: u32) -> Result<f64, WeightError> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(WeightError::BadParameter(format!("a={a} outside (0,1]")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(WeightError::BadParameter(format!("epsilon={epsilon} outside (0,1)")));
    }
    let threshold = 1.0 / (1.0 + epsilon);
    if a >= threshold {
        return Ok(1.0);
    }
    let mut hit = 0.0;
    let mut alive = vec![1.0f64]; // alive[u] = P(alive after n steps with u up-steps)
    for n in 1..=horizon {
        let mut next = vec![0.0f64; n as usize + 1];
        for (u, &m) in alive.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            next[u] += 0.5 * m;
            next[u + 1] += 0.5 * m;
        }
        for (u, m) in next.iter_mut().enumerate() {
            if *m == 0.0 {
                continue;
            }
            let y = (1.0 + epsilon).powi(u as i32) * (1.0 - epsilon).powi(n as i32 - u as i32);
            if a * y >= threshold {
                hit += *m;
                *m = 0.0;
            }
        }
        alive = next;
    }
    Ok(hit)
}
