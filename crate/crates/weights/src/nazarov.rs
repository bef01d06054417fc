use dyadic_core::Cube;

use crate::cascade::{cascade, CascadeParams};
use crate::step_weight::StepWeight;
use crate::stopping::stopping_cubes;
use crate::WeightError;

/// Depth ladder tried by the bisection: smallest materialization that can
/// reach the target wins.
const DEPTH_LADDER: [u32; 5] = [12, 14, 16, 18, 20];

/// Acceptance tolerance on |γ − x3| for the returned pair.
const GAMMA_TOL: f64 = 1e-8;

/// A 1D weight pair on the unit interval with prescribed testing behavior:
/// E_J u = x1, E_J v = 1, (E_I u)(E_I v) ≤ 1 on every dyadic I, and the
/// horizontal testing value γ(u, v; J) equal to the requested x3.
#[derive(Debug, Clone)]
pub struct NazarovPair {
    pub v: StepWeight,
    pub u: StepWeight,
    pub epsilon: f64,
    pub depth: u32,
    /// The achieved testing value of the materialized pair.
    pub gamma: f64,
}

/// Exact γ(U_N, V_N; J) for the stopped-cascade pair at finite depth, by a
/// recursion over (level, up-step count) states of the cascade walk:
///
/// * a node with E_I U ≥ 1/(1+ε) is a stopping cube carrying V = W(1, I, −ε),
///   whose subtree contributes (E_I U)²(1 − (1−ε²)^{remaining}) · |I|/|J|;
/// * an alive node contributes its own Haar term ε²(E_I U)² · |I|/|J|
///   (there E_I V = 1) and recurses into both children.
///
/// All states at one (level, up-count) share the same averages, so the walk
/// costs O(depth²).
pub fn gamma_pair_exact(x1: f64, epsilon: f64, depth: u32) -> f64 {
    let threshold = 1.0 / (1.0 + epsilon);
    let q = 1.0 - epsilon * epsilon;
    let e2 = epsilon * epsilon;
    let mut gamma = 0.0;
    let mut alive = vec![1.0f64]; // alive[u] = Σ |I|/|J| over alive nodes
    for n in 0..=depth {
        let mut next = vec![0.0f64; n as usize + 2];
        for (u, &m) in alive.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let y = (1.0 + epsilon).powi(u as i32) * (1.0 - epsilon).powi(n as i32 - u as i32);
            let e_u = x1 * y;
            if e_u >= threshold {
                gamma += m * e_u * e_u * (1.0 - q.powi((depth - n) as i32));
            } else if n < depth {
                gamma += m * e2 * e_u * e_u;
                next[u] += 0.5 * m;
                next[u + 1] += 0.5 * m;
            }
        }
        alive = next;
    }
    gamma
}

/// γ^horizontal(u, v; J) of a materialized 1D pair: Haar analysis on `u`,
/// averages of `v`.  Used to cross-check the recursion on the pair that is
/// actually returned.
pub(crate) fn gamma_horizontal_1d(u: &StepWeight, v: &StepWeight) -> f64 {
    assert_eq!(u.depth(), v.depth());
    assert_eq!(u.dim(), 1);
    let pu = u.average_pyramid();
    let pv = v.average_pyramid();
    let mut gamma = 0.0;
    for l in 0..u.depth() as usize {
        let mut level = 0.0;
        for i in 0..pu[l].len() {
            let half = 0.5 * (pu[l + 1][2 * i] - pu[l + 1][2 * i + 1]);
            level += half * half * pv[l][i];
        }
        gamma += level * (0.5f64).powi(l as i32);
    }
    gamma
}

fn materialize(x1: f64, epsilon: f64, depth: u32) -> Result<(StepWeight, StepWeight), WeightError> {
    let j = Cube::unit(1);
    let u = cascade(&CascadeParams { a: x1, epsilon, depth, interval: j.clone() })?;
    let mut v = StepWeight::constant(j, depth, 1.0)?;
    for k in stopping_cubes(&u, epsilon)? {
        let rel = k.level() - v.root().level();
        let block = cascade(&CascadeParams {
            a: 1.0,
            epsilon: -epsilon,
            depth: depth - rel,
            interval: k.clone(),
        })?;
        v.overwrite_on(&k, &block)?;
    }
    Ok((v, u))
}

/// Find ε ∈ (0, τ/3) and a finite depth so that the stopped-cascade pair
/// (V, U) = (planted reverse cascades, W(x1, J, ε)) has horizontal testing
/// value x3, by bisection in ε against the exact recursion.
///
/// Admissible inputs form the region 0 < x3 < x1/4 < 1/4.  The achieved γ is
/// re-verified on the materialized pair; if no rung of the depth ladder can
/// reach x3 (or the target falls in one of the countably many jump gaps of
/// the finite-depth γ), the error reports the best bracket achieved.
pub fn nazarov_pair(x1: f64, x3: f64, tau: f64) -> Result<NazarovPair, WeightError> {
    if !(x1 > 0.0 && x1 < 1.0 && x3 > 0.0 && x3 < x1 / 4.0) {
        return Err(WeightError::BadParameter(format!(
            "(x1, x3) = ({x1}, {x3}) outside the admissible region 0 < x3 < x1/4 < 1/4"
        )));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(WeightError::BadParameter(format!("tau={tau} outside (0,1)")));
    }
    let eps_hi = tau / 3.0 * (1.0 - 1e-9);
    let mut best_gamma = 0.0f64;
    let mut best_bracket = (0.0f64, eps_hi);
    for &depth in DEPTH_LADDER.iter() {
        let g_hi = gamma_pair_exact(x1, eps_hi, depth);
        if g_hi > best_gamma {
            best_gamma = g_hi;
        }
        if g_hi <= x3 {
            continue; // this depth cannot reach the target before ε = τ/3
        }
        let mut lo = 0.0f64;
        let mut hi = eps_hi;
        let mut mid = 0.5 * (lo + hi);
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            let g = gamma_pair_exact(x1, mid, depth);
            if (g - x3).abs() <= 0.1 * GAMMA_TOL {
                break;
            }
            if g < x3 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < f64::EPSILON * eps_hi {
                break;
            }
        }
        best_bracket = (lo, hi);
        let (v, u) = materialize(x1, mid, depth)?;
        let gamma = gamma_horizontal_1d(&u, &v);
        if (gamma - x3).abs() <= GAMMA_TOL {
            return Ok(NazarovPair { v, u, epsilon: mid, depth, gamma });
        }
        if gamma > best_gamma {
            best_gamma = gamma;
        }
        // jump gap or recursion/materialization disagreement: try deeper
    }
    Err(WeightError::TargetUnreachable {
        x3,
        best_gamma,
        lo: best_bracket.0,
        hi: best_bracket.1,
        depth_cap: *DEPTH_LADDER.last().unwrap(),
    })
}
