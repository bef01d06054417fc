use dyadic_core::{jump_grid_level, supervisor, Cube, JumpSchedule};
use weights::{direction_count, haar_coefficient, StepWeight};

use crate::sign::sign_pattern;
use crate::TransplantError;

/// Grids finer than this many index bits per cell are refused up front.
const MAX_BITS: u32 = 30;

/// The stage-by-stage rearrangement of a source weight.
///
/// Stage t is a step weight on the depth-(k_1+…+k_t) grid whose value on
/// each coarse cell is the source average over the cell's depth-t supervisor.
/// Every stage therefore takes only values that are averages of the source,
/// so min(source) ≤ u_t ≤ max(source) pointwise.
#[derive(Debug, Clone)]
pub struct TransplantState {
    root: Cube,
    schedule: JumpSchedule,
    source: StepWeight,
    /// source averages per dyadic level, reused by every stage build
    source_pyramid: Vec<Vec<f64>>,
    stages: Vec<StepWeight>,
}

impl TransplantState {
    /// Starts the recursion: stage 0 is the constant source mean on the root.
    pub fn new(source: StepWeight) -> Result<Self, TransplantError> {
        let root = source.root().clone();
        let source_pyramid = source.average_pyramid();
        let u0 = StepWeight::constant(root.clone(), 0, source_pyramid[0][0])?;
        Ok(TransplantState {
            root,
            schedule: JumpSchedule::new(Vec::new())?,
            source,
            source_pyramid,
            stages: vec![u0],
        })
    }

    /// Builds the state and runs one step per jump.
    pub fn run_schedule(source: StepWeight, jumps: &[u32]) -> Result<Self, TransplantError> {
        let mut state = TransplantState::new(source)?;
        for &k in jumps {
            state.transplant_step(k)?;
        }
        Ok(state)
    }

    pub fn root(&self) -> &Cube {
        &self.root
    }

    pub fn schedule(&self) -> &JumpSchedule {
        &self.schedule
    }

    pub fn source(&self) -> &StepWeight {
        &self.source
    }

    /// u_0, …, u_m (one more entry than there are completed stages).
    pub fn stages(&self) -> &[StepWeight] {
        &self.stages
    }

    pub fn stage(&self, t: usize) -> &StepWeight {
        &self.stages[t]
    }

    pub fn last_stage(&self) -> &StepWeight {
        self.stages.last().expect("stage 0 always present")
    }

    /// Completed stage count m.
    pub fn num_stages(&self) -> usize {
        self.schedule.stages()
    }

    /// Source average over the depth-`level` dyadic cube with the given
    /// row-major position; exact on cells finer than the source resolution
    /// because the source is constant there.
    fn supervisor_average(&self, level: u32, flat: usize) -> f64 {
        let d = self.source.depth();
        if level <= d {
            return self.source_pyramid[level as usize][flat];
        }
        // decode, coarsen each axis index, re-encode at the source depth
        let dim = self.root.dim();
        let side = 1usize << level;
        let mut idx = vec![0usize; dim];
        let mut rem = flat;
        for j in (0..dim).rev() {
            idx[j] = rem % side;
            rem /= side;
        }
        let shift = level - d;
        let mut coarse = 0usize;
        for ij in idx {
            coarse = (coarse << d) + (ij >> shift);
        }
        self.source.values()[coarse]
    }

    /// Appends stage t+1 for jump size `k_next`.
    ///
    /// The new stage assigns to each depth-(c_t + k_next) cell the source
    /// average over its depth-(t+1) supervisor; the defining average law
    /// E_Q u_{t+1} = E_{supervisor(Q)} source is re-verified against directly
    /// gathered source averages before the stage is accepted.
    pub fn transplant_step(&mut self, k_next: u32) -> Result<(), TransplantError> {
        let dim = self.root.dim();
        let t_next = self.schedule.stages() + 1;
        let c_prev = self.schedule.cumulative(t_next - 1)?;
        let c = c_prev
            .checked_add(k_next)
            .ok_or_else(|| TransplantError::BadParameter("cumulative depth overflow".into()))?;
        if (dim as u32) * c > MAX_BITS {
            return Err(TransplantError::BadParameter(format!(
                "cumulative depth {c} in dimension {dim} exceeds the resolution cap"
            )));
        }
        self.schedule.push(k_next)?;

        // supervisor averages at dyadic level t+1, verified independently
        let sup_side = 1usize << t_next;
        let sup_count = sup_side.pow(dim as u32);
        let sup_avg: Vec<f64> = (0..sup_count)
            .map(|flat| self.supervisor_average(t_next as u32, flat))
            .collect();
        if (t_next as u32) <= self.source.depth() {
            for (flat, cube) in self.root.grandchildren(t_next as u32)?.iter().enumerate() {
                let direct = self.source.average(cube)?;
                if (direct - sup_avg[flat]).abs() > 1e-12 * direct.abs().max(1.0) {
                    return Err(TransplantError::InvariantViolation(format!(
                        "average over {cube} disagrees: pyramid {} vs gathered {direct}",
                        sup_avg[flat]
                    )));
                }
            }
        }

        // boundary levels of the completed stages, as bit positions in a
        // depth-c cell index: the location of the stage-s tower cube within
        // its dyadic parent is the parity of the index truncated to level
        // c_s, i.e. bit (c - c_s)
        let mut shifts = Vec::with_capacity(t_next);
        for s in 1..=t_next {
            shifts.push(c - self.schedule.cumulative(s)?);
        }

        let side = 1usize << c;
        let cells = side.pow(dim as u32);
        let mut values = vec![0.0; cells];
        let mut idx = vec![0usize; dim];
        for v in values.iter_mut() {
            let mut sup_flat = 0usize;
            for &ij in &idx {
                let mut s_j = 0usize;
                for &sh in &shifts {
                    s_j = (s_j << 1) | ((ij >> sh) & 1);
                }
                sup_flat = (sup_flat << t_next) + s_j;
            }
            *v = sup_avg[sup_flat];
            for j in (0..dim).rev() {
                idx[j] += 1;
                if idx[j] < side {
                    break;
                }
                idx[j] = 0;
            }
        }
        self.stages.push(StepWeight::new(self.root.clone(), c, values)?);
        Ok(())
    }
}

/// The stage difference u_{t+1} − u_t assembled from Haar data: for each
/// stage-t coarse cube Q with supervisor S, the sum over directions of
/// ⟨source, h_S^dir⟩·|S|^{−1/2}·(depth-k_{t+1} sign pattern on Q).  Equal to
/// the directly built difference up to rounding; identically zero when the
/// source has no detail at dyadic level t.
pub fn difference_formula_stage(
    state: &TransplantState,
    t: usize,
) -> Result<StepWeight, TransplantError> {
    if t >= state.num_stages() {
        return Err(TransplantError::BadParameter(format!(
            "stage {t} difference needs stage {} of {} completed",
            t + 1,
            state.num_stages()
        )));
    }
    let root = state.root();
    let schedule = state.schedule();
    let dim = root.dim();
    let c_next = schedule.cumulative(t + 1)?;
    let k_next = schedule.jump(t + 1)?;
    let mut diff = StepWeight::constant(root.clone(), c_next, 0.0)?;
    if (t as u32) >= state.source().depth() {
        return Ok(diff);
    }
    let masks = direction_count(dim);
    let block_cells = (1usize << k_next).pow(dim as u32);
    for q in jump_grid_level(root, schedule, t)? {
        let s = supervisor(&q, root, schedule)?;
        let scale = 1.0 / s.volume().sqrt();
        let mut block = vec![0.0; block_cells];
        for mask in 1..=masks {
            let coeff = haar_coefficient(state.source(), &s, mask)?;
            if coeff == 0.0 {
                continue;
            }
            let pattern = sign_pattern(&q, k_next, mask)?;
            for (b, sgn) in block.iter_mut().zip(pattern.pattern().values()) {
                *b += coeff * scale * sgn;
            }
        }
        diff.overwrite_on(&q, &StepWeight::new(q.clone(), k_next, block)?)?;
    }
    Ok(diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_value_source_with_jump_two_scatters_the_halves() {
        let source = StepWeight::new(Cube::unit(1), 1, vec![0.9, 1.1]).unwrap();
        let state = TransplantState::run_schedule(source, &[2]).unwrap();
        assert_eq!(state.stage(1).values(), &[0.9, 1.1, 0.9, 1.1]);
    }

    #[test]
    fn all_ones_schedule_reproduces_the_average_projection() {
        let vals: Vec<f64> = (0..16).map(|i| 1.0 + ((i * 29) % 13) as f64 / 11.0).collect();
        let source = StepWeight::new(Cube::unit(1), 4, vals).unwrap();
        let pyramid = source.average_pyramid();
        let state = TransplantState::run_schedule(source, &[1, 1, 1]).unwrap();
        for t in 0..=3usize {
            assert_eq!(state.stage(t).values(), &pyramid[t][..]);
        }
    }

    #[test]
    fn constant_source_stays_constant() {
        let source = StepWeight::constant(Cube::unit(2), 3, 2.5).unwrap();
        let state = TransplantState::run_schedule(source, &[2, 1]).unwrap();
        for stage in state.stages() {
            assert!(stage.values().iter().all(|&v| v == 2.5));
        }
    }

    #[test]
    fn stage_values_stay_between_source_bounds() {
        let vals: Vec<f64> = (0..64).map(|i| ((i * 37) % 23) as f64 / 22.0).collect();
        let source = StepWeight::new(Cube::unit(1), 6, vals.clone()).unwrap();
        let lo = source.min_value();
        let hi = source.max_value();
        let state = TransplantState::run_schedule(source, &[2, 2, 2]).unwrap();
        for stage in state.stages() {
            assert!(stage.min_value() >= lo && stage.max_value() <= hi);
        }
    }

    #[test]
    fn resolution_cap_is_enforced() {
        let source = StepWeight::constant(Cube::unit(3), 2, 1.0).unwrap();
        let mut state = TransplantState::new(source).unwrap();
        state.transplant_step(5).unwrap();
        assert!(matches!(
            state.transplant_step(6),
            Err(TransplantError::BadParameter(_))
        ));
        // the failed step must not leave a half-pushed schedule behind
        assert_eq!(state.schedule().jumps(), &[5]);
        assert_eq!(state.num_stages(), 1);
    }

    #[test]
    fn schedule_longer_than_source_depth_keeps_refining_exactly() {
        let source = StepWeight::new(Cube::unit(1), 1, vec![0.25, 1.75]).unwrap();
        let state = TransplantState::run_schedule(source, &[1, 1, 1]).unwrap();
        // below the source resolution each stage just redistributes leaf
        // values; stage averages over the root stay 1
        for stage in state.stages() {
            assert!((stage.mean() - 1.0).abs() < 1e-15);
        }
        assert_eq!(state.stage(3).depth(), 3);
    }
}
