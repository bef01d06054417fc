use dyadic_core::{supervisor, transition_stages, Cube, JumpSchedule, StageSets};
use weights::{direction_count, haar_coefficient, StepWeight};

use crate::sign::sign_pattern;
use crate::state::TransplantState;
use crate::TransplantError;

/// The boundary-pruned rearrangement u′_0, …, u′_m.
///
/// Each stage adds the sign-pattern increments only on surviving coarse
/// cubes, with the pattern zeroed on transition cubes (coarse children whose
/// dyadic parent touches the survivor's boundary).  Transition cubes are
/// never refined again, so u′ is constant on each of them; on surviving
/// cubes u′ agrees with the plain rearrangement.
#[derive(Debug, Clone)]
pub struct ModifiedTransplant {
    root: Cube,
    schedule: JumpSchedule,
    source: StepWeight,
    /// per stage t = 1..=m: the transition cubes and the survivors
    stage_sets: Vec<StageSets>,
    stages: Vec<StepWeight>,
}

impl ModifiedTransplant {
    pub fn root(&self) -> &Cube {
        &self.root
    }

    pub fn schedule(&self) -> &JumpSchedule {
        &self.schedule
    }

    pub fn source(&self) -> &StepWeight {
        &self.source
    }

    pub fn stage_sets(&self) -> &[StageSets] {
        &self.stage_sets
    }

    /// u′_0, …, u′_m.
    pub fn stages(&self) -> &[StepWeight] {
        &self.stages
    }

    pub fn stage(&self, t: usize) -> &StepWeight {
        &self.stages[t]
    }

    pub fn final_stage(&self) -> &StepWeight {
        self.stages.last().expect("stage 0 always present")
    }

    /// Survivors at stage t (the root itself at t = 0).
    pub fn surviving(&self, t: usize) -> Vec<Cube> {
        if t == 0 {
            vec![self.root.clone()]
        } else {
            self.stage_sets[t - 1].khat.clone()
        }
    }

    /// Transition cubes created at stage t ≥ 1.
    pub fn transition(&self, t: usize) -> &[Cube] {
        &self.stage_sets[t - 1].transition
    }
}

/// Runs the pruned recursion over the completed schedule of `state`.
pub fn modified_transplant(state: &TransplantState) -> Result<ModifiedTransplant, TransplantError> {
    let root = state.root().clone();
    let schedule = state.schedule().clone();
    let source = state.source().clone();
    let dim = root.dim();
    let m = schedule.stages();
    let stage_sets = if m == 0 {
        Vec::new()
    } else {
        transition_stages(&root, &schedule, m)?
    };
    let mut stages = vec![state.stage(0).clone()];
    for t in 0..m {
        let c_next = schedule.cumulative(t + 1)?;
        let k_next = schedule.jump(t + 1)?;
        let mut next = stages[t].refine(c_next)?;
        // sources constant at level t contribute nothing
        if (t as u32) < source.depth() {
            let survivors: Vec<Cube> = if t == 0 {
                vec![root.clone()]
            } else {
                stage_sets[t - 1].khat.clone()
            };
            let masks = direction_count(dim);
            for q in &survivors {
                let s = supervisor(q, &root, &schedule)?;
                let scale = 1.0 / s.volume().sqrt();
                let mut addend = vec![0.0; (1usize << k_next).pow(dim as u32)];
                let mut any = false;
                for mask in 1..=masks {
                    let coeff = haar_coefficient(&source, &s, mask)?;
                    if coeff == 0.0 {
                        continue;
                    }
                    any = true;
                    let pattern = sign_pattern(q, k_next, mask)?;
                    for (a, sgn) in addend.iter_mut().zip(pattern.pattern().values()) {
                        *a += coeff * scale * sgn;
                    }
                }
                if !any {
                    continue;
                }
                // zero the increment on this survivor's transition cubes
                for r in &stage_sets[t].transition {
                    if let Some(flat) = q.grandchild_flat_index(r) {
                        addend[flat] = 0.0;
                    }
                }
                let mut block = next.restrict(q)?;
                for (b, a) in block.values_mut().iter_mut().zip(&addend) {
                    *b += a;
                }
                next.overwrite_on(q, &block)?;
            }
        }
        stages.push(next);
    }
    Ok(ModifiedTransplant { root, schedule, source, stage_sets, stages })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pruned_interval_stage_keeps_the_edges_flat() {
        // two-value source, one jump of 3: the quarter-parents at the ends
        // touch the boundary, so the outer two eighths on each side stay at
        // the root mean while the interior alternates like the supervisor's
        // children
        let source = StepWeight::new(Cube::unit(1), 1, vec![0.9, 1.1]).unwrap();
        let state = TransplantState::run_schedule(source, &[3]).unwrap();
        let modified = modified_transplant(&state).unwrap();
        let got = modified.stage(1).values();
        let want = [1.0, 1.0, 0.9, 1.1, 0.9, 1.1, 1.0, 1.0];
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-15, "{got:?}");
        }
    }

    #[test]
    fn unit_jump_prunes_everything() {
        // k = 1: every child's dyadic parent is the survivor itself, so all
        // children are transition cubes and the stage stays constant
        let source = StepWeight::new(Cube::unit(1), 2, vec![0.2, 0.6, 1.4, 1.8]).unwrap();
        let state = TransplantState::run_schedule(source, &[1, 2]).unwrap();
        let modified = modified_transplant(&state).unwrap();
        assert!(modified.stage(1).values().iter().all(|&v| v == 1.0));
        assert!(modified.stage(2).values().iter().all(|&v| v == 1.0));
        assert!(modified.transition(1).len() == 2);
        assert!(modified.surviving(1).is_empty());
    }

    #[test]
    fn constant_source_is_a_fixed_point() {
        let source = StepWeight::constant(Cube::unit(2), 3, 1.5).unwrap();
        let state = TransplantState::run_schedule(source, &[2, 1]).unwrap();
        let modified = modified_transplant(&state).unwrap();
        for stage in modified.stages() {
            assert!(stage.values().iter().all(|&v| v == 1.5));
        }
    }
}
