use crate::cube::Cube;
use crate::GridError;

/// Jump sizes k_1, k_2, ... between consecutive coarse grids: stage t lives
/// at depth k_1 + ... + k_t below the root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct JumpSchedule {
    jumps: Vec<u32>,
}

impl JumpSchedule {
    pub fn new(jumps: Vec<u32>) -> Result<Self, GridError> {
        if jumps.iter().any(|&k| k == 0) {
            return Err(GridError::BadSchedule("all jump sizes must be >= 1".into()));
        }
        Ok(JumpSchedule { jumps })
    }

    pub fn stages(&self) -> usize {
        self.jumps.len()
    }

    pub fn jumps(&self) -> &[u32] {
        &self.jumps
    }

    /// k_t (1-based stage).
    pub fn jump(&self, t: usize) -> Result<u32, GridError> {
        self.check_stage(t)?;
        Ok(self.jumps[t - 1])
    }

    /// k_1 + ... + k_t; zero at t = 0.
    pub fn cumulative(&self, t: usize) -> Result<u32, GridError> {
        if t > self.jumps.len() {
            return Err(GridError::StageOutOfRange { t, stages: self.jumps.len() });
        }
        Ok(self.jumps[..t].iter().sum())
    }

    pub fn push(&mut self, k: u32) -> Result<(), GridError> {
        if k == 0 {
            return Err(GridError::BadSchedule("all jump sizes must be >= 1".into()));
        }
        self.jumps.push(k);
        Ok(())
    }

    fn check_stage(&self, t: usize) -> Result<(), GridError> {
        if t == 0 || t > self.jumps.len() {
            return Err(GridError::StageOutOfRange { t, stages: self.jumps.len() });
        }
        Ok(())
    }
}

/// The coarse grid at stage t: all grandchildren of the root at depth
/// k_1 + ... + k_t, in canonical row-major order.
pub fn jump_grid_level(root: &Cube, schedule: &JumpSchedule, t: usize) -> Result<Vec<Cube>, GridError> {
    root.grandchildren(schedule.cumulative(t)?)
}

/// Supervisor of a stage-t coarse cube: reading off the tower of coarse
/// ancestors T_1 ⊇ ... ⊇ T_t = Q and the position θ_l of each T_l within its
/// dyadic parent, the supervisor is the depth-t dyadic cube of the root
/// reached by descending through θ_1, ..., θ_t.
pub fn supervisor(q: &Cube, root: &Cube, schedule: &JumpSchedule) -> Result<Cube, GridError> {
    if !q.same_root(root) || !root.contains_cube(q) {
        return Err(GridError::RootMismatch);
    }
    let depth = q.level().checked_sub(root.level()).ok_or(GridError::RootMismatch)?;
    let t = (0..=schedule.stages())
        .find(|&t| schedule.cumulative(t).unwrap() == depth)
        .ok_or(GridError::NotOnJumpGrid { depth })?;
    let mut locs = Vec::with_capacity(t);
    for l in 1..=t {
        let tower = q.ancestor(root.level() + schedule.cumulative(l)?)?;
        locs.push(tower.location_in_parent());
    }
    root.descend(&locs)
}

/// Stage-by-stage output of the pruned (modified) hierarchy.
#[derive(Clone, Debug)]
pub struct StageSets {
    /// Stage number t (1-based).
    pub stage: usize,
    /// Transition cubes: stage-t coarse cubes R, lying under a surviving
    /// stage-(t−1) cube Q, whose dyadic parent touches the boundary of Q.
    pub transition: Vec<Cube>,
    /// Surviving stage-t cubes (under a survivor, not transition).
    pub khat: Vec<Cube>,
}

/// Computes transition cubes and surviving coarse cubes for stages 1..=t.
///
/// Stage 0 survivor is the root itself; at each later stage the coarse
/// children of survivors are split into transition cubes (dyadic parent
/// touching the survivor's boundary) and new survivors.
pub fn transition_stages(
    root: &Cube,
    schedule: &JumpSchedule,
    t: usize,
) -> Result<Vec<StageSets>, GridError> {
    if t == 0 || t > schedule.stages() {
        return Err(GridError::StageOutOfRange { t, stages: schedule.stages() });
    }
    let mut survivors = vec![root.clone()];
    let mut out = Vec::with_capacity(t);
    for s in 1..=t {
        let k = schedule.jump(s)?;
        let mut transition = Vec::new();
        let mut khat = Vec::new();
        for q in &survivors {
            for r in q.grandchildren(k)? {
                let parent = r.ancestor(r.level() - 1)?;
                if parent.boundary_touches(q) {
                    transition.push(r);
                } else {
                    khat.push(r);
                }
            }
        }
        out.push(StageSets { stage: s, transition, khat: khat.clone() });
        survivors = khat;
    }
    Ok(out)
}

/// Transition cubes at stage t together with the surviving cubes there.
pub fn transition_cubes(
    root: &Cube,
    schedule: &JumpSchedule,
    t: usize,
) -> Result<StageSets, GridError> {
    Ok(transition_stages(root, schedule, t)?.pop().expect("t >= 1"))
}
