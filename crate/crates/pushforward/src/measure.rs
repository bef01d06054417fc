use serde::{Deserialize, Serialize};
use weights::StepWeight;

use crate::cantor::CantorGrid;
use crate::PushError;

/// A point mass: location and weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Vec<f64>,
    pub mass: f64,
}

/// A finite positive measure in one of three concrete forms.
///
/// * `Density` — absolutely continuous with a step density on a dyadic grid;
/// * `Atoms` — a finite list of distinct point masses;
/// * `Cantor` — the depth-truncated middle-thirds measure on `[0,1]`: unit
///   mass spread uniformly over the `2^depth` surviving stage-`depth`
///   intervals.
///
/// Boxes are half-open `[lo, hi)` throughout, matching the grid convention,
/// so an atom sitting on a shared boundary belongs to exactly one box.
#[derive(Clone, Debug)]
pub enum Measure {
    Density(StepWeight),
    Atoms(Vec<Atom>),
    Cantor { depth: u32 },
}

/// Wire form for the purely combinatorial variants.  Densities are excluded
/// on purpose: they already have the step-weight binary/CSV formats.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MeasureJson {
    Atoms(Vec<Atom>),
    Cantor { depth: u32 },
}

/// Largest supported Cantor truncation; keeps the leaf list comfortably small.
pub(crate) const MAX_CANTOR_DEPTH: u32 = 16;

impl Measure {
    /// Wraps a step density.  Cell values must be nonnegative (a measure,
    /// not a sign pattern).
    pub fn density(w: StepWeight) -> Result<Measure, PushError> {
        if w.min_value() < 0.0 {
            return Err(PushError::BadMeasure(format!(
                "density has a negative cell value {}",
                w.min_value()
            )));
        }
        Ok(Measure::Density(w))
    }

    /// A finite atomic measure.  Points must share a dimension, masses must
    /// be positive, and no two atoms may coincide.
    pub fn atoms(atoms: Vec<Atom>) -> Result<Measure, PushError> {
        if atoms.is_empty() {
            return Err(PushError::BadMeasure("need at least one atom".into()));
        }
        let dim = atoms[0].point.len();
        if dim == 0 {
            return Err(PushError::BadMeasure("atoms need at least one coordinate".into()));
        }
        for a in &atoms {
            if a.point.len() != dim {
                return Err(PushError::BadMeasure(format!(
                    "atom dimension {} != {}",
                    a.point.len(),
                    dim
                )));
            }
            if !a.point.iter().all(|c| c.is_finite()) {
                return Err(PushError::BadMeasure("atom at a non-finite point".into()));
            }
            if !(a.mass.is_finite() && a.mass > 0.0) {
                return Err(PushError::BadMeasure(format!("atom mass {} must be positive", a.mass)));
            }
        }
        // distinctness: sort a copy lexicographically, compare neighbours
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&i, &j| {
            atoms[i]
                .point
                .iter()
                .zip(&atoms[j].point)
                .find_map(|(a, b)| a.partial_cmp(b).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for pair in order.windows(2) {
            if atoms[pair[0]].point == atoms[pair[1]].point {
                return Err(PushError::BadMeasure(format!(
                    "two atoms share the point {:?}",
                    atoms[pair[0]].point
                )));
            }
        }
        Ok(Measure::Atoms(atoms))
    }

    /// The depth-truncated middle-thirds Cantor measure on `[0,1]`.
    pub fn cantor(depth: u32) -> Result<Measure, PushError> {
        if depth == 0 || depth > MAX_CANTOR_DEPTH {
            return Err(PushError::BadMeasure(format!(
                "cantor depth {depth} outside 1..={MAX_CANTOR_DEPTH}"
            )));
        }
        Ok(Measure::Cantor { depth })
    }

    pub fn dim(&self) -> usize {
        match self {
            Measure::Density(w) => w.dim(),
            Measure::Atoms(atoms) => atoms[0].point.len(),
            Measure::Cantor { .. } => 1,
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            Measure::Density(w) => w.total_mass(),
            Measure::Atoms(atoms) => atoms.iter().map(|a| a.mass).sum(),
            Measure::Cantor { .. } => 1.0,
        }
    }

    pub fn as_density(&self) -> Option<&StepWeight> {
        match self {
            Measure::Density(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_atoms(&self) -> Option<&[Atom]> {
        match self {
            Measure::Atoms(a) => Some(a),
            _ => None,
        }
    }

    /// Mass of the half-open box `[lo, hi)`.
    pub fn mass_in(&self, lo: &[f64], hi: &[f64]) -> f64 {
        assert_eq!(lo.len(), self.dim(), "box dimension mismatch");
        assert_eq!(hi.len(), self.dim(), "box dimension mismatch");
        match self {
            Measure::Atoms(atoms) => atoms
                .iter()
                .filter(|a| {
                    a.point
                        .iter()
                        .zip(lo.iter().zip(hi))
                        .all(|(&x, (&l, &h))| l <= x && x < h)
                })
                .map(|a| a.mass)
                .sum(),
            Measure::Density(w) => density_mass_in(w, lo, hi),
            Measure::Cantor { depth } => {
                let grid = CantorGrid::build(*depth);
                let per_leaf = 0.5f64.powi(*depth as i32);
                grid.leaves()
                    .iter()
                    .map(|&(a, b)| {
                        let cut = (hi[0].min(b) - lo[0].max(a)).max(0.0);
                        per_leaf * cut / (b - a)
                    })
                    .sum()
            }
        }
    }

    /// JSON for the atom and Cantor variants.  Densities go through the
    /// step-weight binary/CSV formats instead.
    pub fn to_json(&self) -> Result<String, PushError> {
        let wire = match self {
            Measure::Atoms(a) => MeasureJson::Atoms(a.clone()),
            Measure::Cantor { depth } => MeasureJson::Cantor { depth: *depth },
            Measure::Density(_) => {
                return Err(PushError::Unsupported(
                    "densities serialize via the step-weight formats, not JSON".into(),
                ))
            }
        };
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    pub fn from_json(text: &str) -> Result<Measure, PushError> {
        match serde_json::from_str::<MeasureJson>(text)? {
            MeasureJson::Atoms(a) => Measure::atoms(a),
            MeasureJson::Cantor { depth } => Measure::cantor(depth),
        }
    }
}

/// `∫_{[lo,hi)} w dx`: sum of cell value × overlap volume.  Exact whenever
/// the box edges sit on the cell lattice.
fn density_mass_in(w: &StepWeight, lo: &[f64], hi: &[f64]) -> f64 {
    let n = w.dim();
    let m = w.side_cells();
    let side = w.root().side().to_f64();
    let h = side / m as f64;
    let base: Vec<f64> = (0..n).map(|j| w.root().lower(j).to_f64()).collect();
    let mut total = 0.0;
    for (flat, &v) in w.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let mut overlap = 1.0;
        let mut rest = flat;
        // row-major, axis 0 slowest: peel indices from the fast end
        let mut per_axis = vec![0usize; n];
        for j in (0..n).rev() {
            per_axis[j] = rest % m;
            rest /= m;
        }
        for j in 0..n {
            let c_lo = base[j] + per_axis[j] as f64 * h;
            let c_hi = base[j] + (per_axis[j] + 1) as f64 * h;
            let cut = (hi[j].min(c_hi) - lo[j].max(c_lo)).max(0.0);
            overlap *= cut;
        }
        total += v * overlap;
    }
    total
}
