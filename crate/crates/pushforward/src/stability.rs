use dyadic_core::Cube;
use serde::{Deserialize, Serialize};

use crate::maps::{MapSpec, MonotoneMap1D};
use crate::measure::Measure;
use crate::push::pushforward;
use crate::PushError;

/// A finite family of half-open axis boxes to take suprema over.
#[derive(Clone, Debug)]
pub struct ScanFamily {
    dim: usize,
    boxes: Vec<(Vec<f64>, Vec<f64>)>,
}

impl ScanFamily {
    pub fn from_boxes(boxes: Vec<(Vec<f64>, Vec<f64>)>) -> Result<ScanFamily, PushError> {
        if boxes.is_empty() {
            return Err(PushError::EmptyScan);
        }
        let dim = boxes[0].0.len();
        for (lo, hi) in &boxes {
            if lo.len() != dim || hi.len() != dim || dim == 0 {
                return Err(PushError::BadMap("scan boxes must share a dimension".into()));
            }
            if !lo.iter().zip(hi).all(|(a, b)| a.is_finite() && b.is_finite() && a < b) {
                return Err(PushError::BadMap(format!("degenerate scan box {lo:?}..{hi:?}")));
            }
        }
        Ok(ScanFamily { dim, boxes })
    }

    /// Every dyadic subcube of `root` down to `max_depth`, the root included.
    pub fn dyadic(root: &Cube, max_depth: u32) -> Result<ScanFamily, PushError> {
        let n = root.dim();
        let mut boxes = Vec::new();
        for d in 0..=max_depth {
            for q in root.grandchildren(d)? {
                let lo = (0..n).map(|j| q.lower(j).to_f64()).collect();
                let hi = (0..n).map(|j| q.upper(j).to_f64()).collect();
                boxes.push((lo, hi));
            }
        }
        ScanFamily::from_boxes(boxes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn boxes(&self) -> &[(Vec<f64>, Vec<f64>)] {
        &self.boxes
    }
}

fn volume(lo: &[f64], hi: &[f64]) -> f64 {
    lo.iter().zip(hi).map(|(a, b)| b - a).product()
}

fn a2_over<'a, I>(sigma: &Measure, omega: &Measure, boxes: I) -> f64
where
    I: Iterator<Item = &'a (Vec<f64>, Vec<f64>)>,
{
    let mut sup = 0.0f64;
    for (lo, hi) in boxes {
        let v = volume(lo, hi);
        let val = (sigma.mass_in(lo, hi) / v) * (omega.mass_in(lo, hi) / v);
        sup = sup.max(val);
    }
    sup
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    /// sup over the scan family of (σ(B)/|B|)(ω(B)/|B|)
    pub before: f64,
    /// the same supremum over the image boxes with the pushed measures
    pub after: f64,
    /// biLipschitz norm of the map (upper bound for compositions)
    pub bilip: f64,
    /// reference bound ‖Φ‖⁴ⁿ·before
    pub bound: f64,
    /// after / bound — the constant the stability display leaves unspecified
    pub measured_c: f64,
}

/// How the scanned A₂ quantity moves under `phi`: `before` on the given
/// family, `after` on the family's image with both measures pushed forward.
pub fn a2_stability_check(
    sigma: &Measure,
    omega: &Measure,
    phi: &MapSpec,
    scan: &ScanFamily,
) -> Result<StabilityReport, PushError> {
    if sigma.dim() != omega.dim() {
        return Err(PushError::BadMeasure(format!(
            "measure dimensions differ: {} vs {}",
            sigma.dim(),
            omega.dim()
        )));
    }
    if scan.dim() != sigma.dim() {
        return Err(PushError::BadMap(format!(
            "scan family dimension {} does not match the measures' {}",
            scan.dim(),
            sigma.dim()
        )));
    }
    let before = a2_over(sigma, omega, scan.boxes().iter());

    let sigma_pushed = pushforward(sigma, phi)?;
    let omega_pushed = pushforward(omega, phi)?;
    let image: Vec<(Vec<f64>, Vec<f64>)> = scan
        .boxes()
        .iter()
        .map(|(lo, hi)| phi.map_box(lo, hi))
        .collect::<Result<_, _>>()?;
    let after = a2_over(&sigma_pushed, &omega_pushed, image.iter());

    let bilip = phi.bilip_norm();
    let bound = bilip.powi(4 * sigma.dim() as i32) * before;
    let measured_c = if bound > 0.0 { after / bound } else { 0.0 };
    Ok(StabilityReport { before, after, bilip, bound, measured_c })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomeoReport {
    /// sup over the family of |Φ⁻¹(Q)| / |Q|
    pub sup_ratio: f64,
    /// false when the ratio keeps growing as the boxes shrink
    pub bounded: bool,
    /// (box width, max ratio at that width), coarsest first
    pub by_scale: Vec<(f64, f64)>,
}

/// The bounded inverse-volume condition over a 1D sweep: a homeomorphism
/// keeps every A₂ pair bounded exactly when |Φ⁻¹(Q)| ≲ |Q| over all
/// intervals.  The verdict compares the finest scale against the coarsest:
/// growth past a factor of two flags divergence.
pub fn homeo_condition_check(
    phi: &dyn MonotoneMap1D,
    family: &ScanFamily,
) -> Result<HomeoReport, PushError> {
    if family.dim() != 1 {
        return Err(PushError::Unsupported(
            "the inverse-volume sweep is one-dimensional".into(),
        ));
    }
    let mut sup_ratio = 0.0f64;
    let mut widths: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in family.boxes() {
        let width = hi[0] - lo[0];
        let inv_len = phi.inverse(hi[0]) - phi.inverse(lo[0]);
        let ratio = inv_len / width;
        sup_ratio = sup_ratio.max(ratio);
        match widths.iter_mut().find(|(w, _)| *w == width) {
            Some((_, r)) => *r = r.max(ratio),
            None => widths.push((width, ratio)),
        }
    }
    widths.sort_by(|a, b| b.0.total_cmp(&a.0));
    let bounded = match (widths.first(), widths.last()) {
        (Some(&(_, coarse)), Some(&(_, fine))) if widths.len() > 1 => fine <= 2.0 * coarse,
        _ => true,
    };
    Ok(HomeoReport { sup_ratio, bounded, by_scale: widths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::PLMap1D;
    use crate::measure::Atom;

    #[test]
    fn dyadic_family_has_the_full_count() {
        let fam = ScanFamily::dyadic(&Cube::unit(1), 3).unwrap();
        assert_eq!(fam.len(), 1 + 2 + 4 + 8);
        let fam2 = ScanFamily::dyadic(&Cube::unit(2), 2).unwrap();
        assert_eq!(fam2.len(), 1 + 4 + 16);
        assert_eq!(fam2.dim(), 2);
    }

    #[test]
    fn empty_or_ragged_families_are_rejected() {
        assert!(matches!(ScanFamily::from_boxes(vec![]), Err(PushError::EmptyScan)));
        assert!(ScanFamily::from_boxes(vec![(vec![0.0], vec![0.0])]).is_err());
        assert!(
            ScanFamily::from_boxes(vec![(vec![0.0], vec![1.0]), (vec![0.0, 0.0], vec![1.0, 1.0])])
                .is_err()
        );
    }

    #[test]
    fn a2_of_a_point_pair_is_the_smallest_box() {
        let sigma = Measure::atoms(vec![Atom { point: vec![0.25], mass: 1.0 }]).unwrap();
        let omega = Measure::atoms(vec![Atom { point: vec![0.26], mass: 1.0 }]).unwrap();
        let fam = ScanFamily::dyadic(&Cube::unit(1), 2).unwrap();
        // both atoms live in [0.25, 0.5): the quarter-size box wins
        let report =
            a2_stability_check(&sigma, &omega, &MapSpec::Piecewise(PLMap1D::identity()), &fam)
                .unwrap();
        assert_eq!(report.before, 16.0);
        assert_eq!(report.after, 16.0);
    }
}
