use crate::cube::Cube;
use crate::GridError;

/// Axis-parallel box with floating-point corners, used for halo regions
/// (their corners involve the real band width δ·ℓ(P)).
#[derive(Clone, Debug, PartialEq)]
pub struct BoxF {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxF {
    pub fn volume(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a).max(0.0))
            .product()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(a, b)| b <= a)
    }
}

/// Halo of P at relative width δ.
#[derive(Clone, Debug)]
pub struct HaloRegions {
    /// Inner halo: points of P within δ·ℓ(P) of the boundary of P,
    /// as pairwise disjoint boxes.
    pub inner: Vec<BoxF>,
    /// Q-extended halo: points of Q some coordinate of which is within
    /// δ·ℓ(P) of the matching edge interval of P, as pairwise disjoint boxes.
    pub extended: Vec<BoxF>,
    /// Absolute band width δ·ℓ(P).
    pub band: f64,
}

fn interval_intersection(a: (f64, f64), b: (f64, f64)) -> Option<(f64, f64)> {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1);
    (lo < hi).then_some((lo, hi))
}

/// Decomposes { x in frame : exists j with x_j in bad_j } into disjoint
/// boxes by the first bad axis: good_1 × .. × good_{j−1} × bad_j × frame_rest.
fn first_bad_axis_boxes(
    frame: &[(f64, f64)],
    bad: &[Vec<(f64, f64)>],
    good: &[Vec<(f64, f64)>],
) -> Vec<BoxF> {
    let dim = frame.len();
    let mut out = Vec::new();
    for j in 0..dim {
        // All combinations of good intervals on axes < j, bad on axis j.
        let mut partial: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
        for axis_good in good.iter().take(j) {
            let mut next = Vec::new();
            for pre in &partial {
                for &g in axis_good {
                    let mut row = pre.clone();
                    row.push(g);
                    next.push(row);
                }
            }
            partial = next;
        }
        for pre in partial {
            for &b in &bad[j] {
                let mut lo: Vec<f64> = pre.iter().map(|iv| iv.0).collect();
                let mut hi: Vec<f64> = pre.iter().map(|iv| iv.1).collect();
                lo.push(b.0);
                hi.push(b.1);
                for frame_iv in frame.iter().skip(j + 1) {
                    lo.push(frame_iv.0);
                    hi.push(frame_iv.1);
                }
                let bx = BoxF { lo, hi };
                if !bx.is_empty() {
                    out.push(bx);
                }
            }
        }
    }
    out
}

/// Computes the inner halo of P and the Q-extended halo, both as disjoint
/// unions of axis-parallel boxes. Requires 0 < δ < 1/2 and P ⊆ Q.
pub fn halo(p: &Cube, delta: f64, q: &Cube) -> Result<HaloRegions, GridError> {
    if !(0.0 < delta && delta < 0.5) {
        return Err(GridError::BadHaloWidth { delta });
    }
    if !q.contains_cube(p) {
        return Err(GridError::BadIndex(format!("halo frame {q} does not contain {p}")));
    }
    let dim = p.dim();
    let band = delta * p.side().to_f64();

    // Inner halo: within P, some coordinate within band of the faces of P.
    let p_frame: Vec<(f64, f64)> = (0..dim)
        .map(|j| (p.lower(j).to_f64(), p.upper(j).to_f64()))
        .collect();
    let inner_bad: Vec<Vec<(f64, f64)>> = p_frame
        .iter()
        .map(|&(lo, hi)| vec![(lo, lo + band), (hi - band, hi)])
        .collect();
    let inner_good: Vec<Vec<(f64, f64)>> = p_frame
        .iter()
        .map(|&(lo, hi)| vec![(lo + band, hi - band)])
        .collect();
    let inner = first_bad_axis_boxes(&p_frame, &inner_bad, &inner_good);

    // Extended halo: within Q, per-coordinate distance to the endpoints of
    // the edge interval P_j below band, any axis.
    let q_frame: Vec<(f64, f64)> = (0..dim)
        .map(|j| (q.lower(j).to_f64(), q.upper(j).to_f64()))
        .collect();
    let mut ext_bad = Vec::with_capacity(dim);
    let mut ext_good = Vec::with_capacity(dim);
    for j in 0..dim {
        let (plo, phi) = p_frame[j];
        let near: Vec<(f64, f64)> = [(plo - band, plo + band), (phi - band, phi + band)]
            .iter()
            .filter_map(|&iv| interval_intersection(iv, q_frame[j]))
            .collect();
        // Complement of the near-set within Q_j.
        let mut far = Vec::new();
        let mut cursor = q_frame[j].0;
        for &(lo, hi) in &near {
            if cursor < lo {
                far.push((cursor, lo));
            }
            cursor = cursor.max(hi);
        }
        if cursor < q_frame[j].1 {
            far.push((cursor, q_frame[j].1));
        }
        ext_bad.push(near);
        ext_good.push(far);
    }
    let extended = first_bad_axis_boxes(&q_frame, &ext_bad, &ext_good);

    Ok(HaloRegions { inner, extended, band })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_volume(boxes: &[BoxF]) -> f64 {
        boxes.iter().map(BoxF::volume).sum()
    }

    fn disjoint(boxes: &[BoxF]) -> bool {
        for (i, a) in boxes.iter().enumerate() {
            for b in boxes.iter().skip(i + 1) {
                let overlaps = a
                    .lo
                    .iter()
                    .zip(&a.hi)
                    .zip(b.lo.iter().zip(&b.hi))
                    .all(|((alo, ahi), (blo, bhi))| alo.max(*blo) < ahi.min(*bhi));
                if overlaps {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn unit_square_inner_mass() {
        let p = Cube::unit(2);
        let h = halo(&p, 0.1, &p).unwrap();
        assert!((total_volume(&h.inner) - 0.36).abs() < 1e-12, "1 - 0.8^2 = 0.36");
        assert!(disjoint(&h.inner));
    }

    #[test]
    fn extended_interval_example() {
        // P = [0,1), Q = [-1,2): extended halo (-0.1,0.1) ∪ (0.9,1.1).
        let q: Cube = "d:1 l:0 i:0 root:-1;3".parse().unwrap();
        let kids = q.grandchildren(0).unwrap();
        assert_eq!(kids.len(), 1);
        let p: Cube = "d:1 l:0 i:0 root:0;1".parse().unwrap();
        let h = halo(&p, 0.1, &q).unwrap();
        let mut ivs: Vec<(f64, f64)> = h.extended.iter().map(|b| (b.lo[0], b.hi[0])).collect();
        ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(ivs.len(), 2);
        assert!((ivs[0].0 - -0.1).abs() < 1e-12 && (ivs[0].1 - 0.1).abs() < 1e-12);
        assert!((ivs[1].0 - 0.9).abs() < 1e-12 && (ivs[1].1 - 1.1).abs() < 1e-12);
    }

    #[test]
    fn monotone_in_delta() {
        let p = Cube::unit(3);
        let small = total_volume(&halo(&p, 0.05, &p).unwrap().inner);
        let large = total_volume(&halo(&p, 0.2, &p).unwrap().inner);
        assert!(small < large);
        assert!(halo(&p, 0.6, &p).is_err());
        assert!(halo(&p, 0.0, &p).is_err());
    }
}
