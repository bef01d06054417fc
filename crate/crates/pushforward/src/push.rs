use dyadic_core::{Cube, Dyadic, RootBox};
use weights::StepWeight;

use crate::cantor::CantorGrid;
use crate::maps::{MapSpec, PLMap1D, RotationMap, SignedPermutation};
use crate::measure::Measure;
use crate::PushError;

/// Finest grid a re-binned density is allowed to use (cells = 2^depth).
const MAX_REBIN_DEPTH: u32 = 22;

/// The image measure `Φ_*μ`, `Φ_*μ(B) = μ(Φ⁻¹(B))`.
///
/// * atoms move pointwise, masses untouched;
/// * 1D step densities under piecewise-linear maps are re-binned: each
///   per-piece affine image of a source cell is intersected with the target
///   cells, so cell masses are exact up to rounding in the intersections;
/// * densities under quarter-turn composites are permuted cell-for-cell,
///   exactly; general rotations of densities are not supported (they would
///   need resampling);
/// * the Cantor measure passes through maps that fix its support and is
///   rejected otherwise.
pub fn pushforward(mu: &Measure, phi: &MapSpec) -> Result<Measure, PushError> {
    if let MapSpec::Composed(list) = phi {
        let mut out = mu.clone();
        for step in list {
            out = pushforward(&out, step)?;
        }
        return Ok(out);
    }
    if let Some(d) = phi.dim() {
        if d != mu.dim() {
            return Err(PushError::BadMap(format!(
                "map acts on {} coordinates, measure lives in {}",
                d,
                mu.dim()
            )));
        }
    }
    match (mu, phi) {
        // the identity needs no re-binning; this also keeps the "identity
        // changes nothing, exactly" guarantee independent of grid choices
        (_, MapSpec::Piecewise(p)) if p.is_identity() => Ok(mu.clone()),
        (Measure::Atoms(atoms), _) => {
            let moved = atoms
                .iter()
                .map(|a| {
                    Ok(crate::measure::Atom {
                        point: phi.apply_point(&a.point)?,
                        mass: a.mass,
                    })
                })
                .collect::<Result<Vec<_>, PushError>>()?;
            // re-validate: coinciding images mean the map was not injective
            // on the support
            Measure::atoms(moved)
        }
        (Measure::Density(w), MapSpec::Piecewise(p)) => {
            Ok(Measure::Density(rebin_density(w, p)?))
        }
        (Measure::Density(w), MapSpec::Rotation(RotationMap::QuarterTurn(perm))) => {
            Ok(Measure::Density(rotate_density(w, perm)?))
        }
        (Measure::Density(_), MapSpec::Rotation(RotationMap::General(_))) => {
            Err(PushError::Unsupported(
                "general rotations of step densities are not re-binned; use a quarter turn"
                    .into(),
            ))
        }
        (Measure::Cantor { depth }, MapSpec::Piecewise(p)) => {
            if pl_fixes_cantor(p, *depth) {
                Ok(mu.clone())
            } else {
                Err(PushError::Unsupported(
                    "piecewise-linear pushforward of the Cantor measure requires the map to fix \
                     its support"
                        .into(),
                ))
            }
        }
        // a 1D rotation with det 1 is the identity
        (Measure::Cantor { .. }, MapSpec::Rotation(_)) => Ok(mu.clone()),
        (_, MapSpec::Composed(_)) => unreachable!("handled above"),
    }
}

/// True when `phi` is the identity on every surviving stage-`depth` leaf:
/// the leaf endpoints are fixed and so is every breakpoint inside.  Between
/// fixed points a piecewise-linear map is the identity, so this is a proof,
/// not a sample check.
fn pl_fixes_cantor(phi: &PLMap1D, depth: u32) -> bool {
    let grid = CantorGrid::build(depth);
    let bps = phi.breakpoints();
    grid.leaves().iter().all(|&(a, b)| {
        if phi.eval(a) != a || phi.eval(b) != b {
            return false;
        }
        let from = bps.partition_point(|&x| x <= a);
        let to = bps.partition_point(|&x| x < b);
        bps[from..to].iter().all(|&x| phi.eval(x) == x)
    })
}

/// Exact cell permutation of a step density under a signed coordinate
/// permutation.  The result lives on its own (rotated) root box.
fn rotate_density(w: &StepWeight, perm: &SignedPermutation) -> Result<StepWeight, PushError> {
    let n = w.dim();
    let m = w.side_cells();
    let lows: Vec<Dyadic> = (0..n).map(|j| w.root().lower(j)).collect();
    let ups: Vec<Dyadic> = (0..n).map(|j| w.root().upper(j)).collect();
    let corner: Vec<Dyadic> = (0..n)
        .map(|j| {
            let p = perm.source_axis()[j];
            if perm.flip()[j] {
                -ups[p]
            } else {
                lows[p]
            }
        })
        .collect();
    let root = Cube::root_cube(RootBox::new(corner, w.root().side())?);

    let mut values = vec![0.0; w.cells()];
    let mut odo = vec![0usize; n];
    for out_flat in 0..w.cells() {
        let mut src_flat = 0usize;
        // row-major with axis 0 slowest: accumulate in source axis order
        for a in 0..n {
            // find the output axis fed by source axis a
            let j = (0..n).find(|&j| perm.source_axis()[j] == a).unwrap();
            let i = if perm.flip()[j] { m - 1 - odo[j] } else { odo[j] };
            src_flat = src_flat * m + i;
        }
        values[out_flat] = w.values()[src_flat];
        for axis in (0..n).rev() {
            odo[axis] += 1;
            if odo[axis] < m {
                break;
            }
            odo[axis] = 0;
        }
    }
    Ok(StepWeight::new(root, w.depth(), values)?)
}

/// Re-bin a 1D step density through an increasing piecewise-linear map.
///
/// The target grid is chosen automatically: an integer-cornered interval
/// with power-of-two length covering the image, subdivided a couple of
/// levels past the finest image of a source cell.
fn rebin_density(w: &StepWeight, phi: &PLMap1D) -> Result<StepWeight, PushError> {
    if w.dim() != 1 {
        return Err(PushError::Unsupported(
            "piecewise-linear maps act on one-dimensional densities".into(),
        ));
    }
    let m = w.side_cells();
    let lo = w.root().lower(0).to_f64();
    let side = w.root().side().to_f64();
    let h = side / m as f64;

    let ya = phi.eval(lo);
    let yb = phi.eval(lo + side);
    let c0 = ya.floor() as i64;
    let span = ((yb.ceil() as i64) - c0).max(1);
    let mut e = 0u32;
    while (1i64 << e) < span {
        e += 1;
    }
    let side_t = 1i64 << e;
    // target cells at most a quarter of the finest slope-adjusted source cell
    let min_slope = phi.slopes().iter().cloned().fold(f64::MAX, f64::min);
    let dt = (e as f64 + 2.0 - (h * min_slope).log2()).ceil().max(1.0) as u32;
    let dt = dt.min(MAX_REBIN_DEPTH);
    let cells_t = 1usize << dt;
    let h_t = side_t as f64 / cells_t as f64;
    let t_lo = c0 as f64;

    let root = Cube::root_cube(RootBox::new(
        vec![Dyadic::from_int(c0)],
        Dyadic::from_int(side_t),
    )?);

    let bps = phi.breakpoints();
    let mut masses = vec![0.0f64; cells_t];
    for (i, &v) in w.values().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let a = lo + i as f64 * h;
        let b = lo + (i + 1) as f64 * h;
        // split the cell at the map's interior breakpoints, push each piece
        let from = bps.partition_point(|&x| x <= a);
        let to = bps.partition_point(|&x| x < b);
        let mut u = a;
        for stop in bps[from..to].iter().copied().chain(std::iter::once(b)) {
            if stop <= u {
                continue;
            }
            let (yu, yv) = (phi.eval(u), phi.eval(stop));
            let seg_mass = v * (stop - u);
            let width = yv - yu;
            let k_first = (((yu - t_lo) / h_t).floor().max(0.0)) as usize;
            for k in k_first..cells_t {
                let c_lo = t_lo + k as f64 * h_t;
                if c_lo >= yv {
                    break;
                }
                let c_hi = t_lo + (k + 1) as f64 * h_t;
                let cut = (yv.min(c_hi) - yu.max(c_lo)).max(0.0);
                if cut > 0.0 {
                    masses[k] += seg_mass * cut / width;
                }
            }
            u = stop;
        }
    }
    let values: Vec<f64> = masses.into_iter().map(|q| q / h_t).collect();
    Ok(StepWeight::new(root, dt, values)?)
}
