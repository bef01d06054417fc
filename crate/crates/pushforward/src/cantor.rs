use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::maps::{MapSpec, PLMap1D};
use crate::measure::{Atom, Measure};
use crate::push::pushforward;
use crate::PushError;

/// A component removed at stage `stage` of the middle-thirds construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap {
    pub stage: u32,
    pub lo: f64,
    pub hi: f64,
}

/// The finite middle-thirds scaffold on `[0,1]`: the `2^depth` surviving
/// leaves and every gap removed on the way down, stage by stage.
///
/// All endpoints derive from one pass of the same arithmetic, so a gap
/// endpoint and the adjacent leaf endpoint are the same float, bit for bit —
/// the exactness claims downstream depend on that.
#[derive(Clone, Debug)]
pub struct CantorGrid {
    depth: u32,
    leaves: Vec<(f64, f64)>,
    gaps: Vec<Gap>,
}

impl CantorGrid {
    pub fn build(depth: u32) -> CantorGrid {
        let mut leaves = vec![(0.0f64, 1.0f64)];
        let mut gaps = Vec::new();
        for k in 1..=depth {
            let len = 3f64.powi(-(k as i32));
            let mut next = Vec::with_capacity(2 * leaves.len());
            for &(a, b) in &leaves {
                next.push((a, a + len));
                next.push((b - len, b));
                gaps.push(Gap { stage: k, lo: a + len, hi: b - len });
            }
            leaves = next;
        }
        CantorGrid { depth, leaves, gaps }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Surviving stage-`depth` intervals, left to right.
    pub fn leaves(&self) -> &[(f64, f64)] {
        &self.leaves
    }

    /// Removed components in stage-major order; `2^{k-1}` of them at stage `k`.
    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }
}

/// How much mass the atom in each stage-`k` gap carries.  The source
/// construction leaves this open, so it is configuration here; the default
/// spends a `4^{-k}` budget per stage, split evenly over that stage's gaps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageMassRule {
    /// mass `4^{-k} / 2^{k-1}` per stage-`k` gap
    GeometricFourth,
    /// every gap carries the same mass, `1 / (2^depth - 1)`
    EqualPerGap,
}

impl StageMassRule {
    pub fn per_gap_mass(&self, stage: u32, depth: u32) -> f64 {
        match self {
            StageMassRule::GeometricFourth => {
                0.25f64.powi(stage as i32) / 2f64.powi(stage as i32 - 1)
            }
            StageMassRule::EqualPerGap => 1.0 / (2f64.powi(depth as i32) - 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CantorDemoConfig {
    pub depth: u32,
    /// relative atom position inside every gap
    pub placement: f64,
    /// where the perturbed twin puts its atoms
    pub perturbed_placement: f64,
    /// open admissible interval for both placements
    pub band: (f64, f64),
    pub mass_rule: StageMassRule,
}

impl CantorDemoConfig {
    pub fn new(depth: u32, placement: f64, perturbed_placement: f64) -> CantorDemoConfig {
        CantorDemoConfig {
            depth,
            placement,
            perturbed_placement,
            band: (0.1, 0.9),
            mass_rule: StageMassRule::GeometricFourth,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CantorDemoReport {
    pub depth: u32,
    pub atom_count: usize,
    pub sigma_mass: f64,
    /// biLipschitz norm of the constructed gap map
    pub bilip: f64,
    /// the map carried the base atoms onto the perturbed atoms bit-for-bit
    pub sigma_matches_exactly: bool,
    /// the map left the Cantor measure untouched
    pub omega_fixed_exactly: bool,
    /// Hilbert testing value of the base pair
    pub testing_base: f64,
    /// Hilbert testing value of the perturbed pair
    pub testing_perturbed: f64,
}

/// Upper bound on the gap-map biLipschitz norm in terms of the band alone:
/// every piece has slope between the extreme placement ratios.
pub fn band_bilip_bound(band: (f64, f64)) -> f64 {
    let (c1, c2) = band;
    let sup = (c2 / c1).max((1.0 - c1) / (1.0 - c2));
    2.0 * sup
}

/// The two atom measures, the common Cantor measure, and the gap map that
/// carries one onto the other.
pub fn cantor_pair(
    cfg: &CantorDemoConfig,
) -> Result<(Measure, Measure, Measure, PLMap1D), PushError> {
    if cfg.depth == 0 || cfg.depth > 12 {
        return Err(PushError::BadMeasure(format!("demo depth {} outside 1..=12", cfg.depth)));
    }
    let (c1, c2) = cfg.band;
    if !(0.0 < c1 && c1 < c2 && c2 < 1.0) {
        return Err(PushError::BadPlacement(format!("band ({c1}, {c2}) is not a subinterval of (0,1)")));
    }
    for c in [cfg.placement, cfg.perturbed_placement] {
        if !(c.is_finite() && c1 < c && c < c2) {
            return Err(PushError::BadPlacement(format!("placement {c} outside ({c1}, {c2})")));
        }
    }

    let grid = CantorGrid::build(cfg.depth);
    let place = |c: f64| -> Vec<Atom> {
        grid.gaps()
            .iter()
            .map(|g| Atom {
                point: vec![g.lo + c * (g.hi - g.lo)],
                mass: cfg.mass_rule.per_gap_mass(g.stage, cfg.depth),
            })
            .collect()
    };
    let base = place(cfg.placement);
    let perturbed = place(cfg.perturbed_placement);

    // graph of Φ: gap endpoints fixed, base atom sent to the perturbed atom,
    // identity elsewhere
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(3 * grid.gaps().len());
    for (g, (zb, zp)) in grid.gaps().iter().zip(base.iter().zip(&perturbed)) {
        points.push((g.lo, g.lo));
        points.push((zb.point[0], zp.point[0]));
        points.push((g.hi, g.hi));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let phi = PLMap1D::from_graph(&points, 1.0, 1.0)?;

    let sigma = Measure::atoms(base)?;
    let sigma_perturbed = Measure::atoms(perturbed)?;
    let omega = Measure::cantor(cfg.depth)?;
    Ok((sigma, sigma_perturbed, omega, phi))
}

/// Builds the gap-atom pair, verifies that the explicit biLipschitz map
/// pushes `(σ, ω)` onto `(σ̈, ω)` exactly, and reports finite-depth Hilbert
/// testing values for both pairs.
pub fn cantor_instability_demo(cfg: &CantorDemoConfig) -> Result<CantorDemoReport, PushError> {
    let (sigma, sigma_perturbed, omega, phi) = cantor_pair(cfg)?;
    let grid = CantorGrid::build(cfg.depth);
    let spec = MapSpec::Piecewise(phi.clone());

    let pushed_sigma = pushforward(&sigma, &spec)?;
    let sigma_matches_exactly = match (&pushed_sigma, &sigma_perturbed) {
        (Measure::Atoms(a), Measure::Atoms(b)) => a == b,
        _ => false,
    };
    let omega_fixed_exactly = matches!(
        pushforward(&omega, &spec),
        Ok(Measure::Cantor { depth }) if depth == cfg.depth
    );

    let testing_base = hilbert_testing(sigma.as_atoms().unwrap(), &grid);
    let testing_perturbed = hilbert_testing(sigma_perturbed.as_atoms().unwrap(), &grid);

    Ok(CantorDemoReport {
        depth: cfg.depth,
        atom_count: grid.gaps().len(),
        sigma_mass: sigma.total_mass(),
        bilip: phi.bilip_norm(),
        sigma_matches_exactly,
        omega_fixed_exactly,
        testing_base,
        testing_perturbed,
    })
}

/// `(1/|σ|) ∫ |H σ|² dω` at truncation depth: the field of the atom sum
/// `Hσ(x) = (1/π) Σ m_j/(x - z_j)` integrated leaf by leaf against the
/// uniform leaf masses.  Atoms sit in gaps, leaves are closed intervals
/// disjoint from them, so the integrand is smooth on each leaf.
fn hilbert_testing(atoms: &[Atom], grid: &CantorGrid) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
    let total: f64 = atoms.iter().map(|a| a.mass).sum();
    let leaf_mass = 0.5f64.powi(grid.depth() as i32);
    let field = |x: f64| -> f64 {
        let s: f64 = atoms.iter().map(|a| a.mass / (x - a.point[0])).sum();
        s / std::f64::consts::PI
    };
    let integral: f64 = grid
        .leaves()
        .iter()
        .map(|&(a, b)| leaf_mass / (b - a) * rule.integrate(a, b, |x| field(x).powi(2)))
        .sum();
    integral / total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_leaves_and_gaps() {
        let grid = CantorGrid::build(5);
        assert_eq!(grid.leaves().len(), 32);
        assert_eq!(grid.gaps().len(), 31);
        for k in 1..=5 {
            let at_stage = grid.gaps().iter().filter(|g| g.stage == k).count();
            assert_eq!(at_stage, 1usize << (k - 1));
        }
        // stage-k gaps have length 3^{-k} up to accumulated rounding
        for g in grid.gaps() {
            let want = 3f64.powi(-(g.stage as i32));
            assert!(((g.hi - g.lo) - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn gap_endpoints_reappear_as_leaf_endpoints() {
        let grid = CantorGrid::build(6);
        for g in grid.gaps() {
            // bitwise: same arithmetic produced both
            assert!(grid.leaves().iter().any(|&(_, b)| b == g.lo));
            assert!(grid.leaves().iter().any(|&(a, _)| a == g.hi));
        }
    }

    #[test]
    fn mass_rules_are_normalizable() {
        // geometric budget: stage k contributes 4^{-k} in total
        let grid = CantorGrid::build(8);
        let total: f64 = grid
            .gaps()
            .iter()
            .map(|g| StageMassRule::GeometricFourth.per_gap_mass(g.stage, 8))
            .sum();
        let want = (1.0 - 0.25f64.powi(8)) / 3.0;
        assert!((total - want).abs() < 1e-14);

        let equal: f64 = grid
            .gaps()
            .iter()
            .map(|g| StageMassRule::EqualPerGap.per_gap_mass(g.stage, 8))
            .sum();
        assert!((equal - 1.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_band_placements_are_rejected() {
        let cfg = CantorDemoConfig::new(4, 0.95, 0.5);
        assert!(matches!(cantor_pair(&cfg), Err(PushError::BadPlacement(_))));
        let cfg = CantorDemoConfig::new(4, 0.5, 0.05);
        assert!(matches!(cantor_pair(&cfg), Err(PushError::BadPlacement(_))));
        let mut cfg = CantorDemoConfig::new(4, 0.5, 0.3);
        cfg.band = (0.8, 0.2);
        assert!(matches!(cantor_pair(&cfg), Err(PushError::BadPlacement(_))));
        assert!(cantor_pair(&CantorDemoConfig::new(13, 0.5, 0.3)).is_err());
    }
}
