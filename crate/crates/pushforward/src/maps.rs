use serde::{Deserialize, Serialize};

use crate::PushError;

/// A monotone increasing map of the line, with an explicit inverse.
/// Implemented by [`PLMap1D`] and [`PowerMap`]; the inverse-volume
/// condition check works against this trait so it can probe maps that are
/// not piecewise linear.
pub trait MonotoneMap1D {
    fn forward(&self, x: f64) -> f64;
    fn inverse(&self, y: f64) -> f64;
}

// ---------------------------------------------------------------------------
// piecewise-linear maps of the line
// ---------------------------------------------------------------------------

/// A continuous, strictly increasing, piecewise-linear map of ℝ.
///
/// Stored as the graph over its breakpoints plus the two end slopes, so that
/// evaluation at a breakpoint returns the stored image bit-for-bit — the
/// Cantor construction relies on that to land its atoms exactly.  The
/// serialized form is the conventional (breakpoints, slopes, image of the
/// first breakpoint) triple.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PLMapJson", into = "PLMapJson")]
pub struct PLMap1D {
    xs: Vec<f64>,
    ys: Vec<f64>,
    first_slope: f64,
    last_slope: f64,
    identity: bool,
}

#[derive(Serialize, Deserialize, Clone)]
struct PLMapJson {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    image_of_first: f64,
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1]) && xs.iter().all(|x| x.is_finite())
}

impl PLMap1D {
    /// Breakpoints with the slope on each of the `breakpoints.len() + 1`
    /// pieces (unbounded end pieces included) and the image of the first
    /// breakpoint.  Breakpoint images accumulate left to right.
    pub fn new(
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        image_of_first: f64,
    ) -> Result<PLMap1D, PushError> {
        if breakpoints.is_empty() {
            return Err(PushError::BadMap("need at least one breakpoint".into()));
        }
        if slopes.len() != breakpoints.len() + 1 {
            return Err(PushError::BadMap(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            )));
        }
        if !strictly_increasing(&breakpoints) {
            return Err(PushError::BadMap("breakpoints must increase strictly".into()));
        }
        if !slopes.iter().all(|s| s.is_finite() && *s > 0.0) {
            return Err(PushError::BadMap("slopes must be positive".into()));
        }
        if !image_of_first.is_finite() {
            return Err(PushError::BadMap("image of first breakpoint must be finite".into()));
        }
        let mut ys = Vec::with_capacity(breakpoints.len());
        ys.push(image_of_first);
        for i in 1..breakpoints.len() {
            let rise = slopes[i] * (breakpoints[i] - breakpoints[i - 1]);
            ys.push(ys[i - 1] + rise);
        }
        let first_slope = slopes[0];
        let last_slope = *slopes.last().unwrap();
        Self::from_parts(breakpoints, ys, first_slope, last_slope)
    }

    /// Builds from exact graph points `(x, φ(x))` plus the end slopes.  Use
    /// this when particular images must be hit bit-for-bit.
    pub fn from_graph(
        points: &[(f64, f64)],
        first_slope: f64,
        last_slope: f64,
    ) -> Result<PLMap1D, PushError> {
        if points.is_empty() {
            return Err(PushError::BadMap("need at least one graph point".into()));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        if !(first_slope.is_finite() && first_slope > 0.0 && last_slope.is_finite() && last_slope > 0.0)
        {
            return Err(PushError::BadMap("end slopes must be positive".into()));
        }
        Self::from_parts(xs, ys, first_slope, last_slope)
    }

    fn from_parts(
        xs: Vec<f64>,
        ys: Vec<f64>,
        first_slope: f64,
        last_slope: f64,
    ) -> Result<PLMap1D, PushError> {
        if !strictly_increasing(&xs) || !strictly_increasing(&ys) {
            return Err(PushError::BadMap(
                "graph must be strictly increasing in both coordinates".into(),
            ));
        }
        let identity = xs == ys && first_slope == 1.0 && last_slope == 1.0;
        Ok(PLMap1D { xs, ys, first_slope, last_slope, identity })
    }

    pub fn identity() -> PLMap1D {
        PLMap1D::new(vec![0.0], vec![1.0, 1.0], 0.0).unwrap()
    }

    /// `x ↦ scale·x + offset` with `scale > 0`.
    pub fn affine(scale: f64, offset: f64) -> Result<PLMap1D, PushError> {
        PLMap1D::new(vec![0.0], vec![scale, scale], offset)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.xs
    }

    pub fn images(&self) -> &[f64] {
        &self.ys
    }

    /// Per-piece slopes, end pieces first and last.
    pub fn slopes(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.xs.len() + 1);
        out.push(self.first_slope);
        for i in 1..self.xs.len() {
            out.push((self.ys[i] - self.ys[i - 1]) / (self.xs[i] - self.xs[i - 1]));
        }
        out.push(self.last_slope);
        out
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.identity {
            return x;
        }
        let i = self.xs.partition_point(|&b| b <= x);
        if i == 0 {
            self.ys[0] + self.first_slope * (x - self.xs[0])
        } else if i == self.xs.len() {
            let l = self.xs.len() - 1;
            self.ys[l] + self.last_slope * (x - self.xs[l])
        } else {
            let s = (self.ys[i] - self.ys[i - 1]) / (self.xs[i] - self.xs[i - 1]);
            self.ys[i - 1] + s * (x - self.xs[i - 1])
        }
    }

    pub fn invert(&self, y: f64) -> f64 {
        if self.identity {
            return y;
        }
        let i = self.ys.partition_point(|&b| b <= y);
        if i == 0 {
            self.xs[0] + (y - self.ys[0]) / self.first_slope
        } else if i == self.ys.len() {
            let l = self.ys.len() - 1;
            self.xs[l] + (y - self.ys[l]) / self.last_slope
        } else {
            let s = (self.ys[i] - self.ys[i - 1]) / (self.xs[i] - self.xs[i - 1]);
            self.xs[i - 1] + (y - self.ys[i - 1]) / s
        }
    }

    /// Lipschitz constant of the map plus that of its inverse:
    /// `sup slope + sup 1/slope`.
    pub fn bilip_norm(&self) -> f64 {
        let slopes = self.slopes();
        let sup = slopes.iter().cloned().fold(f64::MIN, f64::max);
        let sup_inv = slopes.iter().map(|s| 1.0 / s).fold(f64::MIN, f64::max);
        sup + sup_inv
    }
}

impl MonotoneMap1D for PLMap1D {
    fn forward(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn inverse(&self, y: f64) -> f64 {
        self.invert(y)
    }
}

impl TryFrom<PLMapJson> for PLMap1D {
    type Error = PushError;

    fn try_from(j: PLMapJson) -> Result<PLMap1D, PushError> {
        PLMap1D::new(j.breakpoints, j.slopes, j.image_of_first)
    }
}

impl From<PLMap1D> for PLMapJson {
    fn from(m: PLMap1D) -> PLMapJson {
        PLMapJson {
            slopes: m.slopes(),
            image_of_first: m.ys[0],
            breakpoints: m.xs,
        }
    }
}

/// `x ↦ sgn(x)·|x|^p`, the standard example of a homeomorphism that fails
/// the bounded inverse-volume condition when `p > 1` (inverse images of
/// small intervals at the origin are far too long).
#[derive(Clone, Copy, Debug)]
pub struct PowerMap {
    exponent: f64,
}

impl PowerMap {
    pub fn new(exponent: f64) -> Result<PowerMap, PushError> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(PushError::BadMap(format!("power map exponent {exponent} must be positive")));
        }
        Ok(PowerMap { exponent })
    }
}

impl MonotoneMap1D for PowerMap {
    fn forward(&self, x: f64) -> f64 {
        x.signum() * x.abs().powf(self.exponent)
    }

    fn inverse(&self, y: f64) -> f64 {
        y.signum() * y.abs().powf(1.0 / self.exponent)
    }
}

// ---------------------------------------------------------------------------
// rotations
// ---------------------------------------------------------------------------

/// A composite of quarter turns: each output axis is a signed input axis,
/// `y_j = ±x_{source_axis[j]}`, with overall determinant +1.  These are the
/// rotations that act on dyadic grids without resampling.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SignedPermJson", into = "SignedPermJson")]
pub struct SignedPermutation {
    source_axis: Vec<usize>,
    flip: Vec<bool>,
}

#[derive(Serialize, Deserialize, Clone)]
struct SignedPermJson {
    source_axis: Vec<usize>,
    flip: Vec<bool>,
}

fn permutation_sign(perm: &[usize]) -> i32 {
    let mut seen = vec![false; perm.len()];
    let mut sign = 1;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

impl SignedPermutation {
    pub fn new(source_axis: Vec<usize>, flip: Vec<bool>) -> Result<SignedPermutation, PushError> {
        let n = source_axis.len();
        if n == 0 || flip.len() != n {
            return Err(PushError::BadMap("axis and flip lists must match and be nonempty".into()));
        }
        let mut hit = vec![false; n];
        for &a in &source_axis {
            if a >= n || hit[a] {
                return Err(PushError::BadMap("source axes must form a permutation".into()));
            }
            hit[a] = true;
        }
        let det = permutation_sign(&source_axis)
            * if flip.iter().filter(|f| **f).count() % 2 == 0 { 1 } else { -1 };
        if det != 1 {
            return Err(PushError::BadMap("signed permutation must have determinant +1".into()));
        }
        Ok(SignedPermutation { source_axis, flip })
    }

    /// The planar quarter turn `(x₁, x₂) ↦ (−x₂, x₁)`.
    pub fn rot90() -> SignedPermutation {
        SignedPermutation::new(vec![1, 0], vec![true, false]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.source_axis.len()
    }

    pub fn source_axis(&self) -> &[usize] {
        &self.source_axis
    }

    pub fn flip(&self) -> &[bool] {
        &self.flip
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim());
        (0..self.dim())
            .map(|j| {
                let v = x[self.source_axis[j]];
                if self.flip[j] {
                    -v
                } else {
                    v
                }
            })
            .collect()
    }

    pub fn inverse(&self) -> SignedPermutation {
        let n = self.dim();
        let mut source_axis = vec![0usize; n];
        let mut flip = vec![false; n];
        for j in 0..n {
            source_axis[self.source_axis[j]] = j;
            flip[self.source_axis[j]] = self.flip[j];
        }
        SignedPermutation { source_axis, flip }
    }

    /// `self ∘ inner` — apply `inner` first.  Exact: indices and sign bits
    /// only, no floating arithmetic.
    pub fn compose(&self, inner: &SignedPermutation) -> SignedPermutation {
        assert_eq!(self.dim(), inner.dim(), "composition needs equal dimensions");
        let n = self.dim();
        let mut source_axis = vec![0usize; n];
        let mut flip = vec![false; n];
        for j in 0..n {
            let mid = self.source_axis[j];
            source_axis[j] = inner.source_axis[mid];
            flip[j] = self.flip[j] ^ inner.flip[mid];
        }
        SignedPermutation { source_axis, flip }
    }

    pub fn matrix(&self) -> Vec<f64> {
        let n = self.dim();
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            m[j * n + self.source_axis[j]] = if self.flip[j] { -1.0 } else { 1.0 };
        }
        m
    }
}

impl TryFrom<SignedPermJson> for SignedPermutation {
    type Error = PushError;

    fn try_from(j: SignedPermJson) -> Result<SignedPermutation, PushError> {
        SignedPermutation::new(j.source_axis, j.flip)
    }
}

impl From<SignedPermutation> for SignedPermJson {
    fn from(p: SignedPermutation) -> SignedPermJson {
        SignedPermJson { source_axis: p.source_axis, flip: p.flip }
    }
}

/// A rotation of ℝⁿ: orthogonal with determinant one.  Quarter-turn
/// composites keep their combinatorial form so grids transform exactly;
/// everything else stores the matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMap {
    QuarterTurn(SignedPermutation),
    General(GeneralRotation),
}

/// Validated orthogonal matrix with det +1, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "GeneralJson", into = "GeneralJson")]
pub struct GeneralRotation {
    dim: usize,
    matrix: Vec<f64>,
}

#[derive(Serialize, Deserialize, Clone)]
struct GeneralJson {
    dim: usize,
    matrix: Vec<f64>,
}

fn determinant(dim: usize, m: &[f64]) -> f64 {
    // Gaussian elimination with partial pivoting on a scratch copy
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&i, &j| a[i * dim + col].abs().total_cmp(&a[j * dim + col].abs()))
            .unwrap();
        if a[pivot * dim + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..dim {
                a.swap(pivot * dim + k, col * dim + k);
            }
            det = -det;
        }
        det *= a[col * dim + col];
        for row in col + 1..dim {
            let f = a[row * dim + col] / a[col * dim + col];
            for k in col..dim {
                a[row * dim + k] -= f * a[col * dim + k];
            }
        }
    }
    det
}

impl GeneralRotation {
    pub fn new(dim: usize, matrix: Vec<f64>) -> Result<GeneralRotation, PushError> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(PushError::BadMap(format!(
                "rotation matrix must be {dim}x{dim}, got {} entries",
                matrix.len()
            )));
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(PushError::BadMap("rotation matrix has non-finite entries".into()));
        }
        for i in 0..dim {
            for j in 0..dim {
                let dot: f64 = (0..dim).map(|k| matrix[i * dim + k] * matrix[j * dim + k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot - want).abs() > 1e-10 {
                    return Err(PushError::BadMap(format!(
                        "matrix is not orthogonal: row {i}·row {j} = {dot}"
                    )));
                }
            }
        }
        let det = determinant(dim, &matrix);
        if (det - 1.0).abs() > 1e-9 {
            return Err(PushError::BadMap(format!("rotation must have det 1, got {det}")));
        }
        Ok(GeneralRotation { dim, matrix })
    }

    /// Plane rotation of ℝ² by `theta`.
    pub fn planar(theta: f64) -> GeneralRotation {
        let (s, c) = theta.sin_cos();
        GeneralRotation { dim: 2, matrix: vec![c, -s, s, c] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|k| self.matrix[i * self.dim + k] * x[k]).sum())
            .collect()
    }

    /// Inverse = transpose for an orthogonal matrix.
    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|k| self.matrix[k * self.dim + i] * y[k]).sum())
            .collect()
    }
}

impl TryFrom<GeneralJson> for GeneralRotation {
    type Error = PushError;

    fn try_from(j: GeneralJson) -> Result<GeneralRotation, PushError> {
        GeneralRotation::new(j.dim, j.matrix)
    }
}

impl From<GeneralRotation> for GeneralJson {
    fn from(r: GeneralRotation) -> GeneralJson {
        GeneralJson { dim: r.dim, matrix: r.matrix }
    }
}

impl RotationMap {
    pub fn dim(&self) -> usize {
        match self {
            RotationMap::QuarterTurn(p) => p.dim(),
            RotationMap::General(g) => g.dim(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            RotationMap::QuarterTurn(p) => p.apply(x),
            RotationMap::General(g) => g.apply(x),
        }
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        match self {
            RotationMap::QuarterTurn(p) => p.inverse().apply(y),
            RotationMap::General(g) => g.apply_inverse(y),
        }
    }
}

// ---------------------------------------------------------------------------
// the map algebra fed to `pushforward`
// ---------------------------------------------------------------------------

/// The maps a measure can be pushed through.  `Composed` applies its members
/// left to right, so `Composed([f, g])` is `g ∘ f`; composition therefore
/// acts on atoms exactly as the sequence of individual pushforwards.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSpec {
    Piecewise(PLMap1D),
    Rotation(RotationMap),
    Composed(Vec<MapSpec>),
}

impl MapSpec {
    /// Dimension the map acts on, if determined (`Composed([])` has none).
    pub fn dim(&self) -> Option<usize> {
        match self {
            MapSpec::Piecewise(_) => Some(1),
            MapSpec::Rotation(r) => Some(r.dim()),
            MapSpec::Composed(list) => list.iter().find_map(|m| m.dim()),
        }
    }

    pub fn apply_point(&self, x: &[f64]) -> Result<Vec<f64>, PushError> {
        match self {
            MapSpec::Piecewise(p) => {
                if x.len() != 1 {
                    return Err(PushError::BadMap(format!(
                        "piecewise-linear map is one-dimensional, point has {} coordinates",
                        x.len()
                    )));
                }
                Ok(vec![p.eval(x[0])])
            }
            MapSpec::Rotation(r) => {
                if x.len() != r.dim() {
                    return Err(PushError::BadMap(format!(
                        "rotation acts on {} coordinates, point has {}",
                        r.dim(),
                        x.len()
                    )));
                }
                Ok(r.apply(x))
            }
            MapSpec::Composed(list) => {
                let mut point = x.to_vec();
                for m in list {
                    point = m.apply_point(&point)?;
                }
                Ok(point)
            }
        }
    }

    /// Image of the axis-aligned box `[lo, hi)` as an axis-aligned box.
    /// Defined for maps that carry boxes to boxes: piecewise-linear maps and
    /// quarter-turn composites (general rotations tilt the box).
    pub fn map_box(&self, lo: &[f64], hi: &[f64]) -> Result<(Vec<f64>, Vec<f64>), PushError> {
        match self {
            MapSpec::Piecewise(p) => {
                if lo.len() != 1 {
                    return Err(PushError::BadMap("piecewise-linear map is one-dimensional".into()));
                }
                Ok((vec![p.eval(lo[0])], vec![p.eval(hi[0])]))
            }
            MapSpec::Rotation(RotationMap::QuarterTurn(perm)) => {
                let a = perm.apply(lo);
                let b = perm.apply(hi);
                let lo2: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
                let hi2: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
                Ok((lo2, hi2))
            }
            MapSpec::Rotation(RotationMap::General(_)) => Err(PushError::Unsupported(
                "general rotations do not carry axis boxes to axis boxes".into(),
            )),
            MapSpec::Composed(list) => {
                let mut cur = (lo.to_vec(), hi.to_vec());
                for m in list {
                    cur = m.map_box(&cur.0, &cur.1)?;
                }
                Ok(cur)
            }
        }
    }

    /// The biLipschitz norm (Lipschitz constant of the map plus that of its
    /// inverse).  For compositions this is the submultiplicative upper
    /// bound, the product of the members' norms.
    pub fn bilip_norm(&self) -> f64 {
        match self {
            MapSpec::Piecewise(p) => p.bilip_norm(),
            // both Lipschitz constants of a rotation are 1
            MapSpec::Rotation(_) => 2.0,
            MapSpec::Composed(list) => list.iter().map(|m| m.bilip_norm()).product(),
        }
    }

    pub fn then(self, next: MapSpec) -> MapSpec {
        match self {
            MapSpec::Composed(mut list) => {
                list.push(next);
                MapSpec::Composed(list)
            }
            first => MapSpec::Composed(vec![first, next]),
        }
    }
}
