use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::dyadic::Dyadic;
use crate::GridError;

/// The finite reference box every grid lives in: corner + side length.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RootBox {
    pub corner: Vec<Dyadic>,
    pub side: Dyadic,
}

impl RootBox {
    pub fn new(corner: Vec<Dyadic>, side: Dyadic) -> Result<Self, GridError> {
        if corner.is_empty() {
            return Err(GridError::BadRoot("root box needs at least one axis".into()));
        }
        if !side.is_positive() {
            return Err(GridError::BadRoot(format!("root side must be positive, got {side}")));
        }
        Ok(RootBox { corner, side })
    }

    /// `[0,1)^dim`.
    pub fn unit(dim: usize) -> Self {
        RootBox { corner: vec![Dyadic::ZERO; dim], side: Dyadic::ONE }
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }
}

/// One step of descent: bit j set means the upper half along axis j.
/// In the plane (axis 0 = x1 pointing east, axis 1 = x2 pointing north)
/// the four values display as SW, SE, NW, NE.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Location(pub u32);

impl Location {
    pub fn upper(&self, axis: usize) -> bool {
        self.0 >> axis & 1 == 1
    }

    /// Compass label, defined for dimension 2 only.
    pub fn label_2d(&self) -> &'static str {
        match self.0 & 3 {
            0 => "SW",
            1 => "SE",
            2 => "NW",
            _ => "NE",
        }
    }

    pub fn from_label_2d(label: &str) -> Option<Location> {
        match label {
            "SW" => Some(Location(0)),
            "SE" => Some(Location(1)),
            "NW" => Some(Location(2)),
            "NE" => Some(Location(3)),
            _ => None,
        }
    }
}

/// Sequence of child positions from an ancestor down to a cube.
pub type LocationVector = Vec<Location>;

/// Half-open dyadic cube `Q` at `level` below its root box, identified by an
/// index vector with entries `< 2^level`. Immutable; all geometry is exact.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Cube {
    root: Arc<RootBox>,
    level: u32,
    index: Vec<u64>,
}

impl Cube {
    pub fn root_cube(root: RootBox) -> Cube {
        let dim = root.dim();
        Cube { root: Arc::new(root), level: 0, index: vec![0; dim] }
    }

    /// The unit cube `[0,1)^dim` as its own root.
    pub fn unit(dim: usize) -> Cube {
        Cube::root_cube(RootBox::unit(dim))
    }

    pub fn new(root: Arc<RootBox>, level: u32, index: Vec<u64>) -> Result<Cube, GridError> {
        if index.len() != root.dim() {
            return Err(GridError::BadIndex(format!(
                "index has {} entries for a {}-dimensional root",
                index.len(),
                root.dim()
            )));
        }
        if level >= 63 {
            return Err(GridError::ResolutionOverflow { level });
        }
        let cap = 1u64 << level;
        if let Some(bad) = index.iter().find(|&&i| i >= cap) {
            return Err(GridError::BadIndex(format!("index entry {bad} out of range at level {level}")));
        }
        Ok(Cube { root, level, index })
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn index(&self) -> &[u64] {
        &self.index
    }

    pub fn root(&self) -> &RootBox {
        &self.root
    }

    pub fn shared_root(&self) -> Arc<RootBox> {
        Arc::clone(&self.root)
    }

    pub fn same_root(&self, other: &Cube) -> bool {
        Arc::ptr_eq(&self.root, &other.root) || *self.root == *other.root
    }

    pub fn side(&self) -> Dyadic {
        self.root.side.scale_pow2(-(self.level as i32))
    }

    pub fn lower(&self, axis: usize) -> Dyadic {
        self.root.corner[axis] + self.side() * Dyadic::from_int(self.index[axis] as i64)
    }

    pub fn upper(&self, axis: usize) -> Dyadic {
        self.root.corner[axis] + self.side() * Dyadic::from_int(self.index[axis] as i64 + 1)
    }

    pub fn center(&self, axis: usize) -> Dyadic {
        (self.lower(axis) + self.upper(axis)).half()
    }

    pub fn volume(&self) -> f64 {
        self.side().to_f64().powi(self.dim() as i32)
    }

    /// Exact geometric identity (same point set), regardless of which root
    /// each cube was built from.
    pub fn same_geometry(&self, other: &Cube) -> bool {
        self.dim() == other.dim()
            && self.side() == other.side()
            && (0..self.dim()).all(|j| self.lower(j) == other.lower(j))
    }

    pub fn child(&self, theta: Location) -> Result<Cube, GridError> {
        if self.level + 1 >= 63 {
            return Err(GridError::ResolutionOverflow { level: self.level + 1 });
        }
        let index = (0..self.dim())
            .map(|j| 2 * self.index[j] + theta.upper(j) as u64)
            .collect();
        Ok(Cube { root: Arc::clone(&self.root), level: self.level + 1, index })
    }

    /// Children in canonical row-major order (axis 0 slowest).
    pub fn children(&self) -> Result<Vec<Cube>, GridError> {
        self.grandchildren(1)
    }

    pub fn parent(&self) -> Option<Cube> {
        if self.level == 0 {
            return None;
        }
        Some(Cube {
            root: Arc::clone(&self.root),
            level: self.level - 1,
            index: self.index.iter().map(|i| i / 2).collect(),
        })
    }

    /// Ancestor at the given (coarser) level of the same grid.
    pub fn ancestor(&self, level: u32) -> Result<Cube, GridError> {
        if level > self.level {
            return Err(GridError::BadIndex(format!(
                "ancestor level {level} is finer than cube level {}",
                self.level
            )));
        }
        let shift = self.level - level;
        Ok(Cube {
            root: Arc::clone(&self.root),
            level,
            index: self.index.iter().map(|i| i >> shift).collect(),
        })
    }

    /// Grandchildren of depth k, `2^{dim·k}` cubes in canonical row-major
    /// order: the offset along axis 0 varies slowest, axis dim−1 fastest.
    pub fn grandchildren(&self, k: u32) -> Result<Vec<Cube>, GridError> {
        let dim = self.dim();
        let level = self.level + k;
        if level >= 63 || (dim as u32 * k) >= 31 {
            return Err(GridError::ResolutionOverflow { level });
        }
        let per_axis = 1u64 << k;
        let total = 1usize << (dim as u32 * k);
        let mut out = Vec::with_capacity(total);
        let mut offset = vec![0u64; dim];
        for flat in 0..total {
            let mut rem = flat as u64;
            for j in (0..dim).rev() {
                offset[j] = rem % per_axis;
                rem /= per_axis;
            }
            let index = (0..dim).map(|j| (self.index[j] << k) + offset[j]).collect();
            out.push(Cube { root: Arc::clone(&self.root), level, index });
        }
        Ok(out)
    }

    /// Row-major position of a depth-k grandchild inside this cube.
    pub fn grandchild_flat_index(&self, descendant: &Cube) -> Option<usize> {
        if descendant.level < self.level {
            return None;
        }
        let k = descendant.level - self.level;
        let mut flat = 0usize;
        for j in 0..self.dim() {
            let off = descendant.index[j].checked_sub(self.index[j] << k)?;
            if off >= 1u64 << k {
                return None;
            }
            flat = (flat << k) + off as usize;
        }
        Some(flat)
    }

    pub fn contains_point(&self, x: &[Dyadic]) -> bool {
        (0..self.dim()).all(|j| self.lower(j) <= x[j] && x[j] < self.upper(j))
    }

    /// Geometric containment (closed comparison of half-open boxes).
    pub fn contains_cube(&self, other: &Cube) -> bool {
        self.dim() == other.dim()
            && (0..self.dim())
                .all(|j| self.lower(j) <= other.lower(j) && other.upper(j) <= self.upper(j))
    }

    /// Two distinct cubes of equal side length are adjacent iff their
    /// closures intersect; for interior-disjoint cubes this says exactly that
    /// they are dyadic children of some (not necessarily dyadic) cube.
    pub fn adjacent(&self, other: &Cube) -> bool {
        if self.dim() != other.dim() || self.side() != other.side() || self.same_geometry(other) {
            return false;
        }
        (0..self.dim()).all(|j| {
            let lo = self.lower(j).max(other.lower(j));
            let hi = self.upper(j).min(other.upper(j));
            lo <= hi
        })
    }

    /// Position of this cube within its parent.
    pub fn location_in_parent(&self) -> Location {
        let mut bits = 0u32;
        for j in 0..self.dim() {
            bits |= ((self.index[j] & 1) as u32) << j;
        }
        Location(bits)
    }

    /// Full descent path from `ancestor` down to this cube, coarsest step
    /// first.
    pub fn location_vector(&self, ancestor: &Cube) -> Result<LocationVector, GridError> {
        if !self.same_root(ancestor) {
            return Err(GridError::RootMismatch);
        }
        if ancestor.level > self.level || !ancestor.contains_cube(self) {
            return Err(GridError::BadIndex(format!(
                "{ancestor} is not an ancestor of {self}"
            )));
        }
        let mut locs = Vec::with_capacity((self.level - ancestor.level) as usize);
        for level in (ancestor.level + 1)..=self.level {
            let shift = self.level - level;
            let mut bits = 0u32;
            for j in 0..self.dim() {
                bits |= (((self.index[j] >> shift) & 1) as u32) << j;
            }
            locs.push(Location(bits));
        }
        Ok(locs)
    }

    /// Follow a descent path from this cube.
    pub fn descend(&self, locs: &[Location]) -> Result<Cube, GridError> {
        let mut cube = self.clone();
        for &theta in locs {
            cube = cube.child(theta)?;
        }
        Ok(cube)
    }

    /// Does the boundary of `self` meet the boundary of `outer`?
    /// Requires `outer.contains_cube(self)`; under that hypothesis the
    /// boundaries meet iff some face of `self` lies inside a parallel face
    /// of `outer`.
    pub fn boundary_touches(&self, outer: &Cube) -> bool {
        (0..self.dim())
            .any(|j| self.lower(j) == outer.lower(j) || self.upper(j) == outer.upper(j))
    }
}

impl fmt::Display for Cube {
    /// Canonical form "d:<dim> l:<level> i:<i1,...,id> root:<corner...;side>".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.index.iter().map(|i| i.to_string()).collect();
        let corner: Vec<String> = self.root.corner.iter().map(|c| c.to_string()).collect();
        write!(
            f,
            "d:{} l:{} i:{} root:{};{}",
            self.dim(),
            self.level,
            idx.join(","),
            corner.join(","),
            self.root.side
        )
    }
}

impl FromStr for Cube {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: String| GridError::BadIndex(msg);
        let mut dim = None;
        let mut level = None;
        let mut index = None;
        let mut root = None;
        for part in s.split_whitespace() {
            let (key, val) = part
                .split_once(':')
                .ok_or_else(|| bad(format!("malformed field {part:?} in cube string")))?;
            match key {
                "d" => dim = Some(val.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                "l" => level = Some(val.parse::<u32>().map_err(|e| bad(e.to_string()))?),
                "i" => {
                    index = Some(
                        val.split(',')
                            .map(|t| t.parse::<u64>().map_err(|e| bad(e.to_string())))
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                }
                "root" => {
                    let (corner, side) = val
                        .split_once(';')
                        .ok_or_else(|| bad(format!("root field {val:?} missing side")))?;
                    let corner = corner
                        .split(',')
                        .map(|t| t.parse::<Dyadic>().map_err(bad))
                        .collect::<Result<Vec<_>, _>>()?;
                    let side = side.parse::<Dyadic>().map_err(bad)?;
                    root = Some(RootBox::new(corner, side)?);
                }
                other => return Err(bad(format!("unknown field {other:?} in cube string"))),
            }
        }
        let (dim, level, index, root) = match (dim, level, index, root) {
            (Some(d), Some(l), Some(i), Some(r)) => (d, l, i, r),
            _ => return Err(bad(format!("cube string {s:?} is missing fields"))),
        };
        if root.dim() != dim {
            return Err(bad(format!("declared dim {dim} does not match root dim {}", root.dim())));
        }
        Cube::new(Arc::new(root), level, index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> Cube {
        Cube::unit(2)
    }

    #[test]
    fn geometry_of_children() {
        let q = unit2();
        let kids = q.children().unwrap();
        assert_eq!(kids.len(), 4);
        // Row-major: axis 0 slowest => SW, NW, SE, NE in index order
        // (i0, i1) = (0,0), (0,1), (1,0), (1,1).
        assert_eq!(kids[0].index(), &[0, 0]);
        assert_eq!(kids[1].index(), &[0, 1]);
        assert_eq!(kids[2].index(), &[1, 0]);
        assert_eq!(kids[3].index(), &[1, 1]);
        assert_eq!(kids[0].location_in_parent().label_2d(), "SW");
        assert_eq!(kids[1].location_in_parent().label_2d(), "NW");
        assert_eq!(kids[2].location_in_parent().label_2d(), "SE");
        assert_eq!(kids[3].location_in_parent().label_2d(), "NE");
        for k in &kids {
            assert_eq!(k.side(), Dyadic::new(1, 1));
            assert!(q.contains_cube(k));
        }
    }

    #[test]
    fn adjacency_cases() {
        let q = unit2();
        let g = q.grandchildren(2).unwrap();
        let at = |i0: u64, i1: u64| g.iter().find(|c| c.index() == [i0, i1]).unwrap().clone();
        let c = at(1, 1);
        assert!(c.adjacent(&at(2, 1)), "face neighbors are adjacent");
        assert!(c.adjacent(&at(2, 2)), "corner neighbors are adjacent");
        assert!(!c.adjacent(&at(3, 1)), "separated cubes are not adjacent");
        assert!(!c.adjacent(&c.clone()), "a cube is not adjacent to itself");
        assert!(!c.adjacent(&q), "different side lengths are never adjacent");
        assert!(c.adjacent(&at(2, 1)) == at(2, 1).adjacent(&c));
    }

    #[test]
    fn location_vector_roundtrip() {
        let q = unit2();
        let g = q.grandchildren(3).unwrap();
        for cube in g.iter().step_by(7) {
            let locs = cube.location_vector(&q).unwrap();
            assert_eq!(locs.len(), 3);
            assert_eq!(&q.descend(&locs).unwrap(), cube);
        }
    }

    #[test]
    fn canonical_string_roundtrip() {
        let root = RootBox::new(
            vec![Dyadic::new(-1, 1), Dyadic::from_int(2)],
            Dyadic::from_int(4),
        )
        .unwrap();
        let q = Cube::root_cube(root).grandchildren(2).unwrap()[7].clone();
        let s = q.to_string();
        assert_eq!(s, "d:2 l:2 i:1,3 root:-1/2,2;4");
        let back: Cube = s.parse().unwrap();
        assert!(back.same_geometry(&q));
        assert_eq!(back.index(), q.index());
    }

    #[test]
    fn halves_and_bounds() {
        let q = Cube::unit(1);
        let g = q.grandchildren(2).unwrap();
        assert_eq!(g[1].lower(0), Dyadic::new(1, 2));
        assert_eq!(g[1].upper(0), Dyadic::new(1, 1));
        assert!(g[1].contains_point(&[Dyadic::new(1, 2)]));
        assert!(!g[1].contains_point(&[Dyadic::new(1, 1)]), "half-open on the right");
    }
}
