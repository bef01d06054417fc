use std::io::{BufReader, BufWriter, Read, Write};
use std::str::FromStr;

use dyadic_core::{Cube, RootBox};

use crate::WeightError;

/// Cap on `dim * depth` so cell counts stay below 2^30.
const MAX_BITS: u32 = 30;

/// Tree (pairwise) summation.  Besides the usual accuracy gain, this makes
/// sums of 2^k equal values exact, which several average-law postconditions
/// rely on: averaging a constant block returns the constant bit-for-bit.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

fn cell_count(dim: usize, depth: u32) -> Result<usize, WeightError> {
    let bits = (dim as u32).saturating_mul(depth);
    if bits > MAX_BITS {
        return Err(WeightError::TooFine { dim, depth });
    }
    Ok(1usize << bits)
}

/// A weight (or sign pattern) constant on the cells of `𝒟_depth(root)`.
///
/// `values[flat]` is the density on the cell with row-major flat index
/// `flat` — axis 0 varies slowest, the last axis is contiguous, matching
/// `Cube::grandchildren`.
#[derive(Debug, Clone)]
pub struct StepWeight {
    root: Cube,
    depth: u32,
    values: Vec<f64>,
}

impl StepWeight {
    pub fn new(root: Cube, depth: u32, values: Vec<f64>) -> Result<Self, WeightError> {
        let want = cell_count(root.dim(), depth)?;
        if root.level() + depth >= 63 {
            return Err(WeightError::TooFine { dim: root.dim(), depth });
        }
        if values.len() != want {
            return Err(WeightError::BadLength { got: values.len(), want });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(WeightError::BadParameter(format!(
                "non-finite cell value {bad}"
            )));
        }
        Ok(StepWeight { root, depth, values })
    }

    pub fn constant(root: Cube, depth: u32, value: f64) -> Result<Self, WeightError> {
        let n = cell_count(root.dim(), depth)?;
        StepWeight::new(root, depth, vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn root(&self) -> &Cube {
        &self.root
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn cells(&self) -> usize {
        self.values.len()
    }

    /// Cells per axis (2^depth).
    pub fn side_cells(&self) -> usize {
        1usize << self.depth
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn strides(&self) -> Vec<usize> {
        let dim = self.dim();
        let side = self.side_cells();
        let mut s = vec![1usize; dim];
        for j in (0..dim.saturating_sub(1)).rev() {
            s[j] = s[j + 1] * side;
        }
        s
    }

    fn strides_at(&self, depth: u32) -> Vec<usize> {
        let dim = self.dim();
        let side = 1usize << depth;
        let mut s = vec![1usize; dim];
        for j in (0..dim.saturating_sub(1)).rev() {
            s[j] = s[j + 1] * side;
        }
        s
    }

    /// Per-axis cell indices of `flat` at resolution depth.
    fn decode(&self, mut flat: usize) -> Vec<usize> {
        let strides = self.strides();
        strides
            .iter()
            .map(|&s| {
                let i = flat / s;
                flat %= s;
                i
            })
            .collect()
    }

    /// The resolution cell with the given flat index, as a `Cube`.
    pub fn leaf_cube(&self, flat: usize) -> Cube {
        let idx = self.decode(flat);
        let level = self.root.level() + self.depth;
        let abs: Vec<u64> = idx
            .iter()
            .zip(self.root.index())
            .map(|(&i, &r)| (r << self.depth) + i as u64)
            .collect();
        Cube::new(self.root.shared_root(), level, abs).expect("leaf index in range")
    }

    /// Relative position of a coarser dyadic cube inside this grid: per-axis
    /// start offsets at resolution depth, plus the cube's relative level.
    fn rel_box(&self, q: &Cube) -> Result<(Vec<usize>, u32), WeightError> {
        if !q.same_root(&self.root) {
            return Err(WeightError::OutsideRoot);
        }
        if q.level() < self.root.level() {
            return Err(WeightError::OutsideRoot);
        }
        let rel = q.level() - self.root.level();
        if rel > self.depth {
            return Err(WeightError::FinerThanResolution);
        }
        let shift = self.depth - rel;
        let mut starts = Vec::with_capacity(self.dim());
        for (j, &qi) in q.index().iter().enumerate() {
            let base = self.root.index()[j];
            if qi >> rel != base {
                return Err(WeightError::OutsideRoot);
            }
            let rel_idx = qi - (base << rel);
            starts.push((rel_idx as usize) << shift);
        }
        Ok((starts, rel))
    }

    /// Gather the values of the sub-box `starts[j] .. starts[j]+ext` into
    /// `out`, row-major within the sub-box.
    fn gather_box(&self, starts: &[usize], ext: usize, out: &mut Vec<f64>) {
        let dim = self.dim();
        let strides = self.strides();
        let base: usize = starts.iter().zip(&strides).map(|(&s, &st)| s * st).sum();
        if dim == 1 {
            out.extend_from_slice(&self.values[base..base + ext]);
            return;
        }
        let mut odo = vec![0usize; dim - 1];
        loop {
            let off: usize = odo.iter().zip(&strides).map(|(&i, &st)| i * st).sum();
            out.extend_from_slice(&self.values[base + off..base + off + ext]);
            // increment the odometer over all axes but the last
            let mut axis = dim - 1;
            loop {
                if axis == 0 {
                    return;
                }
                axis -= 1;
                odo[axis] += 1;
                if odo[axis] < ext {
                    break;
                }
                odo[axis] = 0;
            }
        }
    }

    /// Average over a dyadic subcube at or above the resolution.
    pub fn average(&self, q: &Cube) -> Result<f64, WeightError> {
        let (starts, rel) = self.rel_box(q)?;
        let ext = 1usize << (self.depth - rel);
        let mut buf = Vec::with_capacity(ext.pow(self.dim() as u32));
        self.gather_box(&starts, ext, &mut buf);
        Ok(pairwise_sum(&buf) / buf.len() as f64)
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.mean() * self.root.volume()
    }

    /// Averages at every relative depth `0..=depth`; `pyramid[l]` is row-major
    /// over `𝒟_l(root)`.  Built by pairwise child means, so a region on which
    /// the weight is constant averages to that constant exactly.
    pub fn average_pyramid(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut pyramid = vec![Vec::new(); self.depth as usize + 1];
        pyramid[self.depth as usize] = self.values.clone();
        let mut child_buf = vec![0.0; 1 << dim];
        for l in (0..self.depth).rev() {
            let coarse_side = 1usize << l;
            let coarse_strides = self.strides_at(l);
            let fine_strides = self.strides_at(l + 1);
            let n = coarse_side.pow(dim as u32);
            let mut coarse = vec![0.0; n];
            let fine = &pyramid[l as usize + 1];
            for (flat, slot) in coarse.iter_mut().enumerate() {
                let mut rem = flat;
                let mut fine_base = 0usize;
                for j in 0..dim {
                    let i = rem / coarse_strides[j];
                    rem %= coarse_strides[j];
                    fine_base += (2 * i) * fine_strides[j];
                }
                for (theta, c) in child_buf.iter_mut().enumerate() {
                    let mut off = 0usize;
                    for (j, &st) in fine_strides.iter().enumerate() {
                        if theta >> j & 1 == 1 {
                            off += st;
                        }
                    }
                    *c = fine[fine_base + off];
                }
                *slot = pairwise_sum(&child_buf) / child_buf.len() as f64;
            }
            pyramid[l as usize] = coarse;
        }
        pyramid
    }

    /// Conditional expectation onto the coarser grid `𝒟_to(root)`.
    pub fn coarsen(&self, to_depth: u32) -> Result<StepWeight, WeightError> {
        if to_depth > self.depth {
            return Err(WeightError::BadParameter(format!(
                "coarsen target {to_depth} exceeds depth {}",
                self.depth
            )));
        }
        let pyramid = self.average_pyramid();
        StepWeight::new(self.root.clone(), to_depth, pyramid[to_depth as usize].clone())
    }

    /// Re-grid to a finer depth; cell values are replicated, so every dyadic
    /// average is preserved exactly.
    pub fn refine(&self, to_depth: u32) -> Result<StepWeight, WeightError> {
        if to_depth < self.depth {
            return Err(WeightError::BadParameter(format!(
                "refine target {to_depth} below depth {}",
                self.depth
            )));
        }
        let dim = self.dim();
        let n = cell_count(dim, to_depth)?;
        let shift = to_depth - self.depth;
        let fine_strides = self.strides_at(to_depth);
        let coarse_strides = self.strides();
        let mut vals = vec![0.0; n];
        for (flat, v) in vals.iter_mut().enumerate() {
            let mut rem = flat;
            let mut coarse = 0usize;
            for j in 0..dim {
                let i = rem / fine_strides[j];
                rem %= fine_strides[j];
                coarse += (i >> shift) * coarse_strides[j];
            }
            *v = self.values[coarse];
        }
        StepWeight::new(self.root.clone(), to_depth, vals)
    }

    /// The weight restricted to a dyadic subcube, re-rooted there.
    pub fn restrict(&self, q: &Cube) -> Result<StepWeight, WeightError> {
        let (starts, rel) = self.rel_box(q)?;
        let ext = 1usize << (self.depth - rel);
        let mut buf = Vec::with_capacity(ext.pow(self.dim() as u32));
        self.gather_box(&starts, ext, &mut buf);
        StepWeight::new(q.clone(), self.depth - rel, buf)
    }

    /// Overwrite the values on a dyadic subcube with `block`, which must be
    /// rooted at that subcube and resolve to the same leaf level.
    pub fn overwrite_on(&mut self, q: &Cube, block: &StepWeight) -> Result<(), WeightError> {
        let (starts, rel) = self.rel_box(q)?;
        if !block.root.same_geometry(q) {
            return Err(WeightError::OutsideRoot);
        }
        if block.depth != self.depth - rel {
            return Err(WeightError::BadParameter(format!(
                "block depth {} does not resolve to the host leaf level",
                block.depth
            )));
        }
        let dim = self.dim();
        let ext = 1usize << (self.depth - rel);
        let strides = self.strides();
        let base: usize = starts.iter().zip(&strides).map(|(&s, &st)| s * st).sum();
        let rows = if dim == 1 { 1 } else { ext.pow(dim as u32 - 1) };
        let mut odo = vec![0usize; dim.saturating_sub(1)];
        for row in 0..rows {
            let off: usize = odo.iter().zip(&strides).map(|(&i, &st)| i * st).sum();
            let src = &block.values[row * ext..(row + 1) * ext];
            self.values[base + off..base + off + ext].copy_from_slice(src);
            for axis in (0..odo.len()).rev() {
                odo[axis] += 1;
                if odo[axis] < ext {
                    break;
                }
                odo[axis] = 0;
            }
        }
        Ok(())
    }

    // --- serialization -----------------------------------------------------

    const MAGIC: &'static [u8; 4] = b"SWT1";

    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<(), WeightError> {
        let mut w = BufWriter::new(w);
        w.write_all(Self::MAGIC)?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        w.write_all(&self.depth.to_le_bytes())?;
        let root = self.root.to_string();
        w.write_all(&(root.len() as u32).to_le_bytes())?;
        w.write_all(root.as_bytes())?;
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<StepWeight, WeightError> {
        let mut r = BufReader::new(r);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(WeightError::BadFormat("bad magic".into()));
        }
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let dim = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf)?;
        let depth = u32::from_le_bytes(u32buf);
        r.read_exact(&mut u32buf)?;
        let root_len = u32::from_le_bytes(u32buf) as usize;
        if root_len > 4096 {
            return Err(WeightError::BadFormat("oversized root string".into()));
        }
        let mut root_bytes = vec![0u8; root_len];
        r.read_exact(&mut root_bytes)?;
        let root_str = String::from_utf8(root_bytes)
            .map_err(|_| WeightError::BadFormat("root string not utf-8".into()))?;
        let root = Cube::from_str(&root_str)
            .map_err(|e| WeightError::BadFormat(format!("root cube: {e}")))?;
        if root.dim() != dim {
            return Err(WeightError::BadFormat("dim mismatch with root cube".into()));
        }
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let count = u64::from_le_bytes(u64buf) as usize;
        if count != cell_count(dim, depth)? {
            return Err(WeightError::BadFormat("cell count mismatch".into()));
        }
        let mut values = Vec::with_capacity(count);
        let mut f64buf = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut f64buf)?;
            values.push(f64::from_le_bytes(f64buf));
        }
        StepWeight::new(root, depth, values)
    }

    /// CSV form: a metadata record `dim,depth,root`, then one value per line.
    /// Values print in shortest round-trip decimal.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<(), WeightError> {
        let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
        out.write_record(["dim", "depth", "root"])?;
        out.write_record([
            self.dim().to_string(),
            self.depth.to_string(),
            self.root.to_string(),
        ])?;
        out.write_record(["value"])?;
        for v in &self.values {
            out.write_record([format!("{v}")])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: &mut R) -> Result<StepWeight, WeightError> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .has_headers(false)
            .from_reader(r);
        let mut records = rdr.records();
        let header = records
            .next()
            .ok_or_else(|| WeightError::BadFormat("empty file".into()))??;
        if header.len() != 3 || &header[0] != "dim" {
            return Err(WeightError::BadFormat("missing dim,depth,root header".into()));
        }
        let meta = records
            .next()
            .ok_or_else(|| WeightError::BadFormat("missing metadata record".into()))??;
        let dim: usize = meta[0]
            .parse()
            .map_err(|_| WeightError::BadFormat("bad dim".into()))?;
        let depth: u32 = meta[1]
            .parse()
            .map_err(|_| WeightError::BadFormat("bad depth".into()))?;
        let root = Cube::from_str(&meta[2])
            .map_err(|e| WeightError::BadFormat(format!("root cube: {e}")))?;
        if root.dim() != dim {
            return Err(WeightError::BadFormat("dim mismatch with root cube".into()));
        }
        let mut values = Vec::new();
        for rec in records {
            let rec = rec?;
            if rec.len() == 1 && &rec[0] == "value" {
                continue;
            }
            for field in rec.iter() {
                if field.is_empty() {
                    continue;
                }
                let v: f64 = field
                    .parse()
                    .map_err(|_| WeightError::BadFormat(format!("bad value {field:?}")))?;
                values.push(v);
            }
        }
        StepWeight::new(root, depth, values)
    }
}

/// Extend a 1D weight constantly in `dim - 1` extra coordinates: the result
/// lives on the cube over the same interval and satisfies
/// `E_I result = E_{I_1} w0` for every dyadic `I`.
pub fn tensorize(w0: &StepWeight, dim: usize) -> Result<StepWeight, WeightError> {
    if w0.dim() != 1 {
        return Err(WeightError::BadParameter("tensorize needs a 1D source".into()));
    }
    if dim < 2 {
        return Err(WeightError::BadParameter("tensorize target dim must be >= 2".into()));
    }
    let corner = w0.root().lower(0);
    let side = w0.root().side();
    let root = Cube::root_cube(RootBox::new(vec![corner; dim], side)?);
    let n = cell_count(dim, w0.depth())?;
    let side_cells = w0.side_cells();
    let stride0 = n / side_cells;
    let mut values = Vec::with_capacity(n);
    for x0 in 0..side_cells {
        let v = w0.values()[x0];
        values.extend(std::iter::repeat(v).take(stride0));
    }
    StepWeight::new(root, w0.depth(), values)
}
