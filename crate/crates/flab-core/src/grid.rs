//! Finite sets of grid points at resolution `2^-kT`, covering numbers,
//! neighborhoods, non-concentration scans, and a Cantor-pattern generator.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigUint;

use crate::exact::{pow2, qi, PowerProduct, Q, R64};
use crate::frame::ScaleFrame;
use crate::{Error, Result};

/// Domain of a 1-dimensional grid set, in grid units (inclusive bounds).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain1 {
    /// `[0, 1)`
    Unit,
    /// `[1, 2]`
    Shifted,
    /// arbitrary inclusive index range
    Free { lo: i64, hi: i64 },
}

impl Domain1 {
    pub fn bounds(&self, frame: &ScaleFrame) -> (i64, i64) {
        let c = frame.cells_per_unit();
        match self {
            Domain1::Unit => (0, c - 1),
            Domain1::Shifted => (c, 2 * c),
            Domain1::Free { lo, hi } => (*lo, *hi),
        }
    }
}

/// Domain of a 2-dimensional grid set (inclusive bounds per axis).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain2 {
    /// `[0,1) x [0,1)`
    Unit,
    Free { lo: (i64, i64), hi: (i64, i64) },
}

impl Domain2 {
    pub fn bounds(&self, frame: &ScaleFrame) -> ((i64, i64), (i64, i64)) {
        let c = frame.cells_per_unit();
        match self {
            Domain2::Unit => ((0, 0), (c - 1, c - 1)),
            Domain2::Free { lo, hi } => (*lo, *hi),
        }
    }
}

/// A finite subset of the 1-dimensional grid `2^-kT * Z`, one point per cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSet1D {
    frame: ScaleFrame,
    domain: Domain1,
    idx: Vec<i64>,
}

/// A finite subset of the planar grid, one point per `2^-kT` square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSet2D {
    frame: ScaleFrame,
    domain: Domain2,
    pts: Vec<(i64, i64)>,
}

impl GridSet1D {
    pub fn new(frame: ScaleFrame, domain: Domain1, mut idx: Vec<i64>) -> Result<Self> {
        idx.sort_unstable();
        idx.dedup();
        let (lo, hi) = domain.bounds(&frame);
        if let Some(&bad) = idx.iter().find(|&&i| i < lo || i > hi) {
            return Err(Error::DomainError(format!(
                "index {bad} outside domain [{lo}, {hi}]"
            )));
        }
        Ok(GridSet1D { frame, domain, idx })
    }

    pub fn empty(frame: ScaleFrame, domain: Domain1) -> Self {
        GridSet1D {
            frame,
            domain,
            idx: Vec::new(),
        }
    }

    pub fn frame(&self) -> &ScaleFrame {
        &self.frame
    }
    pub fn domain(&self) -> Domain1 {
        self.domain
    }
    pub fn indices(&self) -> &[i64] {
        &self.idx
    }
    pub fn len(&self) -> usize {
        self.idx.len()
    }
    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    /// Exact coordinate of the `i`-th point.
    pub fn value(&self, i: usize) -> Q {
        qi(self.idx[i]) * pow2(-(self.frame.resolution_bits() as i64))
    }

    pub fn values(&self) -> impl Iterator<Item = Q> + '_ {
        let res = -(self.frame.resolution_bits() as i64);
        self.idx.iter().map(move |&i| qi(i) * pow2(res))
    }

    /// Covering number by aligned dyadic cells of size `rho`.
    pub fn covering_number(&self, rho: &Q) -> Result<u64> {
        let shift = cell_shift(&self.frame, rho)?;
        Ok(count_distinct_shifted(&self.idx, shift))
    }

    /// All grid points within distance `r` of the set, clipped to the domain.
    pub fn neighborhood(&self, r: &Q) -> Result<GridSet1D> {
        let w = radius_cells(&self.frame, r)?;
        let (lo, hi) = self.domain.bounds(&self.frame);
        let mut out: Vec<(i64, i64)> = Vec::new();
        for &i in &self.idx {
            let a = (i - w).max(lo);
            let b = (i + w).min(hi);
            match out.last_mut() {
                Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        let total: i64 = out.iter().map(|(a, b)| b - a + 1).sum();
        if total > (1 << 26) {
            return Err(Error::InvalidScale(format!(
                "neighborhood would materialize {total} points"
            )));
        }
        let mut idx = Vec::with_capacity(total as usize);
        for (a, b) in out {
            idx.extend(a..=b);
        }
        Ok(GridSet1D {
            frame: self.frame.clone(),
            domain: self.domain,
            idx,
        })
    }

    /// Minimal `K` with `covering(X & J, delta) <= K * (|J|/delta)^alpha` over
    /// all dyadic cells `J` of size in `[delta, 1]`.
    pub fn nonconcentration_constant(&self, alpha: R64) -> Result<NonConc> {
        if self.idx.is_empty() {
            return Err(Error::EmptyInput("nonconcentration of empty set".into()));
        }
        let g = self.frame.g();
        let kt = self.frame.resolution_bits();
        let dshift = kt - g;
        let mut best: Option<(u64, u32, i64)> = None; // (count, cells_bits, witness cell)
        for t in 0..=g {
            let shift = kt - t;
            let mut run_cell = i64::MIN;
            let mut run_dcell = i64::MIN;
            let mut count = 0u64;
            let flush = |cell: i64, count: u64, best: &mut Option<(u64, u32, i64)>| {
                if count == 0 {
                    return;
                }
                let cand = (count, g - t, cell);
                if best
                    .as_ref()
                    .map(|b| cmp_scaled(cand.0, cand.1, b.0, b.1, alpha) == Ordering::Greater)
                    .unwrap_or(true)
                {
                    *best = Some(cand);
                }
            };
            for &i in &self.idx {
                let cell = i >> shift;
                if cell != run_cell {
                    flush(run_cell, count, &mut best);
                    run_cell = cell;
                    run_dcell = i64::MIN;
                    count = 0;
                }
                let dc = i >> dshift;
                if dc != run_dcell {
                    run_dcell = dc;
                    count += 1;
                }
            }
            flush(run_cell, count, &mut best);
        }
        let (count, w, cell) = best.unwrap();
        Ok(NonConc::new(count, w, alpha, (cell, 0)))
    }
}

impl GridSet2D {
    pub fn new(frame: ScaleFrame, domain: Domain2, mut pts: Vec<(i64, i64)>) -> Result<Self> {
        pts.sort_unstable();
        pts.dedup();
        let (lo, hi) = domain.bounds(&frame);
        if let Some(&bad) = pts
            .iter()
            .find(|&&(x, y)| x < lo.0 || x > hi.0 || y < lo.1 || y > hi.1)
        {
            return Err(Error::DomainError(format!(
                "point {bad:?} outside domain {lo:?}..{hi:?}"
            )));
        }
        Ok(GridSet2D { frame, domain, pts })
    }

    pub fn empty(frame: ScaleFrame, domain: Domain2) -> Self {
        GridSet2D {
            frame,
            domain,
            pts: Vec::new(),
        }
    }

    pub fn frame(&self) -> &ScaleFrame {
        &self.frame
    }
    pub fn domain(&self) -> Domain2 {
        self.domain
    }
    pub fn points(&self) -> &[(i64, i64)] {
        &self.pts
    }
    pub fn len(&self) -> usize {
        self.pts.len()
    }
    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    pub fn value(&self, i: usize) -> (Q, Q) {
        let res = -(self.frame.resolution_bits() as i64);
        (qi(self.pts[i].0) * pow2(res), qi(self.pts[i].1) * pow2(res))
    }

    pub fn covering_number(&self, rho: &Q) -> Result<u64> {
        let shift = cell_shift(&self.frame, rho)?;
        let mut cells: Vec<(i64, i64)> = self
            .pts
            .iter()
            .map(|&(x, y)| (x >> shift, y >> shift))
            .collect();
        cells.sort_unstable();
        cells.dedup();
        Ok(cells.len() as u64)
    }

    /// Sup-norm neighborhood on the grid.
    pub fn neighborhood(&self, r: &Q) -> Result<GridSet2D> {
        let w = radius_cells(&self.frame, r)?;
        let (lo, hi) = self.domain.bounds(&self.frame);
        // merge per-row intervals
        let mut rows: BTreeMap<i64, Vec<(i64, i64)>> = BTreeMap::new();
        for &(x, y) in &self.pts {
            let a = (x - w).max(lo.0);
            let b = (x + w).min(hi.0);
            let ylo = (y - w).max(lo.1);
            let yhi = (y + w).min(hi.1);
            for row in ylo..=yhi {
                rows.entry(row).or_default().push((a, b));
            }
        }
        let mut pts = Vec::new();
        for (row, mut spans) in rows {
            spans.sort_unstable();
            let mut merged: Vec<(i64, i64)> = Vec::new();
            for (a, b) in spans {
                match merged.last_mut() {
                    Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
                    _ => merged.push((a, b)),
                }
            }
            for (a, b) in merged {
                if pts.len() as i64 + (b - a + 1) > (1 << 26) {
                    return Err(Error::InvalidScale(
                        "neighborhood would materialize too many points".into(),
                    ));
                }
                pts.extend((a..=b).map(|x| (x, row)));
            }
        }
        pts.sort_unstable();
        Ok(GridSet2D {
            frame: self.frame.clone(),
            domain: self.domain,
            pts,
        })
    }

    pub fn nonconcentration_constant(&self, alpha: R64) -> Result<NonConc> {
        if self.pts.is_empty() {
            return Err(Error::EmptyInput("nonconcentration of empty set".into()));
        }
        let g = self.frame.g();
        let kt = self.frame.resolution_bits();
        let dshift = kt - g;
        let mut best: Option<(u64, u32, (i64, i64))> = None;
        for t in 0..=g {
            let shift = kt - t;
            let mut per_cell: BTreeMap<(i64, i64), Vec<(i64, i64)>> = BTreeMap::new();
            for &(x, y) in &self.pts {
                per_cell
                    .entry((x >> shift, y >> shift))
                    .or_default()
                    .push((x >> dshift, y >> dshift));
            }
            for (cell, mut dcells) in per_cell {
                dcells.sort_unstable();
                dcells.dedup();
                let cand = (dcells.len() as u64, g - t, cell);
                if best
                    .as_ref()
                    .map(|b| cmp_scaled(cand.0, cand.1, b.0, b.1, alpha) == Ordering::Greater)
                    .unwrap_or(true)
                {
                    best = Some(cand);
                }
            }
        }
        let (count, w, cell) = best.unwrap();
        Ok(NonConc::new(count, w, alpha, cell))
    }
}

/// Result of a non-concentration scan: the minimal constant `K >= 1` with
/// `covering(X & J, delta) <= K (|J|/delta)^alpha`, as the exact value
/// `count * 2^(-w*alpha)` attained at the witness cell.
#[derive(Clone, Debug)]
pub struct NonConc {
    pub count: u64,
    pub cells_bits: u32,
    pub alpha: R64,
    pub witness_cell: (i64, i64),
}

impl NonConc {
    fn new(count: u64, cells_bits: u32, alpha: R64, witness_cell: (i64, i64)) -> Self {
        NonConc {
            count,
            cells_bits,
            alpha,
            witness_cell,
        }
    }

    /// The constant as a formal power product (exact).
    pub fn kappa(&self) -> PowerProduct {
        let e = -self.alpha * (self.cells_bits as i64);
        PowerProduct::from_q(&qi(self.count as i64)).mul(&PowerProduct::from_pow2(e))
    }

    /// The constant as a rational, when it is one.
    pub fn kappa_q(&self) -> Option<Q> {
        self.kappa().to_q()
    }

    /// Whether the set qualifies as a `(delta, alpha)`-set for the frame's
    /// `C` and `epsilon`: `K <= C * delta^-epsilon`.
    pub fn is_delta_alpha_set(&self, frame: &ScaleFrame) -> bool {
        let eps = frame.epsilon();
        let bound = PowerProduct::from_pow2(eps * (frame.g() as i64)).mul(&PowerProduct::from_q(
            &Q::new((*frame.cbound().numer()).into(), (*frame.cbound().denom()).into()),
        ));
        bound.is_ge(&self.kappa())
    }
}

/// Compares `c1 * 2^(-w1*alpha)` with `c2 * 2^(-w2*alpha)` exactly.
fn cmp_scaled(c1: u64, w1: u32, c2: u64, w2: u32, alpha: R64) -> Ordering {
    // c1 * 2^(-w1 p/q) vs c2 * 2^(-w2 p/q):
    // c1^q * 2^(w2 p) vs c2^q * 2^(w1 p)
    let p = *alpha.numer() as u64;
    let q = *alpha.denom() as u32;
    let lhs = BigUint::from(c1).pow(q) << (w2 as u64 * p);
    let rhs = BigUint::from(c2).pow(q) << (w1 as u64 * p);
    lhs.cmp(&rhs)
}

fn cell_shift(frame: &ScaleFrame, rho: &Q) -> Result<u32> {
    let kt = frame.resolution_bits() as i64;
    match crate::exact::as_pow2(rho) {
        Some(e) if e <= 0 && -e <= kt => Ok((kt + e) as u32),
        Some(_) => Err(Error::InvalidScale(format!(
            "scale {rho} outside [resolution, 1]"
        ))),
        None => Err(Error::InvalidScale(format!("{rho} is not a power of two"))),
    }
}

fn radius_cells(frame: &ScaleFrame, r: &Q) -> Result<i64> {
    let kt = frame.resolution_bits() as i64;
    match crate::exact::as_pow2(r) {
        Some(e) if -e <= kt => {
            if e >= 0 {
                let bits = kt + e;
                if bits > 62 {
                    return Err(Error::InvalidScale("radius too large".into()));
                }
                Ok(1i64 << bits)
            } else {
                Ok(1i64 << (kt + e))
            }
        }
        _ => Err(Error::InvalidScale(format!(
            "radius {r} must be a power of two at least the resolution"
        ))),
    }
}

fn count_distinct_shifted(idx: &[i64], shift: u32) -> u64 {
    let mut n = 0u64;
    let mut last = i64::MIN;
    for &i in idx {
        let c = i >> shift;
        if c != last {
            n += 1;
            last = c;
        }
    }
    n
}

/// Generates the set of grid points whose level-`j` digit (base `2^T`) lies
/// in `keep[j]`, for every level. The output is Moran-regular by
/// construction with branching `N_j = keep[j].len()`.
pub fn cantor_generator(frame: &ScaleFrame, keep: &[Vec<u32>]) -> Result<GridSet1D> {
    if keep.len() != frame.k() as usize {
        return Err(Error::PatternInvalid(format!(
            "pattern has {} levels, frame wants {}",
            keep.len(),
            frame.k()
        )));
    }
    let width = 1u32 << frame.t();
    let mut size: u64 = 1;
    for (j, level) in keep.iter().enumerate() {
        if level.is_empty() {
            return Err(Error::PatternInvalid(format!("level {j} keeps no children")));
        }
        if let Some(&bad) = level.iter().find(|&&c| c >= width) {
            return Err(Error::PatternInvalid(format!(
                "level {j} child {bad} out of range (T = {})",
                frame.t()
            )));
        }
        size = size.saturating_mul(level.len() as u64);
    }
    if size > (1 << 26) {
        return Err(Error::PatternInvalid(format!(
            "pattern would generate {size} points"
        )));
    }
    let mut idx: Vec<i64> = alloc::vec![0];
    for level in keep {
        let mut sorted = level.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let mut next = Vec::with_capacity(idx.len() * sorted.len());
        for &base in &idx {
            for &c in &sorted {
                next.push((base << frame.t()) | c as i64);
            }
        }
        idx = next;
    }
    GridSet1D::new(frame.clone(), Domain1::Unit, idx)
}
