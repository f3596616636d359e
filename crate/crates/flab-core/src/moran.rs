//! Moran-regular tree extraction: refining a discretized set so that every
//! surviving level-`j` cell has exactly `N_j` occupied children, and the
//! common-branching refinement of a family of sets.
//!
//! The per-level rule works bottom-up: at level `j` the occupied cells are
//! classified by `floor(log2(child count))`, the class maximizing
//! `(number of cells) * 2^z` is kept (lowest `z` on ties), and each kept cell
//! is trimmed to its lexicographically smallest `2^z` occupied children.
//! Each level retains at least a `1/(2(zmax+1))` fraction of the points,
//! which gives the exact `(4T)^-k` mass bound in one dimension.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{GridSet1D, GridSet2D};
use crate::{Error, Result};

/// Per-level child counts `(N_0, ..., N_{k-1})`, each a power of two.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Branching {
    pub levels: Vec<u64>,
}

impl Branching {
    pub fn new(levels: Vec<u64>) -> Result<Self> {
        if levels.iter().any(|n| *n == 0 || !n.is_power_of_two()) {
            return Err(Error::Precondition(
                "branching entries must be positive powers of two".into(),
            ));
        }
        Ok(Branching { levels })
    }

    pub fn k(&self) -> usize {
        self.levels.len()
    }

    /// `prod_{i=j}^{k-1} N_i`: the point count of any occupied level-`j` cell.
    pub fn tail_product(&self, j: usize) -> u64 {
        self.levels[j..].iter().product()
    }

    pub fn product(&self) -> u64 {
        self.tail_product(0)
    }
}

fn floor_log2_u64(c: u64) -> u32 {
    63 - c.leading_zeros()
}

/// Bottom-up regularization over an abstract cell hierarchy.
/// `cell(p, j)` is the level-`j` cell of point `p`, for `j` in `0..=k`.
fn regularize_core<T, C>(
    pts: &[T],
    k: u32,
    zmax: u32,
    cell: impl Fn(&T, u32) -> C,
) -> (Vec<T>, Vec<u64>)
where
    T: Copy + Ord,
    C: Copy + Ord,
{
    let mut cur: Vec<T> = pts.to_vec();
    let mut branching = vec![1u64; k as usize];
    for j in (0..k).rev() {
        let mut parents: BTreeMap<C, BTreeMap<C, Vec<T>>> = BTreeMap::new();
        for &p in &cur {
            parents
                .entry(cell(&p, j))
                .or_default()
                .entry(cell(&p, j + 1))
                .or_default()
                .push(p);
        }
        let mut class_cells = vec![0u64; zmax as usize + 1];
        for children in parents.values() {
            class_cells[floor_log2_u64(children.len() as u64) as usize] += 1;
        }
        let mut best_z = 0u32;
        let mut best_value = 0u128;
        for (z, &n) in class_cells.iter().enumerate() {
            let value = (n as u128) << z;
            if value > best_value {
                best_value = value;
                best_z = z as u32;
            }
        }
        let keep_children = 1usize << best_z;
        let mut next = Vec::new();
        for (_, children) in parents {
            if floor_log2_u64(children.len() as u64) != best_z {
                continue;
            }
            for (_, points) in children.into_iter().take(keep_children) {
                next.extend(points);
            }
        }
        next.sort_unstable();
        cur = next;
        branching[j as usize] = 1u64 << best_z;
    }
    (cur, branching)
}

fn check_regular<T, C>(
    pts: &[T],
    k: u32,
    branching: &Branching,
    cell: impl Fn(&T, u32) -> C,
) -> bool
where
    T: Copy + Ord,
    C: Copy + Ord,
{
    if branching.levels.len() != k as usize {
        return false;
    }
    for j in 0..k {
        let mut children_of: BTreeMap<C, Vec<C>> = BTreeMap::new();
        for p in pts {
            children_of.entry(cell(p, j)).or_default().push(cell(p, j + 1));
        }
        for (_, mut ch) in children_of {
            ch.sort_unstable();
            ch.dedup();
            if ch.len() as u64 != branching.levels[j as usize] {
                return false;
            }
        }
    }
    true
}

fn cell1(frame_t: u32, k: u32) -> impl Fn(&i64, u32) -> i64 {
    move |p, j| p >> ((k - j) * frame_t)
}

fn cell2(frame_t: u32, k: u32) -> impl Fn(&(i64, i64), u32) -> (i64, i64) {
    move |p, j| {
        let s = (k - j) * frame_t;
        (p.0 >> s, p.1 >> s)
    }
}

pub fn is_moran_regular_1d(a: &GridSet1D, branching: &Branching) -> bool {
    let (k, t) = (a.frame().k(), a.frame().t());
    !a.is_empty() && check_regular(a.indices(), k, branching, cell1(t, k))
}

pub fn is_moran_regular_2d(a: &GridSet2D, branching: &Branching) -> bool {
    let (k, t) = (a.frame().k(), a.frame().t());
    !a.is_empty() && check_regular(a.points(), k, branching, cell2(t, k))
}

pub fn moran_regularize_1d(a: &GridSet1D) -> Result<(GridSet1D, Branching)> {
    if a.is_empty() {
        return Err(Error::EmptyInput("cannot regularize an empty set".into()));
    }
    let (k, t) = (a.frame().k(), a.frame().t());
    let (idx, levels) = regularize_core(a.indices(), k, t, cell1(t, k));
    let out = GridSet1D::new(a.frame().clone(), a.domain(), idx)?;
    Ok((out, Branching::new(levels)?))
}

pub fn moran_regularize_2d(a: &GridSet2D) -> Result<(GridSet2D, Branching)> {
    if a.is_empty() {
        return Err(Error::EmptyInput("cannot regularize an empty set".into()));
    }
    let (k, t) = (a.frame().k(), a.frame().t());
    let (pts, levels) = regularize_core(a.points(), k, 2 * t, cell2(t, k));
    let out = GridSet2D::new(a.frame().clone(), a.domain(), pts)?;
    Ok((out, Branching::new(levels)?))
}

/// Result of refining a family to one shared branching.
pub struct CommonBranching<S> {
    /// Indices (into the input family) of the sets that were kept.
    pub kept: Vec<usize>,
    /// Refined sets, parallel to `kept`.
    pub refined: Vec<S>,
    pub branching: Branching,
}

macro_rules! common_branching_impl {
    ($name:ident, $set:ty, $reg:ident) => {
        /// Regularizes every member and pigeonholes over the possible
        /// branching vectors, keeping the class of maximal refined mass.
        pub fn $name(family: &[$set]) -> Result<CommonBranching<$set>> {
            if family.is_empty() {
                return Err(Error::EmptyInput("empty family".into()));
            }
            let mut classes: BTreeMap<Vec<u64>, (u64, Vec<(usize, $set)>)> = BTreeMap::new();
            for (i, a) in family.iter().enumerate() {
                if a.is_empty() {
                    continue;
                }
                let (refined, branching) = $reg(a)?;
                let entry = classes.entry(branching.levels.clone()).or_default();
                entry.0 += refined.len() as u64;
                entry.1.push((i, refined));
            }
            if classes.is_empty() {
                return Err(Error::EmptyInput("all family members are empty".into()));
            }
            let best = classes
                .iter()
                .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.0.cmp(a.0)))
                .map(|(key, _)| key.clone())
                .unwrap();
            let (_, members) = classes.remove(&best).unwrap();
            let mut kept = Vec::new();
            let mut refined = Vec::new();
            for (i, r) in members {
                kept.push(i);
                refined.push(r);
            }
            Ok(CommonBranching {
                kept,
                refined,
                branching: Branching::new(best)?,
            })
        }
    };
}

common_branching_impl!(common_branching_1d, GridSet1D, moran_regularize_1d);
common_branching_impl!(common_branching_2d, GridSet2D, moran_regularize_2d);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::R64;
    use crate::frame::{Convention, ScaleFrame};
    use crate::grid::{cantor_generator, Domain1};
    use num_traits::One;
    use rand::{Rng, SeedableRng};

    fn frame(g: u32, k: u32, t: u32) -> ScaleFrame {
        ScaleFrame::new(g, k, t, R64::new(1, 2), R64::one(), Convention::Plain).unwrap()
    }

    #[test]
    fn full_grid_is_regular() {
        let f = frame(4, 2, 2);
        let a = GridSet1D::new(f, Domain1::Unit, (0..16).collect()).unwrap();
        assert!(is_moran_regular_1d(&a, &Branching::new(vec![4, 4]).unwrap()));
        assert!(!is_moran_regular_1d(&a, &Branching::new(vec![2, 4]).unwrap()));
    }

    #[test]
    fn cantor_output_is_regular_by_construction() {
        let f = frame(6, 3, 2);
        let keep = vec![vec![0, 3], vec![1], vec![0, 1, 2, 3]];
        let a = cantor_generator(&f, &keep).unwrap();
        let b = Branching::new(vec![2, 1, 4]).unwrap();
        assert!(is_moran_regular_1d(&a, &b));
    }

    #[test]
    fn irregular_example_detected() {
        // {0, 1/16, 2/16, 3/16, 4/16}: level-0 cells have 4 and 1 children
        let f = frame(4, 2, 2);
        let a = GridSet1D::new(f, Domain1::Unit, vec![0, 1, 2, 3, 4]).unwrap();
        for z0 in 0..=2u32 {
            for z1 in 0..=2u32 {
                let b = Branching::new(vec![1 << z0, 1 << z1]).unwrap();
                assert!(!is_moran_regular_1d(&a, &b));
            }
        }
    }

    #[test]
    fn regularize_worked_example() {
        let f = frame(4, 2, 2);
        let a = GridSet1D::new(f, Domain1::Unit, vec![0, 1, 2, 3, 4]).unwrap();
        let (r, b) = moran_regularize_1d(&a).unwrap();
        assert_eq!(r.indices(), &[0, 1, 2, 3]);
        assert_eq!(b.levels, vec![1, 4]);
        assert!(is_moran_regular_1d(&r, &b));
        // exact mass bound: #A' * (4T)^k >= #A
        assert!(r.len() as u64 * 64 >= a.len() as u64);
    }

    #[test]
    fn regularize_fixpoint_and_singleton() {
        let f = frame(6, 3, 2);
        let a = cantor_generator(&f, &vec![vec![0, 3]; 3]).unwrap();
        let (r, b) = moran_regularize_1d(&a).unwrap();
        assert_eq!(r, a);
        assert_eq!(b.levels, vec![2, 2, 2]);

        let s = GridSet1D::new(frame(4, 2, 2), Domain1::Unit, vec![9]).unwrap();
        let (r, b) = moran_regularize_1d(&s).unwrap();
        assert_eq!(r.indices(), &[9]);
        assert_eq!(b.levels, vec![1, 1]);
    }

    #[test]
    fn mass_bound_random_sweep() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let k = rng.gen_range(1..=3u32);
            let t = rng.gen_range(1..=4u32);
            let f = frame(k * t, k, t);
            let n = 1i64 << (k * t);
            let density = rng.gen_range(0.05..0.9);
            let idx: Vec<i64> = (0..n).filter(|_| rng.gen_bool(density)).collect();
            if idx.is_empty() {
                continue;
            }
            let a = GridSet1D::new(f, Domain1::Unit, idx).unwrap();
            let (r, b) = moran_regularize_1d(&a).unwrap();
            assert!(is_moran_regular_1d(&r, &b));
            let bound = (4u128 * t as u128).pow(k);
            assert!(r.len() as u128 * bound >= a.len() as u128);
            // idempotent on its own output
            let (r2, b2) = moran_regularize_1d(&r).unwrap();
            assert_eq!(r2, r);
            assert_eq!(b2, b);
        }
    }

    #[test]
    fn common_branching_single_and_copies() {
        let f = frame(4, 2, 2);
        let a = cantor_generator(&f, &vec![vec![0, 3]; 2]).unwrap();
        let out = common_branching_1d(&[a.clone()]).unwrap();
        assert_eq!(out.kept, vec![0]);
        assert_eq!(out.refined[0], a);

        let out = common_branching_1d(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(out.kept, vec![0, 1]);
        assert_eq!(out.refined[0], a);
        assert_eq!(out.refined[1], a);
    }

    #[test]
    fn common_branching_mass_and_maximality() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let (k, t) = (2u32, 3u32);
            let f = frame(k * t, k, t);
            let n = 1i64 << (k * t);
            let family: Vec<GridSet1D> = (0..10)
                .map(|_| {
                    let density = rng.gen_range(0.05..0.9);
                    let idx: Vec<i64> = (0..n).filter(|_| rng.gen_bool(density)).collect();
                    GridSet1D::new(f.clone(), Domain1::Unit, idx).unwrap()
                })
                .collect();
            let total: u64 = family.iter().map(|a| a.len() as u64).sum();
            if total == 0 {
                continue;
            }
            let out = common_branching_1d(&family).unwrap();
            for r in &out.refined {
                assert!(is_moran_regular_1d(r, &out.branching));
            }
            let mass: u64 = out.refined.iter().map(|r| r.len() as u64).sum();
            let bound = (4u128 * t as u128).pow(2 * k);
            assert!(mass as u128 * bound >= total as u128);
        }
    }

    #[test]
    fn regularize_2d_basic() {
        let f = frame(4, 2, 2);
        let mut pts = Vec::new();
        for x in 0..4 {
            for y in 0..4 {
                pts.push((x, y));
            }
        }
        pts.push((7, 9));
        let a = crate::grid::GridSet2D::new(f, crate::grid::Domain2::Unit, pts).unwrap();
        let (r, b) = moran_regularize_2d(&a).unwrap();
        assert!(is_moran_regular_2d(&r, &b));
        assert_eq!(r.len() as u64, b.product());
        let bound = (2u128 * (2 * 2 + 1)).pow(2); // 2(2T+1) per level, T = 2
        assert!(r.len() as u128 * bound >= a.len() as u128);
    }
}
