//! Brute-force reference implementations used to validate the fast counting
//! kernels. These deliberately share no code with the implementations they
//! check: quadruple loops, double loops, and exhaustive rational distance
//! scans only.

use alloc::vec::Vec;

use crate::geom::{dist2_point_line, Line, Pt};
use crate::Q;

/// Additive energy by direct enumeration of all quadruples.
pub fn energy_quadruple_oracle(a: &[i64], b: &[i64]) -> u128 {
    let mut count: u128 = 0;
    for &x in a {
        for &x2 in a {
            for &y in b {
                for &y2 in b {
                    if x + y == x2 + y2 {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Minkowski sum (or difference) by the naive double loop.
pub fn minkowski_oracle(a: &[i64], b: &[i64], add: bool) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(if add { x + y } else { x - y });
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// All incident pairs by exhaustive exact distance comparison.
pub fn incidence_oracle(points: &[Pt], lines: &[Line], reach: &Q) -> Vec<(u32, u32)> {
    let reach2 = reach * reach;
    let mut out = Vec::new();
    for (pi, p) in points.iter().enumerate() {
        for (li, l) in lines.iter().enumerate() {
            if dist2_point_line(p, l) <= reach2 {
                out.push((pi as u32, li as u32));
            }
        }
    }
    out
}
