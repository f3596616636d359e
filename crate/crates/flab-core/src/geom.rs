//! Exact rational plane geometry: points, general lines `ax + by = c`, and
//! the trigonometry-free comparisons (squared distances, tangent-surrogate
//! angles via cross/dot products) used throughout the incidence machinery.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::{Q, qi};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pt {
    pub x: Q,
    pub y: Q,
}

impl Pt {
    pub fn new(x: Q, y: Q) -> Self {
        Pt { x, y }
    }

    pub fn dist2(&self, other: &Pt) -> Q {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        &dx * &dx + &dy * &dy
    }
}

/// A line `a*x + b*y = c`, stored as a primitive integer triple with the
/// first nonzero of `(a, b)` positive, so equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Line {
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

impl Line {
    pub fn new(a: Q, b: Q, c: Q) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::Precondition("degenerate line: a = b = 0".into()));
        }
        // clear denominators
        let l1 = a.denom().lcm(b.denom());
        let l = l1.lcm(c.denom());
        let mut ai = a.numer() * (&l / a.denom());
        let mut bi = b.numer() * (&l / b.denom());
        let mut ci = c.numer() * (&l / c.denom());
        let g1 = ai.gcd(&bi);
        let g = g1.gcd(&ci);
        if !g.is_zero() {
            ai /= &g;
            bi /= &g;
            ci /= &g;
        }
        let flip = if !ai.is_zero() {
            ai.is_negative()
        } else {
            bi.is_negative()
        };
        if flip {
            ai = -ai;
            bi = -bi;
            ci = -ci;
        }
        Ok(Line { a: ai, b: bi, c: ci })
    }

    pub fn from_slope_intercept(m: Q, q0: Q) -> Self {
        // y = m x + q0  <=>  m x - y = -q0
        Line::new(m, -Q::one(), -q0).expect("slope-intercept line is nondegenerate")
    }

    pub fn vertical(x0: Q) -> Self {
        Line::new(Q::one(), Q::zero(), x0).unwrap()
    }

    pub fn horizontal(y0: Q) -> Self {
        Line::new(Q::zero(), Q::one(), y0).unwrap()
    }

    pub fn through(p: &Pt, q: &Pt) -> Result<Self> {
        if p == q {
            return Err(Error::Precondition("two identical points span no line".into()));
        }
        let a = &q.y - &p.y;
        let b = &p.x - &q.x;
        let c = &p.x * &q.y - &q.x * &p.y;
        Line::new(a, b, c)
    }

    /// Line through `p` with the same direction as `self`.
    pub fn parallel_through(&self, p: &Pt) -> Self {
        let (a, b, _) = self.coeffs();
        let c = &a * &p.x + &b * &p.y;
        Line::new(a, b, c).unwrap()
    }

    pub fn coeffs(&self) -> (Q, Q, Q) {
        (
            Q::from_integer(self.a.clone()),
            Q::from_integer(self.b.clone()),
            Q::from_integer(self.c.clone()),
        )
    }

    pub fn is_vertical(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_horizontal(&self) -> bool {
        self.a.is_zero()
    }

    /// Slope for non-vertical lines.
    pub fn slope(&self) -> Option<Q> {
        if self.b.is_zero() {
            None
        } else {
            Some(Q::new(-self.a.clone(), self.b.clone()))
        }
    }

    /// `(slope, intercept)` chart for non-vertical lines.
    pub fn iota(&self) -> Option<(Q, Q)> {
        if self.b.is_zero() {
            None
        } else {
            Some((
                Q::new(-self.a.clone(), self.b.clone()),
                Q::new(self.c.clone(), self.b.clone()),
            ))
        }
    }

    pub fn y_at(&self, x: &Q) -> Result<Q> {
        if self.b.is_zero() {
            return Err(Error::Precondition("vertical line has no y(x)".into()));
        }
        Ok((Q::from_integer(self.c.clone()) - Q::from_integer(self.a.clone()) * x)
            / Q::from_integer(self.b.clone()))
    }

    /// Signed residual `a x + b y - c` (not normalized by `|n|`).
    pub fn eval(&self, p: &Pt) -> Q {
        Q::from_integer(self.a.clone()) * &p.x + Q::from_integer(self.b.clone()) * &p.y
            - Q::from_integer(self.c.clone())
    }

    /// Monotone coordinate along the line direction `(b, -a)`.
    pub fn along(&self, p: &Pt) -> Q {
        Q::from_integer(self.b.clone()) * &p.x - Q::from_integer(self.a.clone()) * &p.y
    }

    /// Intersection point of two non-parallel lines.
    pub fn intersect(&self, other: &Line) -> Option<Pt> {
        let det = &self.a * &other.b - &other.a * &self.b;
        if det.is_zero() {
            return None;
        }
        let x = Q::new(&self.c * &other.b - &other.c * &self.b, det.clone());
        let y = Q::new(&self.a * &other.c - &other.a * &self.c, det);
        Some(Pt::new(x, y))
    }
}

/// Squared Euclidean point-to-line distance, exact.
pub fn dist2_point_line(p: &Pt, l: &Line) -> Q {
    let r = l.eval(p);
    let n2 = qi(0) + Q::from_integer(&l.a * &l.a) + Q::from_integer(&l.b * &l.b);
    &r * &r / n2
}

/// `(cross, dot)` of the two line normals; the tangent of the angle between
/// the lines is `|cross| / |dot|`.
fn cross_dot(l1: &Line, l2: &Line) -> (BigInt, BigInt) {
    let cross = &l1.a * &l2.b - &l2.a * &l1.b;
    let dot = &l1.a * &l2.a + &l1.b * &l2.b;
    (cross, dot)
}

/// `tan(angle(l1, l2)) <= thr`, exactly; perpendicular lines compare above
/// every finite threshold.
pub fn tau_le(l1: &Line, l2: &Line, thr: &Q) -> bool {
    if thr.is_negative() {
        return false;
    }
    let (cross, dot) = cross_dot(l1, l2);
    let lhs = Q::from_integer(&cross * &cross) * (thr.denom() * thr.denom());
    let rhs = Q::from_integer(&dot * &dot) * (thr.numer() * thr.numer());
    lhs <= rhs
}

/// `tan(angle(l1, l2)) >= thr`, exactly.
pub fn tau_ge(l1: &Line, l2: &Line, thr: &Q) -> bool {
    if !thr.is_positive() {
        return true;
    }
    let (cross, dot) = cross_dot(l1, l2);
    let lhs = Q::from_integer(&cross * &cross) * (thr.denom() * thr.denom());
    let rhs = Q::from_integer(&dot * &dot) * (thr.numer() * thr.numer());
    lhs >= rhs
}

/// The tangent surrogate as an exact rational, `None` for perpendicular pairs.
pub fn tau(l1: &Line, l2: &Line) -> Option<Q> {
    let (cross, dot) = cross_dot(l1, l2);
    if dot.is_zero() {
        None
    } else {
        Some(Q::new(cross.abs(), dot.abs()))
    }
}

/// Unit-free direction comparison for slope values in a chart: the tangent
/// of the angle between directions `(1, m1)` and `(1, m2)`.
pub fn slope_tau(m1: &Q, m2: &Q) -> Q {
    let num = (m1 - m2).abs();
    let den = (Q::one() + m1 * m2).abs();
    num / den
}

/// Collinearity test for three points.
pub fn collinear(p: &Pt, q: &Pt, r: &Pt) -> bool {
    let v1 = (&q.x - &p.x, &q.y - &p.y);
    let v2 = (&r.x - &p.x, &r.y - &p.y);
    (&v1.0 * &v2.1 - &v1.1 * &v2.0).is_zero()
}

/// Convex-position test used for "between on the line": the along-parameter
/// of `x` lies strictly inside those of `p` and `q`.
pub fn strictly_between_along(l: &Line, p: &Pt, q: &Pt, x: &Pt) -> bool {
    let tp = l.along(p);
    let tq = l.along(q);
    let tx = l.along(x);
    let (lo, hi) = if tp <= tq { (tp, tq) } else { (tq, tp) };
    lo < tx && tx < hi
}

/// All pairwise `iota` distances at least `sep` (squared comparison).
pub fn iota_separated(lines: &[Line], sep: &Q) -> Option<(usize, usize)> {
    let sep2 = sep * sep;
    let iotas: Vec<Option<(Q, Q)>> = lines.iter().map(|l| l.iota()).collect();
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            if let (Some((m1, b1)), Some((m2, b2))) = (&iotas[i], &iotas[j]) {
                let dm = m1 - m2;
                let db = b1 - b2;
                if &dm * &dm + &db * &db < sep2 {
                    return Some((i, j));
                }
            }
        }
    }
    None
}

/// Grid-snapped representative of a rational point at `2^-bits` resolution.
pub fn snap_to_grid(p: &Pt, bits: u32) -> Result<(i64, i64)> {
    let scale = crate::exact::pow2(bits as i64);
    let xi = (&p.x * &scale).floor().to_integer();
    let yi = (&p.y * &scale).floor().to_integer();
    let to =
        |v: BigInt| -> Result<i64> {
            i64::try_from(v).map_err(|_| Error::InvalidScale(format!("snap overflow at {bits} bits")))
        };
    Ok((to(xi)?, to(yi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    #[test]
    fn line_normalization_and_iota() {
        let l1 = Line::from_slope_intercept(q(1, 2), q(1, 4));
        let l2 = Line::new(q(2, 1), q(-4, 1), q(-1, 1)).unwrap();
        assert_eq!(l1, l2);
        let (m, b) = l1.iota().unwrap();
        assert_eq!(m, q(1, 2));
        assert_eq!(b, q(1, 4));
        assert!(Line::vertical(q(3, 2)).is_vertical());
    }

    #[test]
    fn distances_and_eval() {
        let l = Line::from_slope_intercept(qi(0), qi(0)); // x-axis
        let p = Pt::new(qi(3), q(1, 2));
        assert_eq!(dist2_point_line(&p, &l), q(1, 4));
        let v = Line::vertical(qi(1));
        assert_eq!(dist2_point_line(&p, &v), qi(4));
    }

    #[test]
    fn tau_comparisons() {
        let l0 = Line::from_slope_intercept(qi(0), qi(0));
        let l1 = Line::from_slope_intercept(q(1, 2), qi(1));
        // tan between slopes 0 and 1/2 is 1/2
        assert_eq!(tau(&l0, &l1), Some(q(1, 2)));
        assert!(tau_le(&l0, &l1, &q(1, 2)));
        assert!(!tau_le(&l0, &l1, &q(499, 1000)));
        assert!(tau_ge(&l0, &l1, &q(1, 2)));
        let v = Line::vertical(qi(0));
        assert_eq!(tau(&l0, &v), None);
        assert!(!tau_le(&l0, &v, &qi(1000)));
        assert!(tau_ge(&l0, &v, &qi(1000)));
        assert_eq!(slope_tau(&qi(0), &q(1, 2)), q(1, 2));
    }

    #[test]
    fn intersect_and_between() {
        let l1 = Line::from_slope_intercept(qi(1), qi(0));
        let l2 = Line::from_slope_intercept(qi(-1), qi(2));
        let p = l1.intersect(&l2).unwrap();
        assert_eq!(p, Pt::new(qi(1), qi(1)));
        assert!(l1.intersect(&Line::from_slope_intercept(qi(1), qi(5))).is_none());

        let a = Pt::new(qi(0), qi(0));
        let b = Pt::new(qi(4), qi(4));
        let m = Pt::new(qi(2), qi(2));
        assert!(strictly_between_along(&l1, &a, &b, &m));
        assert!(!strictly_between_along(&l1, &a, &m, &b));
    }

    #[test]
    fn snap_examples() {
        let p = Pt::new(q(5, 16), q(-3, 16));
        assert_eq!(snap_to_grid(&p, 4).unwrap(), (5, -3));
        assert_eq!(snap_to_grid(&p, 2).unwrap(), (1, -1));
    }
}
