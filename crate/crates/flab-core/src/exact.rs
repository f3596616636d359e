//! Exact rational arithmetic helpers.
//!
//! Measured constants in this crate are often of the form
//! `count * 2^(t*alpha)` with `alpha` a small rational, which is irrational
//! whenever `t*alpha` is not an integer. [`PowerProduct`] keeps such values
//! as formal products of positive rational bases raised to small rational
//! exponents; comparisons clear the exponent denominators and reduce to
//! exact big-integer comparisons. [`cmp_pow2_dyadic`] decides
//! `2^(e/2^g) <=> v` for rational `v` by interval bisection with directed
//! rounding, which terminates because `2^x` is irrational for non-integer
//! dyadic `x`.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational.
pub type Q = num_rational::BigRational;
/// Small rational used for exponents and frame parameters.
pub type R64 = Ratio<i64>;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// `2^e` as an exact rational, `e` of either sign.
pub fn pow2(e: i64) -> Q {
    if e >= 0 {
        Q::from_integer(BigInt::one() << (e as usize))
    } else {
        Q::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

/// If `v` is exactly a power of two, returns its exponent.
pub fn as_pow2(v: &Q) -> Option<i64> {
    if v.numer().is_one() {
        let d = v.denom().to_biguint()?;
        if d.count_ones() == 1 {
            return Some(-(d.trailing_zeros()? as i64));
        }
        None
    } else if v.denom().is_one() {
        let n = v.numer().to_biguint()?;
        if n.count_ones() == 1 {
            return Some(n.trailing_zeros()? as i64);
        }
        None
    } else {
        None
    }
}

/// `floor(log2(v))` for positive rational `v`.
pub fn floor_log2(v: &Q) -> i64 {
    assert!(v.is_positive(), "floor_log2 needs a positive value");
    let n = v.numer().to_biguint().unwrap();
    let d = v.denom().to_biguint().unwrap();
    let mut e = n.bits() as i64 - d.bits() as i64;
    // 2^e <= v < 2^(e+2); fix up to the floor.
    if pow2_le(e + 1, v) {
        e += 1;
    }
    if !pow2_le(e, v) {
        e -= 1;
    }
    debug_assert!(pow2_le(e, v) && !pow2_le(e + 1, v));
    e
}

fn pow2_le(e: i64, v: &Q) -> bool {
    pow2(e) <= *v
}

fn big_pow(base: &BigInt, e: u64) -> BigInt {
    base.pow(u32::try_from(e).expect("exponent too large for exact power"))
}

fn q_pow_int(base: &Q, e: i64) -> Q {
    if e == 0 {
        return Q::one();
    }
    let m = e.unsigned_abs();
    let n = big_pow(base.numer(), m);
    let d = big_pow(base.denom(), m);
    if e > 0 {
        Q::new(n, d)
    } else {
        Q::new(d, n)
    }
}

/// A formal product `prod base_i ^ exp_i` with positive rational bases and
/// small rational exponents. Exact total order; rational extraction when the
/// value happens to be rational in the obvious normal form.
#[derive(Clone, Debug)]
pub struct PowerProduct {
    /// Accumulated exponent of 2 (bases are reduced to odd/odd parts).
    exp2: R64,
    /// Odd-part bases (numerator and denominator odd, base != 1) with exponents.
    factors: Vec<(Q, R64)>,
}

impl PowerProduct {
    pub fn one() -> Self {
        PowerProduct {
            exp2: R64::zero(),
            factors: Vec::new(),
        }
    }

    /// `2^e` for rational `e`.
    pub fn from_pow2(e: R64) -> Self {
        PowerProduct {
            exp2: e,
            factors: Vec::new(),
        }
    }

    pub fn from_q(v: &Q) -> Self {
        Self::from_q_pow(v, R64::one())
    }

    /// `v^e` for positive rational `v`.
    pub fn from_q_pow(v: &Q, e: R64) -> Self {
        assert!(v.is_positive(), "PowerProduct bases must be positive");
        let (tz, odd) = split_pow2(v);
        let mut out = PowerProduct {
            exp2: e * tz,
            factors: Vec::new(),
        };
        if !odd.is_one() && !e.is_zero() {
            out.factors.push((odd, e));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut factors = self.factors.clone();
        for (b, e) in &other.factors {
            if let Some(slot) = factors.iter_mut().find(|(fb, _)| fb == b) {
                slot.1 += *e;
            } else {
                factors.push((b.clone(), *e));
            }
        }
        factors.retain(|(_, e)| !e.is_zero());
        PowerProduct {
            exp2: self.exp2 + other.exp2,
            factors,
        }
    }

    pub fn pow(&self, e: R64) -> Self {
        if e.is_zero() {
            return Self::one();
        }
        PowerProduct {
            exp2: self.exp2 * e,
            factors: self
                .factors
                .iter()
                .map(|(b, f)| (b.clone(), *f * e))
                .collect(),
        }
    }

    pub fn inv(&self) -> Self {
        self.pow(-R64::one())
    }

    /// Exact comparison against another formal product.
    pub fn cmp(&self, other: &Self) -> Ordering {
        // Gather self / other into one product and compare with 1.
        let ratio = self.mul(&other.inv());
        ratio.cmp_one()
    }

    /// Exact comparison with 1.
    pub fn cmp_one(&self) -> Ordering {
        let mut den: i64 = self.exp2.denom().abs();
        for (_, e) in &self.factors {
            den = den.lcm(e.denom());
        }
        // value^den = 2^(exp2*den) * prod base^(e*den), all integer exponents.
        let mut lhs = Q::one();
        let mut rhs = Q::one();
        let e2 = (self.exp2 * den).to_integer();
        if e2 >= 0 {
            lhs *= pow2(e2);
        } else {
            rhs *= pow2(-e2);
        }
        for (b, e) in &self.factors {
            let ei = (*e * den).to_integer();
            if ei >= 0 {
                lhs *= q_pow_int(b, ei);
            } else {
                rhs *= q_pow_int(b, -ei);
            }
        }
        lhs.cmp(&rhs)
    }

    pub fn is_ge(&self, other: &Self) -> bool {
        self.cmp(other) != Ordering::Less
    }

    /// The exact rational value, when the normal form is rational: every odd
    /// base must carry an integer exponent and the power of two must be
    /// integral.
    pub fn to_q(&self) -> Option<Q> {
        if !self.exp2.denom().is_one() {
            return None;
        }
        let mut out = pow2(self.exp2.to_integer());
        for (b, e) in &self.factors {
            if !e.denom().is_one() {
                return None;
            }
            out *= q_pow_int(b, e.to_integer());
        }
        Some(out)
    }

    /// `log2` of the value as f64, for reports and fitting only.
    pub fn log2_f64(&self) -> f64 {
        let mut acc = self.exp2.numer().to_f64().unwrap_or(0.0)
            / self.exp2.denom().to_f64().unwrap_or(1.0);
        for (b, e) in &self.factors {
            let lb = log2_q_f64(b);
            acc += lb * (e.numer().to_f64().unwrap_or(0.0) / e.denom().to_f64().unwrap_or(1.0));
        }
        acc
    }
}

/// Approximate `log2` of a positive rational, for reporting.
pub fn log2_q_f64(v: &Q) -> f64 {
    // Scale into f64 range via the floor exponent, then correct.
    let e = floor_log2(v);
    let m = v / pow2(e);
    let mf = m.numer().to_f64().unwrap_or(1.0) / m.denom().to_f64().unwrap_or(1.0);
    e as f64 + libm_log2(mf)
}

// Minimal log2 without std; mantissa is in [1,2) so the series converges fast.
fn libm_log2(x: f64) -> f64 {
    // ln via atanh identity: ln(x) = 2 atanh((x-1)/(x+1)).
    let t = (x - 1.0) / (x + 1.0);
    let t2 = t * t;
    let mut term = t;
    let mut sum = 0.0;
    for k in 0..30 {
        sum += term / (2 * k + 1) as f64;
        term *= t2;
    }
    2.0 * sum / core::f64::consts::LN_2
}

/// Splits `v = 2^tz * odd` with `odd` having odd numerator and denominator.
fn split_pow2(v: &Q) -> (i64, Q) {
    let n = v.numer().to_biguint().expect("positive base");
    let d = v.denom().to_biguint().expect("positive base");
    let zn = n.trailing_zeros().unwrap_or(0) as i64;
    let zd = d.trailing_zeros().unwrap_or(0) as i64;
    let odd = Q::new(BigInt::from(n >> (zn as u64)), BigInt::from(d >> (zd as u64)));
    (zn - zd, odd)
}

/// Compares `2^(e / 2^g)` with a rational `v`, exactly.
pub fn cmp_pow2_dyadic(mut e: i64, mut g: u32, v: &Q) -> Ordering {
    if !v.is_positive() {
        return Ordering::Greater;
    }
    while g > 0 && e % 2 == 0 {
        e /= 2;
        g -= 1;
    }
    if g == 0 {
        return pow2(e).cmp(v);
    }
    // x = n + r/2^g with odd r in (0, 2^g); 2^x is irrational.
    let scale = 1i64 << g;
    let n = e.div_euclid(scale);
    let r = e.rem_euclid(scale) as u64;
    debug_assert!(r % 2 == 1);
    let w = v / pow2(n); // compare 2^(r/2^g) with w
    let wn = w.numer().to_biguint().unwrap();
    let wd = w.denom().to_biguint().unwrap();
    let mut prec: u64 = 64;
    loop {
        let (lo, hi) = pow2_frac_interval(r, g, prec);
        // value in [lo, hi] / 2^prec ; compare with wn/wd.
        let lhs_lo = lo * &wd;
        let lhs_hi = hi * &wd;
        let rhs = (&wn) << prec;
        if lhs_hi < rhs {
            return Ordering::Less;
        }
        if lhs_lo > rhs {
            return Ordering::Greater;
        }
        prec *= 2;
        assert!(prec <= 1 << 20, "cmp_pow2_dyadic failed to converge");
    }
}

/// `[lo, hi]` enclosing `2^(r/2^g) * 2^prec`, with `0 < r < 2^g`.
fn pow2_frac_interval(r: u64, g: u32, prec: u64) -> (BigUint, BigUint) {
    let one = BigUint::one() << prec;
    let mut lo = one.clone();
    let mut hi = one.clone();
    // c_j = 2^(1/2^j) computed by repeated square roots of 2.
    let mut cj_lo = BigUint::one() << prec;
    let mut cj_hi = BigUint::one() << prec;
    // start with c_0 = 2
    cj_lo <<= 1;
    cj_hi <<= 1;
    for j in 1..=g {
        // directed-rounding square root: floor for lo, ceil for hi
        cj_lo = (&cj_lo << prec).sqrt();
        cj_hi = (&cj_hi << prec).sqrt() + 1u32;
        if (r >> (g - j)) & 1 == 1 {
            lo = (&lo * &cj_lo) >> prec;
            hi = ((&hi * &cj_hi) >> prec) + 1u32;
        }
    }
    (lo, hi)
}

/// Compares `a^p` with `b^q` for non-negative integers, exactly.
pub fn cmp_int_powers(a: &BigUint, p: u32, b: &BigUint, q: u32) -> Ordering {
    a.pow(p).cmp(&b.pow(q))
}
