//! Double-double helpers and reduction of large phases modulo 2π.
//!
//! A phase is carried as an unevaluated sum `hi + lo` of two doubles. The
//! reduction subtracts `q·2π` using a three-term split of 2π and exact
//! fused-multiply-add products, so the absolute error stays near 1e-13 rad
//! for |phase| up to 2^60.

use std::f64::consts::PI;

// 2π = TWO_PI_HI + TWO_PI_MID + TWO_PI_LO to ~160 bits.
const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_MID: f64 = 2.4492935982947064e-16;
const TWO_PI_LO: f64 = -5.989539619436679e-33;
const INV_TWO_PI: f64 = 0.15915494309189535;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn product(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Self { hi, lo }
    }

    /// Nearest double-double to an integer. Exact for |v| < 2^106.
    #[inline]
    pub fn from_i128(v: i128) -> Self {
        if v.unsigned_abs() <= 1 << 53 {
            return Self::from_f64(v as f64);
        }
        let hi = v as f64;
        // |v - hi| <= ulp(hi)/2, which always fits an i128 when hi does.
        let rem = v - hi as i128;
        Self { hi, lo: rem as f64 }
    }

    #[inline]
    pub fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let e = e + self.lo + other.lo;
        let (hi, lo) = two_sum(s, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, other: Self) -> Self {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + (self.hi * other.lo + self.lo * other.hi);
        let (hi, lo) = two_sum(p, e);
        Self { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// One pass of `x - round(x/2π)·2π`, returning a double-double remainder.
#[inline]
fn subtract_turns(x: DoubleDouble) -> DoubleDouble {
    let q = (x.hi * INV_TWO_PI).round();
    if q == 0.0 {
        return x;
    }
    let (p1, e1) = two_prod(q, TWO_PI_HI);
    let (p2, e2) = two_prod(q, TWO_PI_MID);
    let p3 = q * TWO_PI_LO;
    // x.hi and p1 agree to within a factor of two, so this is exact.
    let head = x.hi - p1;
    let tail = (x.lo - e1) - (p2 + (e2 + p3));
    let (hi, lo) = two_sum(head, tail);
    DoubleDouble { hi, lo }
}

/// Reduce a double-double phase to the interval (−π, π].
#[inline]
pub(crate) fn reduce_two_pi(x: DoubleDouble) -> f64 {
    // The first pass leaves at most a few hundred radians when |x| ~ 2^60
    // (the low word of x is not looked at when choosing q).
    let r = subtract_turns(subtract_turns(x));
    let mut a = r.to_f64();
    if a <= -PI {
        a = (a + TWO_PI_HI) + TWO_PI_MID;
    } else if a > PI {
        a = (a - TWO_PI_HI) - TWO_PI_MID;
    }
    let a = a.clamp(-PI, PI);
    if a == -PI {
        PI
    } else {
        a
    }
}

/// Reduce a plain double to (−π, π].
#[inline]
pub(crate) fn reduce_f64(x: f64) -> f64 {
    reduce_two_pi(DoubleDouble::from_f64(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sums_to_two_pi() {
        assert_eq!(TWO_PI_HI, 2.0 * PI);
        assert!(TWO_PI_MID.abs() < 1e-15);
    }

    #[test]
    fn small_values_unchanged() {
        for x in [0.0, 0.5, -1.0, 3.0, -3.0] {
            assert_eq!(reduce_f64(x), x);
        }
    }

    #[test]
    fn minus_pi_maps_to_pi() {
        assert_eq!(reduce_f64(-PI), PI);
        assert_eq!(reduce_f64(PI), PI);
    }

    #[test]
    fn integer_conversion_is_exact() {
        let v: i128 = (1 << 80) + 12345;
        let d = DoubleDouble::from_i128(v);
        assert_eq!(d.hi as i128 + d.lo as i128, v);
    }

    #[test]
    fn many_turns_reduce_to_offset() {
        let x = DoubleDouble::from_f64(1000.0 * TWO_PI_HI + 0.25);
        assert!((reduce_two_pi(x) - 0.25).abs() < 1e-12);
    }
}
