//! Outward-rounded interval arithmetic over `f64`.

pub mod decimal;
mod elem;
mod matrix;
mod ptope;
pub mod round;
mod vector;

pub use matrix::{f_mul, f_mul_vec, IMatrix};
pub use ptope::{verified_inverse, DegenerateMatrix, Parallelotope, Shape, COND_LIMIT};
pub use vector::IntervalBox;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("division by an interval containing zero: {0}")]
    DivisionByZero(Interval),
    #[error("{func} undefined on {arg}")]
    Domain { func: &'static str, arg: Interval },
    #[error("invalid interval bounds [{0}, {1}]")]
    InvalidBounds(f64, f64),
}

/// A closed interval `[lo, hi]` with `lo <= hi`.
///
/// Intervals are never empty; operations that can produce the empty set
/// (intersection) return `Option<Interval>`.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const PI: Interval = Interval {
        lo: std::f64::consts::PI,
        hi: 3.1415926535897936, // next_up(PI)
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self, IntervalError> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(IntervalError::InvalidBounds(lo, hi));
        }
        Ok(Interval { lo, hi })
    }

    /// Builds an interval from bounds that are already known to be ordered.
    #[inline]
    pub(crate) fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "bad bounds {lo} {hi}");
        Interval { lo, hi }
    }

    #[inline]
    pub fn point(x: f64) -> Self {
        assert!(x.is_finite(), "point interval from non-finite {x}");
        Interval { lo: x, hi: x }
    }

    /// Smallest interval containing both values.
    pub fn span(a: f64, b: f64) -> Self {
        Interval {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    /// `[-r, r]`
    pub fn symmetric(r: f64) -> Self {
        let r = r.abs();
        Interval { lo: -r, hi: r }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Width, rounded up.
    pub fn width(&self) -> f64 {
        round::sub_up(self.hi, self.lo)
    }

    /// A representable point inside the interval.
    pub fn mid(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => {
                let m = 0.5 * self.lo + 0.5 * self.hi;
                m.clamp(self.lo, self.hi)
            }
            (false, false) => 0.0,
            (true, false) => self.lo.max(0.0),
            (false, true) => self.hi.min(0.0),
        }
    }

    /// Upper bound on the distance from `mid()` to either endpoint.
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        round::sub_up(self.hi, m).max(round::sub_up(m, self.lo))
    }

    /// Magnitude: `max |x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude: `min |x|` over the interval.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`
    pub fn subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self` lies in the interior of `other`.
    pub fn interior_of(&self, other: &Interval) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0.0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0.0
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// Intersection that falls back to `self` when the two are disjoint.
    ///
    /// Used where both operands are known to enclose the same quantity, so
    /// disjointness can only come from a bug or from exotic rounding.
    pub fn refine(&self, other: &Interval) -> Interval {
        self.intersect(other).unwrap_or(*self)
    }

    /// Widens by `eps` on both sides.
    pub fn inflate(&self, eps: f64) -> Interval {
        Interval {
            lo: round::sub_down(self.lo, eps),
            hi: round::add_up(self.hi, eps),
        }
    }

    pub fn recip(&self) -> Result<Interval, IntervalError> {
        Interval::ONE.checked_div(self)
    }

    pub fn checked_div(&self, b: &Interval) -> Result<Interval, IntervalError> {
        if b.contains(0.0) {
            return Err(IntervalError::DivisionByZero(*b));
        }
        let a = self;
        let cands = [(a.lo, b.lo), (a.lo, b.hi), (a.hi, b.lo), (a.hi, b.hi)];
        let lo = cands
            .iter()
            .map(|&(x, y)| round::div_down(x, y))
            .fold(f64::INFINITY, f64::min);
        let hi = cands
            .iter()
            .map(|&(x, y)| round::div_up(x, y))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval { lo, hi })
    }

    /// Division by a non-zero integer constant.
    pub fn div_int(&self, k: u32) -> Interval {
        debug_assert!(k > 0);
        let k = k as f64;
        Interval {
            lo: round::div_down(self.lo, k),
            hi: round::div_up(self.hi, k),
        }
    }

    pub fn sqr(&self) -> Interval {
        self.powi(2)
    }

    /// Integer power; even powers are range-exact.
    pub fn powi(&self, n: u32) -> Interval {
        if n == 0 {
            return Interval::ONE;
        }
        if n % 2 == 1 {
            let lo = if self.lo >= 0.0 {
                round::powi_down(self.lo, n)
            } else {
                -round::powi_up(-self.lo, n)
            };
            let hi = if self.hi >= 0.0 {
                round::powi_up(self.hi, n)
            } else {
                -round::powi_down(-self.hi, n)
            };
            Interval { lo, hi }
        } else {
            Interval {
                lo: round::powi_down(self.mig(), n),
                hi: round::powi_up(self.mag(), n),
            }
        }
    }

    pub fn abs(&self) -> Interval {
        Interval {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "[{}]", self.lo)
        } else {
            write!(f, "[{}, {}]", self.lo, self.hi)
        }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, b: Interval) -> Interval {
        Interval {
            lo: round::add_down(self.lo, b.lo),
            hi: round::add_up(self.hi, b.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, b: Interval) -> Interval {
        Interval {
            lo: round::sub_down(self.lo, b.hi),
            hi: round::sub_up(self.hi, b.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, b: Interval) -> Interval {
        use round::{mul_down as dn, mul_up as up};
        let a = self;
        let (ap, an) = (a.lo >= 0.0, a.hi <= 0.0);
        let (bp, bn) = (b.lo >= 0.0, b.hi <= 0.0);
        // sign cases pick the two products that bound the result
        let (lo, hi) = match (ap, an, bp, bn) {
            (true, _, true, _) => (dn(a.lo, b.lo), up(a.hi, b.hi)),
            (true, _, _, true) => (dn(a.hi, b.lo), up(a.lo, b.hi)),
            (true, _, _, _) => (dn(a.hi, b.lo), up(a.hi, b.hi)),
            (_, true, true, _) => (dn(a.lo, b.hi), up(a.hi, b.lo)),
            (_, true, _, true) => (dn(a.hi, b.hi), up(a.lo, b.lo)),
            (_, true, _, _) => (dn(a.lo, b.hi), up(a.lo, b.lo)),
            (_, _, true, _) => (dn(a.lo, b.hi), up(a.hi, b.hi)),
            (_, _, _, true) => (dn(a.hi, b.lo), up(a.lo, b.lo)),
            _ => (
                dn(a.lo, b.hi).min(dn(a.hi, b.lo)),
                up(a.lo, b.lo).max(up(a.hi, b.hi)),
            ),
        };
        Interval { lo, hi }
    }
}

impl Add<f64> for Interval {
    type Output = Interval;
    fn add(self, b: f64) -> Interval {
        self + Interval::point(b)
    }
}

impl Sub<f64> for Interval {
    type Output = Interval;
    fn sub(self, b: f64) -> Interval {
        self - Interval::point(b)
    }
}

impl Mul<f64> for Interval {
    type Output = Interval;
    fn mul(self, b: f64) -> Interval {
        self * Interval::point(b)
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn add_is_exact_on_small_integers() {
        assert_eq!(iv(1.0, 2.0) + iv(3.0, 4.0), iv(4.0, 6.0));
    }

    #[test]
    fn mul_takes_extreme_endpoint_products() {
        // brute force over the four endpoint products
        let (a, b) = (iv(-1.0, 2.0), iv(3.0, 4.0));
        let prods = [-3.0, -4.0, 6.0, 8.0];
        let lo = prods.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = prods.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(a * b, iv(lo, hi));
        assert_eq!(a * b, iv(-4.0, 8.0));
    }

    #[test]
    fn one_third_is_strictly_widened() {
        let q = iv(1.0, 1.0).checked_div(&iv(3.0, 3.0)).unwrap();
        assert!(q.lo() < q.hi());
        assert!(q.contains(1.0 / 3.0));
        assert_eq!(q.lo().next_up(), q.hi());
    }

    #[test]
    fn division_by_zero_interval_is_an_error() {
        let err = iv(1.0, 2.0).checked_div(&iv(-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, IntervalError::DivisionByZero(_)));
    }

    #[test]
    fn set_operations() {
        assert_eq!(iv(0.0, 1.0).hull(&iv(2.0, 3.0)), iv(0.0, 3.0));
        assert_eq!(iv(0.0, 2.0).intersect(&iv(1.0, 3.0)), Some(iv(1.0, 2.0)));
        assert_eq!(iv(0.0, 1.0).intersect(&iv(2.0, 3.0)), None);
        assert_eq!(iv(1.0, 4.0).width(), 3.0);
        assert!(iv(1.0, 4.0).contains(iv(1.0, 4.0).mid()));
    }

    #[test]
    fn even_powers_are_range_exact() {
        assert_eq!(iv(-1.0, 2.0).powi(2), iv(0.0, 4.0));
        assert_eq!(iv(-3.0, -2.0).powi(2), iv(4.0, 9.0));
        assert_eq!(iv(-2.0, 1.0).powi(3), iv(-8.0, 1.0));
        assert_eq!(iv(-2.0, 1.0).powi(0), Interval::ONE);
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn pi_constant_brackets_pi() {
        assert_eq!(Interval::PI.hi(), std::f64::consts::PI.next_up());
    }
}
