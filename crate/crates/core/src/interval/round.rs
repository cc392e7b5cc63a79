//! Directed rounding.
//!
//! Every interval bound in the crate is produced by one of these functions.
//! The basic operations use error-free transformations (TwoSum, FMA residuals)
//! to find the exact rounding error of the round-to-nearest result, so a bound
//! is only moved by one ulp when the nearest result is actually on the wrong
//! side. Library transcendental functions are not correctly rounded; their
//! results are pushed outward by one ulp unconditionally.

/// Below this magnitude the FMA residual may itself underflow, so the
/// residual sign is not trusted and the result is nudged unconditionally.
const TINY: f64 = 1e-290;

/// Magnitude bounds inside which Dekker's product is error-free.
const SPLIT_MAX: f64 = 1e150;
const SPLIT_MIN: f64 = 1e-200;

/// Exact `a·b − p` for `p = fl(a·b)`, or a value of the same sign.
///
/// Hardware FMA when compiled in; otherwise Dekker's two-product, falling
/// back to the (slow, software) FMA near the exponent limits.
#[inline]
fn prod_residual(a: f64, b: f64, p: f64) -> f64 {
    if cfg!(target_feature = "fma")
        || a.abs() > SPLIT_MAX
        || b.abs() > SPLIT_MAX
        || p.abs() < SPLIT_MIN
    {
        return a.mul_add(b, -p);
    }
    let split = |x: f64| {
        let c = 134217729.0 * x;
        let hi = c - (c - x);
        (hi, x - hi)
    };
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    ((ah * bh - p) + ah * bl + al * bh) + al * bl
}

/// Sign-exact `a − q·b` when `q·b` is within a factor 2 of `a`.
#[inline]
fn div_residual(a: f64, q: f64, b: f64) -> f64 {
    let p = q * b;
    if !p.is_finite() {
        return (-q).mul_add(b, a);
    }
    // a − p is exact by Sterbenz's lemma
    (a - p) - prod_residual(q, b, p)
}

#[inline]
fn down_from(x: f64, exact_below: bool) -> f64 {
    if exact_below {
        x.next_down()
    } else {
        x
    }
}

#[inline]
fn up_from(x: f64, exact_above: bool) -> f64 {
    if exact_above {
        x.next_up()
    } else {
        x
    }
}

#[inline]
fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

pub fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return overflow_down(s, a.is_finite() && b.is_finite());
    }
    down_from(s, two_sum_err(a, b, s) < 0.0)
}

pub fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return overflow_up(s, a.is_finite() && b.is_finite());
    }
    up_from(s, two_sum_err(a, b, s) > 0.0)
}

pub fn sub_down(a: f64, b: f64) -> f64 {
    add_down(a, -b)
}

pub fn sub_up(a: f64, b: f64) -> f64 {
    add_up(a, -b)
}

pub fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return overflow_down(p, a.is_finite() && b.is_finite());
    }
    if p.abs() < TINY {
        return p.next_down();
    }
    down_from(p, prod_residual(a, b, p) < 0.0)
}

pub fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return overflow_up(p, a.is_finite() && b.is_finite());
    }
    if p.abs() < TINY {
        return p.next_up();
    }
    up_from(p, prod_residual(a, b, p) > 0.0)
}

/// `a / b` rounded down. `b` must be non-zero.
pub fn div_down(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return overflow_down(q, a.is_finite() && b.is_finite());
    }
    if a == 0.0 {
        return 0.0;
    }
    if q.abs() < TINY {
        return q.next_down();
    }
    // a - q*b is exact; a/b - q has the sign of (a - q*b)/b.
    let r = div_residual(a, q, b);
    down_from(q, (r < 0.0) != (b < 0.0) && r != 0.0)
}

pub fn div_up(a: f64, b: f64) -> f64 {
    let q = a / b;
    if !q.is_finite() {
        return overflow_up(q, a.is_finite() && b.is_finite());
    }
    if a == 0.0 {
        return 0.0;
    }
    if q.abs() < TINY {
        return q.next_up();
    }
    let r = div_residual(a, q, b);
    up_from(q, (r > 0.0) != (b < 0.0) && r != 0.0)
}

pub fn sqrt_down(a: f64) -> f64 {
    let r = a.sqrt();
    if r == 0.0 || !r.is_finite() {
        return r;
    }
    down_from(r, div_residual(a, r, r) < 0.0)
}

pub fn sqrt_up(a: f64) -> f64 {
    let r = a.sqrt();
    if r == 0.0 || !r.is_finite() {
        return r;
    }
    up_from(r, div_residual(a, r, r) > 0.0)
}

/// Result of a libm call rounded down: one ulp below the returned value.
#[inline]
pub fn libm_down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else if x == f64::INFINITY {
        // overflowed result: the true value is at least MAX
        f64::MAX
    } else {
        x
    }
}

#[inline]
pub fn libm_up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else if x == f64::NEG_INFINITY {
        -f64::MAX
    } else {
        x
    }
}

/// `x^n` for `x >= 0`, rounded down.
pub fn powi_down(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_down(acc, x);
    }
    acc
}

pub fn powi_up(x: f64, n: u32) -> f64 {
    debug_assert!(x >= 0.0);
    let mut acc = 1.0;
    for _ in 0..n {
        acc = mul_up(acc, x);
    }
    acc
}

fn overflow_down(v: f64, finite_operands: bool) -> f64 {
    if v == f64::INFINITY && finite_operands {
        f64::MAX
    } else if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn overflow_up(v: f64, finite_operands: bool) -> f64 {
    if v == f64::NEG_INFINITY && finite_operands {
        f64::MIN
    } else if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}
