//! Elementary functions on intervals.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::round::{libm_down, libm_up, sqrt_down, sqrt_up};
use super::{Interval, IntervalError};

/// Past this magnitude `x / 2π` has no fractional precision left.
const HUGE_ARG: f64 = 1e15;

/// Conservative test for `∃k ∈ ℤ: lo <= phase + 2kπ <= hi`.
///
/// Returns `true` whenever the answer is uncertain within floating-point
/// error, which only widens the result of `sin`/`cos`.
fn hits_phase(lo: f64, hi: f64, phase: f64) -> bool {
    let k = ((lo - phase) / TAU).ceil();
    for kk in [k - 1.0, k, k + 1.0] {
        let c = phase + kk * TAU;
        let margin = 16.0 * f64::EPSILON * (1.0 + c.abs());
        if c + margin >= lo && c - margin <= hi {
            return true;
        }
    }
    false
}

fn clamp_unit(lo: f64, hi: f64) -> Interval {
    Interval::raw(lo.max(-1.0), hi.min(1.0))
}

impl Interval {
    pub fn sin(&self) -> Interval {
        let (lo, hi) = (self.lo(), self.hi());
        if !lo.is_finite() || !hi.is_finite() || lo.abs() > HUGE_ARG || hi.abs() > HUGE_ARG {
            return Interval::raw(-1.0, 1.0);
        }
        if hi - lo >= TAU {
            return Interval::raw(-1.0, 1.0);
        }
        let (a, b) = (lo.sin(), hi.sin());
        let mut rlo = libm_down(a.min(b));
        let mut rhi = libm_up(a.max(b));
        if hits_phase(lo, hi, FRAC_PI_2) {
            rhi = 1.0;
        }
        if hits_phase(lo, hi, -FRAC_PI_2) {
            rlo = -1.0;
        }
        clamp_unit(rlo, rhi)
    }

    pub fn cos(&self) -> Interval {
        let (lo, hi) = (self.lo(), self.hi());
        if !lo.is_finite() || !hi.is_finite() || lo.abs() > HUGE_ARG || hi.abs() > HUGE_ARG {
            return Interval::raw(-1.0, 1.0);
        }
        if hi - lo >= TAU {
            return Interval::raw(-1.0, 1.0);
        }
        let (a, b) = (lo.cos(), hi.cos());
        let mut rlo = libm_down(a.min(b));
        let mut rhi = libm_up(a.max(b));
        if hits_phase(lo, hi, 0.0) {
            rhi = 1.0;
        }
        if hits_phase(lo, hi, PI) {
            rlo = -1.0;
        }
        clamp_unit(rlo, rhi)
    }

    pub fn exp(&self) -> Interval {
        let lo = if self.lo() == f64::NEG_INFINITY {
            0.0
        } else {
            libm_down(self.lo().exp()).max(0.0)
        };
        let hi = libm_up(self.hi().exp());
        Interval::raw(lo, hi)
    }

    pub fn ln(&self) -> Result<Interval, IntervalError> {
        if self.lo() <= 0.0 {
            return Err(IntervalError::Domain {
                func: "log",
                arg: *self,
            });
        }
        Ok(Interval::raw(
            libm_down(self.lo().ln()),
            libm_up(self.hi().ln()),
        ))
    }

    pub fn sqrt(&self) -> Result<Interval, IntervalError> {
        if self.lo() < 0.0 {
            return Err(IntervalError::Domain {
                func: "sqrt",
                arg: *self,
            });
        }
        Ok(Interval::raw(sqrt_down(self.lo()), sqrt_up(self.hi())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn sin_over_half_period_reaches_one() {
        let s = iv(0.0, Interval::PI.hi()).sin();
        assert!(s.hi() >= 1.0);
        assert!(s.lo() <= 0.0);
        assert!(iv(0.0, 1.0).subset_of(&s));
    }

    #[test]
    fn cos_of_zero_is_tight() {
        let c = iv(0.0, 0.0).cos();
        assert!(c.contains(1.0));
        assert!(c.width() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn wide_arguments_return_full_range() {
        assert_eq!(iv(0.0, 7.0).sin(), iv(-1.0, 1.0));
        assert_eq!(iv(-100.0, 100.0).cos(), iv(-1.0, 1.0));
    }

    #[test]
    fn sqrt_is_monotone() {
        let r = iv(4.0, 9.0).sqrt().unwrap();
        assert!(r.contains(2.0) && r.contains(3.0));
        assert!(r.width() <= 1.0 + 4.0 * f64::EPSILON);
    }

    #[test]
    fn domain_errors() {
        assert!(iv(-1.0, 1.0).sqrt().is_err());
        assert!(iv(0.0, 1.0).ln().is_err());
        assert!(iv(1e-300, 1.0).ln().is_ok());
    }

    #[test]
    fn cos_detects_minimum_at_pi() {
        let c = iv(3.0, 3.3).cos();
        assert_eq!(c.lo(), -1.0);
        assert!(c.hi() < -0.98);
    }
}
