//! Enclosing zero crossings of set-valued scalar functions of time.
//!
//! A function here is a scalar quantity `s(x, t)` evaluated along the flows
//! of every initial state `x` of an enclosure. `value(T)` encloses
//! `{ s(x, t) | x, t ∈ T }` and `slope(T)` the corresponding time
//! derivatives. A root enclosure `τ` then contains the crossing time of every
//! initial state.

use std::ops::ControlFlow;

use crate::interval::Interval;

pub trait TimeFunction {
    fn value(&self, t: Interval) -> Interval;
    fn slope(&self, t: Interval) -> Interval;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Pos,
    Neg,
}

/// Sign of every member of `v`, if they all agree strictly.
pub fn strict_sign(v: Interval) -> Option<Sign> {
    if v.is_positive() {
        Some(Sign::Pos)
    } else if v.is_negative() {
        Some(Sign::Neg)
    } else {
        None
    }
}

/// A verified crossing.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    /// Contains the unique crossing time of every initial state.
    pub tau: Interval,
    /// The bracket whose end signs and slope established uniqueness.
    pub bracket: Interval,
    /// Some Newton image landed strictly inside its input interval.
    pub contracted: bool,
    /// Slope enclosure over the bracket; never contains zero.
    pub slope: Interval,
    /// Sign of the function before the crossing.
    pub left: Sign,
}

/// Narrows the crossing inside `bracket`.
///
/// Requires `f` strictly of sign `left` at `bracket.lo()`, strictly of the
/// opposite sign at `bracket.hi()`, and `0 ∉ slope ⊇ f'(bracket)`, which
/// together prove a unique crossing per initial state. Combines interval
/// Newton steps with sign bisection; returns `None` only if an enclosure is
/// contradictory, which cannot happen under the preconditions.
pub fn narrow(f: &impl TimeFunction, bracket: Interval, left: Sign, slope: Interval, tol: f64) -> Option<Root> {
    let mut t = bracket;
    let mut contracted = false;
    for _ in 0..200 {
        if t.width() <= tol {
            break;
        }
        let d = f.slope(t).refine(&slope);
        let m = t.mid();
        let n = Interval::point(m) - f.value(Interval::point(m)).checked_div(&d).ok()?;
        if n.interior_of(&t) {
            contracted = true;
        }
        let mut next = t.intersect(&n)?;
        if next.width() > 0.5 * t.width() {
            let c = next.mid();
            match strict_sign(f.value(Interval::point(c))) {
                Some(s) if s == left => next = Interval::span(c, next.hi()),
                Some(_) => next = Interval::span(next.lo(), c),
                None => {}
            }
        }
        if next == t {
            break;
        }
        t = next;
    }
    Some(Root {
        tau: t,
        bracket,
        contracted,
        slope,
        left,
    })
}

/// Visits, in time order, the pieces of `t` on which `settled` fails after
/// at most `depth` bisections, until `visit` breaks. Adjacent pieces share
/// their endpoint exactly.
pub fn unsettled<B>(
    t: Interval,
    depth: u32,
    settled: &mut impl FnMut(Interval) -> bool,
    visit: &mut impl FnMut(Interval) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if settled(t) {
        return ControlFlow::Continue(());
    }
    let m = t.mid();
    if depth == 0 || m <= t.lo() || m >= t.hi() {
        return visit(t);
    }
    unsettled(Interval::span(t.lo(), m), depth - 1, settled, visit)?;
    unsettled(Interval::span(m, t.hi()), depth - 1, settled, visit)
}
