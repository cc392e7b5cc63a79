//! Truth signals of atomic propositions `e > 0`.

use crate::expr::Expr;
use crate::interval::Interval;
use crate::simulate::event::Along;
use crate::simulate::roots::{narrow, strict_sign, Sign, TimeFunction};
use crate::simulate::Trajectory;

use super::signal::{Signal, Truth};
use super::trace::{probes, walk, Visitor};

/// Bisections of a probe piece before its sign is left unknown.
const DEPTH: u32 = 12;
/// Width at which crossing enclosures stop narrowing.
const TOL: f64 = 1e-12;

fn truth(v: Interval) -> Truth {
    match strict_sign(v) {
        Some(Sign::Pos) => Truth::True,
        Some(Sign::Neg) => Truth::False,
        None => Truth::Unknown,
    }
}

#[derive(Default)]
struct Pieces(Vec<(f64, f64, Truth)>);

impl Pieces {
    fn push(&mut self, lo: f64, hi: f64, v: Truth) {
        if lo < hi {
            self.0.push((lo, hi, v));
        }
    }

    fn classify(&mut self, along: &Along, t: Interval, depth: u32) {
        let v = truth(along.decisive(t));
        let m = t.mid();
        if v != Truth::Unknown || depth == 0 || m <= t.lo() || m >= t.hi() {
            self.push(t.lo(), t.hi(), v);
            return;
        }
        self.classify(along, Interval::span(t.lo(), m), depth - 1);
        self.classify(along, Interval::span(m, t.hi()), depth - 1);
    }

    /// Replaces the unknown region `[lo, hi]` by a crossing enclosure when
    /// its ends have strict signs and the slope cannot vanish on it.
    fn resolve(&mut self, along: &Along, lo: f64, hi: f64) {
        let r = Interval::span(lo, hi);
        let left = strict_sign(along.value(Interval::point(lo)));
        let right = strict_sign(along.value(Interval::point(hi)));
        let slope = along.slope(r);
        let (Some(left), Some(right)) = (left, right) else {
            return self.push(lo, hi, Truth::Unknown);
        };
        if slope.contains_zero() {
            return self.push(lo, hi, Truth::Unknown);
        }
        let of = |s: Sign| if s == Sign::Pos { Truth::True } else { Truth::False };
        if left == right {
            return self.push(lo, hi, of(left));
        }
        match narrow(along, r, left, slope, TOL) {
            Some(root) => {
                self.push(lo, root.tau.lo(), of(left));
                self.push(root.tau.lo(), root.tau.hi(), Truth::Unknown);
                self.push(root.tau.hi(), hi, of(right));
            }
            None => self.push(lo, hi, Truth::Unknown),
        }
    }
}

impl Visitor for Pieces {
    fn flow(&mut self, along: &Along, lo: f64, hi: f64) {
        let mut raw = Pieces::default();
        for p in probes(along, lo, hi) {
            raw.classify(along, p, DEPTH);
        }
        let mut region: Option<(f64, f64)> = None;
        for (a, b, v) in raw.0 {
            if v == Truth::Unknown {
                region = Some(match region {
                    Some((r0, r1)) if r1 == a => (r0, b),
                    Some((r0, r1)) => {
                        self.resolve(along, r0, r1);
                        (a, b)
                    }
                    None => (a, b),
                });
                continue;
            }
            if let Some((r0, r1)) = region.take() {
                self.resolve(along, r0, r1);
            }
            self.push(a, b, v);
        }
        if let Some((r0, r1)) = region {
            self.resolve(along, r0, r1);
        }
    }

    fn jump(&mut self, tau: Interval, value: Interval) {
        self.push(tau.lo(), tau.hi(), truth(value));
    }
}

/// Truth signal of `atom > 0` over the verified horizon of `traj`.
///
/// Crossings are enclosed by interval Newton where the atom is strictly
/// monotone; elsewhere undecided time stays unknown. A jump window is
/// unknown unless the atom keeps one strict sign across it.
pub fn atomic_signal(traj: &Trajectory, atom: &Expr) -> Signal {
    let mut pieces = Pieces::default();
    walk(traj, atom, &mut pieces);
    let h = traj.horizon;
    // time no piece decides stays unknown
    let mut filled = Vec::with_capacity(pieces.0.len() + 1);
    let mut cursor = 0.0;
    for (a, b, v) in pieces.0 {
        if a > cursor {
            filled.push((cursor, a, Truth::Unknown));
        }
        filled.push((a, b, v));
        cursor = b.max(cursor);
    }
    filled.push((cursor, h, Truth::Unknown));
    Signal::from_pieces(h, filled).with_open_end(!traj.status.is_completed())
}
