//! Enclosures of quantitative robustness for the untimed fragment.

use std::fmt;

use thiserror::Error;

use crate::expr::Expr;
use crate::interval::Interval;
use crate::simulate::event::Along;
use crate::simulate::roots::TimeFunction;
use crate::simulate::Trajectory;
use crate::stl::StlFormula;

use super::trace::{probes, walk, Visitor};

/// Bisections spent separating a probe piece into monotone parts.
const DEPTH: u32 = 4;

/// Verified (weak) monotonicity of the robustness on a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Monotone {
    Inc,
    Dec,
    Unknown,
}

impl Monotone {
    fn flip(self) -> Monotone {
        match self {
            Monotone::Inc => Monotone::Dec,
            Monotone::Dec => Monotone::Inc,
            Monotone::Unknown => Monotone::Unknown,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Monotone::Inc => "inc",
            Monotone::Dec => "dec",
            Monotone::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Monotone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The robustness lies in `value` at every time of `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustSegment {
    pub time: Interval,
    pub value: Interval,
    pub monotone: Monotone,
}

/// Segments in time order; consecutive segments share an endpoint and
/// together cover `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessSignal {
    pub horizon: f64,
    pub segments: Vec<RobustSegment>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobustnessError {
    #[error("robustness is only supported for untimed formulas")]
    UnsupportedTimedRobustness,
}

impl RobustnessSignal {
    /// Hull of the segments whose time contains `t`.
    pub fn value_at(&self, t: f64) -> Option<Interval> {
        self.segments.iter().filter(|s| s.time.contains(t)).map(|s| s.value).reduce(|a, b| a.hull(&b))
    }

    fn map(&self, f: impl Fn(&RobustSegment) -> RobustSegment) -> RobustnessSignal {
        RobustnessSignal {
            horizon: self.horizon,
            segments: self.segments.iter().map(f).collect(),
        }
    }

    /// The hull of the segments covering `t`, unbounded where none does.
    fn restrict(&self, t: Interval) -> RobustSegment {
        let first = self.segments.partition_point(|s| s.time.hi() < t.hi());
        let mut hit = self.segments[first..]
            .iter()
            .take_while(|s| s.time.lo() <= t.lo())
            .filter(|s| s.time.lo() <= t.lo() && t.hi() <= s.time.hi());
        let (value, monotone) = match (hit.next(), hit.next()) {
            (Some(s), None) => (s.value, s.monotone),
            (Some(s), Some(r)) => (hit.fold(s.value.hull(&r.value), |a, q| a.hull(&q.value)), Monotone::Unknown),
            (None, _) => (Interval::ENTIRE, Monotone::Unknown),
        };
        RobustSegment { time: t, value, monotone }
    }

    /// Both signals cut at the union of their breakpoints; zero-width
    /// segments are dropped, their neighbours cover their instant.
    fn aligned(&self, other: &RobustnessSignal) -> Vec<(Interval, RobustSegment, RobustSegment)> {
        let mut cuts: Vec<f64> = self
            .segments
            .iter()
            .chain(&other.segments)
            .flat_map(|s| [s.time.lo(), s.time.hi()])
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| Interval::span(w[0], w[1]))
            .map(|t| (t, self.restrict(t), other.restrict(t)))
            .collect()
    }

    fn min(&self, other: &RobustnessSignal) -> RobustnessSignal {
        let segments = self
            .aligned(other)
            .into_iter()
            .map(|(time, a, b)| {
                let monotone = if a.monotone == b.monotone {
                    a.monotone
                } else if a.value.hi() < b.value.lo() {
                    a.monotone
                } else if b.value.hi() < a.value.lo() {
                    b.monotone
                } else {
                    Monotone::Unknown
                };
                RobustSegment {
                    time,
                    value: a.value.min(&b.value),
                    monotone,
                }
            })
            .collect();
        RobustnessSignal {
            horizon: self.horizon.min(other.horizon),
            segments,
        }
    }

    fn neg(&self) -> RobustnessSignal {
        self.map(|s| RobustSegment {
            time: s.time,
            value: -s.value,
            monotone: s.monotone.flip(),
        })
    }

    /// `sup` over `[t, end]` of the signal; `tail` encloses that supremum
    /// over the future past the horizon.
    fn suffix_max(&self, tail: Option<Interval>) -> RobustnessSignal {
        let mut acc = tail;
        let mut segments: Vec<RobustSegment> = self
            .segments
            .iter()
            .rev()
            .map(|s| {
                let v = acc.map_or(s.value, |a| a.max(&s.value));
                acc = Some(v);
                RobustSegment {
                    time: s.time,
                    value: v,
                    monotone: Monotone::Dec,
                }
            })
            .collect();
        segments.reverse();
        RobustnessSignal {
            horizon: self.horizon,
            segments,
        }
    }

    /// Untimed `lhs U rhs` by a sweep from the right:
    /// `U(t) = max(sup_{t'∈[t,e]} min(ψ(t'), inf_{[t,t']} φ), min(inf_{[t,e]} φ, U(e)))`
    /// on a segment ending at `e`.
    fn until(&self, rhs: &RobustnessSignal, tail: Option<Interval>) -> RobustnessSignal {
        let cells = self.aligned(rhs);
        let mut acc = tail;
        let mut segments: Vec<RobustSegment> = cells
            .iter()
            .rev()
            .map(|&(time, phi, psi)| {
                let here = phi.value.min(&psi.value);
                let v = acc.map_or(here, |a| here.max(&phi.value.min(&a)));
                acc = Some(v);
                RobustSegment {
                    time,
                    value: v,
                    monotone: Monotone::Unknown,
                }
            })
            .collect();
        segments.reverse();
        RobustnessSignal {
            horizon: self.horizon.min(rhs.horizon),
            segments,
        }
    }

    /// Merges neighbours with equal point values and monotonicity.
    fn compact(mut self) -> RobustnessSignal {
        let mut out: Vec<RobustSegment> = Vec::with_capacity(self.segments.len());
        for s in self.segments.drain(..) {
            match out.last_mut() {
                Some(l) if l.value == s.value && l.value.is_point() && l.monotone == s.monotone => {
                    l.time = l.time.hull(&s.time);
                }
                _ => out.push(s),
            }
        }
        self.segments = out;
        self
    }
}

#[derive(Default)]
struct Segments(Vec<RobustSegment>);

impl Segments {
    fn piece(&mut self, along: &Along, t: Interval, depth: u32) {
        let slope = along.slope(t);
        let monotone = if slope.lo() >= 0.0 {
            Monotone::Inc
        } else if slope.hi() <= 0.0 {
            Monotone::Dec
        } else {
            Monotone::Unknown
        };
        let m = t.mid();
        if monotone == Monotone::Unknown && depth > 0 && m > t.lo() && m < t.hi() {
            self.piece(along, Interval::span(t.lo(), m), depth - 1);
            self.piece(along, Interval::span(m, t.hi()), depth - 1);
            return;
        }
        self.0.push(RobustSegment {
            time: t,
            value: along.value(t),
            monotone,
        });
    }
}

impl Visitor for Segments {
    fn flow(&mut self, along: &Along, lo: f64, hi: f64) {
        for p in probes(along, lo, hi) {
            self.piece(along, p, DEPTH);
        }
    }

    fn jump(&mut self, tau: Interval, value: Interval) {
        self.0.push(RobustSegment {
            time: tau,
            value,
            monotone: Monotone::Unknown,
        });
    }
}

/// Robustness of `e > 0`: the value of `e` along the flow.
pub fn atomic_robustness(traj: &Trajectory, e: &Expr) -> RobustnessSignal {
    let mut segs = Segments::default();
    walk(traj, e, &mut segs);
    let mut segments = Vec::with_capacity(segs.0.len() + 1);
    let mut cursor = 0.0;
    for s in segs.0 {
        // time no segment covers has unknown robustness
        if s.time.lo() > cursor {
            segments.push(RobustSegment {
                time: Interval::span(cursor, s.time.lo()),
                value: Interval::ENTIRE,
                monotone: Monotone::Unknown,
            });
        }
        cursor = cursor.max(s.time.hi());
        segments.push(s);
    }
    if cursor < traj.horizon || segments.is_empty() {
        segments.push(RobustSegment {
            time: Interval::span(cursor, traj.horizon),
            value: Interval::ENTIRE,
            monotone: Monotone::Unknown,
        });
    }
    RobustnessSignal {
        horizon: traj.horizon,
        segments,
    }
    .compact()
}

/// Robustness of an untimed formula over the verified horizon.
///
/// Untimed `F` and `G` range over the rest of the trace; when the
/// trajectory stopped early the unverified future bounds nothing.
pub fn robustness(traj: &Trajectory, phi: &StlFormula) -> Result<RobustnessSignal, RobustnessError> {
    if !phi.is_untimed() {
        return Err(RobustnessError::UnsupportedTimedRobustness);
    }
    let tail = (!traj.status.is_completed()).then_some(Interval::ENTIRE);
    Ok(rob(traj, phi, tail))
}

fn top(traj: &Trajectory) -> RobustnessSignal {
    RobustnessSignal {
        horizon: traj.horizon,
        segments: vec![RobustSegment {
            time: Interval::span(0.0, traj.horizon),
            value: Interval::point(f64::MAX),
            monotone: Monotone::Inc,
        }],
    }
}

fn rob(traj: &Trajectory, phi: &StlFormula, tail: Option<Interval>) -> RobustnessSignal {
    use StlFormula::*;
    match phi {
        True => top(traj),
        Atom(e) => atomic_robustness(traj, e),
        Not(a) => rob(traj, a, tail).neg(),
        And(a, b) => rob(traj, a, tail).min(&rob(traj, b, tail)),
        Or(a, b) => rob(traj, a, tail).neg().min(&rob(traj, b, tail).neg()).neg(),
        Eventually(_, a) => rob(traj, a, tail).suffix_max(tail),
        Always(_, a) => rob(traj, a, tail).neg().suffix_max(tail).neg(),
        Until(_, a, b) => match **a {
            True => rob(traj, b, tail).suffix_max(tail),
            _ => rob(traj, a, tail).until(&rob(traj, b, tail), tail),
        },
    }
}
