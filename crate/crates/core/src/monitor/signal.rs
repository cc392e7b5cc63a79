//! Three-valued boolean signals with interval-bounded switching times.

use crate::interval::Interval;
use crate::stl::TimeBound;

use super::set::TimeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    pub fn not(self) -> Truth {
        match self {
            Truth::True => Truth::False,
            Truth::False => Truth::True,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }

    pub fn or(self, other: Truth) -> Truth {
        self.not().and(other.not()).not()
    }
}

/// One stretch where a signal may hold: unknown on `onset` and `offset`,
/// true strictly between them.
///
/// Unknown time between two true cores is the offset of one span and the
/// onset of the next; unknown time next to no core is a span whose onset
/// and offset coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub onset: Interval,
    pub offset: Interval,
}

/// A right-continuous truth signal over `[0, horizon)`.
///
/// Stored as the set of times where it surely holds and the larger set
/// where it possibly holds; it is false outside the latter.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    horizon: f64,
    /// Nothing is known past the horizon; untimed operators then see an
    /// unknown future instead of the end of the trace.
    open_end: bool,
    sure: TimeSet,
    possible: TimeSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connective {
    Not,
    And,
    Or,
}

impl Signal {
    pub fn constant(horizon: f64, value: Truth) -> Signal {
        let all = TimeSet::span(0.0, horizon);
        let (sure, possible) = match value {
            Truth::True => (all.clone(), all),
            Truth::Unknown => (TimeSet::empty(), all),
            Truth::False => (TimeSet::empty(), TimeSet::empty()),
        };
        Signal {
            horizon,
            open_end: false,
            sure,
            possible,
        }
    }

    /// From consecutive pieces `(start, end, value)`; gaps are false.
    pub fn from_pieces(horizon: f64, pieces: impl IntoIterator<Item = (f64, f64, Truth)>) -> Signal {
        let pieces: Vec<_> = pieces.into_iter().collect();
        let of = |keep: &dyn Fn(Truth) -> bool| {
            TimeSet::from_intervals(pieces.iter().filter(|p| keep(p.2)).map(|p| (p.0, p.1))).clip(0.0, horizon)
        };
        Signal {
            horizon,
            open_end: false,
            sure: of(&|v| v == Truth::True),
            possible: of(&|v| v != Truth::False),
        }
    }

    pub fn from_spans(horizon: f64, spans: &[Span]) -> Signal {
        let sure = spans.iter().map(|s| (s.onset.hi(), s.offset.lo()));
        let possible = spans.iter().map(|s| (s.onset.lo(), s.offset.hi()));
        Signal {
            horizon,
            open_end: false,
            sure: TimeSet::from_intervals(sure).clip(0.0, horizon),
            possible: TimeSet::from_intervals(possible).clip(0.0, horizon),
        }
    }

    /// Marks the future past the horizon as unknown.
    pub fn with_open_end(mut self, open: bool) -> Signal {
        self.open_end = open;
        self
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn open_end(&self) -> bool {
        self.open_end
    }

    pub fn truth_at(&self, t: f64) -> Truth {
        if self.sure.contains(t) {
            Truth::True
        } else if self.possible.contains(t) {
            Truth::Unknown
        } else {
            Truth::False
        }
    }

    /// Maximal constant pieces tiling `[0, horizon)`.
    pub fn pieces(&self) -> Vec<(f64, f64, Truth)> {
        let mut cuts: Vec<f64> = vec![0.0, self.horizon];
        for &(a, b) in self.sure.intervals().iter().chain(self.possible.intervals()) {
            cuts.extend([a, b]);
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out: Vec<(f64, f64, Truth)> = Vec::new();
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a >= b || a < 0.0 || b > self.horizon {
                continue;
            }
            let v = self.truth_at(a);
            match out.last_mut() {
                Some(last) if last.2 == v && last.1 == a => last.1 = b,
                _ => out.push((a, b, v)),
            }
        }
        out
    }

    /// The onset/offset view; see [`Span`].
    pub fn spans(&self) -> Vec<Span> {
        let span = |a: f64, b: f64| Interval::span(a, b);
        let mut out = Vec::new();
        for &(lo, hi) in self.possible.intervals() {
            let cores = self.sure.clip(lo, hi);
            if cores.is_empty() {
                out.push(Span {
                    onset: span(lo, hi),
                    offset: span(lo, hi),
                });
                continue;
            }
            let mut onset = span(lo, cores.intervals()[0].0);
            for (k, &(c0, c1)) in cores.intervals().iter().enumerate() {
                let next = cores.intervals().get(k + 1).map_or(hi, |c| c.0);
                let offset = span(c1, next);
                debug_assert!(onset.hi() == c0);
                out.push(Span { onset, offset });
                onset = offset;
            }
        }
        out
    }

    pub fn not(&self) -> Signal {
        Signal {
            horizon: self.horizon,
            open_end: self.open_end,
            sure: self.possible.complement(0.0, self.horizon),
            possible: self.sure.complement(0.0, self.horizon),
        }
    }

    pub fn and(&self, other: &Signal) -> Signal {
        let horizon = self.horizon.min(other.horizon);
        Signal {
            horizon,
            open_end: self.open_end || other.open_end,
            sure: self.sure.intersect(&other.sure).clip(0.0, horizon),
            possible: self.possible.intersect(&other.possible).clip(0.0, horizon),
        }
    }

    pub fn or(&self, other: &Signal) -> Signal {
        self.not().and(&other.not()).not()
    }

    /// `self U[a,b] rhs`, untimed when `bound` is `None`.
    ///
    /// A timed window reaching past the horizon, or any window when the
    /// end is open, sees an unknown future there.
    pub fn until(&self, rhs: &Signal, bound: Option<TimeBound>) -> Signal {
        let horizon = self.horizon.min(rhs.horizon);
        let open_end = self.open_end || rhs.open_end;
        let (a, b) = bound.map_or((0.0, f64::INFINITY), |w| (w.lo, w.hi));
        let tail = |s: &TimeSet| {
            if bound.is_some() || open_end {
                s.union(&TimeSet::span(horizon, f64::INFINITY))
            } else {
                s.clone()
            }
        };
        let sure = TimeSet::until(&self.sure, &rhs.sure, a, b, false);
        let possible = TimeSet::until(&tail(&self.possible), &tail(&rhs.possible), a, b, true);
        Signal {
            horizon,
            open_end,
            sure: sure.clip(0.0, horizon),
            possible: possible.clip(0.0, horizon),
        }
    }
}

/// Applies a boolean connective: one argument for `Not`, two otherwise.
pub fn combine(op: Connective, args: &[&Signal]) -> Signal {
    match (op, args) {
        (Connective::Not, [s]) => s.not(),
        (Connective::And, [a, b]) => a.and(b),
        (Connective::Or, [a, b]) => a.or(b),
        _ => panic!("{op:?} applied to {} signals", args.len()),
    }
}

/// `lhs U[a,b] rhs`.
pub fn until_timed(lhs: &Signal, rhs: &Signal, bound: TimeBound) -> Signal {
    lhs.until(rhs, Some(bound))
}
