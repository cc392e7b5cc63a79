//! Guard crossing detection along the flow of one location.

use std::ops::ControlFlow;

use crate::expr::{Expr, MeanValueForm, VectorField};
use crate::interval::Interval;
use crate::model::Transition;
use crate::ode::FlowSegment;

use super::roots::{narrow, strict_sign, unsettled, Root, TimeFunction};
use super::{Failure, FailureKind};

/// The flow computed so far in one location, viewed as a function of time.
#[derive(Clone, Copy)]
pub struct Window<'a> {
    pub segs: &'a [FlowSegment],
    /// Evaluate over box hulls instead of mean-value forms.
    pub box_mode: bool,
}

impl<'a> Window<'a> {
    pub fn start(&self) -> f64 {
        self.segs.first().map_or(f64::NAN, |s| s.t_start)
    }

    pub fn end(&self) -> f64 {
        self.segs.last().map_or(f64::NAN, |s| s.t_end)
    }

    /// Segments meeting `t`, each with `t` clipped to its time range.
    pub fn overlapping(&self, t: Interval) -> impl Iterator<Item = (&'a FlowSegment, Interval)> + '_ {
        let first = self.segs.partition_point(|s| s.t_end < t.lo());
        self.segs[first..]
            .iter()
            .take_while(move |s| s.t_start <= t.hi())
            .filter_map(move |s| t.intersect(&Interval::span(s.t_start, s.t_end)).map(|c| (s, c)))
    }

    /// Encloses `f` over every state reached at times `t`; unbounded when
    /// `f` is undefined somewhere on the enclosure.
    pub fn eval(&self, f: &MeanValueForm, t: Interval) -> Interval {
        let mut acc: Option<Interval> = None;
        for (seg, tc) in self.overlapping(t) {
            let v = if self.box_mode {
                f.eval_box(&seg.eval_flow_at(tc))
            } else {
                seg.affine_at(tc).eval(f)
            };
            let v = v.unwrap_or(Interval::ENTIRE);
            acc = Some(acc.map_or(v, |a| a.hull(&v)));
        }
        acc.unwrap_or(Interval::ENTIRE)
    }

    /// Like [`Self::eval`] with the linear part bounded over whole steps.
    pub fn quick_eval(&self, f: &MeanValueForm, t: Interval) -> Interval {
        let mut acc: Option<Interval> = None;
        for (seg, tc) in self.overlapping(t) {
            let v = f.eval_box(&seg.quick_flow_at(tc)).unwrap_or(Interval::ENTIRE);
            acc = Some(acc.map_or(v, |a| a.hull(&v)));
        }
        acc.unwrap_or(Interval::ENTIRE)
    }

    /// Probe intervals from `from` on: `nseg` equal parts of every segment.
    pub fn probes(&self, from: f64, nseg: usize) -> Vec<Interval> {
        let mut out = Vec::new();
        for s in self.segs.iter().filter(|s| s.t_end > from) {
            let dt = (s.t_end - s.t_start) / nseg as f64;
            let mut lo = s.t_start;
            for i in 1..=nseg {
                let hi = if i == nseg { s.t_end } else { s.t_start + dt * i as f64 };
                if hi > from && hi > lo {
                    out.push(Interval::span(lo.max(from), hi));
                }
                lo = hi;
            }
        }
        out
    }
}

/// A scalar expression along the window, with its Lie derivative as slope.
pub struct Along<'a> {
    pub win: Window<'a>,
    pub f: &'a MeanValueForm,
    pub df: &'a MeanValueForm,
}

impl Along<'_> {
    /// An enclosure good enough to decide the sign: the direct one when it
    /// already excludes zero.
    pub fn decisive(&self, t: Interval) -> Interval {
        let quick = self.win.quick_eval(self.f, t);
        if !quick.contains_zero() {
            return quick;
        }
        let direct = self.win.eval(self.f, t);
        if !direct.contains_zero() {
            return direct;
        }
        self.centered(t, direct)
    }

    fn centered(&self, t: Interval, direct: Interval) -> Interval {
        if t.width() == 0.0 {
            return direct;
        }
        let m = Interval::point(t.mid());
        let centered = self.win.eval(self.f, m) + self.slope(t) * (t - m);
        direct.refine(&centered)
    }
}

impl TimeFunction for Along<'_> {
    /// Direct enclosure intersected with the centered form
    /// `f(m) + f'(t)·(t − m)`, which stays tight where `f` is flat.
    fn value(&self, t: Interval) -> Interval {
        self.centered(t, self.win.eval(self.f, t))
    }

    fn slope(&self, t: Interval) -> Interval {
        self.win.eval(self.df, t)
    }
}

/// A transition's guard compiled for detection.
#[derive(Debug, Clone)]
pub struct GuardPlan {
    pub g: MeanValueForm,
    pub lie: MeanValueForm,
    pub ineqs: Vec<MeanValueForm>,
}

impl GuardPlan {
    pub fn new(tr: &Transition, field: &VectorField) -> Self {
        let n = field.dim();
        let mvf = |e: &Expr| MeanValueForm::new(e.clone(), n);
        GuardPlan {
            g: mvf(&tr.guard_eq),
            lie: mvf(&field.lie_derivative(&tr.guard_eq)),
            ineqs: tr.guard_ineqs.iter().map(mvf).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub root: Root,
    /// Enclosures of the guard inequalities over the crossing states.
    pub margins: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scan {
    /// No crossing before the end of the window.
    Clear,
    /// A suspicious region starts here and reaches the end of the window.
    Pending(f64),
    Event(Candidate),
    Fail(FailureKind, f64),
}

impl Scan {
    pub fn earliest(&self) -> f64 {
        match self {
            Scan::Clear => f64::INFINITY,
            Scan::Pending(a) => *a,
            Scan::Event(c) => c.root.tau.lo(),
            Scan::Fail(_, t) => *t,
        }
    }
}

pub struct Detector {
    pub nseg: usize,
    pub depth: u32,
    pub tol: f64,
}

impl Detector {
    /// Scans the window from `from` for the first enabled crossing of `plan`.
    pub fn scan(&self, plan: &GuardPlan, win: Window, from: f64) -> Scan {
        let along = Along {
            win,
            f: &plan.g,
            df: &plan.lie,
        };
        // a piece is settled when the guard cannot vanish on it, or some
        // inequality is false throughout it
        let mut settled = |p: Interval| {
            !along.decisive(p).contains_zero() || plan.ineqs.iter().any(|q| win.eval(q, p).hi() <= 0.0)
        };
        let mut open: Option<Interval> = None;
        for probe in win.probes(from, self.nseg) {
            let flow = unsettled(probe, self.depth, &mut settled, &mut |p: Interval| {
                if let Some(r) = open.filter(|r| r.hi() != p.lo()) {
                    if let Some(s) = self.resolve(plan, &along, r) {
                        return ControlFlow::Break(s);
                    }
                    open = None;
                }
                let fresh = open.is_none();
                let r = open.map_or(p, |r| r.hull(&p));
                open = Some(r);
                match doomed(&along, r, fresh) {
                    Some(s) => ControlFlow::Break(s),
                    None => ControlFlow::Continue(()),
                }
            });
            if let ControlFlow::Break(s) = flow {
                return s;
            }
            if let Some(r) = open.filter(|r| r.hi() < probe.hi()) {
                if let Some(s) = self.resolve(plan, &along, r) {
                    return s;
                }
                open = None;
            }
        }
        match open {
            Some(r) => Scan::Pending(r.lo()),
            None => Scan::Clear,
        }
    }

    /// Decides a closed suspicious region `r`; `None` when it holds no
    /// enabled crossing.
    fn resolve(&self, plan: &GuardPlan, along: &Along, r: Interval) -> Option<Scan> {
        let left = strict_sign(along.value(Interval::point(r.lo())));
        let right = strict_sign(along.value(Interval::point(r.hi())));
        let (Some(left), Some(right)) = (left, right) else {
            return Some(Scan::Fail(FailureKind::UndecidedGuard, r.lo()));
        };
        let slope = along.slope(r);
        if slope.contains_zero() {
            return Some(Scan::Fail(FailureKind::TangentialCrossing, r.lo()));
        }
        if left == right {
            // monotone without a sign change: no crossing
            return None;
        }
        let Some(root) = narrow(along, r, left, slope, self.tol) else {
            return Some(Scan::Fail(FailureKind::UndecidedGuard, r.lo()));
        };
        let margins: Vec<Interval> = plan.ineqs.iter().map(|q| along.win.eval(q, root.tau)).collect();
        if margins.iter().all(|m| m.lo() > 0.0) {
            Some(Scan::Event(Candidate { root, margins }))
        } else if margins.iter().any(|m| m.hi() <= 0.0) {
            None
        } else {
            Some(Scan::Fail(FailureKind::UndecidedGuard, root.tau.lo()))
        }
    }
}

/// Failure that region `r` meets however far it extends to the right: an
/// undecided left end (checked when `fresh`) or a vanishing slope.
fn doomed(along: &Along, r: Interval, fresh: bool) -> Option<Scan> {
    if fresh && strict_sign(along.value(Interval::point(r.lo()))).is_none() {
        return Some(Scan::Fail(FailureKind::UndecidedGuard, r.lo()));
    }
    if along.slope(r).contains_zero() {
        return Some(Scan::Fail(FailureKind::TangentialCrossing, r.lo()));
    }
    None
}

/// Picks the run's outcome from per-transition scans, or `None` when more
/// flow is needed. `complete` means the window already reaches the horizon.
pub fn decide(scans: &[Scan], complete: bool, location: usize) -> Option<Decision> {
    let best = (0..scans.len()).min_by(|&i, &j| scans[i].earliest().total_cmp(&scans[j].earliest()));
    let fail = |kind, time, transition| {
        Some(Decision::Fail(Failure {
            kind,
            time,
            location,
            transition,
        }))
    };
    let Some(b) = best else {
        return complete.then_some(Decision::Horizon(None));
    };
    match &scans[b] {
        Scan::Clear => complete.then_some(Decision::Horizon(None)),
        Scan::Pending(a) => complete.then_some(Decision::Horizon(Some(*a))),
        Scan::Fail(kind, t) => fail(*kind, *t, Some(b)),
        Scan::Event(c) => {
            let tau = c.root.tau;
            for (j, s) in scans.iter().enumerate() {
                if j == b || s.earliest() > tau.hi() {
                    continue;
                }
                match s {
                    // identical enclosures: textual order wins
                    Scan::Event(c2) if c2.root.tau == tau => {}
                    Scan::Event(_) => return fail(FailureKind::AmbiguousEvent, tau.lo(), Some(b)),
                    Scan::Pending(_) if !complete => return None,
                    Scan::Pending(_) => return fail(FailureKind::AmbiguousEvent, tau.lo(), Some(j)),
                    Scan::Fail(kind, t) => return fail(*kind, *t, Some(j)),
                    Scan::Clear => {}
                }
            }
            Some(Decision::Event(b, c.clone()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Event(usize, Candidate),
    Fail(Failure),
    /// Flow reached the horizon; `Some(a)` truncates the verified part at
    /// an unresolved region starting at `a`.
    Horizon(Option<f64>),
}
