//! Scalar expressions followed along a trajectory enclosure.

use crate::expr::{Expr, MeanValueForm};
use crate::interval::Interval;
use crate::simulate::event::{Along, Window};
use crate::simulate::Trajectory;

/// Probe pieces per flow segment.
pub(super) const NSEG: usize = 8;

pub(super) trait Visitor {
    /// Continuous stretch `[lo, hi]` of one run.
    fn flow(&mut self, along: &Along, lo: f64, hi: f64);
    /// Jump window `tau`; `value` encloses the expression on every state
    /// present during it, jumped or not.
    fn jump(&mut self, tau: Interval, value: Interval);
}

/// Walks `e` along `traj` in time order. Each run is visited up to the
/// start of the jump that ends it.
pub(super) fn walk(traj: &Trajectory, e: &Expr, visitor: &mut impl Visitor) {
    let n = traj.variables.len();
    let f = MeanValueForm::new(e.clone(), n);
    for (k, run) in traj.runs.iter().enumerate() {
        let df = MeanValueForm::new(run.field.lie_derivative(e), n);
        let along = Along {
            win: Window {
                segs: &run.segments,
                box_mode: false,
            },
            f: &f,
            df: &df,
        };
        let event = traj.events.get(k);
        let end = event.map_or(run.t_end, |ev| ev.tau.lo().min(run.t_end));
        if run.t_start <= end && !run.segments.is_empty() {
            visitor.flow(&along, run.t_start, end);
        }
        if let Some(ev) = event {
            let post = f.eval_box(&ev.post_hull).unwrap_or(Interval::ENTIRE);
            let pre = if run.segments.is_empty() {
                f.eval_box(&ev.pre_hull).unwrap_or(Interval::ENTIRE)
            } else {
                crate::simulate::roots::TimeFunction::value(&along, ev.tau)
            };
            visitor.jump(ev.tau, pre.hull(&post));
        }
    }
}

/// Probe pieces of `along` covering `[lo, hi]`.
pub(super) fn probes(along: &Along, lo: f64, hi: f64) -> Vec<Interval> {
    along
        .win
        .probes(lo, NSEG)
        .into_iter()
        .filter(|p| p.lo() < hi)
        .map(|p| Interval::span(p.lo(), p.hi().min(hi)))
        .collect()
}
