//! The hybrid simulation loop: flow in a location until a verified guard
//! crossing, then jump through the composite flow–jump–flow map and restart
//! the flow in the target location at the synchronization time `hi(τ)`.

mod certificate;
pub mod event;
pub mod jump;
pub mod roots;

use std::fmt;

use crate::expr::VectorField;
use crate::interval::{Interval, IntervalBox, Parallelotope, Shape};
use crate::model::Model;
use crate::ode::{FlowSegment, Integrator, IntegratorOptions};

pub use certificate::{verification_certificate, Certificate, CertificateEntry};
use event::{decide, Along, Candidate, Decision, Detector, GuardPlan, Scan, Window};
use roots::narrow;
pub use jump::{apply_jump, JumpImage, ResetPlan};
use jump::{box_jump, composite_jump, JumpContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Parallelotopes with QR re-conditioning and composite jumps.
    Parallelotope,
    /// Box hulls after every operation.
    Box,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub mode: Mode,
    /// The shape field is overridden by `mode`.
    pub integrator: IntegratorOptions,
    /// Target width of crossing-time enclosures.
    pub tol_event: f64,
    /// Guard probes per flow segment.
    pub nseg: usize,
    /// Bisections allowed per probe when isolating crossings.
    pub bisect_depth: u32,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            mode: Mode::Parallelotope,
            integrator: IntegratorOptions::default(),
            tol_event: 1e-10,
            nseg: 8,
            bisect_depth: 12,
        }
    }
}

impl SimOptions {
    pub fn box_mode() -> Self {
        SimOptions {
            mode: Mode::Box,
            ..Default::default()
        }
    }

    fn shape(&self) -> Shape {
        match self.mode {
            Mode::Parallelotope => Shape::Qr,
            Mode::Box => Shape::Box,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub max_jumps: usize,
    pub max_time: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_jumps: 100_000,
            max_time: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Crossings of different transitions could not be ordered.
    AmbiguousEvent,
    /// The guard slope may vanish near a crossing.
    TangentialCrossing,
    /// Whether the guard fires could not be decided.
    UndecidedGuard,
    /// The jump map or the flow right after it could not be enclosed.
    JumpFailed,
}

impl FailureKind {
    pub fn name(self) -> &'static str {
        match self {
            FailureKind::AmbiguousEvent => "ambiguous_event",
            FailureKind::TangentialCrossing => "tangential_crossing",
            FailureKind::UndecidedGuard => "undecided_guard",
            FailureKind::JumpFailed => "jump_failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Failure {
    pub kind: FailureKind,
    /// Global time up to which the trajectory is verified.
    pub time: f64,
    pub location: usize,
    /// Index within the location's transitions, when one is to blame.
    pub transition: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Completed,
    VerificationFailed(Failure),
    StepFailure { time: f64, message: String },
}

impl Status {
    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Completed => write!(f, "completed"),
            Status::VerificationFailed(e) => write!(f, "verification_failed({}) at t = {}", e.kind.name(), e.time),
            Status::StepFailure { time, message } => write!(f, "step_failure at t = {time}: {message}"),
        }
    }
}

/// Continuous evolution in one location.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub location: usize,
    pub name: String,
    pub t_start: f64,
    /// Verified end; the last segment ends exactly here.
    pub t_end: f64,
    /// The location's vector field.
    pub field: VectorField,
    pub segments: Vec<FlowSegment>,
}

/// What established a crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct EventEvidence {
    pub bracket: Interval,
    pub newton_contracted: bool,
    /// Guard slope over the bracket.
    pub slope: Interval,
    /// Guard inequalities over the crossing states.
    pub margins: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub from: usize,
    pub to: usize,
    /// Index within the source location's transitions.
    pub transition: usize,
    /// Encloses every crossing time, in global time.
    pub tau: Interval,
    pub state_at_tau: Parallelotope,
    /// Initial set of the next run, at time `hi(tau)`.
    pub post_jump: Parallelotope,
    pub pre_hull: IntervalBox,
    pub post_hull: IntervalBox,
    /// Every state crosses exactly once inside `tau` with the inequalities
    /// holding, and `post_jump` encloses the jumped states.
    pub verified: bool,
    pub evidence: EventEvidence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub variables: Vec<String>,
    pub runs: Vec<Run>,
    pub events: Vec<EventRecord>,
    pub status: Status,
    /// Global time up to which the enclosures are verified.
    pub horizon: f64,
}

impl Trajectory {
    /// Number of verified jumps.
    pub fn jumps(&self) -> usize {
        self.events.iter().filter(|e| e.verified).count()
    }

    /// Encloses every state reached at global time `t`, in any location;
    /// `None` outside the verified horizon.
    pub fn enclosure_at(&self, t: f64) -> Option<IntervalBox> {
        let ti = Interval::point(t);
        let flows = self
            .runs
            .iter()
            .filter(|r| r.t_start <= t && t <= r.t_end)
            .flat_map(|r| r.segments.iter())
            .filter(|s| s.t_start <= t && t <= s.t_end)
            .map(|s| s.eval_flow_at(ti));
        let jumped = self
            .events
            .iter()
            .filter(|e| e.tau.contains(t))
            .map(|e| e.post_hull.clone());
        flows.chain(jumped).reduce(|a, b| a.hull(&b))
    }
}

struct LocationPlan {
    integ: Integrator,
    field: VectorField,
    guards: Vec<GuardPlan>,
    resets: Vec<ResetPlan>,
    targets: Vec<usize>,
}

enum RunEnd {
    Event(usize, Candidate),
    Fail(Failure),
    Horizon(f64),
    StepFailure(f64, String),
}

struct Simulator<'a> {
    model: &'a Model,
    opts: &'a SimOptions,
    plans: Vec<LocationPlan>,
    detector: Detector,
}

impl<'a> Simulator<'a> {
    fn new(model: &'a Model, opts: &'a SimOptions) -> Result<Self, String> {
        let mut iopts = opts.integrator.clone();
        iopts.shape = opts.shape();
        let mut plans = Vec::new();
        for loc in &model.locations {
            let integ = Integrator::new(&loc.field, iopts.clone()).map_err(|e| e.to_string())?;
            plans.push(LocationPlan {
                integ,
                field: loc.field.clone(),
                guards: loc.transitions.iter().map(|t| GuardPlan::new(t, &loc.field)).collect(),
                resets: loc.transitions.iter().map(ResetPlan::new).collect(),
                targets: loc.transitions.iter().map(|t| t.target).collect(),
            });
        }
        Ok(Simulator {
            model,
            opts,
            plans,
            detector: Detector {
                nseg: opts.nseg,
                depth: opts.bisect_depth,
                tol: opts.tol_event,
            },
        })
    }

    fn window<'s>(&self, segs: &'s [FlowSegment]) -> Window<'s> {
        Window {
            segs,
            box_mode: self.opts.mode == Mode::Box,
        }
    }

    /// Flows in `loc` from `p` at `t0` until an event, a failure or `t_limit`.
    fn run(&self, loc: usize, p: &Parallelotope, t0: f64, t_limit: f64) -> (Vec<FlowSegment>, RunEnd) {
        let plan = &self.plans[loc];
        let mut segs: Vec<FlowSegment> = Vec::new();
        let mut cursors = vec![t0; plan.guards.len()];
        let mut scans = vec![Scan::Clear; plan.guards.len()];
        let mut p = p.clone();
        let mut t = t0;
        let mut h = plan.integ.opts.h0;
        loop {
            if t < t_limit {
                match plan.integ.step(&p, t, h, t_limit) {
                    Ok((seg, next)) => {
                        t = seg.t_end;
                        p = seg.x_end.clone();
                        h = next;
                        segs.push(seg);
                    }
                    Err(e) => {
                        let pending = scans.iter().map(Scan::earliest).fold(t, f64::min);
                        return (segs, RunEnd::StepFailure(pending, e.to_string()));
                    }
                }
            }
            let complete = t >= t_limit;
            let win = self.window(&segs);
            for (i, g) in plan.guards.iter().enumerate() {
                scans[i] = self.detector.scan(g, win, cursors[i]);
                cursors[i] = match scans[i] {
                    Scan::Clear => win.end(),
                    Scan::Pending(a) => a,
                    _ => cursors[i],
                };
            }
            match decide(&scans, complete, loc) {
                None => continue,
                Some(Decision::Event(i, c)) => return (segs, RunEnd::Event(i, c)),
                Some(Decision::Fail(f)) => return (segs, RunEnd::Fail(f)),
                Some(Decision::Horizon(cut)) => return (segs, RunEnd::Horizon(cut.unwrap_or(t_limit))),
            }
        }
    }

    /// The pre-jump step ending exactly at `hi(tau)`.
    fn pre_jump_segment(&self, loc: usize, segs: &[FlowSegment], tau: Interval) -> Result<FlowSegment, String> {
        let j = segs.partition_point(|s| s.t_end < tau.lo()).min(segs.len() - 1);
        let seg = &segs[j];
        if tau.hi() <= seg.t_end {
            Ok(seg.truncated(tau.hi(), self.opts.shape()))
        } else {
            self.plans[loc]
                .integ
                .step_to(&seg.x_start, seg.t_start, tau.hi())
                .map_err(|e| e.to_string())
        }
    }

    fn simulate(&self, limits: &Limits) -> Trajectory {
        let m = self.model;
        let mut traj = Trajectory {
            variables: m.variables.clone(),
            runs: Vec::new(),
            events: Vec::new(),
            status: Status::Completed,
            horizon: 0.0,
        };
        let mut loc = m.initial_location;
        let mut p = Parallelotope::from_box(&IntervalBox::new(m.initial_state.clone()));
        let mut t0 = 0.0;
        loop {
            let (mut segs, end) = self.run(loc, &p, t0, limits.max_time);
            let push_run = |segs: Vec<FlowSegment>, t_end: f64, traj: &mut Trajectory| {
                traj.runs.push(Run {
                    location: loc,
                    name: m.locations[loc].name.clone(),
                    t_start: t0,
                    t_end,
                    field: m.locations[loc].field.clone(),
                    segments: segs,
                });
                traj.horizon = t_end;
            };
            match end {
                RunEnd::Horizon(t) => {
                    push_run(cut_at(segs, t, self.opts.shape()), t, &mut traj);
                    return traj;
                }
                RunEnd::Fail(f) => {
                    push_run(cut_at(segs, f.time, self.opts.shape()), f.time, &mut traj);
                    traj.status = Status::VerificationFailed(f);
                    return traj;
                }
                RunEnd::StepFailure(t, message) => {
                    push_run(cut_at(segs, t, self.opts.shape()), t, &mut traj);
                    traj.status = Status::StepFailure { time: t, message };
                    return traj;
                }
                RunEnd::Event(i, cand) => {
                    let plan = &self.plans[loc];
                    // the jump needs the tightest crossing enclosure available
                    let along = Along {
                        win: self.window(&segs),
                        f: &plan.guards[i].g,
                        df: &plan.guards[i].lie,
                    };
                    let tau = narrow(&along, cand.root.tau, cand.root.left, cand.root.slope, 0.0)
                        .map_or(cand.root.tau, |r| r.tau);
                    let to = plan.targets[i];
                    let jumped = self.pre_jump_segment(loc, &segs, tau).and_then(|seg| {
                        let cx = JumpContext {
                            seg: &seg,
                            field: &plan.field,
                            guard: &plan.guards[i],
                            reset: &plan.resets[i],
                            post: &self.plans[to].integ,
                            tau,
                        };
                        let image = match self.opts.mode {
                            Mode::Parallelotope => composite_jump(&cx, Shape::Qr),
                            Mode::Box => box_jump(&cx),
                        };
                        image.map(|im| (seg, im)).map_err(|e| e.to_string())
                    });
                    let (seg, image) = match jumped {
                        Ok(v) => v,
                        Err(_) => {
                            let f = Failure {
                                kind: FailureKind::JumpFailed,
                                time: tau.lo(),
                                location: loc,
                                transition: Some(i),
                            };
                            push_run(cut_at(segs, f.time, self.opts.shape()), f.time, &mut traj);
                            traj.status = Status::VerificationFailed(f);
                            return traj;
                        }
                    };
                    let j = segs.partition_point(|s| s.t_end < tau.lo()).min(segs.len() - 1);
                    segs.truncate(j);
                    segs.push(seg);
                    push_run(segs, tau.hi(), &mut traj);
                    traj.events.push(EventRecord {
                        from: loc,
                        to,
                        transition: i,
                        tau,
                        state_at_tau: image.state_at_tau,
                        post_jump: image.post_jump.clone(),
                        pre_hull: image.pre_hull,
                        post_hull: image.post_hull,
                        verified: true,
                        evidence: EventEvidence {
                            bracket: cand.root.bracket,
                            newton_contracted: cand.root.contracted,
                            slope: cand.root.slope,
                            margins: cand.margins,
                        },
                    });
                    if traj.events.len() >= limits.max_jumps {
                        return traj;
                    }
                    loc = to;
                    p = image.post_jump;
                    t0 = tau.hi();
                }
            }
        }
    }
}

/// Keeps the flow up to time `t`, cutting the last step there.
fn cut_at(mut segs: Vec<FlowSegment>, t: f64, shape: Shape) -> Vec<FlowSegment> {
    // the first step stays, possibly cut to zero length, to record the
    // initial set
    let keep = segs.iter().skip(1).take_while(|s| s.t_start < t).count() + 1;
    segs.truncate(keep);
    if let Some(last) = segs.last_mut() {
        if last.t_end > t {
            *last = last.truncated(t, shape);
        }
    }
    segs
}

/// Simulates `m` from its initial set until a limit is reached or
/// verification fails; failures are reported through the status.
pub fn simulate(m: &Model, limits: &Limits, opts: &SimOptions) -> Trajectory {
    match Simulator::new(m, opts) {
        Ok(sim) => sim.simulate(limits),
        Err(message) => Trajectory {
            variables: m.variables.clone(),
            runs: Vec::new(),
            events: Vec::new(),
            status: Status::StepFailure { time: 0.0, message },
            horizon: 0.0,
        },
    }
}
