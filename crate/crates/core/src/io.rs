//! JSON and CSV exports of trajectories and robustness signals.
//!
//! Every interval is written as two decimal strings, the lower bound rounded
//! down and the upper bound rounded up, so a reader parsing them with
//! round-to-nearest still holds an enclosure.

use std::io::Write;

use serde::{Serialize, Serializer};

use crate::interval::decimal::{format_down, format_up, DEFAULT_DIGITS};
use crate::interval::{Interval, IntervalBox};
use crate::monitor::{RobustnessSignal, Verdict};
use crate::simulate::{Status, Trajectory};

/// Output rounding and plot resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExportOptions {
    /// Significant decimal digits per bound.
    pub digits: usize,
    /// Rows per flow segment in CSV plot data.
    pub nplot: usize,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            digits: DEFAULT_DIGITS,
            nplot: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Bounds([String; 2]);

impl Bounds {
    fn new(iv: Interval, digits: usize) -> Bounds {
        Bounds([format_down(iv.lo(), digits), format_up(iv.hi(), digits)])
    }
}

/// A box as a JSON object keyed by variable name, in declaration order.
struct NamedBox(Vec<(String, Bounds)>);

impl Serialize for NamedBox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(k, v)| (k, v)))
    }
}

fn named_box(names: &[String], b: &IntervalBox, digits: usize) -> NamedBox {
    NamedBox(names.iter().cloned().zip(b.iter().map(|iv| Bounds::new(*iv, digits))).collect())
}

#[derive(Serialize)]
struct StatusJson {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
}

impl From<&Status> for StatusJson {
    fn from(s: &Status) -> StatusJson {
        match s {
            Status::Completed => StatusJson {
                kind: "completed",
                reason: None,
                time: None,
            },
            Status::VerificationFailed(f) => StatusJson {
                kind: "verification_failed",
                reason: Some(f.kind.name().to_string()),
                time: Some(f.time),
            },
            Status::StepFailure { time, message } => StatusJson {
                kind: "step_failure",
                reason: Some(message.clone()),
                time: Some(*time),
            },
        }
    }
}

#[derive(Serialize)]
struct SegmentJson {
    t: Bounds,
    #[serde(rename = "box")]
    hull: NamedBox,
}

#[derive(Serialize)]
struct RunJson {
    location: String,
    t_start: f64,
    t_end: f64,
    segments: Vec<SegmentJson>,
}

#[derive(Serialize)]
struct EventJson {
    from: usize,
    to: usize,
    transition: usize,
    tau: Bounds,
    verified: bool,
    post: NamedBox,
}

#[derive(Serialize)]
struct TrajectoryJson {
    variables: Vec<String>,
    horizon: f64,
    jumps: usize,
    status: StatusJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<String>,
    runs: Vec<RunJson>,
    events: Vec<EventJson>,
}

/// The trajectory as pretty-printed JSON; `verdict` is included when given.
///
/// Schema: `runs[].segments[] = {t: [lo, hi], box: {var: [lo, hi]}}`,
/// `events[] = {from, to, transition, tau: [lo, hi], verified, post: {var: [lo, hi]}}`.
pub fn trajectory_json(traj: &Trajectory, verdict: Option<Verdict>, opts: &ExportOptions) -> String {
    let d = opts.digits;
    let names = &traj.variables;
    let doc = TrajectoryJson {
        variables: names.clone(),
        horizon: traj.horizon,
        jumps: traj.jumps(),
        status: (&traj.status).into(),
        verdict: verdict.map(|v| v.to_string()),
        runs: traj
            .runs
            .iter()
            .map(|r| RunJson {
                location: r.name.clone(),
                t_start: r.t_start,
                t_end: r.t_end,
                segments: r
                    .segments
                    .iter()
                    .map(|s| {
                        let t = Interval::span(s.t_start, s.t_end);
                        SegmentJson {
                            t: Bounds::new(t, d),
                            hull: named_box(names, &s.eval_flow_at(t), d),
                        }
                    })
                    .collect(),
            })
            .collect(),
        events: traj
            .events
            .iter()
            .map(|e| EventJson {
                from: e.from,
                to: e.to,
                transition: e.transition,
                tau: Bounds::new(e.tau, d),
                verified: e.verified,
                post: named_box(names, &e.post_hull, d),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes")
}

/// Plot data: `t.lo,t.hi,<var>.lo,<var>.hi,...`, one row per `nplot`-th of
/// every flow segment, in time order. An empty trajectory gives the header
/// alone.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, opts: &ExportOptions, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t.lo".to_string(), "t.hi".to_string()];
    for v in &traj.variables {
        header.push(format!("{v}.lo"));
        header.push(format!("{v}.hi"));
    }
    w.write_record(&header)?;
    let n = opts.nplot.max(1);
    for s in traj.runs.iter().flat_map(|r| &r.segments) {
        let dt = (s.t_end - s.t_start) / n as f64;
        for i in 0..n {
            let lo = s.t_start + dt * i as f64;
            let hi = if i + 1 == n { s.t_end } else { s.t_start + dt * (i + 1) as f64 };
            let t = Interval::span(lo, hi);
            let mut row = vec![format_down(lo, opts.digits), format_up(hi, opts.digits)];
            for iv in s.eval_flow_at(t).iter() {
                row.push(format_down(iv.lo(), opts.digits));
                row.push(format_up(iv.hi(), opts.digits));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t.lo,t.hi,v.lo,v.hi,monotone`, one row per segment.
pub fn write_robustness_csv<W: Write>(r: &RobustnessSignal, opts: &ExportOptions, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t.lo", "t.hi", "v.lo", "v.hi", "monotone"])?;
    let d = opts.digits;
    for s in &r.segments {
        w.write_record([
            format_down(s.time.lo(), d),
            format_up(s.time.hi(), d),
            format_down(s.value.lo(), d),
            format_up(s.value.hi(), d),
            s.monotone.name().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// In-memory [`write_trajectory_csv`].
pub fn trajectory_csv(traj: &Trajectory, opts: &ExportOptions) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(traj, opts, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// In-memory [`write_robustness_csv`].
pub fn robustness_csv(r: &RobustnessSignal, opts: &ExportOptions) -> String {
    let mut buf = Vec::new();
    write_robustness_csv(r, opts, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}
