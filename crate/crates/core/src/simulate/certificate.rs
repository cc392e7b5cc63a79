//! Per-event account of the existence-and-uniqueness claims of a run.

use std::fmt;

use crate::interval::Interval;

use super::{Failure, Status, Trajectory};

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateEntry {
    pub index: usize,
    pub from: String,
    pub to: String,
    pub tau: Interval,
    pub verified: bool,
    pub newton_contracted: bool,
    /// `width(tau) / width(bracket)`.
    pub contraction: f64,
    pub slope: Interval,
    /// Smallest lower bound over the guard inequalities, if any.
    pub min_margin: Option<f64>,
    /// Widest component of the post-jump enclosure.
    pub post_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub entries: Vec<CertificateEntry>,
    /// Index the first unverified event would have had, with its cause.
    pub failure: Option<(usize, Failure)>,
    pub status: Status,
    pub horizon: f64,
}

impl Certificate {
    pub fn all_verified(&self) -> bool {
        self.failure.is_none() && self.entries.iter().all(|e| e.verified)
    }
}

pub fn verification_certificate(traj: &Trajectory) -> Certificate {
    let name = |i: usize| {
        traj.runs
            .iter()
            .find(|r| r.location == i)
            .map_or_else(|| i.to_string(), |r| r.name.clone())
    };
    let entries = traj
        .events
        .iter()
        .enumerate()
        .map(|(index, e)| CertificateEntry {
            index,
            from: name(e.from),
            to: name(e.to),
            tau: e.tau,
            verified: e.verified,
            newton_contracted: e.evidence.newton_contracted,
            contraction: if e.evidence.bracket.width() > 0.0 {
                e.tau.width() / e.evidence.bracket.width()
            } else {
                0.0
            },
            slope: e.evidence.slope,
            min_margin: e.evidence.margins.iter().map(|m| m.lo()).reduce(f64::min),
            post_width: e.post_jump.to_box().max_width(),
        })
        .collect();
    let failure = match &traj.status {
        Status::VerificationFailed(f) => Some((traj.events.len(), *f)),
        _ => None,
    };
    Certificate {
        entries,
        failure,
        status: traj.status.clone(),
        horizon: traj.horizon,
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let claim = if e.verified { "exists-unique verified" } else { "unverified" };
            write!(
                f,
                "event {}: {} -> {} tau = {:?} {claim}; newton {} (ratio {:.3e}), slope {:?}",
                e.index,
                e.from,
                e.to,
                e.tau,
                if e.newton_contracted { "contracted" } else { "bisected" },
                e.contraction,
                e.slope,
            )?;
            if let Some(m) = e.min_margin {
                write!(f, ", min guard margin {m:.3e}")?;
            }
            writeln!(f, ", post-jump width {:.3e}", e.post_width)?;
        }
        if let Some((i, fail)) = &self.failure {
            writeln!(
                f,
                "event {i}: not verified ({}) at t = {}",
                fail.kind.name(),
                fail.time
            )?;
        }
        writeln!(f, "status: {}; verified horizon {}", self.status, self.horizon)
    }
}
