//! Sound three-valued STL monitoring of trajectory enclosures.
//!
//! Signals are right-continuous over `[0, horizon)`. A formula is judged at
//! time 0; untimed operators range over the rest of the verified trace.

mod atom;
mod robustness;
mod set;
mod signal;
mod trace;

use std::fmt;

use crate::simulate::Trajectory;
use crate::stl::StlFormula;

pub use atom::atomic_signal;
pub use robustness::{atomic_robustness, robustness, Monotone, RobustSegment, RobustnessError, RobustnessSignal};
pub use set::TimeSet;
pub use signal::{combine, until_timed, Connective, Signal, Span, Truth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnknownReason {
    /// Time 0 lies in a boundary enclosure of the formula's signal.
    BoundaryAtZero,
    /// Verification stopped before the formula could be decided.
    VerificationFailed,
    /// The trajectory completed but is shorter than the formula needs.
    HorizonTooShort,
}

impl UnknownReason {
    pub fn name(self) -> &'static str {
        match self {
            UnknownReason::BoundaryAtZero => "boundary-at-zero",
            UnknownReason::VerificationFailed => "verification-failed",
            UnknownReason::HorizonTooShort => "horizon-too-short",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Valid,
    Unsat,
    Unknown(UnknownReason),
}

impl Verdict {
    /// `Valid` and `Unsat` swapped.
    pub fn flip(self) -> Verdict {
        match self {
            Verdict::Valid => Verdict::Unsat,
            Verdict::Unsat => Verdict::Valid,
            u => u,
        }
    }

    pub fn is_conclusive(self) -> bool {
        !matches!(self, Verdict::Unknown(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::Unsat => f.write_str("unsat"),
            Verdict::Unknown(r) => write!(f, "unknown({})", r.name()),
        }
    }
}

/// The truth signal of `phi` along `traj`, built bottom-up.
pub fn formula_signal(traj: &Trajectory, phi: &StlFormula) -> Signal {
    use StlFormula::*;
    let open = !traj.status.is_completed();
    match phi {
        True => Signal::constant(traj.horizon, Truth::True).with_open_end(open),
        Atom(e) => atomic_signal(traj, e),
        Not(a) => formula_signal(traj, a).not(),
        And(a, b) => formula_signal(traj, a).and(&formula_signal(traj, b)),
        Or(a, b) => formula_signal(traj, a).or(&formula_signal(traj, b)),
        Eventually(bound, a) => Signal::constant(traj.horizon, Truth::True)
            .with_open_end(open)
            .until(&formula_signal(traj, a), *bound),
        Always(bound, a) => Signal::constant(traj.horizon, Truth::True)
            .with_open_end(open)
            .until(&formula_signal(traj, a).not(), *bound)
            .not(),
        Until(bound, a, b) => formula_signal(traj, a).until(&formula_signal(traj, b), *bound),
    }
}

/// Judges `phi` at time 0.
///
/// A formula with bounded operators only needs the trajectory up to its
/// horizon; a shorter trajectory yields `Unknown` rather than a verdict
/// on a truncated trace.
pub fn evaluate(traj: &Trajectory, phi: &StlFormula) -> Verdict {
    let stopped = !traj.status.is_completed();
    if let Some(need) = phi.horizon() {
        if traj.horizon < need {
            return Verdict::Unknown(if stopped {
                UnknownReason::VerificationFailed
            } else {
                UnknownReason::HorizonTooShort
            });
        }
    }
    match formula_signal(traj, phi).truth_at(0.0) {
        Truth::True => Verdict::Valid,
        Truth::False => Verdict::Unsat,
        Truth::Unknown if stopped && phi.horizon().is_none() => Verdict::Unknown(UnknownReason::VerificationFailed),
        Truth::Unknown => Verdict::Unknown(UnknownReason::BoundaryAtZero),
    }
}
