//! Hybrid automata as produced by the parser.

use crate::expr::{Expr, VectorField};
use crate::interval::Interval;
use crate::stl::StlFormula;

/// Value bound by a `let` definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    pub name: String,
    pub value: Interval,
    /// `Some(k)` when the value was sampled from `R k`.
    pub sampled_from: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    /// Left-hand side of the guard equation `guard_eq = 0`.
    pub guard_eq: Expr,
    /// Each entry means `e > 0`.
    pub guard_ineqs: Vec<Expr>,
    /// Index into [`Model::locations`].
    pub target: usize,
    pub reset: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub name: String,
    pub field: VectorField,
    /// Textual order; earlier transitions win exact ties.
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub seed: u64,
    pub constants: Vec<Constant>,
    pub variables: Vec<String>,
    /// Index into `locations`.
    pub initial_location: usize,
    pub initial_state: Vec<Interval>,
    pub locations: Vec<Location>,
    pub property: Option<StlFormula>,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn constant(&self, name: &str) -> Option<Interval> {
        self.constants.iter().find(|c| c.name == name).map(|c| c.value)
    }

    /// Same model with the initial value of variable `var` replaced.
    pub fn with_initial(mut self, var: usize, value: Interval) -> Model {
        self.initial_state[var] = value;
        self
    }
}
