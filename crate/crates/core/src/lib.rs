//! Validated simulation of nonlinear hybrid automata with guaranteed
//! enclosures, and sound three-valued STL monitoring of the result.

pub mod expr;
pub mod interval;
pub mod io;
pub mod model;
pub mod monitor;
pub mod ode;
pub mod parser;
pub mod simulate;
pub mod stl;

pub use expr::{Expr, VectorField};
pub use interval::{IMatrix, Interval, IntervalBox, Parallelotope};
pub use model::Model;
pub use monitor::{evaluate, robustness, Signal, Verdict};
pub use parser::{parse_model, parse_property, ParseError};
pub use stl::StlFormula;
