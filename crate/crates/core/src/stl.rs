//! Signal temporal logic formulas over strict atoms `e > 0`.

use std::fmt;

use crate::expr::Expr;

/// Closed time window `[lo, hi]` of a timed operator, `0 ≤ lo ≤ hi < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBound {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StlFormula {
    True,
    /// Holds when the expression is strictly positive.
    Atom(Expr),
    Not(Box<StlFormula>),
    And(Box<StlFormula>, Box<StlFormula>),
    Or(Box<StlFormula>, Box<StlFormula>),
    /// `G`; `None` is the untimed operator.
    Always(Option<TimeBound>, Box<StlFormula>),
    /// `F`; `None` is the untimed operator.
    Eventually(Option<TimeBound>, Box<StlFormula>),
    Until(Option<TimeBound>, Box<StlFormula>, Box<StlFormula>),
}

impl StlFormula {
    pub fn not(a: StlFormula) -> Self {
        StlFormula::Not(Box::new(a))
    }

    pub fn and(a: StlFormula, b: StlFormula) -> Self {
        StlFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: StlFormula, b: StlFormula) -> Self {
        StlFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn always(bound: Option<TimeBound>, a: StlFormula) -> Self {
        StlFormula::Always(bound, Box::new(a))
    }

    pub fn eventually(bound: Option<TimeBound>, a: StlFormula) -> Self {
        StlFormula::Eventually(bound, Box::new(a))
    }

    pub fn until(bound: Option<TimeBound>, a: StlFormula, b: StlFormula) -> Self {
        StlFormula::Until(bound, Box::new(a), Box::new(b))
    }

    /// Rewrites `F φ` as `true U φ` and `G φ` as `¬(true U ¬φ)`.
    pub fn desugar(&self) -> StlFormula {
        use StlFormula::*;
        match self {
            True => True,
            Atom(e) => Atom(e.clone()),
            Not(a) => StlFormula::not(a.desugar()),
            And(a, b) => StlFormula::and(a.desugar(), b.desugar()),
            Or(a, b) => StlFormula::or(a.desugar(), b.desugar()),
            Eventually(bd, a) => StlFormula::until(*bd, True, a.desugar()),
            Always(bd, a) => {
                StlFormula::not(StlFormula::until(*bd, True, StlFormula::not(a.desugar())))
            }
            Until(bd, a, b) => StlFormula::until(*bd, a.desugar(), b.desugar()),
        }
    }

    /// True when no operator carries a time window.
    pub fn is_untimed(&self) -> bool {
        use StlFormula::*;
        match self {
            True | Atom(_) => true,
            Not(a) => a.is_untimed(),
            And(a, b) | Or(a, b) => a.is_untimed() && b.is_untimed(),
            Always(bd, a) | Eventually(bd, a) => bd.is_none() && a.is_untimed(),
            Until(bd, a, b) => bd.is_none() && a.is_untimed() && b.is_untimed(),
        }
    }

    /// Length of trajectory needed to decide the formula at time 0, or
    /// `None` if an untimed operator looks arbitrarily far ahead.
    pub fn horizon(&self) -> Option<f64> {
        use StlFormula::*;
        match self {
            True | Atom(_) => Some(0.0),
            Not(a) => a.horizon(),
            And(a, b) | Or(a, b) => Some(a.horizon()?.max(b.horizon()?)),
            Always(bd, a) | Eventually(bd, a) => Some(bd.as_ref()?.hi + a.horizon()?),
            Until(bd, a, b) => Some(bd.as_ref()?.hi + a.horizon()?.max(b.horizon()?)),
        }
    }

    /// Atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&Expr> {
        use StlFormula::*;
        let mut out = Vec::new();
        fn walk<'a>(f: &'a StlFormula, out: &mut Vec<&'a Expr>) {
            match f {
                True => {}
                Atom(e) => out.push(e),
                Not(a) | Always(_, a) | Eventually(_, a) => walk(a, out),
                And(a, b) | Or(a, b) | Until(_, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> StlDisplay<'a> {
        StlDisplay { f: self, names }
    }
}

pub struct StlDisplay<'a> {
    f: &'a StlFormula,
    names: &'a [String],
}

const UNTIL: u8 = 0;
const OR: u8 = 1;
const AND: u8 = 2;
const PREFIX: u8 = 3;

fn level(f: &StlFormula) -> u8 {
    match f {
        StlFormula::Until(..) => UNTIL,
        StlFormula::Or(..) => OR,
        StlFormula::And(..) => AND,
        _ => PREFIX,
    }
}

fn write_bound(out: &mut fmt::Formatter<'_>, bd: &Option<TimeBound>) -> fmt::Result {
    match bd {
        Some(b) => write!(out, "[{}, {}] ", b.lo, b.hi),
        None => out.write_str(" "),
    }
}

fn write_stl(out: &mut fmt::Formatter<'_>, f: &StlFormula, names: &[String], min: u8) -> fmt::Result {
    use StlFormula::*;
    if level(f) < min {
        out.write_str("(")?;
        write_stl(out, f, names, UNTIL)?;
        return out.write_str(")");
    }
    match f {
        True => out.write_str("true"),
        Atom(e) => write!(out, "({})", e.display(names)),
        Not(a) => {
            out.write_str("!")?;
            write_stl(out, a, names, PREFIX)
        }
        And(a, b) => {
            write_stl(out, a, names, AND)?;
            out.write_str(" && ")?;
            write_stl(out, b, names, PREFIX)
        }
        Or(a, b) => {
            write_stl(out, a, names, OR)?;
            out.write_str(" || ")?;
            write_stl(out, b, names, AND)
        }
        Always(bd, a) | Eventually(bd, a) => {
            out.write_str(if matches!(f, Always(..)) { "G" } else { "F" })?;
            write_bound(out, bd)?;
            write_stl(out, a, names, PREFIX)
        }
        Until(bd, a, b) => {
            write_stl(out, a, names, OR)?;
            out.write_str(" U")?;
            match bd {
                Some(_) => write_bound(out, bd)?,
                None => out.write_str(" ")?,
            }
            write_stl(out, b, names, UNTIL)
        }
    }
}

impl fmt::Display for StlDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_stl(f, self.f, self.names, UNTIL)
    }
}
