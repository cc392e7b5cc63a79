use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};
use crate::interval::decimal::{format_exact, parse_down, parse_enclosure, parse_up};
use crate::interval::Interval;

/// Precedence levels, loosest first.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 5;

/// Renders an expression with variable names. Constants are printed in the
/// shortest decimal form that reads back to the identical interval, so the
/// output re-parses to the same tree.
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

impl<'a> ExprDisplay<'a> {
    pub(super) fn new(expr: &'a Expr, names: &'a [String]) -> Self {
        ExprDisplay { expr, names }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self.expr, self.names, 0)
    }
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if c.is_point() && c.lo() < 0.0 => UNARY,
        Expr::Const(_) | Expr::Var(_) => ATOM,
        Expr::Unary(UnaryOp::Neg, _) => UNARY,
        Expr::Unary(..) => ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => SUM,
        Expr::Binary(..) => PRODUCT,
        Expr::Pow(..) => UNARY + 1,
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, names: &[String], min: u8) -> fmt::Result {
    if level(e) < min {
        f.write_str("(")?;
        write_expr(f, e, names, 0)?;
        return f.write_str(")");
    }
    match e {
        Expr::Const(c) => f.write_str(&const_literal(*c)),
        Expr::Var(i) => match names.get(*i) {
            Some(n) => f.write_str(n),
            None => write!(f, "x{i}"),
        },
        Expr::Unary(UnaryOp::Neg, a) => {
            f.write_str("-")?;
            write_expr(f, a, names, UNARY)
        }
        Expr::Unary(op, a) => {
            write!(f, "{}(", op.name())?;
            write_expr(f, a, names, 0)?;
            f.write_str(")")
        }
        Expr::Binary(op, a, b) => {
            let (sym, lvl) = match op {
                BinaryOp::Add => (" + ", SUM),
                BinaryOp::Sub => (" - ", SUM),
                BinaryOp::Mul => (" * ", PRODUCT),
                BinaryOp::Div => (" / ", PRODUCT),
            };
            write_expr(f, a, names, lvl)?;
            f.write_str(sym)?;
            write_expr(f, b, names, lvl + 1)
        }
        Expr::Pow(a, n) => {
            write_expr(f, a, names, ATOM)?;
            write!(f, "^{n}")
        }
    }
}

/// Shortest literal that the parser maps back to exactly `c`.
pub fn const_literal(c: Interval) -> String {
    if c.is_point() {
        return shortest(&[c.lo()], |s| parse_enclosure(s) == Some(c))
            .unwrap_or_else(|| format_exact(c.lo()));
    } else {
        // the interval may be the rounding enclosure of a short decimal
        let exact = |s: &str| parse_enclosure(s) == Some(c);
        if let Some(s) = shortest(&[c.lo(), c.hi()], exact) {
            return s;
        }
    }
    let lo = shortest(&[c.lo()], |s| parse_down(s) == Some(c.lo()));
    let hi = shortest(&[c.hi()], |s| parse_up(s) == Some(c.hi()));
    let lo = lo.unwrap_or_else(|| format_exact(c.lo()));
    let hi = hi.unwrap_or_else(|| format_exact(c.hi()));
    format!("[{lo}, {hi}]")
}

fn shortest(xs: &[f64], accept: impl Fn(&str) -> bool) -> Option<String> {
    let plain = xs.iter().map(|x| format!("{x}"));
    let sci = (1..=17).flat_map(|d| xs.iter().map(move |x| format!("{:.*e}", d - 1, x)));
    plain
        .chain(sci)
        .filter(|s| accept(s))
        .min_by_key(|s| s.len())
}
