//! Symbolic scalar expressions over state variables.
//!
//! Expressions are immutable trees. They evaluate over points (plain `f64`,
//! used only by reference simulators), over boxes (natural interval
//! extension) and over parallelotopes (mean-value form). Symbolic
//! differentiation feeds guard gradients, Lie derivatives and the
//! variational equations of the integrator; [`taylor`] compiles them for
//! Taylor-series propagation.

mod display;
pub mod taylor;

use std::ops;

use thiserror::Error;

use crate::interval::{IMatrix, Interval, IntervalBox, IntervalError, Parallelotope};

pub use display::{const_literal, ExprDisplay};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error("abs is not differentiable at zero (argument {0})")]
    AbsAtZero(Interval),
    #[error("variable index {index} out of range for dimension {dim}")]
    VarOutOfRange { index: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Interval),
    Var(usize),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Non-negative integer power.
    Pow(Box<Expr>, u32),
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            "abs" => UnaryOp::Abs,
            _ => return None,
        })
    }

    fn apply(self, a: Interval) -> Result<Interval, IntervalError> {
        Ok(match self {
            UnaryOp::Neg => -a,
            UnaryOp::Sin => a.sin(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Exp => a.exp(),
            UnaryOp::Log => a.ln()?,
            UnaryOp::Sqrt => a.sqrt()?,
            UnaryOp::Abs => a.abs(),
        })
    }

    fn apply_f64(self, a: f64) -> f64 {
        match self {
            UnaryOp::Neg => -a,
            UnaryOp::Sin => a.sin(),
            UnaryOp::Cos => a.cos(),
            UnaryOp::Exp => a.exp(),
            UnaryOp::Log => a.ln(),
            UnaryOp::Sqrt => a.sqrt(),
            UnaryOp::Abs => a.abs(),
        }
    }
}

impl BinaryOp {
    fn apply(self, a: Interval, b: Interval) -> Result<Interval, IntervalError> {
        Ok(match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a.checked_div(&b)?,
        })
    }

    fn apply_f64(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => a / b,
        }
    }
}

/// Constants keep finite bounds so they print as literals; an overflowing
/// fold stays symbolic.
fn bounded(v: &Interval) -> bool {
    v.lo().is_finite() && v.hi().is_finite()
}

impl Expr {
    pub fn constant(c: impl Into<Interval>) -> Expr {
        Expr::Const(c.into())
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn zero() -> Expr {
        Expr::Const(Interval::ZERO)
    }

    pub fn one() -> Expr {
        Expr::Const(Interval::ONE)
    }

    pub fn as_const(&self) -> Option<Interval> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_exact(&self, v: f64) -> bool {
        matches!(self, Expr::Const(c) if c.is_point() && c.lo() == v)
    }

    /// Unary node with constant folding.
    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        if let Expr::Const(c) = a {
            if let Some(v) = op.apply(c).ok().filter(bounded) {
                return Expr::Const(v);
            }
        }
        if op == UnaryOp::Neg {
            if let Expr::Unary(UnaryOp::Neg, inner) = a {
                return *inner;
            }
        }
        Expr::Unary(op, Box::new(a))
    }

    /// Binary node with constant folding and 0/1 identities.
    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            if let Some(v) = op.apply(*x, *y).ok().filter(bounded) {
                return Expr::Const(v);
            }
        }
        match op {
            BinaryOp::Add if a.is_exact(0.0) => return b,
            BinaryOp::Add | BinaryOp::Sub if b.is_exact(0.0) => return a,
            BinaryOp::Sub if a.is_exact(0.0) => return Expr::unary(UnaryOp::Neg, b),
            BinaryOp::Mul if a.is_exact(0.0) || b.is_exact(0.0) => return Expr::zero(),
            BinaryOp::Mul if a.is_exact(1.0) => return b,
            BinaryOp::Mul | BinaryOp::Div if b.is_exact(1.0) => return a,
            BinaryOp::Mul if a.is_exact(-1.0) => return Expr::unary(UnaryOp::Neg, b),
            BinaryOp::Div if a.is_exact(0.0) => return Expr::zero(),
            _ => {}
        }
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, n: u32) -> Expr {
        match n {
            0 => Expr::one(),
            1 => a,
            _ => match a {
                Expr::Const(c) if bounded(&c.powi(n)) => Expr::Const(c.powi(n)),
                a => Expr::Pow(Box::new(a), n),
            },
        }
    }

    pub fn sin(self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }

    pub fn exp(self) -> Expr {
        Expr::unary(UnaryOp::Exp, self)
    }

    pub fn ln(self) -> Expr {
        Expr::unary(UnaryOp::Log, self)
    }

    pub fn sqrt(self) -> Expr {
        Expr::unary(UnaryOp::Sqrt, self)
    }

    pub fn abs(self) -> Expr {
        Expr::unary(UnaryOp::Abs, self)
    }

    pub fn powi(self, n: u32) -> Expr {
        Expr::pow(self, n)
    }

    /// One past the largest variable index used, 0 for constants.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Unary(_, a) | Expr::Pow(a, _) => a.arity(),
            Expr::Binary(_, a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn check_arity(&self, dim: usize) -> Result<(), ExprError> {
        match self.arity() {
            k if k > dim => Err(ExprError::VarOutOfRange {
                index: k - 1,
                dim,
            }),
            _ => Ok(()),
        }
    }

    /// Non-validated point evaluation; interval constants use their midpoint.
    pub fn eval_point(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => c.mid(),
            Expr::Var(i) => x[*i],
            Expr::Unary(op, a) => op.apply_f64(a.eval_point(x)),
            Expr::Binary(op, a, b) => op.apply_f64(a.eval_point(x), b.eval_point(x)),
            Expr::Pow(a, n) => a.eval_point(x).powi(*n as i32),
        }
    }

    /// Natural interval extension over the box `env`.
    pub fn eval_box(&self, env: &IntervalBox) -> Result<Interval, ExprError> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => *env.components().get(*i).ok_or(ExprError::VarOutOfRange {
                index: *i,
                dim: env.dim(),
            })?,
            Expr::Unary(op, a) => op.apply(a.eval_box(env)?)?,
            Expr::Binary(op, a, b) => op.apply(a.eval_box(env)?, b.eval_box(env)?)?,
            Expr::Pow(a, n) => a.eval_box(env)?.powi(*n),
        })
    }

    /// Mean-value evaluation over a parallelotope, intersected with the
    /// natural extension over its bounding box.
    pub fn eval_ptope(&self, p: &Parallelotope) -> Result<Interval, ExprError> {
        MeanValueForm::new(self.clone(), p.dim()).eval_ptope(p)
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn differentiate(&self, var: usize) -> Expr {
        use BinaryOp::*;
        use UnaryOp::*;
        match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(i) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Unary(op, a) => {
                let da = a.differentiate(var);
                if da.is_exact(0.0) {
                    return Expr::zero();
                }
                let a = (**a).clone();
                let outer = match op {
                    Neg => return Expr::unary(Neg, da),
                    Sin => a.cos(),
                    Cos => Expr::unary(Neg, a.sin()),
                    Exp => a.exp(),
                    Log => return Expr::binary(Div, da, a),
                    Sqrt => {
                        let two_root = Expr::binary(Mul, Expr::constant(2.0), a.sqrt());
                        return Expr::binary(Div, da, two_root);
                    }
                    Abs => Expr::binary(Div, a.clone(), a.abs()),
                };
                Expr::binary(Mul, outer, da)
            }
            Expr::Binary(op, a, b) => {
                let (da, db) = (a.differentiate(var), b.differentiate(var));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    Add => Expr::binary(Add, da, db),
                    Sub => Expr::binary(Sub, da, db),
                    Mul => Expr::binary(
                        Add,
                        Expr::binary(Mul, da, b),
                        Expr::binary(Mul, a, db),
                    ),
                    Div => {
                        let num = Expr::binary(
                            Sub,
                            Expr::binary(Mul, da, b.clone()),
                            Expr::binary(Mul, a, db),
                        );
                        Expr::binary(Div, num, Expr::pow(b, 2))
                    }
                }
            }
            Expr::Pow(a, n) => {
                let da = a.differentiate(var);
                let inner = Expr::binary(
                    Mul,
                    Expr::constant(*n as f64),
                    Expr::pow((**a).clone(), n - 1),
                );
                Expr::binary(Mul, inner, da)
            }
        }
    }

    pub fn gradient(&self, dim: usize) -> Vec<Expr> {
        (0..dim).map(|i| self.differentiate(i)).collect()
    }

    /// Renders with variable names; the text re-parses to the same tree.
    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay::new(self, names)
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, self, b)
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, self, b)
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, self, b)
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, b: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, self, b)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
}

/// An expression bundled with its gradient for centered-form evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanValueForm {
    pub expr: Expr,
    pub grad: Vec<Expr>,
}

impl MeanValueForm {
    pub fn new(expr: Expr, dim: usize) -> Self {
        let grad = expr.gradient(dim);
        MeanValueForm { expr, grad }
    }

    pub fn eval_box(&self, b: &IntervalBox) -> Result<Interval, ExprError> {
        self.expr.eval_box(b)
    }

    pub fn gradient_at(&self, b: &IntervalBox) -> Result<Vec<Interval>, ExprError> {
        self.grad.iter().map(|g| g.eval_box(b)).collect()
    }

    /// Encloses `e(c + m·v)` for `c ∈ center`, `v ∈ u`, given a box `hull`
    /// containing every such point and `center` itself.
    pub fn eval_affine(
        &self,
        center: &IntervalBox,
        m: &IMatrix,
        u: &IntervalBox,
        hull: &IntervalBox,
    ) -> Result<Interval, ExprError> {
        let natural = self.expr.eval_box(hull)?;
        let at_center = self.expr.eval_box(center)?;
        let grad = self.gradient_at(hull)?;
        let row = m.left_mul_vec(&grad);
        let linear: Interval = row.iter().zip(u.iter()).map(|(r, v)| *r * *v).sum();
        Ok(natural.refine(&(at_center + linear)))
    }

    pub fn eval_ptope(&self, p: &Parallelotope) -> Result<Interval, ExprError> {
        let hull = p.to_box();
        let center = IntervalBox::from_points(&p.center);
        self.eval_affine(&center, &IMatrix::from_f64(&p.a), &p.u, &hull)
    }
}

/// Right-hand side of an ODE system, one expression per state variable.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Expr>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>) -> Result<Self, ExprError> {
        let dim = components.len();
        for c in &components {
            c.check_arity(dim)?;
        }
        Ok(VectorField { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn eval_box(&self, x: &IntervalBox) -> Result<IntervalBox, ExprError> {
        self.components.iter().map(|c| c.eval_box(x)).collect()
    }

    pub fn eval_point(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_point(x)).collect()
    }

    /// Symbolic Jacobian, row `i` holding `∂fᵢ/∂xⱼ`.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        self.components.iter().map(|c| c.gradient(self.dim())).collect()
    }

    /// The `n + n²` system `(x' = f(x), V' = Df(x)·V)`; `V` is stored
    /// row-major after the state.
    pub fn augmented(&self) -> VectorField {
        let n = self.dim();
        let jac = self.jacobian();
        let mut comps = self.components.clone();
        for i in 0..n {
            for j in 0..n {
                let mut acc = Expr::zero();
                for (l, d) in jac[i].iter().enumerate() {
                    acc = acc + d.clone() * Expr::var(n + l * n + j);
                }
                comps.push(acc);
            }
        }
        VectorField { components: comps }
    }

    /// `Σᵢ ∂g/∂xᵢ · fᵢ`
    pub fn lie_derivative(&self, g: &Expr) -> Expr {
        lie_derivative(g, self)
    }
}

impl FromIterator<Expr> for Result<VectorField, ExprError> {
    fn from_iter<T: IntoIterator<Item = Expr>>(iter: T) -> Self {
        VectorField::new(iter.into_iter().collect())
    }
}

pub fn lie_derivative(g: &Expr, f: &VectorField) -> Expr {
    f.components()
        .iter()
        .enumerate()
        .fold(Expr::zero(), |acc, (i, fi)| {
            acc + g.differentiate(i) * fi.clone()
        })
}
