//! Taylor-mode automatic differentiation over interval coefficients.
//!
//! A [`Tape`] is a topologically ordered list of operations with common
//! subexpressions shared. Evaluating it on truncated power series applies the
//! standard coefficient recurrences; solving `x' = f(x)` by Picard iteration
//! on the series yields the Taylor coefficients of the flow.

use std::collections::HashMap;

use super::{BinaryOp, Expr, ExprError, UnaryOp};
use crate::interval::Interval;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(Interval),
    Var(usize),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    /// `base^n`; `prev` is the node for `base^(n-1)`.
    Pow { base: usize, prev: usize, n: u32 },
    Sin(usize),
    Cos(usize),
    Exp(usize),
    Log(usize),
    Sqrt(usize),
    Abs(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Const(u64, u64),
    Var(usize),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    Pow(usize, u32),
}

#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<usize>,
    nvars: usize,
}

struct Builder {
    ops: Vec<Op>,
    seen: HashMap<Key, usize>,
}

impl Builder {
    fn intern(&mut self, key: Key, op: Op) -> usize {
        if let Some(&i) = self.seen.get(&key) {
            return i;
        }
        self.ops.push(op);
        self.seen.insert(key, self.ops.len() - 1);
        self.ops.len() - 1
    }

    fn pow(&mut self, base: usize, n: u32) -> usize {
        if n == 1 {
            return base;
        }
        let prev = self.pow(base, n - 1);
        self.intern(Key::Pow(base, n), Op::Pow { base, prev, n })
    }

    fn add(&mut self, e: &Expr) -> usize {
        match e {
            Expr::Const(c) => self.intern(Key::Const(c.lo().to_bits(), c.hi().to_bits()), Op::Const(*c)),
            Expr::Var(i) => self.intern(Key::Var(*i), Op::Var(*i)),
            Expr::Unary(op, a) => {
                let a = self.add(a);
                let node = match op {
                    UnaryOp::Neg => Op::Neg(a),
                    UnaryOp::Sin => Op::Sin(a),
                    UnaryOp::Cos => Op::Cos(a),
                    UnaryOp::Exp => Op::Exp(a),
                    UnaryOp::Log => Op::Log(a),
                    UnaryOp::Sqrt => Op::Sqrt(a),
                    UnaryOp::Abs => Op::Abs(a),
                };
                self.intern(Key::Unary(*op, a), node)
            }
            Expr::Binary(op, a, b) => {
                let (a, b) = (self.add(a), self.add(b));
                let node = match op {
                    BinaryOp::Add => Op::Add(a, b),
                    BinaryOp::Sub => Op::Sub(a, b),
                    BinaryOp::Mul => Op::Mul(a, b),
                    BinaryOp::Div => Op::Div(a, b),
                };
                self.intern(Key::Binary(*op, a, b), node)
            }
            Expr::Pow(a, n) => {
                let a = self.add(a);
                match n {
                    0 => self.intern(
                        Key::Const(1f64.to_bits(), 1f64.to_bits()),
                        Op::Const(Interval::ONE),
                    ),
                    _ => self.pow(a, *n),
                }
            }
        }
    }
}

/// `Σ_{j=from}^{to} a_j · b_{k-j}`
fn conv(a: &[Interval], b: &[Interval], k: usize, from: usize, to: usize) -> Interval {
    (from..=to).map(|j| a[j] * b[k - j]).sum()
}

/// `Σ_{j=1}^{k} j · a_j · b_{k-j}`
fn weighted_conv(a: &[Interval], b: &[Interval], k: usize) -> Interval {
    (1..=k).map(|j| a[j] * b[k - j] * (j as f64)).sum()
}

impl Tape {
    /// Compiles `exprs` over `nvars` input variables.
    pub fn compile(exprs: &[Expr], nvars: usize) -> Result<Tape, ExprError> {
        let mut b = Builder {
            ops: Vec::new(),
            seen: HashMap::new(),
        };
        let mut outputs = Vec::with_capacity(exprs.len());
        for e in exprs {
            e.check_arity(nvars)?;
            outputs.push(b.add(e));
        }
        Ok(Tape {
            ops: b.ops,
            outputs,
            nvars,
        })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn noutputs(&self) -> usize {
        self.outputs.len()
    }

    /// Natural interval evaluation of every output.
    pub fn eval(&self, x: &[Interval]) -> Result<Vec<Interval>, ExprError> {
        let inputs: Vec<Vec<Interval>> = x.iter().map(|v| vec![*v]).collect();
        let mut st = State::new(self);
        st.push_order(self, &inputs, 0)?;
        Ok(self.outputs.iter().map(|&o| st.val[o][0]).collect())
    }

    /// Taylor coefficients `x_0 … x_order` of the solution of `x' = f(x)`
    /// with `x(t₀) ∈ x0`, where `f` is this tape. Coefficient `i` is
    /// `x⁽ⁱ⁾(t₀)/i!`. The result is indexed `[variable][order]`.
    pub fn ode_series(&self, x0: &[Interval], order: usize) -> Result<Vec<Vec<Interval>>, ExprError> {
        assert_eq!(self.outputs.len(), self.nvars, "ODE tape must be square");
        assert_eq!(x0.len(), self.nvars);
        let mut x: Vec<Vec<Interval>> = x0
            .iter()
            .map(|v| {
                let mut s = Vec::with_capacity(order + 1);
                s.push(*v);
                s
            })
            .collect();
        let mut st = State::new(self);
        for k in 0..order {
            st.push_order(self, &x, k)?;
            for (xi, &o) in x.iter_mut().zip(&self.outputs) {
                xi.push(st.val[o][k].div_int(k as u32 + 1));
            }
        }
        Ok(x)
    }
}

struct State {
    val: Vec<Vec<Interval>>,
    /// Partner series: cosine for `Sin` nodes, sine for `Cos` nodes.
    aux: Vec<Vec<Interval>>,
}

impl State {
    fn new(tape: &Tape) -> Self {
        State {
            val: vec![Vec::new(); tape.ops.len()],
            aux: vec![Vec::new(); tape.ops.len()],
        }
    }

    /// Appends coefficient `k` to every node; inputs must hold index `k`.
    fn push_order(&mut self, tape: &Tape, x: &[Vec<Interval>], k: usize) -> Result<(), ExprError> {
        for (i, op) in tape.ops.iter().enumerate() {
            let (v, aux) = self.coefficient(op, x, k, i)?;
            self.val[i].push(v);
            if let Some(a) = aux {
                self.aux[i].push(a);
            }
        }
        Ok(())
    }

    fn coefficient(
        &self,
        op: &Op,
        x: &[Vec<Interval>],
        k: usize,
        me: usize,
    ) -> Result<(Interval, Option<Interval>), ExprError> {
        let val = &self.val;
        let kf = k as u32;
        let v = match *op {
            Op::Const(c) => {
                if k == 0 {
                    c
                } else {
                    Interval::ZERO
                }
            }
            Op::Var(i) => x[i][k],
            Op::Neg(a) => -val[a][k],
            Op::Add(a, b) => val[a][k] + val[b][k],
            Op::Sub(a, b) => val[a][k] - val[b][k],
            Op::Mul(a, b) => conv(&val[a], &val[b], k, 0, k),
            Op::Div(a, b) => {
                // c_k = (a_k - Σ_{j=1}^k b_j c_{k-j}) / b_0
                let c = &val[me];
                let num = if k == 0 {
                    val[a][0]
                } else {
                    val[a][k] - conv(&val[b], c, k, 1, k)
                };
                num.checked_div(&val[b][0])?
            }
            Op::Pow { base, prev, n } => {
                if k == 0 {
                    val[base][0].powi(n)
                } else {
                    conv(&val[prev], &val[base], k, 0, k)
                }
            }
            Op::Sin(a) | Op::Cos(a) => {
                let (s, c) = if k == 0 {
                    (val[a][0].sin(), val[a][0].cos())
                } else {
                    let (s_series, c_series) = match op {
                        Op::Sin(_) => (&val[me], &self.aux[me]),
                        _ => (&self.aux[me], &val[me]),
                    };
                    let s = weighted_conv(&val[a], c_series, k).div_int(kf);
                    let c = -weighted_conv(&val[a], s_series, k).div_int(kf);
                    (s, c)
                };
                return Ok(match op {
                    Op::Sin(_) => (s, Some(c)),
                    _ => (c, Some(s)),
                });
            }
            Op::Exp(a) => {
                if k == 0 {
                    val[a][0].exp()
                } else {
                    weighted_conv(&val[a], &val[me], k).div_int(kf)
                }
            }
            Op::Log(a) => {
                // a_0 l_k = a_k - (1/k) Σ_{j=1}^{k-1} j l_j a_{k-j}
                if k == 0 {
                    val[a][0].ln()?
                } else {
                    let l = &val[me];
                    let s: Interval = (1..k).map(|j| l[j] * val[a][k - j] * (j as f64)).sum();
                    (val[a][k] - s.div_int(kf)).checked_div(&val[a][0])?
                }
            }
            Op::Sqrt(a) => {
                // 2 r_0 r_k = a_k - Σ_{j=1}^{k-1} r_j r_{k-j}
                let r = &val[me];
                if k == 0 {
                    val[a][0].sqrt()?
                } else {
                    let s = conv(r, r, k, 1, k - 1);
                    (val[a][k] - s).checked_div(&(r[0] * 2.0))?
                }
            }
            Op::Abs(a) => {
                let a0 = val[a][0];
                if k == 0 {
                    a0.abs()
                } else if a0.is_positive() {
                    val[a][k]
                } else if a0.is_negative() {
                    -val[a][k]
                } else {
                    return Err(ExprError::AbsAtZero(a0));
                }
            }
        };
        Ok((v, None))
    }
}
