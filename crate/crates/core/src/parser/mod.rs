//! Recursive-descent parser for the model language.
//!
//! ```text
//! model     = {letdef} vardecl initdecl {locdef} [propdecl] ;
//! letdef    = "let" IDENT "=" (expr | "R" NUMBER) ;
//! vardecl   = "var" IDENT {"," IDENT} ;
//! initdecl  = "init" IDENT "," expr {"," expr} ;
//! locdef    = "at" IDENT "wait" expr {"," expr} {trans} "end" ;
//! trans     = "once" "(" expr {"," (expr | "true")} ")" "goto" IDENT
//!             "then" expr {"," expr} ;
//! propdecl  = "prop" stl ;
//! stl       = or ["U" [window] stl] ;
//! or        = and {"||" and} ;
//! and       = prefix {"&&" prefix} ;
//! prefix    = "!" prefix | ("G" | "F") [window] prefix | "true"
//!           | "(" expr ")" | "(" stl ")" ;
//! window    = "[" NUMBER "," NUMBER "]" ;
//! expr      = term {("+" | "-") term} ;
//! term      = unary {("*" | "/") unary} ;
//! unary     = "-" unary | power ;
//! power     = primary ["^" INTEGER] ;
//! primary   = NUMBER | IDENT | FUNC "(" expr ")" | "(" expr ")"
//!           | "[" ["-"] NUMBER "," ["-"] NUMBER "]" ;
//! ```
//!
//! `#` starts a comment running to the end of the line. Constants are folded
//! as they are parsed, and `R k` draws a point uniformly from `[0, k]` using
//! the seed, once per occurrence in textual order.

mod lexer;
mod print;
mod report;

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, UnaryOp, VectorField};
use crate::interval::decimal::{parse_down, parse_enclosure, parse_up};
use crate::interval::Interval;
use crate::model::{Constant, Location, Model, Transition};
use crate::stl::{StlFormula, TimeBound};
use lexer::{tokenize, Tok, Token};

pub use lexer::Pos;
pub use print::print_model;
pub use report::model_report;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ErrorKind,
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            kind: ErrorKind::Syntax,
            pos,
            message: message.into(),
        }
    }

    fn semantic(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            kind: ErrorKind::Semantic,
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ErrorKind::Syntax => "syntax error",
            ErrorKind::Semantic => "semantic error",
        };
        write!(f, "{}:{}: {}: {}", self.pos.line, self.pos.col, kind, self.message)
    }
}

impl std::error::Error for ParseError {}

const KEYWORDS: &[&str] = &[
    "let", "var", "init", "at", "wait", "once", "goto", "then", "end", "prop", "true",
];

/// Parses a model; `seed` drives the `R k` samples.
pub fn parse_model(text: &str, seed: u64) -> Result<Model, ParseError> {
    Parser::new(text, seed)?.model(seed)
}

/// Parses a standalone property over the given variable names.
pub fn parse_property(text: &str, variables: &[String]) -> Result<StlFormula, ParseError> {
    let mut p = Parser::new(text, 0)?;
    p.vars = variables.to_vec();
    let f = p.stl()?;
    p.expect_eof()?;
    Ok(f)
}

/// Parses a single arithmetic expression over the given variable names.
pub fn parse_expr(text: &str, variables: &[String]) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text, 0)?;
    p.vars = variables.to_vec();
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
    consts: HashMap<String, Interval>,
    vars: Vec<String>,
    rng: ChaCha8Rng,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str, seed: u64) -> PResult<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
            consts: HashMap::new(),
            vars: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        ParseError::syntax(
            self.pos(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        )
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> PResult<()> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    /// A user-chosen name, rejecting keywords and function names.
    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => Err(ParseError::syntax(
                pos,
                format!("expected {what}, found keyword `{s}`"),
            )),
            Tok::Ident(s) if UnaryOp::from_name(&s).is_some() => Err(ParseError::semantic(
                pos,
                format!("`{s}` is a function name and cannot name a {what}"),
            )),
            Tok::Ident(s) => {
                self.bump();
                Ok((s, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn model(mut self, seed: u64) -> PResult<Model> {
        let mut constants = Vec::new();
        while self.is_kw("let") {
            self.bump();
            constants.push(self.letdef()?);
        }

        self.expect_kw("var")?;
        loop {
            let (name, pos) = self.ident("variable name")?;
            if self.vars.contains(&name) || self.consts.contains_key(&name) {
                return Err(ParseError::semantic(pos, format!("duplicate name `{name}`")));
            }
            self.vars.push(name);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let n = self.vars.len();

        self.expect_kw("init")?;
        let (init_loc, init_pos) = self.ident("location name")?;
        let mut initial_state = Vec::with_capacity(n);
        self.expect(Tok::Comma, "`,` before initial values")?;
        loop {
            let pos = self.pos();
            let e = self.expr()?;
            let var = self.vars.get(initial_state.len()).cloned().unwrap_or_default();
            match e {
                Expr::Const(c) => initial_state.push(c),
                _ => {
                    return Err(ParseError::semantic(
                        pos,
                        format!("initial value of `{var}` is not a constant"),
                    ))
                }
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        if initial_state.len() != n {
            return Err(ParseError::semantic(
                init_pos,
                format!(
                    "`init {init_loc}` gives {} values for {n} variables",
                    initial_state.len()
                ),
            ));
        }

        let mut locations: Vec<Location> = Vec::new();
        let mut gotos: Vec<(usize, usize, String, Pos)> = Vec::new();
        while self.is_kw("at") {
            self.bump();
            let (name, pos) = self.ident("location name")?;
            if locations.iter().any(|l| l.name == name) {
                return Err(ParseError::semantic(pos, format!("duplicate location `{name}`")));
            }
            self.expect_kw("wait")?;
            let wait_pos = self.pos();
            let rhs = self.expr_list()?;
            if rhs.len() != n {
                return Err(ParseError::semantic(
                    wait_pos,
                    format!("location `{name}` gives {} derivatives for {n} variables", rhs.len()),
                ));
            }
            let field = VectorField::new(rhs).expect("variables resolve to declared indices");
            let mut transitions = Vec::new();
            while self.is_kw("once") {
                self.bump();
                let (tr, target, tpos) = self.transition(&name)?;
                gotos.push((locations.len(), transitions.len(), target, tpos));
                transitions.push(tr);
            }
            self.expect_kw("end")?;
            locations.push(Location {
                name,
                field,
                transitions,
            });
        }

        let property = if self.is_kw("prop") {
            self.bump();
            Some(self.stl()?)
        } else {
            None
        };
        self.expect_eof()?;

        let names: Vec<String> = locations.iter().map(|l| l.name.clone()).collect();
        let find = |name: &str| names.iter().position(|l| l == name);
        let initial_location = find(&init_loc).ok_or_else(|| {
            ParseError::semantic(init_pos, format!("undeclared initial location `{init_loc}`"))
        })?;
        for (l, t, target, pos) in gotos {
            let idx = find(&target).ok_or_else(|| {
                ParseError::semantic(
                    pos,
                    format!(
                        "`goto {target}` in location `{}` names an undeclared location",
                        locations[l].name
                    ),
                )
            })?;
            locations[l].transitions[t].target = idx;
        }

        Ok(Model {
            seed,
            constants,
            variables: self.vars,
            initial_location,
            initial_state,
            locations,
            property,
        })
    }

    fn letdef(&mut self) -> PResult<Constant> {
        let (name, pos) = self.ident("constant name")?;
        if self.consts.contains_key(&name) {
            return Err(ParseError::semantic(pos, format!("duplicate constant `{name}`")));
        }
        self.expect(Tok::Eq, "`=`")?;
        let c = if self.is_kw("R") && matches!(self.peek_at(1), Tok::Number(_)) {
            self.bump();
            let npos = self.pos();
            let Tok::Number(text) = self.bump().tok else {
                unreachable!()
            };
            let k: f64 = text
                .parse()
                .ok()
                .filter(|k: &f64| k.is_finite())
                .ok_or_else(|| ParseError::semantic(npos, format!("`R {text}` is out of range")))?;
            let u: f64 = self.rng.random();
            Constant {
                name: name.clone(),
                value: Interval::point(u * k),
                sampled_from: Some(k),
            }
        } else {
            let epos = self.pos();
            match self.expr()? {
                Expr::Const(value) => Constant {
                    name: name.clone(),
                    value,
                    sampled_from: None,
                },
                _ => {
                    return Err(ParseError::semantic(
                        epos,
                        format!("definition of `{name}` is not constant"),
                    ))
                }
            }
        };
        self.consts.insert(name, c.value);
        Ok(c)
    }

    fn transition(&mut self, from: &str) -> PResult<(Transition, String, Pos)> {
        self.expect(Tok::LParen, "`(`")?;
        let guard_eq = self.expr()?;
        let mut guard_ineqs = Vec::new();
        while self.eat(&Tok::Comma) {
            if self.is_kw("true") {
                self.bump();
            } else {
                guard_ineqs.push(self.expr()?);
            }
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        self.expect_kw("goto")?;
        let (target, tpos) = self.ident("location name")?;
        self.expect_kw("then")?;
        let rpos = self.pos();
        let reset = self.expr_list()?;
        let n = self.vars.len();
        if reset.len() != n {
            return Err(ParseError::semantic(
                rpos,
                format!(
                    "reset of `{from}` -> `{target}` gives {} values for {n} variables",
                    reset.len()
                ),
            ));
        }
        let tr = Transition {
            guard_eq,
            guard_ineqs,
            target: usize::MAX,
            reset,
        };
        Ok((tr, target, tpos))
    }

    fn expr_list(&mut self) -> PResult<Vec<Expr>> {
        let mut out = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc + self.term()?;
            } else if self.eat(&Tok::Minus) {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = acc * self.unary()?;
            } else if self.eat(&Tok::Slash) {
                acc = acc / self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&Tok::Minus) {
            Ok(-self.unary()?)
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.primary()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(text) => {
                let n = text.parse::<u32>().map_err(|_| {
                    ParseError::syntax(
                        pos,
                        format!("exponent `{text}` is not a non-negative integer"),
                    )
                })?;
                self.bump();
                Ok(base.powi(n))
            }
            _ => Err(self.unexpected("integer exponent")),
        }
    }

    fn number(&mut self) -> PResult<Interval> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(text) => {
                self.bump();
                parse_enclosure(&text)
                    .ok_or_else(|| ParseError::semantic(pos, format!("number `{text}` is out of range")))
            }
            _ => Err(self.unexpected("number")),
        }
    }

    /// `["-"] NUMBER` rounded in the given direction.
    fn signed_bound(&mut self, up: bool) -> PResult<f64> {
        let neg = self.eat(&Tok::Minus);
        let pos = self.pos();
        let Tok::Number(text) = self.peek().clone() else {
            return Err(self.unexpected("number"));
        };
        self.bump();
        // rounding direction flips under negation
        let v = if up != neg { parse_up(&text) } else { parse_down(&text) };
        let v = v.filter(|v| v.is_finite()).ok_or_else(|| {
            ParseError::semantic(pos, format!("number `{text}` is out of range"))
        })?;
        Ok(if neg { -v } else { v })
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(_) => Ok(Expr::Const(self.number()?)),
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBracket => {
                self.bump();
                let lo = self.signed_bound(false)?;
                self.expect(Tok::Comma, "`,`")?;
                let hi = self.signed_bound(true)?;
                self.expect(Tok::RBracket, "`]`")?;
                Interval::new(lo, hi).map(Expr::Const).map_err(|_| {
                    ParseError::semantic(pos, format!("interval literal has lower bound {lo} above upper bound {hi}"))
                })
            }
            Tok::Ident(name) => {
                if let Some(op) = UnaryOp::from_name(&name) {
                    self.bump();
                    self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                    let a = self.expr()?;
                    self.expect(Tok::RParen, "`)`")?;
                    return Ok(Expr::unary(op, a));
                }
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(self.unexpected("expression"));
                }
                self.bump();
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    Ok(Expr::var(i))
                } else if let Some(c) = self.consts.get(&name) {
                    Ok(Expr::Const(*c))
                } else if matches!(self.peek(), Tok::LParen) {
                    Err(ParseError::semantic(pos, format!("unknown function `{name}`")))
                } else {
                    Err(ParseError::semantic(pos, format!("unknown identifier `{name}`")))
                }
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn stl(&mut self) -> PResult<StlFormula> {
        let lhs = self.stl_or()?;
        if self.is_kw("U") {
            self.bump();
            let bound = self.window()?;
            let rhs = self.stl()?;
            return Ok(StlFormula::until(bound, lhs, rhs));
        }
        Ok(lhs)
    }

    fn stl_or(&mut self) -> PResult<StlFormula> {
        let mut acc = self.stl_and()?;
        while self.eat(&Tok::OrOr) {
            acc = StlFormula::or(acc, self.stl_and()?);
        }
        Ok(acc)
    }

    fn stl_and(&mut self) -> PResult<StlFormula> {
        let mut acc = self.stl_prefix()?;
        while self.eat(&Tok::AndAnd) {
            acc = StlFormula::and(acc, self.stl_prefix()?);
        }
        Ok(acc)
    }

    fn stl_prefix(&mut self) -> PResult<StlFormula> {
        if self.eat(&Tok::Bang) {
            return Ok(StlFormula::not(self.stl_prefix()?));
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(StlFormula::True);
        }
        if self.is_kw("G") || self.is_kw("F") {
            let always = self.is_kw("G");
            self.bump();
            let bound = self.window()?;
            let body = self.stl_prefix()?;
            return Ok(if always {
                StlFormula::always(bound, body)
            } else {
                StlFormula::eventually(bound, body)
            });
        }
        if !matches!(self.peek(), Tok::LParen) {
            return Err(self.unexpected("`(`, `!`, `G`, `F` or `true`"));
        }
        // `( expr )` is an atom; otherwise the parentheses group a formula
        let start = self.at;
        self.bump();
        let atom_err = match self.expr() {
            Ok(e) if self.eat(&Tok::RParen) => return Ok(StlFormula::Atom(e)),
            Ok(_) => self.unexpected("`)`"),
            Err(e) => e,
        };
        let atom_at = self.at;
        self.at = start + 1;
        match self.stl() {
            Ok(f) => {
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Err(e) => {
                // report whichever reading got further
                let stl_at = self.at;
                Err(if atom_at > stl_at { atom_err } else { e })
            }
        }
    }

    fn window(&mut self) -> PResult<Option<TimeBound>> {
        if !self.eat(&Tok::LBracket) {
            return Ok(None);
        }
        let pos = self.pos();
        let lo = self.window_number()?;
        self.expect(Tok::Comma, "`,`")?;
        let hi = self.window_number()?;
        self.expect(Tok::RBracket, "`]`")?;
        if !(0.0 <= lo && lo <= hi) {
            return Err(ParseError::semantic(
                pos,
                format!("time window [{lo}, {hi}] must satisfy 0 <= lo <= hi"),
            ));
        }
        Ok(Some(TimeBound { lo, hi }))
    }

    fn window_number(&mut self) -> PResult<f64> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Number(text) => {
                self.bump();
                text.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ParseError::semantic(pos, format!("time bound `{text}` is out of range")))
            }
            _ => Err(self.unexpected("time bound")),
        }
    }
}
