//! Division-free integer polynomial expressions.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary ('*' unary)*
//! unary := '-' unary | power
//! power := atom ('^' integer)?
//! atom  := integer | identifier | '(' expr ')'
//! ```
//!
//! `-m1^2` parses as `-(m1^2)`. Identifiers must name a declared variable.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::error::{Error, Result};

/// Largest exponent accepted by the parser.
pub const MAX_EXPONENT: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstraintExpr {
    Const(i128),
    /// Index into the tuple.
    Var(usize),
    Neg(Box<ConstraintExpr>),
    Add(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Sub(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Mul(Box<ConstraintExpr>, Box<ConstraintExpr>),
    Pow(Box<ConstraintExpr>, u32),
}

fn overflow(what: &str) -> Error {
    Error::Overflow(format!("{what} exceeds 128 bits"))
}

impl ConstraintExpr {
    pub fn parse(source: &str, variables: &[String]) -> Result<Self, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            variables,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error(format!("unexpected '{}'", p.src[p.pos] as char)));
        }
        Ok(e)
    }

    /// Exact value at `values` in checked 128-bit arithmetic.
    pub fn eval(&self, values: &[i128]) -> Result<i128> {
        Ok(match self {
            Self::Const(c) => *c,
            Self::Var(i) => values[*i],
            Self::Neg(a) => a
                .eval(values)?
                .checked_neg()
                .ok_or_else(|| overflow("negation"))?,
            Self::Add(a, b) => a
                .eval(values)?
                .checked_add(b.eval(values)?)
                .ok_or_else(|| overflow("sum"))?,
            Self::Sub(a, b) => a
                .eval(values)?
                .checked_sub(b.eval(values)?)
                .ok_or_else(|| overflow("difference"))?,
            Self::Mul(a, b) => a
                .eval(values)?
                .checked_mul(b.eval(values)?)
                .ok_or_else(|| overflow("product"))?,
            Self::Pow(a, k) => a
                .eval(values)?
                .checked_pow(*k)
                .ok_or_else(|| overflow("power"))?,
        })
    }

    pub fn max_variable(&self) -> Option<usize> {
        match self {
            Self::Const(_) => None,
            Self::Var(i) => Some(*i),
            Self::Neg(a) | Self::Pow(a, _) => a.max_variable(),
            Self::Add(a, b) | Self::Sub(a, b) | Self::Mul(a, b) => {
                a.max_variable().max(b.max_variable())
            }
        }
    }
}

impl fmt::Display for ConstraintExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(c) => write!(f, "{c}"),
            Self::Var(i) => write!(f, "${i}"),
            Self::Neg(a) => write!(f, "-({a})"),
            Self::Add(a, b) => write!(f, "({a} + {b})"),
            Self::Sub(a, b) => write!(f, "({a} - {b})"),
            Self::Mul(a, b) => write!(f, "({a} * {b})"),
            Self::Pow(a, k) => write!(f, "({a})^{k}"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    variables: &'a [String],
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ConstraintExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = ConstraintExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = ConstraintExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ConstraintExpr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = ConstraintExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.peek() == Some(b'/') {
                return Err(self.error("division is not supported"));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<ConstraintExpr, ParseError> {
        if self.eat(b'-') {
            return Ok(ConstraintExpr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ConstraintExpr, ParseError> {
        let base = self.atom()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        self.skip_ws();
        let at = self.pos;
        let k = self.integer()?;
        if k > MAX_EXPONENT as i128 {
            return Err(ParseError {
                position: at,
                message: format!("exponent {k} exceeds {MAX_EXPONENT}"),
            });
        }
        Ok(ConstraintExpr::Pow(Box::new(base), k as u32))
    }

    fn integer(&mut self) -> Result<i128, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<i128>()
            .map_err(|_| ParseError {
                position: start,
                message: "integer literal too large".into(),
            })
    }

    fn atom(&mut self) -> Result<ConstraintExpr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(ConstraintExpr::Const(self.integer()?)),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.variables.iter().position(|v| v == name) {
                    Some(i) => Ok(ConstraintExpr::Var(i)),
                    None => Err(ParseError {
                        position: start,
                        message: format!("unknown variable '{name}'"),
                    }),
                }
            }
            Some(c) => Err(self.error(format!("unexpected '{}'", c as char))),
            None => Err(self.error("unexpected end of expression")),
        }
    }
}
