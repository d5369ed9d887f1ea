//! Expressions for the nonlinearities `f_i(r, u, v, gu, gv)`.
//!
//! The five variables stand for `|x|`, the two unknowns and the moduli of
//! their gradients. The grammar, loosest binding first:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          // right-associative, binds tighter than unary minus
//! atom   := number | constant | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```

mod hints;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hints::{validate_hints, Counterexample, HintCheck, Hints, Monotonicity};
pub use parser::parse;

/// The five independent variables, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    R,
    U,
    V,
    Gu,
    Gv,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::R, Var::U, Var::V, Var::Gu, Var::Gv];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::R => "r",
            Var::U => "u",
            Var::V => "v",
            Var::Gu => "gu",
            Var::Gv => "gv",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point `(r, u, v, gu, gv)`.
pub type Point = [f64; 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Atan,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    const ALL: [Func; 11] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Atan,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{name}` at offset {offset} takes {expected} argument(s), got {found}")]
    WrongArity { offset: usize, name: String, expected: usize, found: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::WrongArity { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error in `{node}`: {reason}")]
    Domain { node: String, reason: &'static str },
    #[error("non-finite result in `{node}`")]
    Overflow { node: String },
    #[error("non-finite input {var} = {value}")]
    Input { var: Var, value: f64 },
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Evaluates at `(r, u, v, gu, gv)`.
    pub fn evaluate(&self, point: &Point) -> Result<f64, EvalError> {
        for v in Var::ALL {
            if !point[v.index()].is_finite() {
                return Err(EvalError::Input { var: v, value: point[v.index()] });
            }
        }
        self.eval_node(point)
    }

    pub fn evaluate_at(&self, r: f64, u: f64, v: f64, gu: f64, gv: f64) -> Result<f64, EvalError> {
        self.evaluate(&[r, u, v, gu, gv])
    }

    fn eval_node(&self, p: &Point) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Num(x) => return Ok(*x),
            Expr::Const(Constant::Pi) => return Ok(std::f64::consts::PI),
            Expr::Const(Constant::E) => return Ok(std::f64::consts::E),
            Expr::Var(v) => return Ok(p[v.index()]),
            Expr::Neg(e) => -e.eval_node(p)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval_node(p)?;
                let b = r.eval_node(p)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(self.domain("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(self.domain("non-integer power of a negative base"));
                        }
                        if a == 0.0 && b < 0.0 {
                            return Err(self.domain("negative power of zero"));
                        }
                        if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
                            a.powi(b as i32)
                        } else {
                            a.powf(b)
                        }
                    }
                }
            }
            Expr::Call(f, args) => {
                let x = args[0].eval_node(p)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Atan => x.atan(),
                    Func::Tanh => x.tanh(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(self.domain("log of a non-positive number"));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain("sqrt of a negative number"));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Min => x.min(args[1].eval_node(p)?),
                    Func::Max => x.max(args[1].eval_node(p)?),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::Overflow { node: self.to_string() })
        }
    }

    fn domain(&self, reason: &'static str) -> EvalError {
        EvalError::Domain { node: self.to_string(), reason }
    }

    /// Whether `var` occurs anywhere in the tree.
    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(e) => e.depends_on(var),
            Expr::Binary(_, l, r) => l.depends_on(var) || r.depends_on(var),
            Expr::Call(_, args) => args.iter().any(|a| a.depends_on(var)),
        }
    }

    /// `self * factor` as a new tree.
    pub fn scaled(&self, factor: f64) -> Expr {
        Expr::binary(BinOp::Mul, Expr::Num(factor), self.clone())
    }
}

/// Canonical printer: every binary node and negation is parenthesised, so the
/// output re-parses to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
