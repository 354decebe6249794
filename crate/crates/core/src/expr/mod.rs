//! Expression trees for constraint functions, their additive decomposition,
//! and the model container.

mod model;
mod monotone;
mod parse;

use std::f64::consts::PI;
use std::fmt;
use std::ops;

use thiserror::Error;

use crate::special;

pub use model::{ConstraintSpec, Model, ModelError, Sense, Term};
pub use monotone::{analyze_monotonicity, Monotonicity};
pub use parse::parse;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Abs,
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Tan,
    Arctan,
    Tanh,
    Erf,
    Gamma,
    /// `‖x‖₀`: 0 at zero, 1 elsewhere.
    L0,
    Floor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    /// `a - b·floor(a/b)`, sign of the divisor.
    Mod,
    /// `x·log(x/a)`.
    Centropy,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Abs => "abs",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Arctan => "arctan",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Erf => "erf",
            UnaryOp::Gamma => "gamma",
            UnaryOp::L0 => "l0",
            UnaryOp::Floor => "floor",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "abs" => UnaryOp::Abs,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "arctan" => UnaryOp::Arctan,
            "tanh" => UnaryOp::Tanh,
            "erf" => UnaryOp::Erf,
            "gamma" => UnaryOp::Gamma,
            "l0" => UnaryOp::L0,
            "floor" => UnaryOp::Floor,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Const(f64),
    /// Index into the model's variable list.
    Var(usize),
    Unary(UnaryOp, Box<Expression>),
    Binary(BinaryOp, Box<Expression>, Box<Expression>),
    Sum(Vec<Expression>),
}

#[derive(Clone, Debug, Error, PartialEq)]
#[error("domain error in `{node}`: {reason}")]
pub struct DomainError {
    pub node: String,
    pub reason: &'static str,
}

impl DomainError {
    pub(crate) fn at(e: &Expression, reason: &'static str) -> Self {
        DomainError { node: e.to_string(), reason }
    }
}

impl Expression {
    pub fn var(i: usize) -> Self {
        Expression::Var(i)
    }

    pub fn constant(v: f64) -> Self {
        Expression::Const(v)
    }

    pub fn unary(op: UnaryOp, a: Expression) -> Self {
        Expression::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expression, b: Expression) -> Self {
        Expression::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn pow(self, e: Expression) -> Self {
        Expression::binary(BinaryOp::Pow, self, e)
    }

    pub fn powi(self, k: i32) -> Self {
        self.pow(Expression::Const(k as f64))
    }

    pub fn apply(self, op: UnaryOp) -> Self {
        Expression::unary(op, self)
    }

    pub fn modulo(self, b: Expression) -> Self {
        Expression::binary(BinaryOp::Mod, self, b)
    }

    pub fn centropy(self, a: Expression) -> Self {
        Expression::binary(BinaryOp::Centropy, self, a)
    }

    /// Sorted, deduplicated variable indices.
    pub fn vars(&self) -> Vec<usize> {
        let mut v = Vec::new();
        self.visit_vars(&mut |i| v.push(i));
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Variable occurrences in left-to-right order, repeats included.
    pub fn occurrences(&self) -> Vec<usize> {
        let mut v = Vec::new();
        self.visit_vars(&mut |i| v.push(i));
        v
    }

    fn visit_vars(&self, f: &mut impl FnMut(usize)) {
        match self {
            Expression::Const(_) => {}
            Expression::Var(i) => f(*i),
            Expression::Unary(_, a) => a.visit_vars(f),
            Expression::Binary(_, a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expression::Sum(xs) => xs.iter().for_each(|x| x.visit_vars(f)),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.occurrences().is_empty()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, DomainError> {
        Ok(match self {
            Expression::Const(c) => *c,
            Expression::Var(i) => x[*i],
            Expression::Sum(xs) => {
                let mut s = 0.0;
                for e in xs {
                    s += e.evaluate(x)?;
                }
                s
            }
            Expression::Unary(op, a) => {
                let v = a.evaluate(x)?;
                eval_unary(*op, v).ok_or_else(|| DomainError::at(self, unary_reason(*op)))?
            }
            Expression::Binary(op, a, b) => {
                let (u, v) = (a.evaluate(x)?, b.evaluate(x)?);
                eval_binary(*op, u, v).ok_or_else(|| DomainError::at(self, binary_reason(*op)))?
            }
        })
    }

    /// Affine form `Σ coeffs·x + constant` when the expression is affine.
    pub fn affine(&self) -> Option<(Vec<(usize, f64)>, f64)> {
        let mut coeffs = Vec::new();
        let mut constant = 0.0;
        if !self.collect_affine(1.0, &mut coeffs, &mut constant) {
            return None;
        }
        coeffs.sort_by_key(|p| p.0);
        let mut merged: Vec<(usize, f64)> = Vec::new();
        for (i, c) in coeffs {
            match merged.last_mut() {
                Some((j, d)) if *j == i => *d += c,
                _ => merged.push((i, c)),
            }
        }
        Some((merged, constant))
    }

    fn collect_affine(&self, scale: f64, out: &mut Vec<(usize, f64)>, constant: &mut f64) -> bool {
        match self {
            Expression::Const(c) => {
                *constant += scale * c;
                true
            }
            Expression::Var(i) => {
                out.push((*i, scale));
                true
            }
            Expression::Sum(xs) => xs.iter().all(|x| x.collect_affine(scale, out, constant)),
            Expression::Unary(UnaryOp::Neg, a) => a.collect_affine(-scale, out, constant),
            Expression::Binary(BinaryOp::Add, a, b) => {
                a.collect_affine(scale, out, constant) && b.collect_affine(scale, out, constant)
            }
            Expression::Binary(BinaryOp::Sub, a, b) => {
                a.collect_affine(scale, out, constant) && b.collect_affine(-scale, out, constant)
            }
            Expression::Binary(BinaryOp::Mul, a, b) => match (a.as_ref(), b.as_ref()) {
                (Expression::Const(c), e) | (e, Expression::Const(c)) => e.collect_affine(scale * c, out, constant),
                _ => false,
            },
            Expression::Binary(BinaryOp::Div, a, b) => match b.as_ref() {
                Expression::Const(c) if *c != 0.0 => a.collect_affine(scale / c, out, constant),
                _ => false,
            },
            _ => false,
        }
    }

    /// Rename every variable through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(usize) -> usize) -> Expression {
        match self {
            Expression::Const(c) => Expression::Const(*c),
            Expression::Var(i) => Expression::Var(f(*i)),
            Expression::Unary(op, a) => Expression::unary(*op, a.map_vars(f)),
            Expression::Binary(op, a, b) => {
                let a = a.map_vars(f);
                let b = b.map_vars(f);
                Expression::binary(*op, a, b)
            }
            Expression::Sum(xs) => Expression::Sum(xs.iter().map(|x| x.map_vars(f)).collect()),
        }
    }

    /// Print with caller-supplied variable names.
    pub fn display_with<'a>(&'a self, names: &'a dyn Fn(usize) -> String) -> impl fmt::Display + 'a {
        Named { e: self, names }
    }
}

fn unary_reason(op: UnaryOp) -> &'static str {
    match op {
        UnaryOp::Log => "logarithm of a nonpositive value",
        UnaryOp::Sqrt => "square root of a negative value",
        UnaryOp::Gamma => "gamma at a nonpositive integer",
        _ => "undefined value",
    }
}

fn binary_reason(op: BinaryOp) -> &'static str {
    match op {
        BinaryOp::Div => "division by zero",
        BinaryOp::Mod => "mod by zero",
        BinaryOp::Pow => "power undefined for this base and exponent",
        BinaryOp::Centropy => "cross-entropy needs x >= 0 and a > 0",
        _ => "undefined value",
    }
}

pub(crate) fn eval_unary(op: UnaryOp, v: f64) -> Option<f64> {
    Some(match op {
        UnaryOp::Neg => -v,
        UnaryOp::Abs => v.abs(),
        UnaryOp::Exp => v.exp(),
        UnaryOp::Log => {
            if v <= 0.0 {
                return None;
            }
            v.ln()
        }
        UnaryOp::Sqrt => {
            if v < 0.0 {
                return None;
            }
            v.sqrt()
        }
        UnaryOp::Sin => v.sin(),
        UnaryOp::Cos => v.cos(),
        UnaryOp::Tan => v.tan(),
        UnaryOp::Arctan => v.atan(),
        UnaryOp::Tanh => v.tanh(),
        UnaryOp::Erf => special::erf(v),
        UnaryOp::Gamma => special::gamma(v)?,
        UnaryOp::L0 => {
            if v == 0.0 {
                0.0
            } else {
                1.0
            }
        }
        UnaryOp::Floor => v.floor(),
    })
}

pub(crate) fn eval_binary(op: BinaryOp, a: f64, b: f64) -> Option<f64> {
    Some(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => {
            if b == 0.0 {
                return None;
            }
            a / b
        }
        BinaryOp::Pow => pow(a, b)?,
        BinaryOp::Mod => {
            if b == 0.0 {
                return None;
            }
            let r = a - b * (a / b).floor();
            // Guard the wrap when rounding lands exactly on b.
            if (b > 0.0 && r >= b) || (b < 0.0 && r <= b) {
                0.0
            } else {
                r
            }
        }
        BinaryOp::Centropy => {
            if a < 0.0 || b <= 0.0 {
                return None;
            }
            if a == 0.0 {
                0.0
            } else {
                a * (a / b).ln()
            }
        }
    })
}

pub(crate) fn integral_exponent(e: f64) -> Option<i32> {
    (e == e.trunc() && e.abs() < 1e9).then_some(e as i32)
}

fn pow(a: f64, b: f64) -> Option<f64> {
    if let Some(k) = integral_exponent(b) {
        if a == 0.0 && k < 0 {
            return None;
        }
        return Some(a.powi(k));
    }
    if a < 0.0 || (a == 0.0 && b < 0.0) {
        return None;
    }
    Some(a.powf(b))
}

fn fmt_num(v: f64) -> String {
    let a = v.abs();
    let s = if a != 0.0 && !(1e-4..1e16).contains(&a) { format!("{v:e}") } else { format!("{v}") };
    if v < 0.0 {
        format!("({s})")
    } else {
        s
    }
}

struct Named<'a> {
    e: &'a Expression,
    names: &'a dyn Fn(usize) -> String,
}

impl Named<'_> {
    fn sub<'b>(&'b self, e: &'b Expression) -> Named<'b> {
        Named { e, names: self.names }
    }
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.e {
            Expression::Const(c) => {
                if *c == PI {
                    write!(f, "pi")
                } else {
                    write!(f, "{}", fmt_num(*c))
                }
            }
            Expression::Var(i) => write!(f, "{}", (self.names)(*i)),
            Expression::Unary(UnaryOp::Neg, a) => write!(f, "(-{})", self.sub(a)),
            Expression::Unary(op, a) => write!(f, "{}({})", op.name(), self.sub(a)),
            Expression::Binary(op, a, b) => {
                let (a, b) = (self.sub(a), self.sub(b));
                match op {
                    BinaryOp::Add => write!(f, "({a} + {b})"),
                    BinaryOp::Sub => write!(f, "({a} - {b})"),
                    BinaryOp::Mul => write!(f, "({a} * {b})"),
                    BinaryOp::Div => write!(f, "({a} / {b})"),
                    BinaryOp::Pow => write!(f, "({a} ^ {b})"),
                    BinaryOp::Mod => write!(f, "mod({a}, {b})"),
                    BinaryOp::Centropy => write!(f, "centropy({a}, {b})"),
                }
            }
            Expression::Sum(xs) => {
                write!(f, "(")?;
                for (k, x) in xs.iter().enumerate() {
                    if k > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{}", self.sub(x))?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |i: usize| format!("x{}", i + 1);
        write!(f, "{}", Named { e: self, names: &names })
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl ops::$trait for Expression {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::binary($op, self, rhs)
            }
        }
        impl ops::$trait<f64> for Expression {
            type Output = Expression;
            fn $method(self, rhs: f64) -> Expression {
                Expression::binary($op, self, Expression::Const(rhs))
            }
        }
        impl ops::$trait<Expression> for f64 {
            type Output = Expression;
            fn $method(self, rhs: Expression) -> Expression {
                Expression::binary($op, Expression::Const(self), rhs)
            }
        }
    };
}

binop!(Add, add, BinaryOp::Add);
binop!(Sub, sub, BinaryOp::Sub);
binop!(Mul, mul, BinaryOp::Mul);
binop!(Div, div, BinaryOp::Div);

impl ops::Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::unary(UnaryOp::Neg, self)
    }
}

/// Result of splitting an expression into additive terms.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub terms: Vec<Term>,
    pub constant: f64,
}

/// Flatten the top-level additive structure of `e` into terms.
///
/// Constant factors distribute over sums; products of non-constant factors
/// stay whole. Variable-free parts fold into `constant`.
pub fn decompose(e: &Expression) -> Decomposition {
    let mut parts = Vec::new();
    let mut constant = 0.0;
    collect_terms(e, 1.0, &mut parts, &mut constant);
    let terms = parts.into_iter().map(|p| Term::new(p).expect("collected terms reference variables")).collect();
    Decomposition { terms, constant }
}

fn collect_terms(e: &Expression, scale: f64, out: &mut Vec<Expression>, constant: &mut f64) {
    match e {
        Expression::Const(c) => *constant += scale * c,
        Expression::Sum(xs) => xs.iter().for_each(|x| collect_terms(x, scale, out, constant)),
        Expression::Binary(BinaryOp::Add, a, b) => {
            collect_terms(a, scale, out, constant);
            collect_terms(b, scale, out, constant);
        }
        Expression::Binary(BinaryOp::Sub, a, b) => {
            collect_terms(a, scale, out, constant);
            collect_terms(b, -scale, out, constant);
        }
        Expression::Unary(UnaryOp::Neg, a) => collect_terms(a, -scale, out, constant),
        Expression::Binary(BinaryOp::Mul, a, b) if matches!(**a, Expression::Const(_)) => {
            let Expression::Const(c) = **a else { unreachable!() };
            collect_terms(b, scale * c, out, constant)
        }
        Expression::Binary(BinaryOp::Mul, a, b) if matches!(**b, Expression::Const(_)) => {
            let Expression::Const(c) = **b else { unreachable!() };
            collect_terms(a, scale * c, out, constant)
        }
        Expression::Binary(BinaryOp::Div, a, b) if matches!(**b, Expression::Const(c) if c != 0.0) => {
            let Expression::Const(c) = **b else { unreachable!() };
            collect_terms(a, scale / c, out, constant)
        }
        _ if e.is_constant() => {
            *constant += scale * e.evaluate(&[]).unwrap_or(f64::NAN);
        }
        _ if scale == 0.0 => {}
        _ => out.push(if scale == 1.0 {
            e.clone()
        } else if scale == -1.0 {
            -e.clone()
        } else {
            Expression::Const(scale) * e.clone()
        }),
    }
}

/// A term with one fresh variable per syntactic occurrence.
#[derive(Clone, Debug, PartialEq)]
pub struct ReindexedTerm {
    /// Expression over `y_0..y_{p-1}`.
    pub expr: Expression,
    /// `map[j]` is the original variable behind `y_j`.
    pub map: Vec<usize>,
    /// Direction of each `y_j` over the box the term was reindexed on.
    pub directions: Vec<Monotonicity>,
}

impl ReindexedTerm {
    /// Box over the y-variables induced by a box over the originals.
    pub fn lift_box(&self, bx: &[crate::Interval]) -> Vec<crate::Interval> {
        self.map.iter().map(|&i| bx[i]).collect()
    }

    /// y-point that substitutes each original coordinate.
    pub fn lift_point(&self, x: &[f64]) -> Vec<f64> {
        self.map.iter().map(|&i| x[i]).collect()
    }
}

/// Give each variable occurrence of `t` its own index; directions are taken
/// over the box `bx` (indexed by original variable).
pub fn reindex(t: &Term, bx: &[crate::Interval]) -> ReindexedTerm {
    let mut map = Vec::new();
    let expr = t.expr.map_vars(&mut |i| {
        map.push(i);
        map.len() - 1
    });
    let ybox: Vec<_> = map.iter().map(|&i| bx[i]).collect();
    let dirs = analyze_monotonicity(&expr, &ybox);
    let directions = (0..map.len())
        .map(|j| dirs.iter().find(|(v, _)| *v == j).map_or(Monotonicity::Unknown, |p| p.1))
        .collect();
    ReindexedTerm { expr, map, directions }
}
