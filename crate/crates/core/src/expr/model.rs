use std::fmt::Write as _;

use thiserror::Error;

use super::{decompose, DomainError, Expression};
use crate::enclosure;
use crate::Interval;

/// One additive piece `g_k(x_H)` of a constraint.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub expr: Expression,
    /// Variables referenced by `expr`, ascending.
    pub vars: Vec<usize>,
}

impl Term {
    /// `None` for variable-free expressions, which belong in the right-hand side.
    pub fn new(expr: Expression) -> Option<Self> {
        let vars = expr.vars();
        (!vars.is_empty()).then_some(Term { expr, vars })
    }

    pub fn h_max(&self) -> usize {
        *self.vars.last().unwrap()
    }

    pub fn h_min(&self) -> usize {
        self.vars[0]
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, DomainError> {
        self.expr.evaluate(x)
    }
}

/// `Σ terms ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSpec {
    pub terms: Vec<Term>,
    pub rhs: f64,
}

impl ConstraintSpec {
    /// Build `e ≤ rhs`, moving constants of `e` to the right.
    pub fn from_expr(e: &Expression, rhs: f64) -> Self {
        let d = decompose(e);
        ConstraintSpec { terms: d.terms, rhs: rhs - d.constant }
    }

    /// Union of term variables, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.iter().flat_map(|t| t.vars.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn lhs(&self, x: &[f64]) -> Result<f64, DomainError> {
        let mut s = 0.0;
        for t in &self.terms {
            s += t.evaluate(x)?;
        }
        Ok(s)
    }

    /// `g(x) - b`; positive means violated.
    pub fn violation(&self, x: &[f64]) -> Result<f64, DomainError> {
        Ok(self.lhs(x)? - self.rhs)
    }

    /// Dense coefficients when every term is linear.
    pub fn linear_coeffs(&self, n: usize) -> Option<Vec<f64>> {
        let mut c = vec![0.0; n];
        for t in &self.terms {
            let (coeffs, k) = t.expr.affine()?;
            if k != 0.0 {
                return None;
            }
            for (i, v) in coeffs {
                c[i] += v;
            }
        }
        Some(c)
    }

    pub fn is_linear(&self) -> bool {
        self.terms.iter().all(|t| t.expr.affine().is_some_and(|(_, k)| k == 0.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

/// A bounded MINLP `max c·x + offset` over `Σ g_k ≤ b_k` and a box.
///
/// Minimization sources are stored negated; `sense` remembers how to report.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    pub sense: Sense,
    pub constraints: Vec<ConstraintSpec>,
    pub known_primal: Option<f64>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unknown function `{name}` at {line}:{col}")]
    UnknownFunction { name: String, line: usize, col: usize },
    #[error("unknown variable `{name}` at {line}:{col}")]
    UnknownVariable { name: String, line: usize, col: usize },
    #[error("variable `{0}` has no finite bounds")]
    UnboundedVariable(String),
    #[error("integer variable `{0}` has a fractional bound")]
    FractionalIntegerBound(String),
    #[error("variable `{0}` has lower bound above upper bound")]
    EmptyDomain(String),
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("objective range is unbounded over the box")]
    UnboundedObjective,
    #[error("constraint right-hand side is not finite")]
    NonFiniteRhs,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl Default for Model {
    fn default() -> Self {
        Model {
            names: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            integer: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
            sense: Sense::Max,
            constraints: Vec::new(),
            known_primal: None,
        }
    }
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn add_var(&mut self, name: &str, lo: f64, hi: f64, integer: bool) -> Result<usize, ModelError> {
        if self.names.iter().any(|n| n == name) {
            return Err(ModelError::DuplicateVariable(name.into()));
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(ModelError::UnboundedVariable(name.into()));
        }
        if lo > hi {
            return Err(ModelError::EmptyDomain(name.into()));
        }
        if integer && (lo != lo.floor() || hi != hi.floor()) {
            return Err(ModelError::FractionalIntegerBound(name.into()));
        }
        self.names.push(name.into());
        self.lower.push(lo);
        self.upper.push(hi);
        self.integer.push(integer);
        self.objective.push(0.0);
        Ok(self.names.len() - 1)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Add `e ≤ rhs`.
    pub fn add_le(&mut self, e: &Expression, rhs: f64) -> Result<(), ModelError> {
        if !rhs.is_finite() {
            return Err(ModelError::NonFiniteRhs);
        }
        // Variable-free parts fold into the right-hand side.
        let c = ConstraintSpec::from_expr(e, rhs);
        if !c.rhs.is_finite() {
            return Err(ModelError::NonFiniteRhs);
        }
        self.constraints.push(c);
        Ok(())
    }

    /// Add `e ≥ rhs` as `-e ≤ -rhs`.
    pub fn add_ge(&mut self, e: &Expression, rhs: f64) -> Result<(), ModelError> {
        self.add_le(&-e.clone(), -rhs)
    }

    /// Add `e = rhs` as the pair `e ≤ rhs`, `-e ≤ -rhs`.
    pub fn add_eq(&mut self, e: &Expression, rhs: f64) -> Result<(), ModelError> {
        self.add_le(e, rhs)?;
        self.add_ge(e, rhs)
    }

    /// Set the objective; nonlinear objectives go through an epigraph variable
    /// bounded by the objective's interval range over the box.
    pub fn set_objective(&mut self, e: &Expression, sense: Sense) -> Result<(), ModelError> {
        let flip = if sense == Sense::Max { 1.0 } else { -1.0 };
        self.sense = sense;
        self.objective = vec![0.0; self.n()];
        if let Some((coeffs, k)) = e.affine() {
            for (i, c) in coeffs {
                self.objective[i] += flip * c;
            }
            self.objective_offset = flip * k;
            return Ok(());
        }
        let range = enclosure::range(e, &self.domain())?;
        if !range.lo.is_finite() || !range.hi.is_finite() {
            return Err(ModelError::UnboundedObjective);
        }
        let mut name = String::from("obj");
        while self.var_index(&name).is_some() {
            name.push('_');
        }
        let z = self.add_var(&name, range.lo, range.hi, false)?;
        let ez = Expression::var(z);
        self.add_le(&(ez.clone() - e.clone()), 0.0)?;
        self.add_le(&(e.clone() - ez), 0.0)?;
        self.objective[z] = flip;
        self.objective_offset = 0.0;
        Ok(())
    }

    /// Variable bounds as intervals.
    pub fn domain(&self) -> Vec<Interval> {
        self.lower.iter().zip(&self.upper).map(|(&l, &h)| Interval::new(l, h)).collect()
    }

    /// Internal (maximization) objective value.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    /// Convert an internal objective value to the source's sense.
    pub fn reported(&self, v: f64) -> f64 {
        match self.sense {
            Sense::Max => v,
            Sense::Min => -v,
        }
    }

    /// Largest violation over constraints and bounds; integrality is checked by the caller.
    pub fn max_violation(&self, x: &[f64]) -> Result<f64, DomainError> {
        let mut worst: f64 = 0.0;
        for (i, v) in x.iter().enumerate() {
            worst = worst.max(self.lower[i] - v).max(v - self.upper[i]);
        }
        for c in &self.constraints {
            worst = worst.max(c.violation(x)?);
        }
        Ok(worst)
    }

    /// True when `x` is within bounds, integral where required, and satisfies
    /// every constraint within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        let integral = x.iter().zip(&self.integer).all(|(v, &int)| !int || v.fract() == 0.0);
        integral && self.max_violation(x).is_ok_and(|v| v <= tol)
    }

    /// Instance source that parses back to this model.
    pub fn to_source(&self) -> String {
        let names = |i: usize| self.names[i].clone();
        let mut s = String::new();
        for i in 0..self.n() {
            let int = if self.integer[i] { " integer" } else { "" };
            let _ = writeln!(s, "var {} in [{:?}, {:?}]{};", self.names[i], self.lower[i], self.upper[i], int);
        }
        for c in &self.constraints {
            let lhs: Vec<String> = c.terms.iter().map(|t| t.expr.display_with(&names).to_string()).collect();
            let lhs = if lhs.is_empty() { "0".to_string() } else { lhs.join(" + ") };
            let _ = writeln!(s, "con {lhs} <= {:?};", c.rhs);
        }
        let flip = if self.sense == Sense::Max { 1.0 } else { -1.0 };
        let mut obj: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| format!("{:?} * {}", flip * c, self.names[i]))
            .collect();
        if self.objective_offset != 0.0 || obj.is_empty() {
            obj.push(format!("{:?}", flip * self.objective_offset));
        }
        let kw = if self.sense == Sense::Max { "max" } else { "min" };
        let _ = writeln!(s, "{kw} {};", obj.join(" + "));
        if let Some(p) = self.known_primal {
            let _ = writeln!(s, "primal {p:?};");
        }
        s
    }
}
