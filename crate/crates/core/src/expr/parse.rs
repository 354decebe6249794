//! Reader for the line-oriented instance format.
//!
//! ```text
//! # comment
//! var x1 in [0, 2];
//! var n in [0, 5] integer;
//! con tanh(x1) + x1 * exp(-x1) <= 1;
//! max x1 + 2 * n;
//! ```

use std::f64::consts::PI;

use super::{eval_binary, eval_unary, BinaryOp, Expression, Model, ModelError, Sense, UnaryOp};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(&'static str),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ModelError> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Ident(word), line: line_no, col });
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| ModelError::Syntax {
                    line: line_no,
                    col,
                    message: format!("malformed number `{text}`"),
                })?;
                out.push(Token { tok: Tok::Num(v), line: line_no, col });
                continue;
            }
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let sym = match two.as_str() {
                "<=" => Some("<="),
                ">=" => Some(">="),
                "==" => Some("=="),
                _ => None,
            };
            if let Some(s) = sym {
                out.push(Token { tok: Tok::Sym(s), line: line_no, col });
                i += 2;
                continue;
            }
            let s = match c {
                '+' => "+",
                '-' => "-",
                '*' => "*",
                '/' => "/",
                '^' => "^",
                '(' => "(",
                ')' => ")",
                '[' => "[",
                ']' => "]",
                ',' => ",",
                ';' => ";",
                '=' => "==",
                _ => {
                    return Err(ModelError::Syntax { line: line_no, col, message: format!("unexpected character `{c}`") });
                }
            };
            out.push(Token { tok: Tok::Sym(s), line: line_no, col });
            i += 1;
        }
    }
    let (line, col) = out.last().map_or((1, 1), |t| (t.line, t.col + 1));
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    model: Model,
    objective: Option<(Expression, Sense)>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, message: impl Into<String>) -> Result<T, ModelError> {
        Err(ModelError::Syntax { line: t.line, col: t.col, message: message.into() })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ModelError> {
        let t = self.next();
        match &t.tok {
            Tok::Sym(x) if *x == s => Ok(()),
            _ => self.err(&t, format!("expected `{s}`")),
        }
    }

    /// A statement ends at `;` or at the end of input.
    fn end_stmt(&mut self) -> Result<(), ModelError> {
        if matches!(self.peek().tok, Tok::End) {
            return Ok(());
        }
        self.expect_sym(";")
    }

    fn ident(&mut self) -> Result<(String, Token), ModelError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t)),
            _ => self.err(&t, "expected a name"),
        }
    }

    fn signed_number(&mut self) -> Result<f64, ModelError> {
        let mut sign = 1.0;
        while self.is_sym("-") || self.is_sym("+") {
            if self.is_sym("-") {
                sign = -sign;
            }
            self.next();
        }
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(sign * v),
            Tok::Ident(s) if s == "pi" => Ok(sign * PI),
            _ => self.err(&t, "expected a number"),
        }
    }

    fn program(&mut self) -> Result<(), ModelError> {
        loop {
            let t = self.next();
            match &t.tok {
                Tok::End => return Ok(()),
                Tok::Sym(";") => continue,
                Tok::Ident(kw) if kw == "var" => self.var_stmt()?,
                Tok::Ident(kw) if kw == "con" => self.con_stmt()?,
                Tok::Ident(kw) if kw == "max" || kw == "min" => {
                    let sense = if kw == "max" { Sense::Max } else { Sense::Min };
                    let e = self.expr()?;
                    self.end_stmt()?;
                    if self.objective.is_some() {
                        return self.err(&t, "objective given twice");
                    }
                    self.objective = Some((e, sense));
                }
                Tok::Ident(kw) if kw == "primal" => {
                    let v = self.signed_number()?;
                    self.end_stmt()?;
                    self.model.known_primal = Some(v);
                }
                _ => return self.err(&t, "expected `var`, `con`, `max`, `min` or `primal`"),
            }
        }
    }

    fn var_stmt(&mut self) -> Result<(), ModelError> {
        let (name, _) = self.ident()?;
        let t = self.next();
        if !matches!(&t.tok, Tok::Ident(s) if s == "in") {
            return Err(ModelError::UnboundedVariable(name));
        }
        self.expect_sym("[")?;
        let lo = self.signed_number()?;
        self.expect_sym(",")?;
        let hi = self.signed_number()?;
        self.expect_sym("]")?;
        let mut integer = false;
        if let Tok::Ident(s) = &self.peek().tok {
            if s == "integer" {
                integer = true;
                self.next();
            }
        }
        self.end_stmt()?;
        self.model.add_var(&name, lo, hi, integer)?;
        Ok(())
    }

    fn con_stmt(&mut self) -> Result<(), ModelError> {
        let lhs = self.expr()?;
        let t = self.next();
        let rel = match &t.tok {
            Tok::Sym(s @ ("<=" | ">=" | "==")) => *s,
            _ => return self.err(&t, "expected `<=`, `>=` or `==`"),
        };
        let rhs = self.expr()?;
        self.end_stmt()?;
        // Move everything left; a constant right side stays as the bound.
        let (e, b) = match rhs {
            Expression::Const(c) => (lhs, c),
            r => (lhs - r, 0.0),
        };
        match rel {
            "<=" => self.model.add_le(&e, b),
            ">=" => self.model.add_ge(&e, b),
            _ => self.model.add_eq(&e, b),
        }
    }

    fn expr(&mut self) -> Result<Expression, ModelError> {
        let mut acc = self.product()?;
        loop {
            let op = if self.is_sym("+") {
                BinaryOp::Add
            } else if self.is_sym("-") {
                BinaryOp::Sub
            } else {
                return Ok(acc);
            };
            self.next();
            let rhs = self.product()?;
            acc = fold(Expression::binary(op, acc, rhs))?;
        }
    }

    fn product(&mut self) -> Result<Expression, ModelError> {
        let mut acc = self.unary()?;
        loop {
            let op = if self.is_sym("*") {
                BinaryOp::Mul
            } else if self.is_sym("/") {
                BinaryOp::Div
            } else {
                return Ok(acc);
            };
            self.next();
            let rhs = self.unary()?;
            acc = fold(Expression::binary(op, acc, rhs))?;
        }
    }

    fn unary(&mut self) -> Result<Expression, ModelError> {
        if self.is_sym("-") {
            self.next();
            let a = self.unary()?;
            return fold(Expression::unary(UnaryOp::Neg, a));
        }
        if self.is_sym("+") {
            self.next();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ModelError> {
        let base = self.primary()?;
        if self.is_sym("^") {
            self.next();
            let exp = self.unary()?;
            return fold(Expression::binary(BinaryOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expression, ModelError> {
        let t = self.next();
        match &t.tok {
            Tok::Num(v) => Ok(Expression::Const(*v)),
            Tok::Sym("(") => {
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.is_sym("(") {
                    self.next();
                    return self.call(name, &t);
                }
                if let Some(i) = self.model.var_index(name) {
                    return Ok(Expression::Var(i));
                }
                if name == "pi" {
                    return Ok(Expression::Const(PI));
                }
                Err(ModelError::UnknownVariable { name: name.clone(), line: t.line, col: t.col })
            }
            _ => self.err(&t, "expected an expression"),
        }
    }

    fn call(&mut self, name: &str, at: &Token) -> Result<Expression, ModelError> {
        let mut args = vec![self.expr()?];
        while self.is_sym(",") {
            self.next();
            args.push(self.expr()?);
        }
        self.expect_sym(")")?;
        let arity_err = |p: &Self, n: usize| p.err(at, format!("`{name}` takes {n} argument(s)"));
        if let Some(op) = UnaryOp::from_name(name) {
            if args.len() != 1 {
                return arity_err(self, 1);
            }
            return fold(Expression::unary(op, args.pop().unwrap()));
        }
        let op = match name {
            "mod" => BinaryOp::Mod,
            "centropy" => BinaryOp::Centropy,
            _ => {
                return Err(ModelError::UnknownFunction { name: name.into(), line: at.line, col: at.col });
            }
        };
        if args.len() != 2 {
            return arity_err(self, 2);
        }
        let b = args.pop().unwrap();
        let a = args.pop().unwrap();
        fold(Expression::binary(op, a, b))
    }
}

/// Collapse a node whose children are all constants.
fn fold(e: Expression) -> Result<Expression, ModelError> {
    let folded = match &e {
        Expression::Unary(op, a) => match **a {
            Expression::Const(v) => Some((eval_unary(*op, v), &e)),
            _ => None,
        },
        Expression::Binary(op, a, b) => match (&**a, &**b) {
            (Expression::Const(u), Expression::Const(v)) => Some((eval_binary(*op, *u, *v), &e)),
            _ => None,
        },
        _ => None,
    };
    match folded {
        None => Ok(e),
        Some((Some(v), _)) => Ok(Expression::Const(v)),
        Some((None, node)) => Err(node.evaluate(&[]).unwrap_err().into()),
    }
}

/// Parse an instance into a model.
pub fn parse(text: &str) -> Result<Model, ModelError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, model: Model::new(), objective: None };
    p.program()?;
    let Parser { mut model, objective, .. } = p;
    if let Some((e, sense)) = objective {
        model.set_objective(&e, sense)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_model() {
        let m = parse("var x1 in [0,2]; con tanh(x1) <= 1; max x1").unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.constraints.len(), 1);
        assert_eq!(m.objective, vec![1.0]);
    }

    #[test]
    fn equality_splits() {
        let m = parse("var x in [0,1];\ncon x^2 - x == 0;\nmax x;").unwrap();
        assert_eq!(m.constraints.len(), 2);
        let p = [0.5];
        let a = m.constraints[0].violation(&p).unwrap();
        let b = m.constraints[1].violation(&p).unwrap();
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn nonlinear_objective_gets_epigraph() {
        let m = parse("var x1 in [0,2]; max tanh(x1);").unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.objective, vec![0.0, 1.0]);
        assert_eq!(m.constraints.len(), 2);
        assert_eq!(m.lower[1], 0.0);
        assert!((m.upper[1] - 2f64.tanh()).abs() < 1e-15);
        let x = [1.0, 1f64.tanh()];
        assert!(m.constraints.iter().all(|c| c.violation(&x).unwrap().abs() < 1e-15));
    }

    #[test]
    fn min_is_negated() {
        let m = parse("var x in [0,1]; min 3*x - 1;").unwrap();
        assert_eq!(m.objective, vec![-3.0]);
        assert_eq!(m.objective_offset, 1.0);
        assert_eq!(m.sense, Sense::Min);
    }

    #[test]
    fn precedence_and_constants() {
        let m = parse("var x in [0,1]; con -x^2 + 2^3 * x <= 2*pi; max x;").unwrap();
        let c = &m.constraints[0];
        assert!((c.rhs - 2.0 * PI).abs() < 1e-15);
        assert!((c.lhs(&[0.5]).unwrap() - (-0.25 + 4.0)).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_positions() {
        match parse("var x in [0,1];\ncon x <= ;") {
            Err(ModelError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("var x in [0,1]; con foo(x) <= 1;"), Err(ModelError::UnknownFunction { .. })));
        assert!(matches!(parse("var x; max x;"), Err(ModelError::UnboundedVariable(_))));
        assert!(matches!(parse("var x in [0, 1.5] integer;"), Err(ModelError::FractionalIntegerBound(_))));
        assert!(matches!(parse("con y <= 1;"), Err(ModelError::UnknownVariable { .. })));
        assert!(matches!(parse("con log(0) <= 1;"), Err(ModelError::Domain(_))));
    }

    #[test]
    fn comments_and_integer_flags() {
        let m = parse("# header\nvar n in [0, 3] integer; # trailing\nmax n;").unwrap();
        assert_eq!(m.integer, vec![true]);
    }
}
