//! Interval enclosures of expressions and of their partial derivatives.

use std::f64::consts::{E, PI};

use crate::expr::{integral_exponent, BinaryOp, DomainError, Expression, UnaryOp};
use crate::special;
use crate::Interval;

/// Natural interval extension of `e` over `bx` (indexed by variable).
pub fn range(e: &Expression, bx: &[Interval]) -> Result<Interval, DomainError> {
    match e {
        Expression::Const(c) => Ok(Interval::point(*c)),
        Expression::Var(i) => Ok(bx[*i]),
        Expression::Sum(xs) => {
            let mut acc = Interval::point(0.0);
            for x in xs {
                acc = acc + range(x, bx)?;
            }
            Ok(acc)
        }
        Expression::Unary(op, a) => {
            let x = range(a, bx)?;
            unary_range(*op, x).ok_or_else(|| DomainError::at(e, "argument range leaves the domain"))
        }
        Expression::Binary(op, a, b) => {
            let (u, v) = (range(a, bx)?, range(b, bx)?);
            binary_range(*op, u, v).ok_or_else(|| DomainError::at(e, "argument range leaves the domain"))
        }
    }
}

pub(crate) fn unary_range(op: UnaryOp, x: Interval) -> Option<Interval> {
    Some(match op {
        UnaryOp::Neg => -x,
        UnaryOp::Abs => x.abs(),
        UnaryOp::Exp => x.exp(),
        UnaryOp::Log => x.ln()?,
        UnaryOp::Sqrt => x.sqrt()?,
        UnaryOp::Sin => x.sin(),
        UnaryOp::Cos => x.cos(),
        UnaryOp::Tan => x.tan()?,
        UnaryOp::Arctan => x.atan(),
        UnaryOp::Tanh => x.tanh(),
        UnaryOp::Erf => Interval::new(special::erf(x.lo), special::erf(x.hi)),
        UnaryOp::Gamma => special::gamma_range(x)?,
        UnaryOp::L0 => {
            if x.lo == 0.0 && x.hi == 0.0 {
                Interval::point(0.0)
            } else if x.contains_zero() {
                Interval::new(0.0, 1.0)
            } else {
                Interval::point(1.0)
            }
        }
        UnaryOp::Floor => x.floor(),
    })
}

fn centropy_at(x: f64, a: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * (x / a).ln()
    }
}

pub(crate) fn binary_range(op: BinaryOp, a: Interval, b: Interval) -> Option<Interval> {
    Some(match op {
        BinaryOp::Add => a + b,
        BinaryOp::Sub => a - b,
        BinaryOp::Mul => a * b,
        BinaryOp::Div => a.div(&b)?,
        BinaryOp::Pow => pow_range(a, b)?,
        BinaryOp::Mod => {
            if b.contains_zero() {
                return None;
            }
            let wrap = if b.lo > 0.0 { Interval::new(0.0, b.hi) } else { Interval::new(b.lo, 0.0) };
            let q = a.div(&b)?;
            if q.lo.floor() == q.hi.floor() {
                let k = q.lo.floor();
                let r = a - Interval::point(k) * b;
                r.intersect(&wrap).unwrap_or(wrap)
            } else {
                wrap
            }
        }
        BinaryOp::Centropy => {
            if a.lo < 0.0 || b.lo <= 0.0 {
                return None;
            }
            let xs = (b.hi / E).clamp(a.lo, a.hi);
            let lo = centropy_at(xs, b.hi);
            let hi = centropy_at(a.lo, b.lo).max(centropy_at(a.hi, b.lo));
            Interval::new(lo, hi)
        }
    })
}

fn pow_range(a: Interval, b: Interval) -> Option<Interval> {
    if b.is_point() {
        return match integral_exponent(b.lo) {
            Some(k) => a.powi(k),
            None => a.powf(b.lo),
        };
    }
    if a.is_point() {
        let k = a.lo;
        if k > 0.0 {
            let (u, v) = (k.powf(b.lo), k.powf(b.hi));
            return Some(Interval::new(u.min(v), u.max(v)));
        }
        if k == 0.0 && b.lo > 0.0 {
            return Some(Interval::point(0.0));
        }
        return None;
    }
    if a.lo <= 0.0 {
        return None;
    }
    Some((b * a.ln()?).exp())
}

/// Value and gradient enclosure over a box.
#[derive(Clone, Debug)]
struct Dual {
    v: Interval,
    g: Vec<Interval>,
}

const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };

fn scale(g: &[Interval], s: Interval) -> Vec<Interval> {
    g.iter().map(|&gi| gi * s).collect()
}

fn combine(a: &[Interval], sa: Interval, b: &[Interval], sb: Interval) -> Vec<Interval> {
    a.iter().zip(b).map(|(&x, &y)| x * sa + y * sb).collect()
}

fn is_zero(g: &[Interval]) -> bool {
    g.iter().all(|x| *x == ZERO)
}

/// Enclosures of `∂e/∂x_v` over `bx` for each `v` in `vars`.
///
/// Jump discontinuities of monotone pieces appear as half-infinite slopes, so
/// a certified sign still implies monotonicity. `None` when no enclosure can
/// be formed.
pub fn gradient(e: &Expression, bx: &[Interval], vars: &[usize]) -> Option<Vec<Interval>> {
    let d = dual(e, bx, vars)?;
    if d.g.iter().any(|g| g.has_nan()) {
        return None;
    }
    Some(d.g)
}

fn dual(e: &Expression, bx: &[Interval], vars: &[usize]) -> Option<Dual> {
    let nv = vars.len();
    Some(match e {
        Expression::Const(c) => Dual { v: Interval::point(*c), g: vec![ZERO; nv] },
        Expression::Var(i) => {
            let mut g = vec![ZERO; nv];
            if let Ok(k) = vars.binary_search(i) {
                g[k] = Interval::point(1.0);
            }
            Dual { v: bx[*i], g }
        }
        Expression::Sum(xs) => {
            let mut acc = Dual { v: Interval::point(0.0), g: vec![ZERO; nv] };
            for x in xs {
                let d = dual(x, bx, vars)?;
                acc.v = acc.v + d.v;
                for k in 0..nv {
                    acc.g[k] = acc.g[k] + d.g[k];
                }
            }
            acc
        }
        Expression::Unary(op, a) => {
            let d = dual(a, bx, vars)?;
            let v = unary_range(*op, d.v)?;
            let g = if is_zero(&d.g) { d.g } else { scale(&d.g, unary_slope(*op, d.v, v)) };
            Dual { v, g }
        }
        Expression::Binary(op, a, b) => {
            let da = dual(a, bx, vars)?;
            let db = dual(b, bx, vars)?;
            let v = binary_range(*op, da.v, db.v)?;
            let g = binary_slope(*op, &da, &db, v)?;
            Dual { v, g }
        }
    })
}

fn unary_slope(op: UnaryOp, x: Interval, fx: Interval) -> Interval {
    let one = Interval::point(1.0);
    let pos_inf = Interval::new(0.0, f64::INFINITY);
    let neg_inf = Interval::new(f64::NEG_INFINITY, 0.0);
    match op {
        UnaryOp::Neg => Interval::point(-1.0),
        UnaryOp::Abs => {
            if x.lo >= 0.0 {
                one
            } else if x.hi <= 0.0 {
                -one
            } else {
                Interval::new(-1.0, 1.0)
            }
        }
        UnaryOp::Exp => fx,
        UnaryOp::Log => x.recip().unwrap_or(Interval::entire()),
        UnaryOp::Sqrt => {
            if x.lo <= 0.0 {
                Interval::new(0.5 / x.hi.sqrt(), f64::INFINITY)
            } else {
                Interval::new(0.5 / x.hi.sqrt(), 0.5 / x.lo.sqrt())
            }
        }
        UnaryOp::Sin => x.cos(),
        UnaryOp::Cos => -x.sin(),
        UnaryOp::Tan => one + fx.sqr(),
        UnaryOp::Arctan => (one + x.sqr()).recip().unwrap_or(Interval::entire()),
        UnaryOp::Tanh => {
            let t2 = fx.sqr();
            Interval::new((1.0 - t2.hi).max(0.0), 1.0 - t2.lo)
        }
        UnaryOp::Erf => Interval::point(2.0 / PI.sqrt()) * (-x.sqr()).exp(),
        UnaryOp::Gamma => {
            if x.lo <= 0.0 {
                return Interval::entire();
            }
            fx * Interval::new(special::digamma(x.lo), special::digamma(x.hi))
        }
        UnaryOp::L0 => {
            if !x.contains_zero() || (x.lo == 0.0 && x.hi == 0.0) {
                ZERO
            } else if x.lo == 0.0 {
                pos_inf
            } else if x.hi == 0.0 {
                neg_inf
            } else {
                Interval::entire()
            }
        }
        UnaryOp::Floor => {
            if x.lo.floor() == x.hi.floor() {
                ZERO
            } else {
                pos_inf
            }
        }
    }
}

fn binary_slope(op: BinaryOp, a: &Dual, b: &Dual, v: Interval) -> Option<Vec<Interval>> {
    let one = Interval::point(1.0);
    let (za, zb) = (is_zero(&a.g), is_zero(&b.g));
    Some(match op {
        BinaryOp::Add => combine(&a.g, one, &b.g, one),
        BinaryOp::Sub => combine(&a.g, one, &b.g, -one),
        BinaryOp::Mul => combine(&a.g, b.v, &b.g, a.v),
        BinaryOp::Div => {
            let rb = b.v.recip()?;
            combine(&a.g, rb, &b.g, -(a.v * rb.sqr()))
        }
        BinaryOp::Pow => {
            if zb {
                if za {
                    return Some(a.g.clone());
                }
                let c = b.v.lo;
                let sa = match integral_exponent(c) {
                    Some(k) => a.v.powi(k - 1).map(|p| Interval::point(c) * p),
                    None => a.v.powf(c - 1.0).map(|p| Interval::point(c) * p),
                };
                let sa = sa.unwrap_or(if c > 0.0 && a.v.lo >= 0.0 {
                    Interval::new(0.0, f64::INFINITY)
                } else {
                    Interval::entire()
                });
                scale(&a.g, sa)
            } else if za && a.v.is_point() && a.v.lo > 0.0 {
                scale(&b.g, v * Interval::point(a.v.lo.ln()))
            } else {
                let la = a.v.ln()?;
                let sa = v * b.v * a.v.recip()?;
                combine(&a.g, sa, &b.g, v * la)
            }
        }
        BinaryOp::Mod => {
            let q = a.v.div(&b.v)?;
            if q.lo.floor() == q.hi.floor() {
                combine(&a.g, one, &b.g, Interval::point(-q.lo.floor()))
            } else if za && zb {
                a.g.clone()
            } else {
                vec![Interval::entire(); a.g.len()]
            }
        }
        BinaryOp::Centropy => {
            let lx = if a.v.lo <= 0.0 {
                Interval::new(f64::NEG_INFINITY, if a.v.hi > 0.0 { a.v.hi.ln() } else { f64::NEG_INFINITY })
            } else {
                a.v.ln()?
            };
            let sx = lx - b.v.ln()? + one;
            let sa = -(a.v * b.v.recip()?);
            combine(&a.g, sx, &b.g, sa)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expression {
        Expression::var(i)
    }

    #[test]
    fn ranges_of_examples() {
        let bx = [Interval::new(-1.0, 2.0)];
        assert_eq!(range(&x(0).powi(2), &bx).unwrap(), Interval::new(0.0, 4.0));
        let bx = [Interval::new(0.0, 2.0 * PI)];
        assert_eq!(range(&x(0).apply(UnaryOp::Sin), &bx).unwrap().lo, -1.0);
        let bx = [Interval::new(0.0, 1.0)];
        assert!(range(&x(0).apply(UnaryOp::Log), &bx).is_err());
    }

    #[test]
    fn centropy_minimum_at_stationary_point() {
        let e = x(0).centropy(Expression::Const(2.0));
        let r = range(&e, &[Interval::new(0.0, 3.0)]).unwrap();
        assert!((r.lo - (-2.0 / E)).abs() < 1e-15);
        assert!((r.hi - 3.0 * (1.5f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn mod_wrap_analysis() {
        let e = x(0).modulo(Expression::Const(PI));
        let r = range(&e, &[Interval::new(1.0, 2.0)]).unwrap();
        assert_eq!(r, Interval::new(1.0, 2.0));
        let r = range(&e, &[Interval::new(3.0, 4.0)]).unwrap();
        assert_eq!(r, Interval::new(0.0, PI));
    }

    #[test]
    fn gradient_of_product_with_jumps() {
        let e = x(0).apply(UnaryOp::Floor) * x(1);
        let g = gradient(&e, &[Interval::new(0.5, 2.5), Interval::new(1.0, 2.0)], &[0, 1]).unwrap();
        assert!(g[0].lo >= 0.0);
        assert!(g[1].lo >= 0.0);
    }

    #[test]
    fn gradient_sign_of_x_exp_neg_x_on_upper_piece() {
        let e = x(0) * (-x(0)).apply(UnaryOp::Exp);
        let g = gradient(&e, &[Interval::new(1.75, 2.0)], &[0]).unwrap();
        assert!(g[0].hi < 0.0);
    }
}
