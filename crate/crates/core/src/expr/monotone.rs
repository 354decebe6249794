//! Syntactic sign propagation for per-variable monotonicity.

use std::f64::consts::{E, FRAC_PI_2, PI};

use super::{integral_exponent, BinaryOp, Expression, UnaryOp};
use crate::enclosure;
use crate::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    Unknown,
}

/// Certified directions; both set means the variable has no effect.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Dir {
    inc: bool,
    dec: bool,
}

const INC: Dir = Dir { inc: true, dec: false };
const DEC: Dir = Dir { inc: false, dec: true };
const CONST: Dir = Dir { inc: true, dec: true };
const UNKNOWN: Dir = Dir { inc: false, dec: false };

impl Dir {
    fn flip(self) -> Dir {
        Dir { inc: self.dec, dec: self.inc }
    }

    /// Direction of `f(g(v))` given `f`'s direction on `g`'s range.
    fn through(self, f: Dir) -> Dir {
        if self == CONST || f == CONST {
            return CONST;
        }
        Dir { inc: (f.inc && self.inc) || (f.dec && self.dec), dec: (f.inc && self.dec) || (f.dec && self.inc) }
    }

    /// Direction of `s·g(v)` for a factor `s` independent of `v`.
    fn scaled(self, s: Interval) -> Dir {
        if self == CONST || (s.lo == 0.0 && s.hi == 0.0) {
            CONST
        } else if s.lo >= 0.0 {
            self
        } else if s.hi <= 0.0 {
            self.flip()
        } else {
            UNKNOWN
        }
    }

    fn to_public(self) -> Monotonicity {
        if self.inc {
            Monotonicity::Nondecreasing
        } else if self.dec {
            Monotonicity::Nonincreasing
        } else {
            Monotonicity::Unknown
        }
    }
}

type Dirs = Vec<(usize, Dir)>;

fn map(d: Dirs, f: impl Fn(Dir) -> Dir) -> Dirs {
    d.into_iter().map(|(v, x)| (v, f(x))).collect()
}

/// Join the direction lists of two summands; shared variables keep only the
/// directions both sides certify.
fn join_sum(a: Dirs, b: Dirs) -> Dirs {
    let mut out = a;
    for (v, d) in b {
        match out.iter_mut().find(|(w, _)| *w == v) {
            Some((_, e)) => *e = Dir { inc: e.inc && d.inc, dec: e.dec && d.dec },
            None => out.push((v, d)),
        }
    }
    out
}

/// Join for non-additive operators: a variable on both sides is unknown.
fn join_other(a: Dirs, b: Dirs) -> Dirs {
    let mut out = a;
    for (v, d) in b {
        match out.iter_mut().find(|(w, _)| *w == v) {
            Some((_, e)) => {
                if !(*e == CONST && d == CONST) {
                    *e = UNKNOWN;
                }
            }
            None => out.push((v, d)),
        }
    }
    out
}

fn shared(a: &Dirs, b: &Dirs) -> Vec<usize> {
    a.iter().filter(|(v, _)| b.iter().any(|(w, _)| w == v)).map(|p| p.0).collect()
}

/// Direction of a unary primitive over an argument range.
fn unary_dir(op: UnaryOp, x: Interval) -> Dir {
    let within = |lo: f64, hi: f64, period: f64| {
        // Is x inside [lo + k·period, hi + k·period] for some k?
        let k = ((x.lo - lo) / period).floor();
        x.hi <= hi + k * period && x.lo >= lo + k * period
    };
    match op {
        UnaryOp::Neg => DEC,
        UnaryOp::Exp | UnaryOp::Log | UnaryOp::Sqrt | UnaryOp::Arctan | UnaryOp::Tanh | UnaryOp::Erf => INC,
        UnaryOp::Floor => INC,
        UnaryOp::Tan => {
            if x.tan().is_some() {
                INC
            } else {
                UNKNOWN
            }
        }
        UnaryOp::Abs | UnaryOp::L0 => {
            if x.lo >= 0.0 {
                INC
            } else if x.hi <= 0.0 {
                DEC
            } else {
                UNKNOWN
            }
        }
        UnaryOp::Sin => {
            if within(-FRAC_PI_2, FRAC_PI_2, 2.0 * PI) {
                INC
            } else if within(FRAC_PI_2, 3.0 * FRAC_PI_2, 2.0 * PI) {
                DEC
            } else {
                UNKNOWN
            }
        }
        UnaryOp::Cos => {
            if within(-PI, 0.0, 2.0 * PI) {
                INC
            } else if within(0.0, PI, 2.0 * PI) {
                DEC
            } else {
                UNKNOWN
            }
        }
        UnaryOp::Gamma => {
            // gamma decreases up to its minimum near 1.4616 and increases after.
            if x.lo >= 1.4616321449683624 {
                INC
            } else if x.lo > 0.0 && x.hi <= 1.4616321449683622 {
                DEC
            } else {
                UNKNOWN
            }
        }
    }
}

fn power_dir(base: Interval, c: f64) -> Dir {
    if c == 0.0 {
        return CONST;
    }
    match integral_exponent(c) {
        Some(k) if k > 0 && k % 2 == 1 => INC,
        Some(k) if k > 0 => {
            if base.lo >= 0.0 {
                INC
            } else if base.hi <= 0.0 {
                DEC
            } else {
                UNKNOWN
            }
        }
        Some(k) => {
            if base.contains_zero() {
                UNKNOWN
            } else if k % 2 != 0 || base.lo > 0.0 {
                DEC
            } else {
                INC
            }
        }
        None => {
            if base.lo < 0.0 {
                UNKNOWN
            } else if c > 0.0 {
                INC
            } else {
                DEC
            }
        }
    }
}

fn walk(e: &Expression, bx: &[Interval]) -> Option<(Interval, Dirs)> {
    Some(match e {
        Expression::Const(c) => (Interval::point(*c), Vec::new()),
        Expression::Var(i) => (bx[*i], vec![(*i, INC)]),
        Expression::Sum(xs) => {
            let mut acc = Interval::point(0.0);
            let mut dirs = Vec::new();
            for x in xs {
                let (r, d) = walk(x, bx)?;
                acc = acc + r;
                dirs = join_sum(dirs, d);
            }
            (acc, dirs)
        }
        Expression::Unary(op, a) => {
            let (r, d) = walk(a, bx)?;
            let out = enclosure::unary_range(*op, r)?;
            let f = unary_dir(*op, r);
            (out, map(d, |x| x.through(f)))
        }
        Expression::Binary(op, a, b) => {
            let (ra, da) = walk(a, bx)?;
            let (rb, db) = walk(b, bx)?;
            let out = enclosure::binary_range(*op, ra, rb)?;
            let dirs = match op {
                BinaryOp::Add => join_sum(da, db),
                BinaryOp::Sub => join_sum(da, map(db, Dir::flip)),
                BinaryOp::Mul => {
                    let both = shared(&da, &db);
                    let mut d = join_other(map(da, |x| x.scaled(rb)), map(db, |x| x.scaled(ra)));
                    mark_unknown(&mut d, &both);
                    d
                }
                BinaryOp::Div => {
                    let both = shared(&da, &db);
                    let inv = rb.recip()?;
                    // a/b as a function of b: decreasing when a >= 0, increasing when a <= 0.
                    let hb = Dir::scaled(DEC, ra);
                    let mut d = join_other(map(da, |x| x.scaled(inv)), map(db, |x| x.through(hb)));
                    mark_unknown(&mut d, &both);
                    d
                }
                BinaryOp::Pow => {
                    let both = shared(&da, &db);
                    let mut d = if db.is_empty() {
                        map(da, |x| x.through(power_dir(ra, rb.lo)))
                    } else if da.is_empty() {
                        let k = ra.lo;
                        let f = if k > 1.0 {
                            INC
                        } else if k == 1.0 {
                            CONST
                        } else if k > 0.0 {
                            DEC
                        } else {
                            UNKNOWN
                        };
                        map(db, |x| x.through(f))
                    } else if ra.lo > 0.0 {
                        let fa = if rb.lo >= 0.0 {
                            INC
                        } else if rb.hi <= 0.0 {
                            DEC
                        } else {
                            UNKNOWN
                        };
                        let fb = if ra.lo >= 1.0 {
                            INC
                        } else if ra.hi <= 1.0 {
                            DEC
                        } else {
                            UNKNOWN
                        };
                        join_other(map(da, |x| x.through(fa)), map(db, |x| x.through(fb)))
                    } else {
                        map(join_other(da, db), |_| UNKNOWN)
                    };
                    mark_unknown(&mut d, &both);
                    d
                }
                BinaryOp::Mod => {
                    let both = shared(&da, &db);
                    let q = ra.div(&rb)?;
                    let mut d = if q.lo.floor() == q.hi.floor() {
                        let k = q.lo.floor();
                        join_other(da, map(db, |x| x.scaled(Interval::point(-k))))
                    } else {
                        map(join_other(da, db), |x| if x == CONST { CONST } else { UNKNOWN })
                    };
                    mark_unknown(&mut d, &both);
                    d
                }
                BinaryOp::Centropy => {
                    let both = shared(&da, &db);
                    let fx = if ra.lo >= rb.hi / E {
                        INC
                    } else if ra.hi <= rb.lo / E {
                        DEC
                    } else {
                        UNKNOWN
                    };
                    // -x·log(a) decreases in a for x >= 0.
                    let fa = if ra.hi == 0.0 { CONST } else { DEC };
                    let mut d = join_other(map(da, |x| x.through(fx)), map(db, |x| x.through(fa)));
                    mark_unknown(&mut d, &both);
                    d
                }
            };
            (out, dirs)
        }
    })
}

fn mark_unknown(d: &mut Dirs, vars: &[usize]) {
    for (v, x) in d.iter_mut() {
        if vars.contains(v) && *x != CONST {
            *x = UNKNOWN;
        }
    }
}

/// Per-variable direction of `e` over `bx`, for every variable of `e`, ascending.
///
/// Sound rather than complete: anything the rule table cannot certify is
/// `Unknown`, including domain failures of sub-expression ranges.
pub fn analyze_monotonicity(e: &Expression, bx: &[Interval]) -> Vec<(usize, Monotonicity)> {
    let vars = e.vars();
    let found = walk(e, bx);
    vars.into_iter()
        .map(|v| {
            let d = found
                .as_ref()
                .and_then(|(_, ds)| ds.iter().find(|(w, _)| *w == v).map(|p| p.1))
                .unwrap_or(UNKNOWN);
            (v, d.to_public())
        })
        .collect()
}
