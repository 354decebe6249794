#![allow(dead_code)]

use ddminlp_core::dd::{build, make_partitions, Coalesce, CompiledConstraint, DecisionDiagram, MergePolicy, PartitionScheme, UNLIMITED};
use ddminlp_core::expr::{parse, BinaryOp, ConstraintSpec, Expression, Term, UnaryOp};
use ddminlp_core::Interval;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn x(i: usize) -> Expression {
    Expression::var(i)
}

pub fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi)
}

pub fn sample(r: &mut ChaCha8Rng, bx: &[Interval]) -> Vec<f64> {
    bx.iter().map(|b| if b.lo == b.hi { b.lo } else { r.gen_range(b.lo..=b.hi) }).collect()
}

/// A random sub-box of `bx`.
pub fn sub_box(r: &mut ChaCha8Rng, bx: &[Interval]) -> Vec<Interval> {
    bx.iter()
        .map(|b| {
            let u = r.gen_range(b.lo..=b.hi);
            let v = r.gen_range(b.lo..=b.hi);
            iv(u.min(v), u.max(v))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Paper examples.

pub fn example1_spec() -> ConstraintSpec {
    let g = x(0).apply(UnaryOp::Tanh) + x(1) * (-x(1)).apply(UnaryOp::Exp) + x(2).apply(UnaryOp::L0);
    ConstraintSpec::from_expr(&g, 1.0)
}

pub fn example1_dd(width: usize) -> DecisionDiagram {
    let bx = [iv(0.0, 2.0); 3];
    let p = make_partitions(&bx, &[false; 3], 2);
    build(&CompiledConstraint::new(&example1_spec(), &bx), &p, width, MergePolicy::G).unwrap()
}

pub fn example3_spec() -> ConstraintSpec {
    ConstraintSpec::from_expr(&(-x(0).powi(2) + x(1) - x(0) * x(2)), -1.0)
}

/// Example 3 and 4 diagrams use state-only coalescing, as the worked examples do.
/// `{0},{1},{2}` for x1, `{0},{1}` for x2, and the single cell `[0,1]` for x3.
pub fn example3_partitions() -> PartitionScheme {
    let pt = Interval::point;
    PartitionScheme { cells: vec![vec![pt(0.0), pt(1.0), pt(2.0)], vec![pt(0.0), pt(1.0)], vec![iv(0.0, 1.0)]] }
}

pub fn example3_dd(width: usize) -> DecisionDiagram {
    let p = example3_partitions();
    let cc = CompiledConstraint::new(&example3_spec(), &p.hull_box()).with_coalesce(Coalesce::State);
    build(&cc, &p, width, MergePolicy::G).unwrap()
}

// ---------------------------------------------------------------------------
// Convex hull of a finite point set in three dimensions, by brute force over
// point triples. Inequalities are scaled to unit max-norm.

#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub a: [f64; 3],
    pub b: f64,
}

impl Facet {
    fn normalized(a: [f64; 3], b: f64) -> Self {
        let s = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Facet { a: [a[0] / s, a[1] / s, a[2] / s], b: b / s }
    }

    pub fn new(a: [f64; 3], b: f64) -> Self {
        Self::normalized(a, b)
    }

    pub fn close(&self, o: &Facet, tol: f64) -> bool {
        (0..3).all(|i| (self.a[i] - o.a[i]).abs() <= tol) && (self.b - o.b).abs() <= tol
    }

    /// Single-coordinate facet.
    pub fn is_axis(&self) -> bool {
        self.a.iter().filter(|v| v.abs() > 1e-9).count() == 1
    }
}

pub fn hull_facets(points: &[Vec<f64>]) -> Vec<Facet> {
    let mut pts: Vec<[f64; 3]> = points.iter().map(|p| [p[0], p[1], p[2]]).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let sub = |a: [f64; 3], b: [f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let cross = |u: [f64; 3], v: [f64; 3]| [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let dot = |u: [f64; 3], v: [f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let mut out: Vec<Facet> = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let n = cross(sub(pts[j], pts[i]), sub(pts[k], pts[i]));
                if dot(n, n) < 1e-18 {
                    continue;
                }
                let b = dot(n, pts[i]);
                let (mut above, mut below) = (false, false);
                for p in &pts {
                    let s = dot(n, *p) - b;
                    above |= s > 1e-9;
                    below |= s < -1e-9;
                }
                let f = match (above, below) {
                    (false, _) => Facet::normalized(n, b),
                    (true, false) => Facet::normalized([-n[0], -n[1], -n[2]], -b),
                    _ => continue,
                };
                if !out.iter().any(|g| g.close(&f, 1e-9)) {
                    out.push(f);
                }
            }
        }
    }
    out
}

/// Compare a hull to `box ∩ {want}`: every non-axis facet is wanted, every
/// wanted inequality is a facet, and axis facets are box faces.
pub fn hull_matches(points: &[Vec<f64>], bx: &[Interval], want: &[Facet], tol: f64) -> Result<(), String> {
    let facets = hull_facets(points);
    for f in &facets {
        if f.is_axis() {
            let i = (0..3).find(|&i| f.a[i].abs() > 1e-9).unwrap();
            let face = if f.a[i] > 0.0 { bx[i].hi } else { -bx[i].lo };
            if (f.b - face).abs() > tol {
                return Err(format!("axis facet {f:?} is not a box face"));
            }
        } else if !want.iter().any(|w| w.close(f, tol)) {
            return Err(format!("unexpected facet {f:?}"));
        }
    }
    for w in want {
        if !facets.iter().any(|f| f.close(w, tol)) {
            return Err(format!("missing facet {w:?}; have {facets:?}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Term corpus covering every operator.

pub struct TermCase {
    pub name: &'static str,
    pub term: Term,
    pub bx: Vec<Interval>,
    /// Continuous on the box, so the convergence property applies.
    pub smooth: bool,
}

pub fn term_corpus() -> Vec<TermCase> {
    let u = |op| move |e: Expression| e.apply(op);
    let cases: Vec<(&'static str, Expression, Vec<Interval>, bool)> = vec![
        ("neg", -x(0), vec![iv(-1.0, 2.0)], true),
        ("abs", (x(0) - 0.5).apply(UnaryOp::Abs), vec![iv(-1.0, 2.0)], true),
        ("exp", u(UnaryOp::Exp)(x(0) * -1.5), vec![iv(-1.0, 2.0)], true),
        ("log", u(UnaryOp::Log)(x(0) + 0.5), vec![iv(0.1, 3.0)], true),
        ("sqrt", u(UnaryOp::Sqrt)(x(0)), vec![iv(0.0, 4.0)], true),
        ("sin", u(UnaryOp::Sin)(x(0) * 2.0), vec![iv(-3.0, 3.0)], true),
        ("cos", u(UnaryOp::Cos)(x(0)), vec![iv(-1.0, 5.0)], true),
        ("tan", u(UnaryOp::Tan)(x(0)), vec![iv(-1.2, 1.2)], true),
        ("arctan", u(UnaryOp::Arctan)(x(0) * 3.0), vec![iv(-2.0, 2.0)], true),
        ("tanh", u(UnaryOp::Tanh)(x(0)), vec![iv(-3.0, 3.0)], true),
        ("erf", u(UnaryOp::Erf)(x(0) - 0.3), vec![iv(-2.0, 2.0)], true),
        ("gamma", u(UnaryOp::Gamma)(x(0)), vec![iv(0.3, 4.0)], true),
        ("l0", u(UnaryOp::L0)(x(0)), vec![iv(-1.0, 1.0)], false),
        ("floor", u(UnaryOp::Floor)(x(0) * 1.5), vec![iv(-1.0, 2.0)], false),
        ("mod", x(0).modulo(Expression::constant(0.7)), vec![iv(-1.0, 2.0)], false),
        ("mod_pi", x(0).modulo(Expression::constant(std::f64::consts::PI)).apply(UnaryOp::Sin), vec![iv(0.0, 7.0)], false),
        ("centropy", x(0).centropy(Expression::constant(1.3)), vec![iv(0.05, 3.0)], true),
        ("x_exp_neg_x", x(0) * (-x(0)).apply(UnaryOp::Exp), vec![iv(0.0, 2.0)], true),
        ("pow_int", x(0).powi(3) - x(0) * 2.0, vec![iv(-2.0, 2.0)], true),
        ("pow_real", x(0).pow(Expression::constant(1.5)), vec![iv(0.0, 3.0)], true),
        ("bilinear", x(0) * x(1), vec![iv(-1.0, 2.0), iv(-2.0, 1.0)], true),
        ("fraction", x(0) / (x(1) + 1.0), vec![iv(0.0, 2.0), iv(0.0, 2.0)], true),
        ("var_pow", x(0).pow(Expression::constant(1.0) / x(1)), vec![iv(0.5, 2.0), iv(0.5, 2.0)], true),
        ("trilinear", x(0) * x(1) * x(2), vec![iv(-1.0, 1.0), iv(0.0, 2.0), iv(-1.0, 2.0)], true),
        ("erf_product", (-x(2) * 0.33889).apply(UnaryOp::Exp) * (x(0).apply(UnaryOp::Erf) * x(1)), vec![iv(0.0, 2.0), iv(-1.0, 2.0), iv(0.0, 2.0)], true),
        ("gamma_ratio", (x(1) * 0.5 + 1.0).apply(UnaryOp::Gamma) / (x(0) + 0.5).apply(UnaryOp::Gamma), vec![iv(0.5, 2.0), iv(0.5, 2.0)], true),
        ("reindexed", x(1).powi(4) * (-x(1)).apply(UnaryOp::Exp) / (x(0).apply(UnaryOp::Arctan) + 1.0), vec![iv(0.0, 2.0), iv(0.0, 2.0)], true),
        ("abs_mix", (x(0) - x(1)).apply(UnaryOp::Abs) + x(0).apply(UnaryOp::L0), vec![iv(-1.0, 1.0), iv(-1.0, 1.0)], false),
        ("tanh_layer", (x(0) * 1.5 - x(1) * 0.8 + 0.3).apply(UnaryOp::Tanh), vec![iv(-2.0, 2.0), iv(-2.0, 2.0)], true),
        ("sin_product", (x(0) * x(1)).apply(UnaryOp::Sin) + x(0).apply(UnaryOp::Cos), vec![iv(0.0, 2.0), iv(0.0, 2.0)], true),
        ("centropy_sum", x(0).centropy(Expression::constant(0.5)) + x(1).centropy(Expression::constant(1.5)), vec![iv(0.1, 2.0), iv(0.1, 2.0)], true),
    ];
    cases
        .into_iter()
        .map(|(name, e, bx, smooth)| TermCase { name, term: Term::new(e).unwrap(), bx, smooth })
        .collect()
}

// ---------------------------------------------------------------------------
// Constraint corpus over three variables.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    SeparableSmooth,
    SeparableNonsmooth,
    Nonseparable,
}

pub struct CorpusEntry {
    pub name: String,
    pub kind: Kind,
    pub spec: ConstraintSpec,
    pub bx: Vec<Interval>,
}

const SEPARABLE_SMOOTH: [&str; 10] = [
    "tanh(x1) + x2 * exp(-x2) + x3^2",
    "sin(2 * x1) + cos(x2) + exp(-x3)",
    "erf(x1 - 1) - log(x2 + 1) + sqrt(x3)",
    "x1^3 - 3 * x1 + arctan(x2) + x3 * x3",
    "centropy(x1 + 0.1, 1) + centropy(x2 + 0.1, 0.5) - tanh(x3)",
    "gamma(x1 + 0.5) + exp(x2) / 4 - x3",
    "-x1^2 + sin(x2) + erf(x3)",
    "exp(-x1) * 2 + x2^4 / 8 - cos(2 * x3)",
    "log(x1 + 0.5) - x2 * exp(-x2) + x3^1.5",
    "tanh(2 * x1 - 2) + tanh(x2 - 1) + sin(3 * x3)",
];

const SEPARABLE_NONSMOOTH: [&str; 10] = [
    "abs(x1 - 1) + l0(x2) + mod(x3, 0.7)",
    "abs(2 * x1 - 1) - abs(x2 - 1.5) + x3",
    "l0(x1 - 1) + l0(x2) + abs(x3 - 0.3)",
    "mod(x1, 0.5) + mod(x2 + 0.2, 1.1) - x3",
    "floor(2 * x1) + abs(x2 - 0.5) + mod(x3, 1.3)",
    "abs(sin(4 * mod(x1, pi))) + x2 - l0(x3)",
    "mod(3 * x1, 2) - abs(x2 - 1) + x3^2",
    "abs(x1 - 0.5) * 2 + floor(x2) + tanh(x3)",
    "l0(x1) * 0.5 + mod(x2, 0.9) + abs(x3 - 1.7)",
    "-abs(x1 - 1) + mod(x2 * x2, 1.5) + l0(x3 - 2)",
];

const NONSEPARABLE: [&str; 10] = [
    "x1 * x2 - x3",
    "-x1^2 + x2 - x1 * x3",
    "x1 / (x2 + 1) + x3",
    "x1 * x2 * x3 - x1",
    "x1 * exp(-x2) + x2 * x3",
    "(x1 + 1) / (x3 + 0.5) - x2 * x2",
    "sin(x1 * x2) + x3 / (x1 + 1)",
    "tanh(x1 - x2) + x2 * x3",
    "exp(-0.33889 * x3) * (erf(x1) * x2 - erf(x2))",
    "centropy(x1 + 0.1, x2 + 0.5) + x3 * x1",
];

/// The thirty constraints with right-hand sides at the 40th percentile of
/// the left-hand side over 400 seeded box samples.
pub fn constraint_corpus() -> Vec<CorpusEntry> {
    let bx = vec![iv(0.0, 2.0); 3];
    let mut out = Vec::new();
    let groups = [(Kind::SeparableSmooth, &SEPARABLE_SMOOTH), (Kind::SeparableNonsmooth, &SEPARABLE_NONSMOOTH), (Kind::Nonseparable, &NONSEPARABLE)];
    for (g, (kind, list)) in groups.iter().enumerate() {
        for (i, src) in list.iter().enumerate() {
            let text = format!("var x1 in [0, 2]; var x2 in [0, 2]; var x3 in [0, 2]; con {src} <= 0; max x1;");
            let m = parse(&text).unwrap_or_else(|e| panic!("{src}: {e}"));
            let mut spec = m.constraints[0].clone();
            let mut r = rng(1000 + (g * 10 + i) as u64);
            let mut vals: Vec<f64> = (0..400).filter_map(|_| spec.lhs(&sample(&mut r, &bx)).ok()).collect();
            vals.sort_by(f64::total_cmp);
            spec.rhs = vals[vals.len() * 2 / 5];
            out.push(CorpusEntry { name: format!("{kind:?}-{i}: {src}"), kind: *kind, spec, bx: bx.clone() });
        }
    }
    out
}

pub fn feasible_samples(spec: &ConstraintSpec, bx: &[Interval], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = sample(&mut r, bx);
        if spec.violation(&p).is_ok_and(|v| v <= 0.0) {
            out.push(p);
        }
    }
    out
}

pub fn corpus_dd(e: &CorpusEntry, partitions: usize, width: usize, merge: MergePolicy) -> DecisionDiagram {
    let p = make_partitions(&e.bx, &[false; 3], partitions);
    build(&CompiledConstraint::new(&e.spec, &e.bx), &p, width, merge).unwrap()
}

pub const WIDTHS: [usize; 3] = [4, 16, UNLIMITED];

// ---------------------------------------------------------------------------
// Brute-force grid oracle.

/// Grid values for a variable: every integer, or steps of `h` with both ends.
pub fn axis(lo: f64, hi: f64, integer: bool, h: f64) -> Vec<f64> {
    if integer {
        return (lo as i64..=hi as i64).map(|v| v as f64).collect();
    }
    let n = ((hi - lo) / h).round() as usize;
    (0..=n).map(|k| if k == n { hi } else { lo + k as f64 * h }).collect()
}

/// Best objective over the grid product; `f` returns `None` off the feasible set.
pub fn grid_best(axes: &[Vec<f64>], f: &dyn Fn(&[f64]) -> Option<f64>) -> Option<(f64, Vec<f64>)> {
    let mut idx = vec![0usize; axes.len()];
    let mut p: Vec<f64> = axes.iter().map(|a| a[0]).collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        if let Some(v) = f(&p) {
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, p.clone()));
            }
        }
        let mut d = 0;
        loop {
            if d == axes.len() {
                return best;
            }
            idx[d] += 1;
            if idx[d] < axes[d].len() {
                p[d] = axes[d][idx[d]];
                break;
            }
            idx[d] = 0;
            p[d] = axes[d][0];
            d += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Random expressions over three variables.

pub const UNARY: [UnaryOp; 14] = [
    UnaryOp::Neg,
    UnaryOp::Abs,
    UnaryOp::Exp,
    UnaryOp::Log,
    UnaryOp::Sqrt,
    UnaryOp::Sin,
    UnaryOp::Cos,
    UnaryOp::Tan,
    UnaryOp::Arctan,
    UnaryOp::Tanh,
    UnaryOp::Erf,
    UnaryOp::Gamma,
    UnaryOp::L0,
    UnaryOp::Floor,
];

pub const BINARY: [BinaryOp; 7] =
    [BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow, BinaryOp::Mod, BinaryOp::Centropy];

pub fn arb_expr() -> impl proptest::strategy::Strategy<Value = Expression> {
    use proptest::prelude::*;
    let leaf = prop_oneof![
        (0usize..3).prop_map(Expression::var),
        (-3.0f64..3.0).prop_map(Expression::constant),
        (-8i32..8).prop_map(|k| Expression::constant(k as f64 / 4.0)),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (proptest::sample::select(&UNARY[..]), inner.clone()).prop_map(|(op, a)| Expression::unary(op, a)),
            (proptest::sample::select(&BINARY[..]), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expression::binary(op, a, b)),
            proptest::collection::vec(inner, 2..4).prop_map(Expression::Sum),
        ]
    })
}

/// Equal up to `tol` relative to `max(1, scale)`; two failures or two equal
/// non-finite values also agree.
pub fn agree(a: Result<f64, impl Sized>, b: Result<f64, impl Sized>, scale: f64, tol: f64) -> bool {
    match (a, b) {
        (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => (a - b).abs() <= tol * scale.max(1.0),
        (Ok(a), Ok(b)) => a == b || (a.is_nan() && b.is_nan()),
        (Err(_), Err(_)) => true,
        _ => false,
    }
}
