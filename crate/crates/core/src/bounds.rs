//! Lower bounds of a term over a box.
//!
//! Boxes are indexed by model variable; only the term's variables are read.

use thiserror::Error;

use crate::enclosure;
use crate::expr::{analyze_monotonicity, reindex, DomainError, Monotonicity, ReindexedTerm, Term};
use crate::Interval;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("term is not monotone over the box")]
    NotMonotone,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleTag {
    Monotone,
    Reindexed,
    Interval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corner {
    Lower,
    Upper,
}

impl Corner {
    fn pick(self, d: Interval) -> f64 {
        match self {
            Corner::Lower => d.lo,
            Corner::Upper => d.hi,
        }
    }
}

fn corners_of(dirs: impl IntoIterator<Item = Monotonicity>) -> Option<Vec<Corner>> {
    dirs.into_iter()
        .map(|d| match d {
            Monotonicity::Nondecreasing => Some(Corner::Lower),
            Monotonicity::Nonincreasing => Some(Corner::Upper),
            Monotonicity::Unknown => None,
        })
        .collect()
}

/// Uniform grid over the root box of a term's variables.
#[derive(Clone, Debug, PartialEq)]
struct Grid {
    vars: Vec<usize>,
    root: Vec<Interval>,
    cells: usize,
}

impl Grid {
    fn new(t: &Term, bx: &[Interval]) -> Self {
        let cells = match t.vars.len() {
            1 => 8,
            2 => 4,
            3 => 2,
            _ => 1,
        };
        Grid { vars: t.vars.clone(), root: t.vars.iter().map(|&v| bx[v]).collect(), cells }
    }

    fn cell(&self, k: usize, c: usize) -> Interval {
        let r = self.root[k];
        if r.is_point() || self.cells == 1 {
            return r;
        }
        let w = r.width() / self.cells as f64;
        let lo = r.lo + c as f64 * w;
        let hi = if c + 1 == self.cells { r.hi } else { r.lo + (c + 1) as f64 * w };
        Interval::new(lo, hi)
    }

    /// Minimum of the piece bound over all grid cells meeting `bx`.
    fn eval(&self, t: &Term, bx: &[Interval]) -> Result<f64, DomainError> {
        // Per variable, the pieces `cell ∩ bx`; a box outside the root grid
        // is taken whole.
        let mut pieces: Vec<Vec<Interval>> = Vec::with_capacity(self.vars.len());
        for (k, &v) in self.vars.iter().enumerate() {
            let cuts: Vec<Interval> =
                (0..self.cells).filter_map(|c| self.cell(k, c).intersect(&bx[v])).collect();
            pieces.push(if cuts.is_empty() { vec![bx[v]] } else { cuts });
        }
        let mut scratch = bx.to_vec();
        let mut idx = vec![0usize; pieces.len()];
        let mut best = f64::INFINITY;
        loop {
            for (k, &v) in self.vars.iter().enumerate() {
                scratch[v] = pieces[k][idx[k]];
            }
            best = best.min(piece_bound(t, &scratch)?);
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < pieces[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                return Ok(best);
            }
        }
    }
}

/// Exact corner value where the gradient enclosure certifies every partial's
/// sign, natural interval extension otherwise.
fn piece_bound(t: &Term, bx: &[Interval]) -> Result<f64, DomainError> {
    if let Some(g) = enclosure::gradient(&t.expr, bx, &t.vars) {
        if g.iter().all(|d| d.lo >= 0.0 || d.hi <= 0.0) {
            let mut x: Vec<f64> = bx.iter().map(|d| d.lo).collect();
            for (d, &v) in g.iter().zip(&t.vars) {
                x[v] = if d.lo >= 0.0 { bx[v].lo } else { bx[v].hi };
            }
            if let Ok(val) = t.expr.evaluate(&x) {
                if !val.is_nan() {
                    return Ok(val);
                }
            }
        }
    }
    Ok(enclosure::range(&t.expr, bx)?.lo)
}

fn corner_value(t: &Term, corners: &[Corner], bx: &[Interval]) -> Option<f64> {
    let mut x: Vec<f64> = bx.iter().map(|d| d.lo).collect();
    for (c, &v) in corners.iter().zip(&t.vars) {
        x[v] = c.pick(bx[v]);
    }
    t.expr.evaluate(&x).ok().filter(|v| !v.is_nan())
}

fn reindexed_value(r: &ReindexedTerm, corners: &[Corner], bx: &[Interval]) -> Option<f64> {
    let y: Vec<f64> = r.map.iter().zip(corners).map(|(&i, c)| c.pick(bx[i])).collect();
    r.expr.evaluate(&y).ok().filter(|v| !v.is_nan())
}

/// A bound rule fixed at a root box and reused on its sub-boxes.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundRule {
    pub tag: RuleTag,
    /// Corner per term variable (monotone) or per y-variable (reindexed).
    pub corners: Vec<Corner>,
    reindexed: Option<ReindexedTerm>,
    grid: Grid,
}

impl BoundRule {
    /// Pick the first of monotone, reindexed, interval that applies on `root`.
    pub fn select(t: &Term, root: &[Interval]) -> Self {
        let grid = Grid::new(t, root);
        let dirs = analyze_monotonicity(&t.expr, root);
        if let Some(corners) = corners_of(dirs.into_iter().map(|p| p.1)) {
            return BoundRule { tag: RuleTag::Monotone, corners, reindexed: None, grid };
        }
        let r = reindex(t, root);
        if let Some(corners) = corners_of(r.directions.iter().copied()) {
            return BoundRule { tag: RuleTag::Reindexed, corners, reindexed: Some(r), grid };
        }
        BoundRule { tag: RuleTag::Interval, corners: Vec::new(), reindexed: None, grid }
    }

    /// Bound over `bx`, assumed inside the root box the rule was selected on.
    ///
    /// The reindexed corner is combined by max with the grid rule; the
    /// monotone corner is already the exact minimum.
    pub fn eval(&self, t: &Term, bx: &[Interval]) -> Result<f64, BoundError> {
        match self.tag {
            RuleTag::Monotone => match corner_value(t, &self.corners, bx) {
                Some(v) => Ok(v),
                None => Ok(self.grid.eval(t, bx)?),
            },
            RuleTag::Reindexed => {
                let r = self.reindexed.as_ref().expect("reindexed rule keeps its term");
                let g = self.grid.eval(t, bx)?;
                Ok(reindexed_value(r, &self.corners, bx).map_or(g, |v| v.max(g)))
            }
            RuleTag::Interval => Ok(self.grid.eval(t, bx)?),
        }
    }
}

/// Exact minimum at the monotone corner.
pub fn lower_bound_monotone(t: &Term, bx: &[Interval]) -> Result<f64, BoundError> {
    let dirs = analyze_monotonicity(&t.expr, bx);
    let corners = corners_of(dirs.into_iter().map(|p| p.1)).ok_or(BoundError::NotMonotone)?;
    corner_value(t, &corners, bx).ok_or_else(|| missing_value(t))
}

/// Corner value of the reindexed term; valid, possibly loose.
pub fn lower_bound_reindexed(t: &Term, bx: &[Interval]) -> Result<f64, BoundError> {
    let r = reindex(t, bx);
    let corners = corners_of(r.directions.iter().copied()).ok_or(BoundError::NotMonotone)?;
    reindexed_value(&r, &corners, bx).ok_or_else(|| missing_value(t))
}

/// Interval rule on a grid laid over `bx` itself.
pub fn lower_bound_interval(t: &Term, bx: &[Interval]) -> Result<f64, BoundError> {
    Ok(Grid::new(t, bx).eval(t, bx)?)
}

/// Rule selected on `bx` and evaluated there.
pub fn lower_bound(t: &Term, bx: &[Interval]) -> Result<f64, BoundError> {
    BoundRule::select(t, bx).eval(t, bx)
}

fn missing_value(t: &Term) -> BoundError {
    BoundError::Domain(DomainError { node: t.expr.to_string(), reason: "corner outside the domain" })
}
