//! Spatial branch-and-bound over box subdivisions with DD cuts.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::dd::{build, make_partitions, CompiledConstraint, DdError, MergePolicy};
use crate::expr::Model;
use num::BigRational;
use num_traits::ToPrimitive;

use crate::lp::{solve_lp, LpError, LpOutcome, LpStatus, RowSense};
use crate::separation::{separate_exact, separate_subgradient, CutMethod, CutPool, SeparationError};
use crate::{ExactLinearProgram, Interval, LinearProgram};

/// Rule (i) tolerance.
pub const PRUNE_TOL: f64 = 1e-6;
/// Continuous widths at or below this are not branched on.
pub const MIN_WIDTH: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub gap: f64,
    pub abs_gap: f64,
    pub time_limit: f64,
    pub node_limit: Option<usize>,
    pub partitions: usize,
    pub width: usize,
    pub merge: MergePolicy,
    pub separation: CutMethod,
    /// Run the exact separator when the subgradient one finds nothing.
    pub exact_fallback: bool,
    pub sg_iters: usize,
    pub sg_step: f64,
    pub cut_rounds: usize,
    pub feas_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gap: 0.05,
            abs_gap: 1e-6,
            time_limit: 5000.0,
            node_limit: None,
            partitions: 50,
            width: 5000,
            merge: MergePolicy::G,
            separation: CutMethod::Subgradient,
            exact_fallback: false,
            sg_iters: 50,
            sg_step: 1.0,
            cut_rounds: 20,
            feas_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("relaxation LP is unbounded")]
    Unbounded,
    #[error(transparent)]
    Dd(#[from] DdError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Gap closed to the tolerance or the tree was exhausted with an incumbent.
    Optimal,
    Infeasible,
    TimeLimit,
    NodeLimit,
}

#[derive(Clone, Debug)]
pub struct BnbNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub bx: Vec<Interval>,
    pub cuts: CutPool,
    pub dual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Keep,
    ByBound,
    ByInfeasibility,
    ByFeasibility,
}

/// Internal (maximization) bounds; use [`Model::reported`] for display.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: Status,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub abs_gap: f64,
    pub incumbent: Option<Vec<f64>>,
    pub nodes_explored: usize,
    pub nodes_remaining: usize,
    pub wall_time: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Infeasible,
    Bound,
    Feasible,
    Branch(usize),
    Atomic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEvent {
    pub node: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Last relaxation value before clamping to the parent's bound.
    pub lp_value: f64,
    pub dual: f64,
    pub cuts_added: usize,
    pub action: Action,
}

/// Relative gap with the denominator floored at `1e-9`.
pub fn relative_gap(primal: f64, dual: f64) -> f64 {
    if !primal.is_finite() {
        return f64::INFINITY;
    }
    ((dual - primal) / primal.abs().max(1e-9)).max(0.0)
}

/// The four pruning rules in order: infeasible LP, empty DD, bound, feasible
/// optimum.
pub fn prune(node: &BnbNode, incumbent: f64, lp_status: LpStatus, dd_empty: bool, x_feasible: bool) -> Decision {
    if lp_status == LpStatus::Infeasible || dd_empty {
        Decision::ByInfeasibility
    } else if node.dual < incumbent + PRUNE_TOL {
        Decision::ByBound
    } else if x_feasible {
        Decision::ByFeasibility
    } else {
        Decision::Keep
    }
}

fn branchable(bx: &Interval, integer: bool) -> bool {
    if integer {
        bx.hi - bx.lo >= 1.0
    } else {
        bx.hi - bx.lo > MIN_WIDTH
    }
}

/// Center-distance branching choice among `candidates`; `None` if none can
/// be split. Ties go to the variable with the largest width relative to
/// `root`, then to the smaller index.
pub fn branch_variable(
    bx: &[Interval],
    root: &[Interval],
    integer: &[bool],
    x: &[f64],
    candidates: &[usize],
) -> Option<usize> {
    let mut best: Option<(f64, f64, usize)> = None;
    for &i in candidates {
        if !branchable(&bx[i], integer[i]) {
            continue;
        }
        let w = bx[i].hi - bx[i].lo;
        let score = (x[i] - 0.5 * (bx[i].lo + bx[i].hi)).abs() / w;
        let rel = w / root[i].width().max(f64::MIN_POSITIVE);
        let better = match best {
            None => true,
            Some((s, r, _)) => score < s - 1e-9 || (score <= s + 1e-9 && rel > r * (1.0 + 1e-9)),
        };
        if better {
            best = Some((score, rel, i));
        }
    }
    best.map(|(_, _, i)| i)
}

/// Split `bx[i]` near `xi`, at least a tenth of the width from either end.
pub fn split(bx: &[Interval], integer: bool, i: usize, xi: f64) -> (Vec<Interval>, Vec<Interval>) {
    let (lo, hi) = (bx[i].lo, bx[i].hi);
    let w = hi - lo;
    let p = xi.clamp(lo + 0.1 * w, hi - 0.1 * w);
    let (a, b) = if integer {
        let f = p.floor().clamp(lo, hi - 1.0);
        (Interval::new(lo, f), Interval::new(f + 1.0, hi))
    } else {
        (Interval::new(lo, p), Interval::new(p, hi))
    };
    let mut left = bx.to_vec();
    let mut right = bx.to_vec();
    left[i] = a;
    right[i] = b;
    (left, right)
}

/// Two children sharing the parent's cuts and dual bound.
pub fn branch(node: &BnbNode, integer: &[bool], x: &[f64], i: usize, next_id: &mut usize) -> (BnbNode, BnbNode) {
    let (l, r) = split(&node.bx, integer[i], i, x[i]);
    let mut child = |bx| {
        *next_id += 1;
        BnbNode { id: *next_id - 1, parent: Some(node.id), depth: node.depth + 1, bx, cuts: node.cuts.clone(), dual: node.dual }
    };
    let a = child(l);
    let b = child(r);
    (a, b)
}

struct Open(BnbNode);

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // Largest dual first, then the older node.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.dual.total_cmp(&other.0.dual).then(other.0.id.cmp(&self.0.id))
    }
}

struct Solver<'a> {
    m: &'a Model,
    cfg: &'a SolverConfig,
    linear: Vec<(Vec<f64>, f64)>,
    nonlinear: Vec<usize>,
    primal: f64,
    incumbent: Option<Vec<f64>>,
}

enum NodeOutcome {
    Pruned(Action, f64, usize),
    Open { x: Vec<f64>, lp: f64, cuts: usize, violated: Vec<usize> },
}

impl<'a> Solver<'a> {
    fn new(m: &'a Model, cfg: &'a SolverConfig) -> Self {
        let mut linear = Vec::new();
        let mut nonlinear = Vec::new();
        for (k, c) in m.constraints.iter().enumerate() {
            match c.linear_coeffs(m.n()) {
                Some(a) => linear.push((a, c.rhs)),
                None => nonlinear.push(k),
            }
        }
        Solver { m, cfg, linear, nonlinear, primal: f64::NEG_INFINITY, incumbent: None }
    }

    fn relaxation(&self, bx: &[Interval], cuts: &CutPool) -> Result<(LpStatus, Vec<f64>, f64), SolveError> {
        let n = self.m.n();
        let mut lp = LinearProgram::new(self.m.objective.clone());
        for (j, b) in bx.iter().enumerate() {
            lp.set_bounds(j, Some(b.lo), Some(b.hi));
        }
        for (a, b) in &self.linear {
            lp.add_row(a.clone(), RowSense::Le, *b);
        }
        for c in &cuts.cuts {
            let a = &c.coeffs[..n];
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 0.0 {
                lp.add_row(a.iter().map(|v| v / scale).collect(), RowSense::Le, c.rhs / scale);
            }
        }
        let out = match solve_lp(&lp) {
            Ok(o) => o,
            Err(LpError::NumericalBreakdown(_)) => exact_solve(&lp)?,
            Err(e) => return Err(e.into()),
        };
        match out.status {
            LpStatus::Unbounded => Err(SolveError::Unbounded),
            s => Ok((s, out.x, out.objective + self.m.objective_offset)),
        }
    }

    fn round_integers(&self, x: &[f64], bx: &[Interval]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let v = v.clamp(bx[i].lo, bx[i].hi);
                if self.m.integer[i] {
                    v.round()
                } else {
                    v
                }
            })
            .collect()
    }

    fn offer(&mut self, x: Vec<f64>) -> bool {
        if !self.m.is_feasible(&x, self.cfg.feas_tol) {
            return false;
        }
        let v = self.m.objective_value(&x);
        if v > self.primal {
            self.primal = v;
            self.incumbent = Some(x);
        }
        true
    }

    fn violation(&self, x: &[f64]) -> f64 {
        self.m.max_violation(x).unwrap_or(f64::INFINITY)
    }

    /// Rounded LP point, then for each feasible anchor (incumbent, box
    /// center, lower and upper corner): copy anchor coordinates into the LP
    /// point while that lowers the violation, and bisect the rest of the way.
    fn heuristics(&mut self, x: &[f64], bx: &[Interval]) {
        let xr = self.round_integers(x, bx);
        if self.offer(xr.clone()) {
            return;
        }
        let repaired = self.repair(xr.clone(), bx);
        self.offer(repaired);
        let pick = |f: &dyn Fn(&Interval) -> f64| self.round_integers(&bx.iter().map(f).collect::<Vec<_>>(), bx);
        let mut anchors: Vec<Vec<f64>> = self.incumbent.iter().cloned().collect();
        anchors.push(pick(&|b| 0.5 * (b.lo + b.hi)));
        anchors.push(pick(&|b| b.lo));
        anchors.push(pick(&|b| b.hi));
        let mut tried = 0;
        for a in anchors {
            if tried == 2 || !self.m.is_feasible(&a, self.cfg.feas_tol) {
                continue;
            }
            tried += 1;
            self.offer(a.clone());
            let bad = self.snap(xr.clone(), &a);
            self.bisect(a, bad, bx);
        }
    }

    fn residuals(&self, x: &[f64]) -> Vec<f64> {
        self.m.constraints.iter().map(|c| c.violation(x).unwrap_or(f64::INFINITY)).collect()
    }

    /// Two sweeps of coordinate moves, each to the best of a 17-point scan
    /// plus the zero crossings of any residual between scan points.
    fn repair(&self, mut cur: Vec<f64>, bx: &[Interval]) -> Vec<f64> {
        const SCAN: usize = 17;
        let mut v = self.violation(&cur);
        for _ in 0..2 {
            for i in 0..cur.len() {
                if v <= self.cfg.feas_tol {
                    return cur;
                }
                let (lo, hi) = (bx[i].lo, bx[i].hi);
                if hi <= lo {
                    continue;
                }
                let int = self.m.integer[i];
                let mut ts: Vec<f64> = (0..SCAN).map(|s| lo + (hi - lo) * s as f64 / (SCAN - 1) as f64).collect();
                if int {
                    ts.iter_mut().for_each(|t| *t = t.round());
                    ts.dedup();
                }
                let base = cur.clone();
                let at = |t: f64| {
                    let mut y = base.clone();
                    y[i] = t;
                    y
                };
                let res: Vec<Vec<f64>> = ts.iter().map(|&t| self.residuals(&at(t))).collect();
                let mut cands = ts.clone();
                if !int {
                    for w in 0..ts.len() - 1 {
                        for k in 0..res[w].len() {
                            let (ra, rb) = (res[w][k], res[w + 1][k]);
                            if !(ra.is_finite() && rb.is_finite()) || (ra > 0.0) == (rb > 0.0) {
                                continue;
                            }
                            let c = &self.m.constraints[k];
                            let (mut a, mut b) = if ra > 0.0 { (ts[w], ts[w + 1]) } else { (ts[w + 1], ts[w]) };
                            for _ in 0..60 {
                                let mid = 0.5 * (a + b);
                                if c.violation(&at(mid)).is_ok_and(|r| r > 0.0) {
                                    a = mid;
                                } else {
                                    b = mid;
                                }
                            }
                            cands.push(b);
                        }
                    }
                }
                for t in cands {
                    let tv = self.violation(&at(t));
                    if tv < v {
                        v = tv;
                        cur[i] = t;
                    }
                }
            }
        }
        cur
    }

    fn snap(&self, mut bad: Vec<f64>, good: &[f64]) -> Vec<f64> {
        let mut v = self.violation(&bad);
        while v > self.cfg.feas_tol {
            let mut best: Option<(f64, usize)> = None;
            for i in 0..bad.len() {
                if bad[i] == good[i] {
                    continue;
                }
                let mut t = bad.clone();
                t[i] = good[i];
                let tv = self.violation(&t);
                if tv < v && best.is_none_or(|(b, _)| tv < b) {
                    best = Some((tv, i));
                }
            }
            let Some((tv, i)) = best else { break };
            bad[i] = good[i];
            v = tv;
        }
        bad
    }

    fn bisect(&mut self, mut good: Vec<f64>, mut bad: Vec<f64>, bx: &[Interval]) {
        if self.offer(bad.clone()) {
            return;
        }
        for _ in 0..40 {
            let mid: Vec<f64> = good.iter().zip(&bad).map(|(a, b)| 0.5 * (a + b)).collect();
            let mid = self.round_integers(&mid, bx);
            if mid == good || mid == bad {
                break;
            }
            if self.m.is_feasible(&mid, self.cfg.feas_tol) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        self.offer(good);
    }

    fn cut_loop(&mut self, node: &mut BnbNode) -> Result<NodeOutcome, SolveError> {
        let mut added = 0;
        let mut round = 0;
        // The box is fixed during the loop, so each diagram is built once.
        let p = make_partitions(&node.bx, &self.m.integer, self.cfg.partitions);
        let mut diagrams = vec![None; self.m.constraints.len()];
        loop {
            let (status, x, lp) = self.relaxation(&node.bx, &node.cuts)?;
            if status == LpStatus::Infeasible {
                return Ok(NodeOutcome::Pruned(Action::Infeasible, f64::NEG_INFINITY, added));
            }
            node.dual = node.dual.min(lp);
            let xr = self.round_integers(&x, &node.bx);
            let near_integral = x.iter().zip(&xr).all(|(a, b)| (a - b).abs() <= 1e-6);
            let feasible = near_integral && self.m.is_feasible(&xr, self.cfg.feas_tol);
            let decision = prune(node, self.primal, status, false, feasible);
            if feasible {
                self.offer(xr);
            }
            match decision {
                Decision::ByBound => return Ok(NodeOutcome::Pruned(Action::Bound, lp, added)),
                Decision::ByFeasibility => return Ok(NodeOutcome::Pruned(Action::Feasible, lp, added)),
                _ => {}
            }
            let mut violated = Vec::new();
            for &k in &self.nonlinear {
                let v = self.m.constraints[k].violation(&x).unwrap_or(f64::INFINITY);
                if v > self.cfg.feas_tol {
                    violated.push(k);
                }
            }
            if round == self.cfg.cut_rounds || violated.is_empty() {
                return Ok(NodeOutcome::Open { x, lp, cuts: added, violated });
            }
            round += 1;
            let mut new_cuts = 0;
            for &k in &violated {
                if diagrams[k].is_none() {
                    let cc = CompiledConstraint::new(&self.m.constraints[k], &node.bx);
                    diagrams[k] = Some(build(&cc, &p, self.cfg.width, self.cfg.merge)?);
                }
                let d = diagrams[k].as_ref().unwrap();
                if d.is_empty() {
                    return Ok(NodeOutcome::Pruned(Action::Infeasible, f64::NEG_INFINITY, added));
                }
                let mut cut = match self.cfg.separation {
                    CutMethod::Exact => separate_exact(d, &x)?,
                    CutMethod::Subgradient => separate_subgradient(d, &x, self.cfg.sg_iters, self.cfg.sg_step)?,
                };
                if cut.is_none() && self.cfg.exact_fallback && self.cfg.separation == CutMethod::Subgradient {
                    cut = separate_exact(d, &x)?;
                }
                if let Some(mut c) = cut {
                    c.constraint = k;
                    c.node = node.id;
                    if node.cuts.add(c) {
                        new_cuts += 1;
                    }
                }
            }
            added += new_cuts;
            if new_cuts == 0 {
                return Ok(NodeOutcome::Open { x, lp, cuts: added, violated });
            }
        }
    }
}

/// Re-solve in rational arithmetic after a floating-point breakdown.
fn exact_solve(lp: &LinearProgram) -> Result<LpOutcome<f64>, SolveError> {
    let q = |v: f64| BigRational::from_float(v).ok_or(LpError::NotFinite);
    let mut r = ExactLinearProgram::new(lp.objective.iter().map(|&v| q(v)).collect::<Result<_, _>>()?);
    for j in 0..lp.num_vars() {
        r.set_bounds(j, lp.lower[j].map(q).transpose()?, lp.upper[j].map(q).transpose()?);
    }
    for row in &lp.rows {
        r.add_row(row.coeffs.iter().map(|&v| q(v)).collect::<Result<_, _>>()?, row.sense, q(row.rhs)?);
    }
    let out = solve_lp(&r)?;
    let f = |v: &BigRational| v.to_f64().unwrap_or(f64::NAN);
    Ok(LpOutcome {
        status: out.status,
        x: out.x.iter().map(f).collect(),
        objective: f(&out.objective),
        ray: out.ray.map(|r| r.iter().map(f).collect()),
        duals: out.duals.iter().map(f).collect(),
    })
}

fn validate(cfg: &SolverConfig) -> Result<(), SolveError> {
    let bad = |what: &str| Err(SolveError::Config(what.to_string()));
    if !(cfg.gap >= 0.0) || !(cfg.abs_gap >= 0.0) {
        return bad("gap tolerances must be non-negative");
    }
    if !(cfg.time_limit > 0.0) {
        return bad("time limit must be positive");
    }
    if cfg.partitions == 0 || cfg.width == 0 {
        return bad("partitions and width must be positive");
    }
    if cfg.sg_iters == 0 || !(cfg.sg_step > 0.0) {
        return bad("subgradient iterations and step must be positive");
    }
    if !(cfg.feas_tol > 0.0) {
        return bad("feasibility tolerance must be positive");
    }
    Ok(())
}

pub fn solve(m: &Model, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    solve_traced(m, cfg, |_| {})
}

/// [`solve`] with a callback after every processed node.
pub fn solve_traced(m: &Model, cfg: &SolverConfig, mut trace: impl FnMut(&TraceEvent)) -> Result<SolveResult, SolveError> {
    validate(cfg)?;
    let start = Instant::now();
    let limit = Duration::from_secs_f64(cfg.time_limit);
    let mut s = Solver::new(m, cfg);
    let root_box = m.domain();
    let mut next_id = 1;
    let root = BnbNode { id: 0, parent: None, depth: 0, bx: m.domain(), cuts: CutPool::new(), dual: f64::INFINITY };
    let (status, _, root_lp) = s.relaxation(&root.bx, &root.cuts)?;
    let root_dual = if status == LpStatus::Infeasible { f64::NEG_INFINITY } else { root_lp };
    let mut open = BinaryHeap::new();
    open.push(Open(BnbNode { dual: root_dual, ..root }));
    let mut explored = 0;
    let mut stopped = None;
    let mut processed_any = false;

    while let Some(Open(top)) = open.peek() {
        let dual = top.dual.max(s.primal);
        let converged = s.incumbent.is_some()
            && (relative_gap(s.primal, dual) <= cfg.gap || dual - s.primal <= cfg.abs_gap);
        if converged {
            break;
        }
        if start.elapsed() >= limit {
            stopped = Some(Status::TimeLimit);
            break;
        }
        if cfg.node_limit.is_some_and(|l| explored >= l) {
            stopped = Some(Status::NodeLimit);
            break;
        }
        let Open(mut node) = open.pop().unwrap();
        explored += 1;
        if node.dual < s.primal + PRUNE_TOL {
            trace(&TraceEvent {
                node: node.id,
                parent: node.parent,
                depth: node.depth,
                lp_value: node.dual,
                dual: node.dual,
                cuts_added: 0,
                action: Action::Bound,
            });
            continue;
        }
        let outcome = s.cut_loop(&mut node)?;
        processed_any = true;
        let event = |lp_value, cuts_added, action| TraceEvent {
            node: node.id,
            parent: node.parent,
            depth: node.depth,
            lp_value,
            dual: node.dual,
            cuts_added,
            action,
        };
        match outcome {
            NodeOutcome::Pruned(action, lp, cuts) => trace(&event(lp, cuts, action)),
            NodeOutcome::Open { x, lp, cuts, violated } => {
                s.heuristics(&x, &node.bx);
                if node.dual < s.primal + PRUNE_TOL {
                    trace(&event(lp, cuts, Action::Bound));
                    continue;
                }
                let mut cand: Vec<usize> = violated.iter().flat_map(|&k| m.constraints[k].support()).collect();
                cand.extend((0..m.n()).filter(|&i| m.integer[i] && (x[i] - x[i].round()).abs() > 1e-6));
                cand.sort_unstable();
                cand.dedup();
                let all: Vec<usize> = (0..m.n()).collect();
                let var = branch_variable(&node.bx, &root_box, &m.integer, &x, &cand)
                    .or_else(|| branch_variable(&node.bx, &root_box, &m.integer, &x, &all));
                match var {
                    Some(i) => {
                        trace(&event(lp, cuts, Action::Branch(i)));
                        let (a, b) = branch(&node, &m.integer, &x, i, &mut next_id);
                        open.push(Open(a));
                        open.push(Open(b));
                    }
                    None => {
                        let center: Vec<f64> = node.bx.iter().map(|b| 0.5 * (b.lo + b.hi)).collect();
                        let center = s.round_integers(&center, &node.bx);
                        s.offer(center);
                        trace(&event(lp, cuts, Action::Atomic));
                    }
                }
            }
        }
    }

    let open_dual = open.iter().map(|o| o.0.dual).fold(f64::NEG_INFINITY, f64::max);
    let mut dual = open_dual.max(s.primal);
    if !processed_any && stopped.is_some() {
        dual = root_dual;
    }
    let status = match stopped {
        Some(st) => st,
        None if s.incumbent.is_none() => Status::Infeasible,
        None => Status::Optimal,
    };
    if status == Status::Infeasible {
        dual = f64::NEG_INFINITY;
    }
    Ok(SolveResult {
        status,
        primal: s.primal,
        dual,
        gap: relative_gap(s.primal, dual),
        abs_gap: if s.incumbent.is_some() { (dual - s.primal).max(0.0) } else { f64::INFINITY },
        incumbent: s.incumbent,
        nodes_explored: explored,
        nodes_remaining: open.len(),
        wall_time: start.elapsed(),
    })
}
