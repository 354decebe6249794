//! Linear cuts from a decision diagram's flow polytope.
//!
//! Separators take points in model space and return cuts whose coefficients
//! vanish outside the diagram's variables. [`longest_path`] works in the
//! diagram's own layer space.

use thiserror::Error;

use crate::dd::DecisionDiagram;
use crate::lp::{solve_lp, LpError, LpStatus, RowSense};
use crate::LinearProgram;

/// Smallest violation for which a cut is emitted.
pub const CUT_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SeparationError {
    #[error("decision diagram has no root-terminal path")]
    EmptyDiagram,
    #[error("point has {got} coordinates, diagram needs index {need}")]
    Dimension { got: usize, need: usize },
    #[error("cut LP returned {0:?}")]
    LpStatus(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutMethod {
    Exact,
    Subgradient,
}

/// `coeffs · x ≤ rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutPlane {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
    pub constraint: usize,
    pub node: usize,
    pub method: CutMethod,
}

impl CutPlane {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Positive when `x` violates the cut.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.activity(x) - self.rhs
    }

    fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Unit root-to-terminal flow over arcs, ordered layer-major; nodes carry
/// global ids in layer order.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowPolytope {
    pub vars: Vec<usize>,
    pub num_nodes: usize,
    pub root: usize,
    pub terminal: usize,
    pub arc_layer: Vec<usize>,
    pub arc_tail: Vec<usize>,
    pub arc_head: Vec<usize>,
    pub label: Vec<f64>,
}

pub fn flow_polytope(d: &DecisionDiagram) -> Result<FlowPolytope, SeparationError> {
    if d.is_empty() {
        return Err(SeparationError::EmptyDiagram);
    }
    let mut offsets = Vec::with_capacity(d.layers.len());
    let mut acc = 0;
    for l in &d.layers {
        offsets.push(acc);
        acc += l.len();
    }
    let mut fp = FlowPolytope {
        vars: d.vars.clone(),
        num_nodes: acc,
        root: 0,
        terminal: offsets[d.layers.len() - 1],
        arc_layer: Vec::new(),
        arc_tail: Vec::new(),
        arc_head: Vec::new(),
        label: Vec::new(),
    };
    for (i, layer) in d.arcs.iter().enumerate() {
        for a in layer {
            fp.arc_layer.push(i);
            fp.arc_tail.push(offsets[i] + a.tail);
            fp.arc_head.push(offsets[i + 1] + a.head);
            fp.label.push(a.label);
        }
    }
    Ok(fp)
}

impl FlowPolytope {
    pub fn num_arcs(&self) -> usize {
        self.label.len()
    }

    /// Balance rows (out minus in) with their supplies, one per node.
    pub fn balance_rows(&self) -> Vec<(Vec<f64>, f64)> {
        (0..self.num_nodes)
            .map(|u| {
                let row = (0..self.num_arcs())
                    .map(|a| f64::from(u8::from(self.arc_tail[a] == u)) - f64::from(u8::from(self.arc_head[a] == u)))
                    .collect();
                let f = if u == self.root {
                    1.0
                } else if u == self.terminal {
                    -1.0
                } else {
                    0.0
                };
                (row, f)
            })
            .collect()
    }

    /// Coupling rows `Σ_{a ∈ A_i} l(a) y_a`, one per layer.
    pub fn coupling_rows(&self) -> Vec<Vec<f64>> {
        (0..self.vars.len())
            .map(|i| (0..self.num_arcs()).map(|a| if self.arc_layer[a] == i { self.label[a] } else { 0.0 }).collect())
            .collect()
    }

    /// Feasibility LP of the flow at a model-space point, with the coupling
    /// rows relaxed by `tol` on each side.
    pub fn membership_lp(&self, x: &[f64], tol: f64) -> LinearProgram {
        let mut lp = LinearProgram::new(vec![0.0; self.num_arcs()]);
        for (row, f) in self.balance_rows() {
            lp.add_row(row, RowSense::Eq, f);
        }
        for (i, row) in self.coupling_rows().into_iter().enumerate() {
            let v = x[self.vars[i]];
            lp.add_row(row.clone(), RowSense::Le, v + tol);
            lp.add_row(row, RowSense::Ge, v - tol);
        }
        lp
    }

    /// Whether the point lies in the projection, up to `tol` per coordinate.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, SeparationError> {
        check_dim(&self.vars, x)?;
        let out = solve_lp(&self.membership_lp(x, tol))?;
        Ok(out.status == LpStatus::Optimal)
    }
}

fn check_dim(vars: &[usize], x: &[f64]) -> Result<(), SeparationError> {
    match vars.iter().max() {
        Some(&m) if m >= x.len() => Err(SeparationError::Dimension { got: x.len(), need: m }),
        _ => Ok(()),
    }
}

/// Longest root-terminal path under weights `l(a)·γ_i`, with `γ` over the
/// diagram's layers. Ties go to the smaller label, then the smaller head.
/// Returns the path's labels and its weight.
pub fn longest_path(d: &DecisionDiagram, gamma: &[f64]) -> Result<(Vec<f64>, f64), SeparationError> {
    let n = d.arcs.len();
    if d.layers.is_empty() || d.layers[0].is_empty() {
        return Err(SeparationError::EmptyDiagram);
    }
    // best[i][u]: longest weight from node u of layer i to the terminal.
    let mut best: Vec<Vec<f64>> = d.layers.iter().map(|l| vec![f64::NEG_INFINITY; l.len()]).collect();
    let mut choice: Vec<Vec<Option<usize>>> = d.layers.iter().map(|l| vec![None; l.len()]).collect();
    best[n] = vec![0.0; d.layers[n].len()];
    for i in (0..n).rev() {
        for (k, a) in d.arcs[i].iter().enumerate() {
            let tail_to_go = best[i + 1][a.head];
            if tail_to_go == f64::NEG_INFINITY {
                continue;
            }
            let w = a.label * gamma[i] + tail_to_go;
            let better = match choice[i][a.tail] {
                None => true,
                Some(c) => {
                    let cur = &d.arcs[i][c];
                    w > best[i][a.tail]
                        || (w == best[i][a.tail]
                            && (a.label < cur.label || (a.label == cur.label && a.head < cur.head)))
                }
            };
            if better {
                best[i][a.tail] = w;
                choice[i][a.tail] = Some(k);
            }
        }
    }
    if best[0][0] == f64::NEG_INFINITY {
        return Err(SeparationError::EmptyDiagram);
    }
    let mut point = Vec::with_capacity(n);
    let mut u = 0;
    for i in 0..n {
        let a = d.arcs[i][choice[i][u].expect("path continues to the terminal")];
        point.push(a.label);
        u = a.head;
    }
    let value = point.iter().zip(gamma).map(|(x, g)| x * g).sum();
    Ok((point, value))
}

fn lift(d: &DecisionDiagram, gamma: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n];
    for (&v, &g) in d.vars.iter().zip(gamma) {
        c[v] = g;
    }
    c
}

/// Cut-generating LP with `‖γ‖∞ ≤ 1`. The right-hand side is the exact
/// longest-path value for the optimal `γ`.
pub fn separate_exact(d: &DecisionDiagram, x: &[f64]) -> Result<Option<CutPlane>, SeparationError> {
    check_dim(&d.vars, x)?;
    let fp = flow_polytope(d)?;
    let nn = fp.num_nodes;
    let nl = d.vars.len();
    let mut obj = vec![0.0; nn + nl];
    obj[fp.terminal] = -1.0;
    for i in 0..nl {
        obj[nn + i] = x[d.vars[i]];
    }
    let mut lp = LinearProgram::new(obj);
    for u in 0..nn {
        lp.set_bounds(u, None, None);
    }
    lp.set_bounds(fp.root, Some(0.0), Some(0.0));
    for i in 0..nl {
        lp.set_bounds(nn + i, Some(-1.0), Some(1.0));
    }
    for a in 0..fp.num_arcs() {
        let mut row = vec![0.0; nn + nl];
        row[fp.arc_tail[a]] += 1.0;
        row[fp.arc_head[a]] -= 1.0;
        row[nn + fp.arc_layer[a]] = fp.label[a];
        lp.add_row(row, RowSense::Le, 0.0);
    }
    let out = solve_lp(&lp)?;
    if out.status != LpStatus::Optimal {
        return Err(SeparationError::LpStatus(out.status));
    }
    if out.objective <= CUT_TOL {
        return Ok(None);
    }
    let mut gamma: Vec<f64> = out.x[nn..].to_vec();
    let xbar: Vec<f64> = d.vars.iter().map(|&v| x[v]).collect();
    let dot = |g: &[f64]| g.iter().zip(&xbar).map(|(a, b)| a * b).sum::<f64>();
    let (_, mut rhs) = longest_path(d, &gamma)?;
    // The normalized LP has many tied optima; drop coefficients, smallest
    // first, while the violation does not shrink.
    let mut order: Vec<usize> = (0..nl).filter(|&i| gamma[i] != 0.0).collect();
    order.sort_by(|&a, &b| gamma[a].abs().total_cmp(&gamma[b].abs()).then(a.cmp(&b)));
    for i in order {
        let mut trial = gamma.clone();
        trial[i] = 0.0;
        if trial.iter().all(|&g| g == 0.0) {
            continue;
        }
        let (_, r) = longest_path(d, &trial)?;
        if dot(&trial) - r >= dot(&gamma) - rhs - 1e-12 {
            gamma = trial;
            rhs = r;
        }
    }
    let cut = CutPlane { coeffs: lift(d, &gamma, x.len()), rhs, constraint: 0, node: 0, method: CutMethod::Exact };
    Ok((cut.violation(x) > CUT_TOL).then_some(cut))
}

/// Projected subgradient ascent on `γ·(x̄ − x^τ)` from `γ⁰ = 0` with a
/// constant step, keeping the most violated iterate.
pub fn separate_subgradient(
    d: &DecisionDiagram,
    x: &[f64],
    iters: usize,
    rho: f64,
) -> Result<Option<CutPlane>, SeparationError> {
    check_dim(&d.vars, x)?;
    let xbar: Vec<f64> = d.vars.iter().map(|&v| x[v]).collect();
    let nl = xbar.len();
    let mut gamma = vec![0.0; nl];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut best_delta = 0.0;
    for _ in 0..iters.max(1) {
        let (xt, value) = longest_path(d, &gamma)?;
        let delta = gamma.iter().zip(&xbar).map(|(g, v)| g * v).sum::<f64>() - value;
        if delta > best_delta {
            best_delta = delta;
            best = Some((gamma.clone(), value));
        }
        let mut phi: Vec<f64> = (0..nl).map(|i| gamma[i] + rho * (xbar[i] - xt[i])).collect();
        let norm = phi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1.0 {
            phi.iter_mut().for_each(|v| *v /= norm);
        }
        gamma = phi;
    }
    Ok(best.filter(|_| best_delta > CUT_TOL).map(|(g, rhs)| CutPlane {
        coeffs: lift(d, &g, x.len()),
        rhs,
        constraint: 0,
        node: 0,
        method: CutMethod::Subgradient,
    }))
}

/// Cuts with near-duplicates suppressed.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CutPool {
    pub cuts: Vec<CutPlane>,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Whether a cut parallel to `c` (cosine above `1 - 1e-6`) with a
    /// normalized right-hand side within `1e-6` is already present.
    pub fn contains_similar(&self, c: &CutPlane) -> bool {
        let nc = c.norm();
        if nc == 0.0 {
            return true;
        }
        self.cuts.iter().any(|p| {
            let np = p.norm();
            let dot: f64 = p.coeffs.iter().zip(&c.coeffs).map(|(a, b)| a * b).sum();
            np > 0.0 && dot / (np * nc) > 1.0 - 1e-6 && (p.rhs / np - c.rhs / nc).abs() <= 1e-6
        })
    }

    /// Add unless a similar cut exists; returns whether it was added.
    pub fn add(&mut self, c: CutPlane) -> bool {
        if self.contains_similar(&c) {
            return false;
        }
        self.cuts.push(c);
        true
    }
}
