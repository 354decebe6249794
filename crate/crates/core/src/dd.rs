//! Width-limited relaxed decision diagrams for one constraint `Σ g_k ≤ b`.
//!
//! Arc layer `i` carries the `i`-th support variable of the constraint in
//! model order. Labels are endpoints of partition cells; node states are
//! accumulated lower bounds of the terms already completed along a path.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::bounds::{BoundError, BoundRule};
use crate::expr::{ConstraintSpec, Expression, Term};
use crate::Interval;

/// Slack on the terminal gate and on state coalescing.
pub const STATE_TOL: f64 = 1e-9;

/// Width value meaning "no limit".
pub const UNLIMITED: usize = usize::MAX;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DdError {
    #[error("constraint has a term over more than one variable")]
    NotSeparable,
    #[error("partition scheme has no cells for variable {0}")]
    Uncovered(usize),
    #[error("diagram has more than {0} paths")]
    TooManyPaths(usize),
    #[error("malformed diagram dump at line {0}")]
    Dump(usize),
    #[error(transparent)]
    Bound(#[from] BoundError),
}

/// Per-variable cover of the domain by closed cells.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionScheme {
    pub cells: Vec<Vec<Interval>>,
}

impl PartitionScheme {
    /// Hull of each variable's cells.
    pub fn hull_box(&self) -> Vec<Interval> {
        self.cells
            .iter()
            .map(|c| c.iter().skip(1).fold(c[0], |a, b| a.hull(b)))
            .collect()
    }
}

/// `count` equal cells per continuous variable; integer variables get
/// singletons or near-equal consecutive integer blocks.
pub fn make_partitions(bx: &[Interval], integer: &[bool], count: usize) -> PartitionScheme {
    let count = count.max(1);
    let cells = bx
        .iter()
        .zip(integer)
        .map(|(d, &int)| {
            if int {
                let (lo, hi) = (d.lo.ceil() as i64, d.hi.floor() as i64);
                let m = (hi - lo + 1).max(1) as usize;
                let k = count.min(m);
                let (q, r) = (m / k, m % k);
                let mut a = lo;
                (0..k)
                    .map(|j| {
                        let len = (q + usize::from(j < r)) as i64;
                        let cell = Interval::new(a as f64, (a + len - 1).min(hi) as f64);
                        a += len;
                        cell
                    })
                    .collect()
            } else if d.is_point() || count == 1 {
                vec![*d]
            } else {
                let w = d.width() / count as f64;
                (0..count)
                    .map(|j| {
                        let lo = d.lo + j as f64 * w;
                        let hi = if j + 1 == count { d.hi } else { d.lo + (j + 1) as f64 * w };
                        Interval::new(lo, hi)
                    })
                    .collect()
            }
        })
        .collect();
    PartitionScheme { cells }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergePolicy {
    /// Merge the lowest states into one node.
    F,
    /// Merge within equal-length state buckets.
    G,
}

impl MergePolicy {
    pub fn groups(self, states: &[f64], width: usize) -> Vec<Vec<usize>> {
        match self {
            MergePolicy::F => merge_f(states, width),
            MergePolicy::G => merge_g(states, width),
        }
    }
}

fn sorted_indices(states: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..states.len()).collect();
    idx.sort_by(|&a, &b| states[a].total_cmp(&states[b]).then(a.cmp(&b)));
    idx
}

fn singletons(states: &[f64]) -> Vec<Vec<usize>> {
    sorted_indices(states).into_iter().map(|i| vec![i]).collect()
}

/// Node groups after merging the `κ-ω+1` lowest states, in ascending state order.
pub fn merge_f(states: &[f64], width: usize) -> Vec<Vec<usize>> {
    let width = width.max(1);
    if states.len() <= width {
        return singletons(states);
    }
    let idx = sorted_indices(states);
    let cut = states.len() - width + 1;
    let mut out = vec![idx[..cut].to_vec()];
    out.extend(idx[cut..].iter().map(|&i| vec![i]));
    out
}

/// Node groups after bucketing the state range into `ω` equal lengths.
///
/// A state on a bucket boundary goes to the lower bucket; the largest state
/// goes to the last one. Empty buckets yield no group. Infinite states join
/// the first bucket.
pub fn merge_g(states: &[f64], width: usize) -> Vec<Vec<usize>> {
    let width = width.max(1);
    if states.len() <= width {
        return singletons(states);
    }
    let idx = sorted_indices(states);
    let finite: Vec<f64> = states.iter().copied().filter(|s| s.is_finite()).collect();
    let smin = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let smax = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let gamma = (smax - smin) / width as f64;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); width];
    for i in idx {
        let s = states[i];
        let k = if !s.is_finite() || gamma <= 0.0 || !gamma.is_finite() {
            0
        } else {
            let k = ((s - smin) / gamma).ceil() as i64 - 1;
            k.clamp(0, width as i64 - 1) as usize
        };
        buckets[k].push(i);
    }
    buckets.retain(|b| !b.is_empty());
    buckets
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub state: f64,
    /// Relative sub-domain per layer position; untracked positions hold the
    /// variable's full cell hull.
    pub dom: Vec<Interval>,
}

/// `tail` and `head` index node layers `i` and `i + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub tail: usize,
    pub head: usize,
    pub label: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecisionDiagram {
    /// Model variable of each arc layer.
    pub vars: Vec<usize>,
    /// Node layers `0..=vars.len()`; the root is `layers[0][0]`, the terminal
    /// `layers[n][0]`. States ascend within a layer.
    pub layers: Vec<Vec<Node>>,
    pub arcs: Vec<Vec<Arc>>,
}

/// Which nodes of a fresh layer are identified.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Coalesce {
    /// Equal state and identical tracked sub-domains.
    #[default]
    StateAndDomains,
    /// Equal state; sub-domains of the shared node are hulled. Coarser, and
    /// what the published worked examples use.
    State,
}

/// Terms grouped by variable set, each with a bound rule fixed at a root box.
#[derive(Clone, Debug)]
pub struct CompiledConstraint {
    pub vars: Vec<usize>,
    pub rhs: f64,
    pub coalesce: Coalesce,
    groups: Vec<Group>,
}

#[derive(Clone, Debug)]
struct Group {
    term: Term,
    rule: BoundRule,
    /// Layer positions of the term's variables; the last one completes it.
    positions: Vec<usize>,
}

impl CompiledConstraint {
    pub fn new(c: &ConstraintSpec, root: &[Interval]) -> Self {
        let vars = c.support();
        let mut keyed: Vec<(Vec<usize>, Vec<Expression>)> = Vec::new();
        for t in &c.terms {
            match keyed.iter_mut().find(|(k, _)| *k == t.vars) {
                Some((_, es)) => es.push(t.expr.clone()),
                None => keyed.push((t.vars.clone(), vec![t.expr.clone()])),
            }
        }
        let groups = keyed
            .into_iter()
            .map(|(hv, mut es)| {
                let expr = if es.len() == 1 { es.pop().unwrap() } else { Expression::Sum(es) };
                let term = Term { expr, vars: hv };
                let rule = BoundRule::select(&term, root);
                let positions = term.vars.iter().map(|v| vars.binary_search(v).unwrap()).collect();
                Group { term, rule, positions }
            })
            .collect();
        CompiledConstraint { vars, rhs: c.rhs, coalesce: Coalesce::default(), groups }
    }

    pub fn with_coalesce(mut self, c: Coalesce) -> Self {
        self.coalesce = c;
        self
    }

    pub fn is_separable(&self) -> bool {
        self.groups.iter().all(|g| g.positions.len() == 1)
    }

    /// For each position, the last layer at which its relative sub-domain is read.
    fn last_use(&self) -> Vec<Option<usize>> {
        let mut last = vec![None; self.vars.len()];
        for g in &self.groups {
            let hmax = *g.positions.last().unwrap();
            for &p in &g.positions[..g.positions.len() - 1] {
                last[p] = Some(last[p].map_or(hmax, |l: usize| l.max(hmax)));
            }
        }
        last
    }
}

struct Candidate {
    state: f64,
    tail: usize,
    cell: usize,
}

fn same_state(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= STATE_TOL
}

fn cell_arcs(cell: Interval) -> impl Iterator<Item = f64> {
    let hi = (!cell.is_point()).then_some(cell.hi);
    std::iter::once(cell.lo).chain(hi)
}

/// Build without parallel-arc reduction or pruning.
pub fn build_unreduced(
    cc: &CompiledConstraint,
    p: &PartitionScheme,
    width: usize,
    merge: MergePolicy,
) -> Result<DecisionDiagram, DdError> {
    let n = cc.vars.len();
    let mut cells = Vec::with_capacity(n);
    for &v in &cc.vars {
        match p.cells.get(v) {
            Some(c) if !c.is_empty() => cells.push(c.clone()),
            _ => return Err(DdError::Uncovered(v)),
        }
    }
    let hulls: Vec<Interval> = cells.iter().map(|c| c.iter().skip(1).fold(c[0], |a, b| a.hull(b))).collect();
    let mut scratch = p.hull_box();
    let last_use = cc.last_use();
    let tracked = |pos: usize, layer: usize| pos < layer && last_use[pos].is_some_and(|l| layer <= l);

    let mut layers = vec![vec![Node { state: 0.0, dom: hulls.clone() }]];
    let mut arcs: Vec<Vec<Arc>> = Vec::with_capacity(n);
    for i in 0..n {
        let completing: Vec<&Group> = cc.groups.iter().filter(|g| *g.positions.last().unwrap() == i).collect();
        // Keyed by cell and the sub-domains the completing terms read.
        let mut cache: HashMap<(usize, Vec<u64>), f64> = HashMap::new();
        let mut cands = Vec::with_capacity(layers[i].len() * cells[i].len());
        for (u, node) in layers[i].iter().enumerate() {
            for (j, cell) in cells[i].iter().enumerate() {
                let mut key = Vec::new();
                for g in &completing {
                    for &q in &g.positions[..g.positions.len() - 1] {
                        key.push(node.dom[q].lo.to_bits());
                        key.push(node.dom[q].hi.to_bits());
                    }
                }
                let eta = match cache.get(&(j, key.clone())) {
                    Some(&e) => e,
                    None => {
                        let mut eta = 0.0;
                        for g in &completing {
                            for &q in &g.positions {
                                scratch[cc.vars[q]] = if q == i { *cell } else { node.dom[q] };
                            }
                            eta += match g.rule.eval(&g.term, &scratch) {
                                Ok(v) => v,
                                // No usable bound on this piece: keep every path.
                                Err(BoundError::Domain(_)) => f64::NEG_INFINITY,
                                Err(e) => return Err(e.into()),
                            };
                        }
                        cache.insert((j, key), eta);
                        eta
                    }
                };
                cands.push(Candidate { state: node.state + eta, tail: u, cell: j });
            }
        }

        let mut layer_arcs = Vec::new();
        if i + 1 == n {
            let mut tstate = f64::INFINITY;
            for c in &cands {
                if c.state <= cc.rhs + STATE_TOL {
                    tstate = tstate.min(c.state);
                    for l in cell_arcs(cells[i][c.cell]) {
                        layer_arcs.push(Arc { tail: c.tail, head: 0, label: l });
                    }
                }
            }
            let state = if tstate.is_finite() || tstate == f64::NEG_INFINITY { tstate } else { 0.0 };
            layers.push(vec![Node { state, dom: hulls.clone() }]);
            arcs.push(layer_arcs);
            break;
        }

        cands.sort_by(|a, b| a.state.total_cmp(&b.state).then(a.tail.cmp(&b.tail)).then(a.cell.cmp(&b.cell)));
        let keyed: Vec<usize> = match cc.coalesce {
            Coalesce::State => Vec::new(),
            Coalesce::StateAndDomains => (0..=i).filter(|&q| tracked(q, i + 1)).collect(),
        };
        let mut next: Vec<f64> = Vec::new();
        // Nodes of the current state cluster with their sub-domain keys.
        let mut cluster: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut cluster_state = 0.0;
        for c in &cands {
            if next.last().is_none_or(|&s| !same_state(s, c.state)) {
                cluster.clear();
                cluster_state = c.state;
            }
            let key: Vec<u64> = keyed
                .iter()
                .flat_map(|&q| {
                    let d = if q == i { cells[i][c.cell] } else { layers[i][c.tail].dom[q] };
                    [d.lo.to_bits(), d.hi.to_bits()]
                })
                .collect();
            let head = *cluster.entry(key).or_insert_with(|| {
                next.push(cluster_state);
                next.len() - 1
            });
            for l in cell_arcs(cells[i][c.cell]) {
                layer_arcs.push(Arc { tail: c.tail, head, label: l });
            }
        }
        let mut nodes: Vec<Node> = next.iter().map(|&s| Node { state: s, dom: hulls.clone() }).collect();
        update_domains(&mut nodes, &layers[i], &layer_arcs, i, &tracked);

        if nodes.len() > width {
            let states: Vec<f64> = nodes.iter().map(|n| n.state).collect();
            let groups = merge.groups(&states, width);
            let mut remap = vec![0; nodes.len()];
            let mut merged = Vec::with_capacity(groups.len());
            for (k, grp) in groups.iter().enumerate() {
                let mut m = nodes[grp[0]].clone();
                for &g in &grp[1..] {
                    m.state = m.state.min(nodes[g].state);
                    for (a, b) in m.dom.iter_mut().zip(&nodes[g].dom) {
                        *a = a.hull(b);
                    }
                }
                for &g in grp {
                    remap[g] = k;
                }
                merged.push(m);
            }
            for a in &mut layer_arcs {
                a.head = remap[a.head];
            }
            nodes = merged;
        }
        layers.push(nodes);
        arcs.push(layer_arcs);
    }
    Ok(DecisionDiagram { vars: cc.vars.clone(), layers, arcs })
}

/// Relative sub-domains of a fresh layer `i + 1` by the recursion over tails.
fn update_domains(
    nodes: &mut [Node],
    tails: &[Node],
    arcs: &[Arc],
    i: usize,
    tracked: &impl Fn(usize, usize) -> bool,
) {
    let layer = i + 1;
    let positions: Vec<usize> = (0..layer).filter(|&p| tracked(p, layer)).collect();
    if positions.is_empty() {
        return;
    }
    let mut seen = vec![false; nodes.len()];
    for a in arcs {
        let h = a.head;
        for &p in &positions {
            let incoming = if p == i { Interval::point(a.label) } else { tails[a.tail].dom[p] };
            nodes[h].dom[p] = if seen[h] { nodes[h].dom[p].hull(&incoming) } else { incoming };
        }
        seen[h] = true;
    }
}

/// Full construction: build, reduce parallel arcs, prune.
pub fn build(
    cc: &CompiledConstraint,
    p: &PartitionScheme,
    width: usize,
    merge: MergePolicy,
) -> Result<DecisionDiagram, DdError> {
    let d = build_unreduced(cc, p, width, merge)?;
    Ok(prune_unreachable(reduce_parallel_arcs(d)))
}

/// Build for a constraint whose terms are all univariate; rules are chosen on
/// the partitions' hull box.
pub fn build_separable(
    c: &ConstraintSpec,
    p: &PartitionScheme,
    width: usize,
    merge: MergePolicy,
) -> Result<DecisionDiagram, DdError> {
    let cc = CompiledConstraint::new(c, &p.hull_box());
    if !cc.is_separable() {
        return Err(DdError::NotSeparable);
    }
    build(&cc, p, width, merge)
}

/// Build for a general constraint; rules are chosen on the partitions' hull box.
pub fn build_nonseparable(
    c: &ConstraintSpec,
    p: &PartitionScheme,
    width: usize,
    merge: MergePolicy,
) -> Result<DecisionDiagram, DdError> {
    let cc = CompiledConstraint::new(c, &p.hull_box());
    build(&cc, p, width, merge)
}

/// Keep only the smallest and largest label between each node pair.
pub fn reduce_parallel_arcs(mut d: DecisionDiagram) -> DecisionDiagram {
    for layer in &mut d.arcs {
        layer.sort_by(|a, b| a.tail.cmp(&b.tail).then(a.head.cmp(&b.head)).then(a.label.total_cmp(&b.label)));
        let mut out: Vec<Arc> = Vec::with_capacity(layer.len());
        let mut k = 0;
        while k < layer.len() {
            let mut e = k;
            while e + 1 < layer.len() && layer[e + 1].tail == layer[k].tail && layer[e + 1].head == layer[k].head {
                e += 1;
            }
            out.push(layer[k]);
            if layer[e].label != layer[k].label {
                out.push(layer[e]);
            }
            k = e + 1;
        }
        *layer = out;
    }
    d
}

/// Drop nodes off every root-terminal path. An empty diagram keeps only the
/// root and terminal.
pub fn prune_unreachable(mut d: DecisionDiagram) -> DecisionDiagram {
    let n = d.arcs.len();
    let mut live: Vec<Vec<bool>> = d.layers.iter().map(|l| vec![false; l.len()]).collect();
    live[n] = vec![true; d.layers[n].len()];
    for i in (0..n).rev() {
        for a in &d.arcs[i] {
            if live[i + 1][a.head] {
                live[i][a.tail] = true;
            }
        }
    }
    let mut fwd: Vec<Vec<bool>> = d.layers.iter().map(|l| vec![false; l.len()]).collect();
    fwd[0][0] = live[0][0];
    for i in 0..n {
        for a in &d.arcs[i] {
            if fwd[i][a.tail] && live[i + 1][a.head] {
                fwd[i + 1][a.head] = true;
            }
        }
    }
    let keep_ends = !fwd[0][0];
    let mut remap: Vec<Vec<Option<usize>>> = Vec::with_capacity(n + 1);
    for (i, layer) in d.layers.iter_mut().enumerate() {
        let mut ids = vec![None; layer.len()];
        let mut kept = Vec::new();
        for (k, node) in layer.drain(..).enumerate() {
            let end = (i == 0 || i == n) && k == 0;
            if fwd[i][k] || (keep_ends && end) {
                ids[k] = Some(kept.len());
                kept.push(node);
            }
        }
        *layer = kept;
        remap.push(ids);
    }
    for (i, layer) in d.arcs.iter_mut().enumerate() {
        layer.retain(|a| fwd[i][a.tail] && fwd[i + 1][a.head]);
        for a in layer.iter_mut() {
            a.tail = remap[i][a.tail].unwrap();
            a.head = remap[i + 1][a.head].unwrap();
        }
    }
    d
}

impl DecisionDiagram {
    /// No root-terminal path.
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty() || self.arcs.last().is_none_or(|l| l.is_empty()) || {
            let d = prune_unreachable(self.clone());
            d.arcs.last().is_none_or(|l| l.is_empty())
        }
    }

    pub fn width(&self) -> usize {
        self.layers.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.iter().map(Vec::len).sum()
    }

    /// Dense model-space point from a point over the arc layers.
    pub fn lift(&self, y: &[f64], n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (&v, &val) in self.vars.iter().zip(y) {
            x[v] = val;
        }
        x
    }

    /// Label vectors of all root-terminal paths, deduplicated and sorted.
    pub fn enumerate_solutions(&self, cap: usize) -> Result<Vec<Vec<f64>>, DdError> {
        let n = self.arcs.len();
        let mut out = Vec::new();
        if n == 0 || self.layers[0].is_empty() {
            return Ok(out);
        }
        let mut out_arcs: Vec<Vec<Vec<&Arc>>> = self.layers.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        for (i, layer) in self.arcs.iter().enumerate() {
            for a in layer {
                out_arcs[i][a.tail].push(a);
            }
        }
        let mut path = Vec::with_capacity(n);
        let mut count = 0usize;
        fn dfs(
            i: usize,
            node: usize,
            n: usize,
            out_arcs: &[Vec<Vec<&Arc>>],
            path: &mut Vec<f64>,
            out: &mut Vec<Vec<f64>>,
            count: &mut usize,
            cap: usize,
        ) -> Result<(), DdError> {
            if i == n {
                *count += 1;
                if *count > cap {
                    return Err(DdError::TooManyPaths(cap));
                }
                out.push(path.clone());
                return Ok(());
            }
            for a in &out_arcs[i][node] {
                path.push(a.label);
                dfs(i + 1, a.head, n, out_arcs, path, out, count, cap)?;
                path.pop();
            }
            Ok(())
        }
        dfs(0, 0, n, &out_arcs, &mut path, &mut out, &mut count, cap)?;
        out.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        out.dedup();
        Ok(out)
    }

    /// Plain-text dump: a `vars` line, then `node <layer> <id> <state>` and
    /// `arc <tail> <head> <label>` lines with 1-based layers and global ids.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let vars: Vec<String> = self.vars.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "vars {}", vars.join(" "));
        let offsets = self.offsets();
        for (i, layer) in self.layers.iter().enumerate() {
            for (k, node) in layer.iter().enumerate() {
                let _ = writeln!(s, "node {} {} {:?}", i + 1, offsets[i] + k, node.state);
            }
        }
        for (i, layer) in self.arcs.iter().enumerate() {
            for a in layer {
                let _ = writeln!(s, "arc {} {} {:?}", offsets[i] + a.tail, offsets[i + 1] + a.head, a.label);
            }
        }
        s
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.layers.len());
        let mut acc = 0;
        for l in &self.layers {
            off.push(acc);
            acc += l.len();
        }
        off
    }

    /// Inverse of [`dump`](Self::dump); relative sub-domains are not restored.
    pub fn parse_dump(text: &str) -> Result<Self, DdError> {
        let mut vars = Vec::new();
        let mut nodes: Vec<(usize, usize, f64)> = Vec::new();
        let mut raw_arcs: Vec<(usize, usize, f64)> = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let bad = || DdError::Dump(ln + 1);
            let mut it = line.split_whitespace();
            match it.next() {
                None => continue,
                Some("vars") => {
                    for t in it {
                        vars.push(t.parse().map_err(|_| bad())?);
                    }
                }
                Some(kind @ ("node" | "arc")) => {
                    let a: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    let b: usize = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    let v: f64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                    if kind == "node" {
                        nodes.push((a, b, v));
                    } else {
                        raw_arcs.push((a, b, v));
                    }
                }
                Some(_) => return Err(bad()),
            }
        }
        let nl = vars.len() + 1;
        let mut layers: Vec<Vec<Node>> = vec![Vec::new(); nl];
        let mut place: HashMap<usize, (usize, usize)> = HashMap::new();
        for &(layer, id, state) in &nodes {
            if layer == 0 || layer > nl {
                return Err(DdError::Dump(0));
            }
            place.insert(id, (layer - 1, layers[layer - 1].len()));
            layers[layer - 1].push(Node { state, dom: Vec::new() });
        }
        let mut arcs = vec![Vec::new(); vars.len()];
        for &(t, h, label) in &raw_arcs {
            let (&(lt, kt), &(lh, kh)) = (place.get(&t).ok_or(DdError::Dump(0))?, place.get(&h).ok_or(DdError::Dump(0))?);
            if lh != lt + 1 {
                return Err(DdError::Dump(0));
            }
            arcs[lt].push(Arc { tail: kt, head: kh, label });
        }
        Ok(DecisionDiagram { vars, layers, arcs })
    }
}

impl fmt::Display for DecisionDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}
