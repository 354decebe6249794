//! Dense bounded-variable primal simplex.
//!
//! Every row gets a slack column whose bounds encode the row sense, so the
//! working form is `A x + s = b` with bounds on every column. Rows whose slack
//! starts out of bounds receive an artificial column for phase I.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowSense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row<T> {
    pub coeffs: Vec<T>,
    pub sense: RowSense,
    pub rhs: T,
}

/// `max objective·x` subject to rows and per-variable bounds (`None` is infinite).
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub rows: Vec<Row<T>>,
    pub lower: Vec<Option<T>>,
    pub upper: Vec<Option<T>>,
}

impl<T: Scalar> LinearProgram<T> {
    /// Variables default to `[0, +inf)`.
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            rows: Vec::new(),
            lower: vec![Some(T::zero()); n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_bounds(&mut self, j: usize, lo: Option<T>, hi: Option<T>) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    pub fn add_row(&mut self, coeffs: Vec<T>, sense: RowSense, rhs: T) {
        self.rows.push(Row { coeffs, sense, rhs });
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimension("bound vectors must match objective length".into()));
        }
        let finite = |v: &T| v.is_finite_value();
        if !self.objective.iter().all(finite) {
            return Err(LpError::NotFinite);
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Dimension(format!("row {i} has {} coefficients, expected {n}", row.coeffs.len())));
            }
            if !row.coeffs.iter().all(finite) || !finite(&row.rhs) {
                return Err(LpError::NotFinite);
            }
        }
        for j in 0..n {
            if self.lower[j].as_ref().is_some_and(|v| !finite(v)) || self.upper[j].as_ref().is_some_and(|v| !finite(v)) {
                return Err(LpError::NotFinite);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpOutcome<T> {
    pub status: LpStatus,
    /// Optimal point, or the last feasible basis point when unbounded.
    pub x: Vec<T>,
    pub objective: T,
    /// Improving direction when unbounded.
    pub ray: Option<Vec<T>>,
    /// Row duals at optimality, empty otherwise.
    pub duals: Vec<T>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite coefficient")]
    NotFinite,
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

pub fn solve_lp<T: Scalar>(p: &LinearProgram<T>) -> Result<LpOutcome<T>, LpError> {
    p.validate()?;
    let n = p.num_vars();
    for j in 0..n {
        if let (Some(l), Some(u)) = (&p.lower[j], &p.upper[j]) {
            if l > u {
                return Ok(infeasible(n));
            }
        }
    }
    let mut s = Simplex::new(p);
    s.run()
}

fn infeasible<T: Scalar>(n: usize) -> LpOutcome<T> {
    LpOutcome {
        status: LpStatus::Infeasible,
        x: vec![T::zero(); n],
        objective: T::zero(),
        ray: None,
        duals: Vec::new(),
    }
}

enum Step<T> {
    Flip(T),
    Pivot { row: usize, step: T, to_upper: bool },
    Unbounded,
}

enum PhaseEnd {
    Optimal,
    /// Entering column and its direction (+1 or -1).
    Unbounded { col: usize, dir: i8 },
}

struct Simplex<'a, T> {
    p: &'a LinearProgram<T>,
    m: usize,
    n: usize,
    ncols: usize,
    first_art: usize,
    a0: Vec<T>,
    t: Vec<T>,
    lo: Vec<Option<T>>,
    hi: Vec<Option<T>>,
    x: Vec<T>,
    basis: Vec<usize>,
    pos: Vec<Option<usize>>,
    cost: Vec<T>,
    d: Vec<T>,
    bland: bool,
    degenerate_run: usize,
    since_refactor: usize,
    iterations: usize,
}

const REFACTOR_EVERY: usize = 100;

impl<'a, T: Scalar> Simplex<'a, T> {
    fn new(p: &'a LinearProgram<T>) -> Self {
        let m = p.rows.len();
        let n = p.num_vars();
        let zero = T::zero();

        let mut x: Vec<T> = (0..n)
            .map(|j| match (&p.lower[j], &p.upper[j]) {
                (Some(l), _) => l.clone(),
                (None, Some(u)) => u.clone(),
                (None, None) => zero.clone(),
            })
            .collect();

        // Slack value each row would need with structurals at their start bound.
        let mut need_art = Vec::new();
        let mut slack_val = Vec::with_capacity(m);
        let mut slack_lo = Vec::with_capacity(m);
        let mut slack_hi = Vec::with_capacity(m);
        for (i, row) in p.rows.iter().enumerate() {
            let mut v = row.rhs.clone();
            for j in 0..n {
                v = v - row.coeffs[j].clone() * x[j].clone();
            }
            let (l, u) = match row.sense {
                RowSense::Le => (Some(zero.clone()), None),
                RowSense::Ge => (None, Some(zero.clone())),
                RowSense::Eq => (Some(zero.clone()), Some(zero.clone())),
            };
            let below = l.as_ref().is_some_and(|l| v < *l);
            let above = u.as_ref().is_some_and(|u| v > *u);
            if below || above {
                need_art.push((i, v.clone()));
            }
            slack_val.push(v);
            slack_lo.push(l);
            slack_hi.push(u);
        }

        let k = need_art.len();
        let ncols = n + m + k;
        let first_art = n + m;
        let mut a0 = vec![zero.clone(); m * ncols];
        for (i, row) in p.rows.iter().enumerate() {
            for j in 0..n {
                a0[i * ncols + j] = row.coeffs[j].clone();
            }
            a0[i * ncols + n + i] = T::one();
        }

        let mut lo: Vec<Option<T>> = p.lower.clone();
        let mut hi: Vec<Option<T>> = p.upper.clone();
        lo.extend(slack_lo);
        hi.extend(slack_hi);
        lo.extend(std::iter::repeat(Some(zero.clone())).take(k));
        hi.extend(std::iter::repeat(None).take(k));

        x.extend(slack_val);
        x.extend(std::iter::repeat(zero.clone()).take(k));

        let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
        let mut sign = vec![T::one(); m];
        for (a, (i, v)) in need_art.iter().enumerate() {
            let col = first_art + a;
            // The slack leaves at its violated bound; the artificial absorbs the rest.
            let bound = if lo[n + i].as_ref().is_some_and(|l| v < l) {
                lo[n + i].clone().unwrap()
            } else {
                hi[n + i].clone().unwrap()
            };
            let diff = v.clone() - bound.clone();
            let sg = if diff < zero { -T::one() } else { T::one() };
            a0[*i * ncols + col] = sg.clone();
            x[n + i] = bound;
            x[col] = diff.abs();
            basis[*i] = col;
            sign[*i] = sg;
        }

        // B is diagonal with entries +-1, so B^-1 a0 only flips artificial rows.
        let mut t = a0.clone();
        for i in 0..m {
            if sign[i] < zero {
                for v in &mut t[i * ncols..(i + 1) * ncols] {
                    *v = -v.clone();
                }
            }
        }

        let mut pos = vec![None; ncols];
        for (i, &b) in basis.iter().enumerate() {
            pos[b] = Some(i);
        }

        Simplex {
            p,
            m,
            n,
            ncols,
            first_art,
            a0,
            t,
            lo,
            hi,
            x,
            basis,
            pos,
            cost: vec![zero.clone(); ncols],
            d: vec![zero; ncols],
            bland: false,
            degenerate_run: 0,
            since_refactor: 0,
            iterations: 0,
        }
    }

    fn run(&mut self) -> Result<LpOutcome<T>, LpError> {
        let zero = T::zero();
        if self.first_art < self.ncols {
            for c in self.first_art..self.ncols {
                self.cost[c] = -T::one();
            }
            self.compute_reduced_costs();
            match self.phase()? {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded { .. } => {
                    return Err(LpError::NumericalBreakdown("phase I reported unbounded".into()));
                }
            }
            let mut infeas = zero.clone();
            for c in self.first_art..self.ncols {
                infeas = infeas + self.x[c].clone();
            }
            let scale = self
                .p
                .rows
                .iter()
                .map(|r| r.rhs.abs())
                .fold(T::one(), |acc, v| if v > acc { v } else { acc });
            if infeas > T::feasibility_tol() * scale {
                return Ok(infeasible(self.n));
            }
            self.drive_out_artificials();
            for c in self.first_art..self.ncols {
                self.lo[c] = Some(zero.clone());
                self.hi[c] = Some(zero.clone());
                if self.pos[c].is_none() {
                    self.x[c] = zero.clone();
                }
            }
        }

        for c in 0..self.ncols {
            self.cost[c] = if c < self.n { self.p.objective[c].clone() } else { zero.clone() };
        }
        self.bland = false;
        self.degenerate_run = 0;
        self.compute_reduced_costs();
        let end = self.phase()?;

        if !T::EXACT {
            self.refactor()?;
            self.verify_feasible()?;
        }

        let x: Vec<T> = (0..self.n).map(|j| self.clamped(j)).collect();
        let mut objective = zero.clone();
        for j in 0..self.n {
            objective = objective + self.p.objective[j].clone() * x[j].clone();
        }
        match end {
            PhaseEnd::Optimal => {
                let duals = (0..self.m).map(|i| -self.d[self.n + i].clone()).collect();
                Ok(LpOutcome { status: LpStatus::Optimal, x, objective, ray: None, duals })
            }
            PhaseEnd::Unbounded { col, dir } => {
                let dirv = if dir > 0 { T::one() } else { -T::one() };
                let mut ray = vec![zero; self.n];
                if col < self.n {
                    ray[col] = dirv.clone();
                }
                for i in 0..self.m {
                    let b = self.basis[i];
                    if b < self.n {
                        ray[b] = -(dirv.clone() * self.t[i * self.ncols + col].clone());
                    }
                }
                Ok(LpOutcome { status: LpStatus::Unbounded, x, objective, ray: Some(ray), duals: Vec::new() })
            }
        }
    }

    fn clamped(&self, j: usize) -> T {
        let mut v = self.x[j].clone();
        if let Some(l) = &self.lo[j] {
            if v < *l {
                v = l.clone();
            }
        }
        if let Some(u) = &self.hi[j] {
            if v > *u {
                v = u.clone();
            }
        }
        v
    }

    fn compute_reduced_costs(&mut self) {
        let nc = self.ncols;
        for j in 0..nc {
            let mut dj = self.cost[j].clone();
            for i in 0..self.m {
                let cb = &self.cost[self.basis[i]];
                if !cb.is_zero() {
                    dj = dj - cb.clone() * self.t[i * nc + j].clone();
                }
            }
            self.d[j] = dj;
        }
    }

    fn at_lower(&self, j: usize) -> bool {
        self.lo[j].as_ref().is_some_and(|l| self.x[j] <= *l)
    }

    fn at_upper(&self, j: usize) -> bool {
        self.hi[j].as_ref().is_some_and(|u| self.x[j] >= *u)
    }

    fn fixed(&self, j: usize) -> bool {
        matches!((&self.lo[j], &self.hi[j]), (Some(l), Some(u)) if l >= u)
    }

    fn price(&self) -> Option<(usize, i8)> {
        let tol = T::optimality_tol();
        let mut best: Option<(usize, i8, T)> = None;
        for j in 0..self.ncols {
            if self.pos[j].is_some() || self.fixed(j) {
                continue;
            }
            let dj = &self.d[j];
            let dir = if *dj > tol && !self.at_upper(j) {
                1
            } else if *dj < -tol.clone() && !self.at_lower(j) {
                -1
            } else {
                continue;
            };
            if self.bland {
                return Some((j, dir));
            }
            let mag = dj.abs();
            if best.as_ref().is_none_or(|(_, _, b)| mag > *b) {
                best = Some((j, dir, mag));
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn ratio(&self, j: usize, dir: i8) -> Step<T> {
        let nc = self.ncols;
        let ptol = T::pivot_tol();
        let zero = T::zero();
        let mut best: Option<(usize, T, bool, T)> = None;
        for i in 0..self.m {
            let mut alpha = self.t[i * nc + j].clone();
            if dir < 0 {
                alpha = -alpha;
            }
            let b = self.basis[i];
            let cand = if alpha > ptol {
                self.lo[b].as_ref().map(|l| ((self.x[b].clone() - l.clone()) / alpha.clone(), false))
            } else if alpha < -ptol.clone() {
                self.hi[b].as_ref().map(|u| ((u.clone() - self.x[b].clone()) / (-alpha.clone()), true))
            } else {
                None
            };
            let Some((mut r, to_upper)) = cand else { continue };
            if r < zero {
                r = zero.clone();
            }
            let mag = alpha.abs();
            let better = match &best {
                None => true,
                Some((bi, br, _, bm)) => {
                    let diff = r.clone() - br.clone();
                    if diff < -ptol.clone() {
                        true
                    } else if diff > ptol {
                        false
                    } else if self.bland {
                        self.basis[i] < self.basis[*bi]
                    } else {
                        mag > *bm
                    }
                }
            };
            if better {
                best = Some((i, r, to_upper, mag));
            }
        }
        let flip = match (&self.lo[j], &self.hi[j]) {
            (Some(l), Some(u)) => Some(u.clone() - l.clone()),
            _ => None,
        };
        match (best, flip) {
            (None, None) => Step::Unbounded,
            (None, Some(f)) => Step::Flip(f),
            (Some((i, r, up, _)), f) => match f {
                Some(f) if f <= r => Step::Flip(f),
                _ => Step::Pivot { row: i, step: r, to_upper: up },
            },
        }
    }

    fn phase(&mut self) -> Result<PhaseEnd, LpError> {
        let limit = 100 * (self.m + self.ncols) + 1000;
        loop {
            self.iterations += 1;
            if self.iterations > limit {
                return Err(LpError::IterationLimit(limit));
            }
            let Some((j, dir)) = self.price() else {
                if !T::EXACT && self.since_refactor > 0 {
                    // Confirm optimality on a freshly factored tableau.
                    self.refactor()?;
                    if self.price().is_some() {
                        continue;
                    }
                }
                return Ok(PhaseEnd::Optimal);
            };
            let step = self.ratio(j, dir);
            let dirv = if dir > 0 { T::one() } else { -T::one() };
            match step {
                Step::Unbounded => return Ok(PhaseEnd::Unbounded { col: j, dir }),
                Step::Flip(f) => {
                    self.move_basics(j, &dirv, &f);
                    self.x[j] = if dir > 0 { self.hi[j].clone().unwrap() } else { self.lo[j].clone().unwrap() };
                    self.note_step(&f);
                }
                Step::Pivot { row, step, to_upper } => {
                    self.move_basics(j, &dirv, &step);
                    self.x[j] = self.x[j].clone() + dirv * step.clone();
                    let leaving = self.basis[row];
                    self.x[leaving] = if to_upper {
                        self.hi[leaving].clone().unwrap()
                    } else {
                        self.lo[leaving].clone().unwrap()
                    };
                    self.pivot(row, j);
                    self.note_step(&step);
                    self.since_refactor += 1;
                    if !T::EXACT && self.since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                    }
                }
            }
        }
    }

    fn note_step(&mut self, step: &T) {
        if *step <= T::pivot_tol() {
            self.degenerate_run += 1;
            if self.degenerate_run > 2 * (self.m + self.ncols) {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
    }

    fn move_basics(&mut self, j: usize, dirv: &T, step: &T) {
        let nc = self.ncols;
        for i in 0..self.m {
            let a = &self.t[i * nc + j];
            if a.is_zero() {
                continue;
            }
            let b = self.basis[i];
            self.x[b] = self.x[b].clone() - a.clone() * dirv.clone() * step.clone();
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let piv = self.t[r * nc + q].clone();
        for v in &mut self.t[r * nc..(r + 1) * nc] {
            *v = v.clone() / piv.clone();
        }
        let prow: Vec<T> = self.t[r * nc..(r + 1) * nc].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * nc + q].clone();
            if f.is_zero() {
                continue;
            }
            for (c, pv) in prow.iter().enumerate() {
                if !pv.is_zero() {
                    let cell = &mut self.t[i * nc + c];
                    *cell = cell.clone() - f.clone() * pv.clone();
                }
            }
            self.t[i * nc + q] = T::zero();
        }
        let f = self.d[q].clone();
        if !f.is_zero() {
            for (c, pv) in prow.iter().enumerate() {
                if !pv.is_zero() {
                    self.d[c] = self.d[c].clone() - f.clone() * pv.clone();
                }
            }
            self.d[q] = T::zero();
        }
        let leaving = self.basis[r];
        self.pos[leaving] = None;
        self.pos[q] = Some(r);
        self.basis[r] = q;
    }

    /// Recompute `B^-1 a0`, basic values, and reduced costs from the original data.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let nc = self.ncols;
        self.since_refactor = 0;
        if m == 0 {
            self.compute_reduced_costs();
            return Ok(());
        }
        // Gauss-Jordan on [B | a0 | r] with partial pivoting.
        let w = nc + 1;
        let mut bm = vec![T::zero(); m * m];
        for i in 0..m {
            for (k, &b) in self.basis.iter().enumerate() {
                bm[i * m + k] = self.a0[i * nc + b].clone();
            }
        }
        let mut rhs_side = vec![T::zero(); m * w];
        for i in 0..m {
            for c in 0..nc {
                rhs_side[i * w + c] = self.a0[i * nc + c].clone();
            }
            let mut r = self.p.rows[i].rhs.clone();
            for c in 0..nc {
                if self.pos[c].is_none() {
                    let a = &self.a0[i * nc + c];
                    if !a.is_zero() {
                        r = r - a.clone() * self.x[c].clone();
                    }
                }
            }
            rhs_side[i * w + nc] = r;
        }
        for col in 0..m {
            let mut piv_row = col;
            let mut piv_mag = bm[col * m + col].abs();
            for i in col + 1..m {
                let mag = bm[i * m + col].abs();
                if mag > piv_mag {
                    piv_mag = mag;
                    piv_row = i;
                }
            }
            if piv_mag <= T::pivot_tol() || piv_mag.is_zero() {
                return Err(LpError::NumericalBreakdown("singular basis on refactorization".into()));
            }
            if piv_row != col {
                for k in 0..m {
                    bm.swap(col * m + k, piv_row * m + k);
                }
                for k in 0..w {
                    rhs_side.swap(col * w + k, piv_row * w + k);
                }
            }
            let piv = bm[col * m + col].clone();
            for k in 0..m {
                bm[col * m + k] = bm[col * m + k].clone() / piv.clone();
            }
            for k in 0..w {
                rhs_side[col * w + k] = rhs_side[col * w + k].clone() / piv.clone();
            }
            for i in 0..m {
                if i == col {
                    continue;
                }
                let f = bm[i * m + col].clone();
                if f.is_zero() {
                    continue;
                }
                for k in 0..m {
                    let v = bm[col * m + k].clone();
                    bm[i * m + k] = bm[i * m + k].clone() - f.clone() * v;
                }
                for k in 0..w {
                    let v = rhs_side[col * w + k].clone();
                    if !v.is_zero() {
                        rhs_side[i * w + k] = rhs_side[i * w + k].clone() - f.clone() * v;
                    }
                }
            }
        }
        // Row k of the reduced system belongs to basis position k.
        for k in 0..m {
            for c in 0..nc {
                self.t[k * nc + c] = rhs_side[k * w + c].clone();
            }
            self.x[self.basis[k]] = rhs_side[k * w + nc].clone();
        }
        for k in 0..m {
            let b = self.basis[k];
            for c in 0..nc {
                let v = if c == b { T::one() } else if self.pos[c].is_some() { T::zero() } else { continue };
                self.t[k * nc + c] = v;
            }
        }
        self.compute_reduced_costs();
        Ok(())
    }

    fn verify_feasible(&self) -> Result<(), LpError> {
        for &b in &self.basis {
            let v = &self.x[b];
            let scale = T::one() + v.abs();
            let tol = T::feasibility_tol() * scale;
            let bad_lo = self.lo[b].as_ref().is_some_and(|l| v.clone() < l.clone() - tol.clone());
            let bad_hi = self.hi[b].as_ref().is_some_and(|u| v.clone() > u.clone() + tol.clone());
            if bad_lo || bad_hi {
                return Err(LpError::NumericalBreakdown(format!("basic column {b} out of bounds after refactorization")));
            }
        }
        Ok(())
    }

    fn drive_out_artificials(&mut self) {
        let nc = self.ncols;
        for r in 0..self.m {
            let b = self.basis[r];
            if b < self.first_art {
                continue;
            }
            let mut best: Option<(usize, T)> = None;
            for c in 0..self.first_art {
                if self.pos[c].is_some() {
                    continue;
                }
                let mag = self.t[r * nc + c].abs();
                if mag > T::pivot_tol() && best.as_ref().is_none_or(|(_, bm)| mag > *bm) {
                    best = Some((c, mag));
                }
            }
            if let Some((c, _)) = best {
                self.x[b] = T::zero();
                self.pivot(r, c);
            }
            // Otherwise the row is redundant; the artificial stays basic at zero.
        }
    }
}
