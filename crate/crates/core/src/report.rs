//! Result tables in the model's own objective sense.

use std::fmt::Write as _;

use crate::expr::{Model, Sense};
use crate::sbb::{SolveResult, Status};

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub instance: String,
    pub vars: usize,
    pub constraints: usize,
    pub status: Status,
    /// Best feasible objective, `None` without an incumbent.
    pub primal: Option<f64>,
    /// Optimistic bound in the same sense as `primal`.
    pub dual: f64,
    pub gap: f64,
    pub abs_gap: f64,
    pub nodes_explored: usize,
    pub nodes_remaining: usize,
    pub seconds: f64,
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Optimal => "OPTIMAL",
        Status::Infeasible => "INFEASIBLE",
        Status::TimeLimit => "TIME_LIMIT",
        Status::NodeLimit => "NODE_LIMIT",
    }
}

impl RunReport {
    pub fn new(instance: &str, m: &Model, r: &SolveResult) -> Self {
        RunReport {
            instance: instance.to_string(),
            vars: m.n(),
            constraints: m.constraints.len(),
            status: r.status,
            primal: r.incumbent.as_ref().map(|_| m.reported(r.primal)),
            dual: m.reported(r.dual),
            gap: r.gap,
            abs_gap: r.abs_gap,
            nodes_explored: r.nodes_explored,
            nodes_remaining: r.nodes_remaining,
            seconds: r.wall_time.as_secs_f64(),
        }
    }

    fn headers(with_time: bool) -> Vec<&'static str> {
        let mut h = vec!["Instance", "Vars", "Cons", "Status", "Primal", "Dual", "Gap", "Node Explored", "Node Remained"];
        if with_time {
            h.push("Time (s)");
        }
        h
    }

    fn cells(&self, with_time: bool) -> Vec<String> {
        let num = |v: f64| if v.is_finite() { format!("{v:.3}") } else { v.to_string() };
        let mut c = vec![
            self.instance.clone(),
            self.vars.to_string(),
            self.constraints.to_string(),
            status_name(self.status).to_string(),
            self.primal.map_or("-".to_string(), num),
            num(self.dual),
            if self.primal.is_some() { num(self.gap) } else { "-".to_string() },
            self.nodes_explored.to_string(),
            self.nodes_remaining.to_string(),
        ];
        if with_time {
            c.push(format!("{:.3}", self.seconds));
        }
        c
    }

    /// Aligned table of the given reports.
    pub fn table(rows: &[RunReport], with_time: bool) -> String {
        let head = Self::headers(with_time);
        let body: Vec<Vec<String>> = rows.iter().map(|r| r.cells(with_time)).collect();
        let widths: Vec<usize> = (0..head.len())
            .map(|j| body.iter().map(|r| r[j].len()).chain([head[j].len()]).max().unwrap())
            .collect();
        let mut s = String::new();
        let line = |s: &mut String, cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .enumerate()
                .map(|(j, c)| if j == 0 { format!("{c:<w$}", w = widths[j]) } else { format!("{c:>w$}", w = widths[j]) })
                .collect();
            let _ = writeln!(s, "{}", parts.join("  ").trim_end());
        };
        line(&mut s, &head.iter().map(|h| h.to_string()).collect::<Vec<_>>());
        for r in &body {
            line(&mut s, r);
        }
        s
    }

    /// `key=value` lines at full precision.
    pub fn machine(&self, with_time: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "instance={}", self.instance);
        let _ = writeln!(s, "vars={}", self.vars);
        let _ = writeln!(s, "constraints={}", self.constraints);
        let _ = writeln!(s, "status={}", status_name(self.status));
        match self.primal {
            Some(p) => {
                let _ = writeln!(s, "primal={p:?}");
            }
            None => s.push_str("primal=none\n"),
        }
        let _ = writeln!(s, "dual={:?}", self.dual);
        let _ = writeln!(s, "gap={:?}", self.gap);
        let _ = writeln!(s, "abs_gap={:?}", self.abs_gap);
        let _ = writeln!(s, "nodes_explored={}", self.nodes_explored);
        let _ = writeln!(s, "nodes_remaining={}", self.nodes_remaining);
        if with_time {
            let _ = writeln!(s, "seconds={:?}", self.seconds);
        }
        s
    }
}

/// Sense keyword for display.
pub fn sense_name(m: &Model) -> &'static str {
    match m.sense {
        Sense::Max => "max",
        Sense::Min => "min",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::time::Duration;

    #[test]
    fn min_model_reported_in_its_sense() {
        let m = parse("var x in [1, 3]; min x;").unwrap();
        let r = SolveResult {
            status: Status::Optimal,
            primal: -1.0,
            dual: -1.0,
            gap: 0.0,
            abs_gap: 0.0,
            incumbent: Some(vec![1.0]),
            nodes_explored: 1,
            nodes_remaining: 0,
            wall_time: Duration::ZERO,
        };
        let rep = RunReport::new("t", &m, &r);
        assert_eq!(rep.primal, Some(1.0));
        let t = RunReport::table(&[rep.clone()], false);
        let row: Vec<&str> = t.lines().nth(1).unwrap().split_whitespace().collect();
        assert_eq!(row[3..7], ["OPTIMAL", "1.000", "1.000", "0.000"]);
        assert!(rep.machine(false).contains("primal=1.0\n"));
    }
}
