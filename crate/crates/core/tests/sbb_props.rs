mod common;

use std::collections::HashMap;

use common::*;
use ddminlp_core::dd::MergePolicy;
use ddminlp_core::expr::{parse, Model};
use ddminlp_core::sbb::{solve_traced, SolveResult, SolverConfig, Status, TraceEvent};
use ddminlp_core::separation::CutMethod;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

struct Case {
    src: &'static str,
    /// Source-sense objective on feasible points.
    oracle: fn(&[f64]) -> Option<f64>,
    axes: fn(f64) -> Vec<Vec<f64>>,
    maximize: bool,
}

fn ok(b: bool) -> Option<()> {
    b.then_some(())
}

const H: f64 = 0.01;

fn cases() -> Vec<Case> {
    vec![
        Case {
            src: "var x in [0, 2]; var y in [0, 2]; var n in [0, 3] integer;
                  con tanh(x) + 0.5 * y^2 <= 1.2; con x + n <= 3.5; max x + y + 0.5 * n;",
            oracle: |p| {
                ok(p[0].tanh() + 0.5 * p[1] * p[1] <= 1.2 && p[0] + p[2] <= 3.5)?;
                Some(p[0] + p[1] + 0.5 * p[2])
            },
            axes: |h| vec![axis(0.0, 2.0, false, h), axis(0.0, 2.0, false, h), axis(0.0, 3.0, true, h)],
            maximize: true,
        },
        Case {
            src: "var x in [0, 2]; var y in [0, 2]; con x * y >= 1; con x + y <= 3.5; min x + 2 * y;",
            oracle: |p| {
                ok(p[0] * p[1] >= 1.0 && p[0] + p[1] <= 3.5)?;
                Some(p[0] + 2.0 * p[1])
            },
            axes: |h| vec![axis(0.0, 2.0, false, h), axis(0.0, 2.0, false, h)],
            maximize: false,
        },
        Case {
            src: "var a in [0, 3] integer; var b in [0, 3] integer; var x in [0, 1];
                  con sin(a) + cos(b) + x^2 <= 1; max a + b + x;",
            oracle: |p| {
                ok(p[0].sin() + p[1].cos() + p[2] * p[2] <= 1.0)?;
                Some(p[0] + p[1] + p[2])
            },
            axes: |h| vec![axis(0.0, 3.0, true, h), axis(0.0, 3.0, true, h), axis(0.0, 1.0, false, h)],
            maximize: true,
        },
    ]
}

fn run(m: &Model, cfg: &SolverConfig) -> (SolveResult, Vec<TraceEvent>) {
    let mut events = Vec::new();
    let r = solve_traced(m, cfg, |e| events.push(e.clone())).unwrap();
    (r, events)
}

fn config(merge: MergePolicy, exact: bool, partitions: usize, width: usize) -> SolverConfig {
    SolverConfig {
        gap: 1e-3,
        time_limit: 60.0,
        partitions,
        width,
        merge,
        separation: if exact { CutMethod::Exact } else { CutMethod::Subgradient },
        exact_fallback: !exact,
        ..SolverConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, rng_seed: RngSeed::Fixed(3), ..ProptestConfig::default() })]

    #[test]
    fn solver_invariants(
        k in 0usize..3, g in any::<bool>(), exact in any::<bool>(),
        partitions in 2usize..9, width in proptest::sample::select(&[8usize, 64, 5000][..]),
    ) {
        let c = &cases()[k];
        let m = parse(c.src).unwrap();
        let cfg = config(if g { MergePolicy::G } else { MergePolicy::F }, exact, partitions, width);
        let (r, events) = run(&m, &cfg);

        // Node bounds never rise along a parent chain.
        let dual: HashMap<usize, f64> = events.iter().map(|e| (e.node, e.dual)).collect();
        for e in &events {
            if let Some(p) = e.parent.and_then(|p| dual.get(&p)) {
                prop_assert!(e.dual <= p + 1e-9, "node {} bound {} above parent {}", e.node, e.dual, p);
            }
        }

        prop_assert_eq!(r.status, Status::Optimal);
        let x = r.incumbent.clone().expect("feasible instance");
        prop_assert!(m.is_feasible(&x, 1e-6), "{:?}", x);
        let val = (c.oracle)(&x).expect("oracle accepts the incumbent");
        prop_assert!((val - m.reported(r.primal)).abs() <= 1e-6 * (1.0 + val.abs()), "{} vs {}", val, m.reported(r.primal));

        // Sandwich: the grid best is a feasible value, so the dual bound must cover it.
        // Result values are in the internal maximization sense.
        let flip = if c.maximize { 1.0 } else { -1.0 };
        let (best, _) = grid_best(&(c.axes)(H), &|p| (c.oracle)(p).map(|v| flip * v)).unwrap();
        prop_assert!(r.dual >= best - 1e-6, "dual {} below grid {}", r.dual, best);
        prop_assert!(r.primal <= r.dual + 1e-9);
    }
}

#[test]
fn repeated_solves_are_identical() {
    for c in cases() {
        let m = parse(c.src).unwrap();
        let cfg = config(MergePolicy::G, false, 6, 64);
        let (a, ta) = run(&m, &cfg);
        let (b, tb) = run(&m, &cfg);
        assert_eq!((a.nodes_explored, a.nodes_remaining), (b.nodes_explored, b.nodes_remaining));
        assert_eq!((a.primal.to_bits(), a.dual.to_bits()), (b.primal.to_bits(), b.dual.to_bits()));
        assert_eq!(a.incumbent, b.incumbent);
        let key = |t: &[TraceEvent]| t.iter().map(|e| (e.node, e.parent, e.lp_value.to_bits(), e.cuts_added)).collect::<Vec<_>>();
        assert_eq!(key(&ta), key(&tb));
    }
}
