mod common;

use common::*;
use ddminlp_core::expr::{analyze_monotonicity, decompose, parse, reindex, Model, ModelError, Monotonicity, Sense, Term};
use ddminlp_core::Interval;
use proptest::prelude::*;

fn model_with(e: &ddminlp_core::expr::Expression) -> Option<Model> {
    let mut m = Model::new();
    for name in ["a", "b", "c"] {
        m.add_var(name, 0.5, 2.0, false).ok()?;
    }
    m.add_le(e, 1.0).ok()?;
    m.set_objective(&x(0), Sense::Max).ok()?;
    Some(m)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, rng_seed: proptest::test_runner::RngSeed::Fixed(13), ..ProptestConfig::default() })]

    #[test]
    fn source_round_trip(e in arb_expr(), seed in 0u64..1000) {
        let Some(m) = model_with(&e) else { return Ok(()) };
        let src = m.to_source();
        let back = match parse(&src) {
            Ok(b) => b,
            // The parser folds constants and rejects undefined ones; such a
            // constraint is undefined everywhere.
            Err(ModelError::Domain(_)) => {
                let p = sample(&mut rng(seed), &m.domain());
                prop_assert!(m.constraints.iter().any(|c| c.lhs(&p).is_err()), "{}", src);
                return Ok(());
            }
            Err(err) => return Err(TestCaseError::fail(format!("{err}\n{src}"))),
        };
        prop_assert_eq!(back.constraints.len(), m.constraints.len());
        prop_assert_eq!(&back.lower, &m.lower);
        prop_assert_eq!(&back.upper, &m.upper);
        let mut r = rng(seed);
        for _ in 0..50 {
            let p = sample(&mut r, &m.domain());
            for (c, d) in m.constraints.iter().zip(&back.constraints) {
                // Constants may move between the sides.
                let a = c.lhs(&p).map(|v| v - c.rhs);
                let b = d.lhs(&p).map(|v| v - d.rhs);
                let scale = a.as_ref().map_or(1.0, |v| v.abs()) + c.rhs.abs();
                prop_assert!(agree(a.clone(), b.clone(), scale, 1e-9), "{:?} vs {:?} at {:?}\n{}", a, b, p, src);
            }
        }
        // Parsing may fold constants once; after that printing is stable.
        let again = back.to_source();
        prop_assert_eq!(parse(&again).unwrap().to_source(), again);
    }

    #[test]
    fn decomposition_preserves_value(e in arb_expr(), seed in 0u64..1000) {
        let d = decompose(&e);
        let bx = vec![iv(-2.0, 3.0); 3];
        let mut r = rng(seed);
        for _ in 0..1000 {
            let p = sample(&mut r, &bx);
            let Ok(want) = e.evaluate(&p) else { continue };
            if !want.is_finite() {
                continue;
            }
            let parts: Vec<f64> = d.terms.iter().map(|t| t.expr.evaluate(&p)).collect::<Result<_, _>>().unwrap();
            let got = parts.iter().sum::<f64>() + d.constant;
            let scale = parts.iter().map(|v| v.abs()).sum::<f64>() + d.constant.abs() + want.abs();
            prop_assert!((got - want).abs() <= 1e-9 * scale.max(1.0), "{} != {} at {:?} for {}", got, want, p, e);
        }
    }

    #[test]
    fn reindexing_preserves_value(e in arb_expr(), seed in 0u64..1000) {
        let Some(t) = Term::new(e) else { return Ok(()) };
        let bx = vec![iv(0.5, 2.0); 3];
        let re = reindex(&t, &bx);
        prop_assert_eq!(re.map.len(), t.expr.occurrences().len());
        let mut r = rng(seed);
        for _ in 0..200 {
            let p = sample(&mut r, &bx);
            let a = t.expr.evaluate(&p);
            let scale = a.as_ref().map_or(1.0, |v| v.abs());
            prop_assert!(agree(a, re.expr.evaluate(&re.lift_point(&p)), scale, 1e-12));
        }
    }

    #[test]
    fn certified_directions_hold(e in arb_expr(), seed in 0u64..1000) {
        let mut r = rng(seed);
        let bx = sub_box(&mut r, &[iv(-2.0, 3.0); 3]);
        for (v, dir) in analyze_monotonicity(&e, &bx) {
            let sign = match dir {
                Monotonicity::Nondecreasing => 1.0,
                Monotonicity::Nonincreasing => -1.0,
                Monotonicity::Unknown => continue,
            };
            for _ in 0..100 {
                let mut lo = sample(&mut r, &bx);
                let mut hi = lo.clone();
                let (s, t) = (sample(&mut r, &bx[v..=v])[0], sample(&mut r, &bx[v..=v])[0]);
                lo[v] = s.min(t);
                hi[v] = s.max(t);
                let (Ok(a), Ok(b)) = (e.evaluate(&lo), e.evaluate(&hi)) else {
                    // A certified direction implies the expression is defined on the box.
                    prop_assert!(false, "domain error inside a certified box for {}", e);
                    unreachable!()
                };
                if a.is_finite() && b.is_finite() {
                    prop_assert!(sign * (b - a) >= -1e-9 * a.abs().max(b.abs()).max(1.0),
                        "{} not {:?} in x{} on {:?}: {} then {}", e, dir, v + 1, bx, a, b);
                }
            }
        }
    }
}

#[test]
fn corpus_round_trips() {
    for case in term_corpus() {
        let mut m = Model::new();
        for (i, b) in case.bx.iter().enumerate() {
            m.add_var(&format!("v{i}"), b.lo, b.hi, false).unwrap();
        }
        m.add_le(&case.term.expr, 1.0).unwrap();
        m.set_objective(&x(0), Sense::Max).unwrap();
        let back = parse(&m.to_source()).unwrap();
        let mut r = rng(3);
        for _ in 0..100 {
            let p = sample(&mut r, &case.bx);
            let (a, b) = (m.constraints[0].lhs(&p).unwrap(), back.constraints[0].lhs(&p).unwrap());
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{}: {a} vs {b}", case.name);
        }
    }
}

#[test]
fn box_type_is_closed_interval() {
    let b = Interval::new(0.5, 2.0);
    assert!(b.contains(0.5) && b.contains(2.0));
}
