use ddminlp_core::lp::{solve_lp, LinearProgram, LpStatus, RowSense};
use num::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram<f64> {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=10);
    let obj = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
    let mut p = LinearProgram::new(obj);
    for j in 0..n {
        let lo = rng.gen_range(-5..=0) as f64;
        let hi = lo + rng.gen_range(0..=6) as f64;
        p.set_bounds(j, Some(lo), Some(hi));
    }
    for _ in 0..m {
        let coeffs = (0..n).map(|_| rng.gen_range(-4..=4) as f64).collect();
        let sense = match rng.gen_range(0..10) {
            0 => RowSense::Eq,
            1..=3 => RowSense::Ge,
            _ => RowSense::Le,
        };
        p.add_row(coeffs, sense, rng.gen_range(-6..=8) as f64);
    }
    p
}

fn to_rational(p: &LinearProgram<f64>) -> LinearProgram<BigRational> {
    let q = |v: f64| BigRational::from_float(v).unwrap();
    let mut r = LinearProgram::new(p.objective.iter().map(|&v| q(v)).collect());
    for j in 0..p.num_vars() {
        r.set_bounds(j, p.lower[j].map(q), p.upper[j].map(q));
    }
    for row in &p.rows {
        r.add_row(row.coeffs.iter().map(|&v| q(v)).collect(), row.sense, q(row.rhs));
    }
    r
}

fn feasible(p: &LinearProgram<f64>, x: &[f64], tol: f64) -> bool {
    for j in 0..x.len() {
        if x[j] < p.lower[j].unwrap() - tol || x[j] > p.upper[j].unwrap() + tol {
            return false;
        }
    }
    p.rows.iter().all(|row| {
        let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
        match row.sense {
            RowSense::Le => lhs <= row.rhs + tol,
            RowSense::Ge => lhs >= row.rhs - tol,
            RowSense::Eq => (lhs - row.rhs).abs() <= tol,
        }
    })
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                for k in c..n {
                    a[i][k] -= f * a[c][k];
                }
                b[i] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over all basic points of the bounded polytope.
fn brute_force(p: &LinearProgram<f64>) -> Option<f64> {
    let n = p.num_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = p.rows.iter().map(|r| (r.coeffs.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), p.lower[j].unwrap()));
        planes.push((e, p.upper[j].unwrap()));
    }
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let b = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(p, &x, 1e-9) {
                let v: f64 = p.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
        // next combination
        let k = planes.len();
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for t in i + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

fn dual_objective(p: &LinearProgram<f64>, y: &[f64]) -> f64 {
    let n = p.num_vars();
    let mut val: f64 = p.rows.iter().zip(y).map(|(r, yi)| r.rhs * yi).sum();
    for j in 0..n {
        let dj = p.objective[j] - p.rows.iter().zip(y).map(|(r, yi)| r.coeffs[j] * yi).sum::<f64>();
        val += if dj > 0.0 { dj * p.upper[j].unwrap() } else { dj * p.lower[j].unwrap() };
    }
    val
}

#[test]
fn agrees_with_vertex_enumeration_and_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1f2e3d);
    let mut optimal = 0;
    for case in 0..1000 {
        let p = random_lp(&mut rng);
        let out = solve_lp(&p).unwrap();
        let exact = solve_lp(&to_rational(&p)).unwrap();
        let brute = brute_force(&p);
        assert_eq!(out.status, exact.status, "case {case}");
        match brute {
            None => assert_eq!(out.status, LpStatus::Infeasible, "case {case}"),
            Some(v) => {
                optimal += 1;
                assert_eq!(out.status, LpStatus::Optimal, "case {case}");
                assert!((out.objective - v).abs() <= 1e-6, "case {case}: {} vs {v}", out.objective);
                assert!((exact.objective.to_f64().unwrap() - v).abs() <= 1e-6, "case {case}");
                assert!(feasible(&p, &out.x, 1e-7), "case {case}");
            }
        }
    }
    assert!(optimal > 200, "too few feasible instances: {optimal}");
}

#[test]
fn duals_certify_optimality() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for case in 0..1000 {
        let p = random_lp(&mut rng);
        let out = solve_lp(&p).unwrap();
        if out.status != LpStatus::Optimal {
            continue;
        }
        for (row, y) in p.rows.iter().zip(&out.duals) {
            match row.sense {
                RowSense::Le => assert!(*y >= -1e-9, "case {case}"),
                RowSense::Ge => assert!(*y <= 1e-9, "case {case}"),
                RowSense::Eq => {}
            }
        }
        let dual = dual_objective(&p, &out.duals);
        assert!((dual - out.objective).abs() <= 1e-6, "case {case}: dual {dual} primal {}", out.objective);
    }
}

#[test]
fn ray_improves_objective_and_respects_rows() {
    // max x + y, x - y <= 1, y >= 0, x free from below
    let mut p = LinearProgram::new(vec![1.0, 1.0]);
    p.set_bounds(0, None, None);
    p.add_row(vec![1.0, -1.0], RowSense::Le, 1.0);
    let out = solve_lp(&p).unwrap();
    assert_eq!(out.status, LpStatus::Unbounded);
    let r = out.ray.unwrap();
    assert!(r[0] + r[1] > 0.0);
    assert!(r[0] - r[1] <= 1e-9);
    assert!(r[1] >= -1e-9);
}

proptest! {
    #[test]
    fn optimal_points_are_feasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_lp(&mut rng);
        let out = solve_lp(&p).unwrap();
        if out.status == LpStatus::Optimal {
            prop_assert!(feasible(&p, &out.x, 1e-7));
        }
    }
}
