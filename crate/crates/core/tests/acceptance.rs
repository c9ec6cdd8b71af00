//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stardamp::verify::{interval_reduction_check, kirchhoff_residual, flux_balance_residual};
use stardamp::*;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn star(q: f64, y0: f64, edges: &[(f64, f64, f64, f64)]) -> ValidatedProblem {
    StarProblem { q, y0, edges: edges.iter().map(|&(t, b, c, a)| EdgeSpec::new(t, b, c, a)).collect() }
        .validate()
        .expect("valid problem")
}

fn canonical() -> ValidatedProblem {
    star(2.0, 1.0, &[(1.0, 0.5, 1.0, 1.0), (3.0, -0.3, 0.5, 0.6), (3.0, 0.2, -0.4, 0.4)])
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn lifting_norm() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..12 {
        let q = 1.0 + rng.random_range(1e-3..=4.0);
        let t1 = rng.random_range(0.3..3.0);
        let y0 = rng.random_range(0.1..2.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let p = star(q, y0, &[(t1, 0.0, 0.0, 1.0), ((q - 1.0) * t1 + 1.0, 0.0, 0.0, 1.0)]);
        let phi = p.lift_phi(&GraphMesh::build(&p, 0.1).unwrap()).unwrap();
        // Phi' = -q y0 / T1 on [0, T1/q]: int Phi^2 = y0^2 T1 / (3q), int Phi'^2 = q y0^2 / T1
        let oracle = y0 * y0 * (t1 / (3.0 * q) + q / t1);
        worst = worst.max((phi.sobolev_norm_sq() - oracle).abs() / oracle);
    }
    let elapsed = start.elapsed();
    outcome(worst <= 1e-12 && within(elapsed, 1.0), format!("max relative error {worst:e}, {elapsed:?}"))
}

fn pantograph_series_rate() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for (c, q) in [(1.0, 2.0), (0.5, 3.0)] {
        let p = star(q, 1.0, &[(1.0, 0.0, c, 1.0), (q, 0.0, 0.0, 1.0)]);
        let exact = pantograph_series(1.0, c, q, 1.0, 60).value;
        let errors: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| {
                let y = solve_cauchy(&p, &ControlProfile::zero(&p), h).unwrap();
                (y.eval(0, 1.0) - exact).abs()
            })
            .collect();
        for w in errors.windows(2) {
            let ratio = w[0] / w[1];
            ok &= (3.2..=4.8).contains(&ratio);
            detail.push(format!("(c={c}, q={q}) ratio {ratio:.3}"));
        }
    }
    let elapsed = start.elapsed();
    outcome(ok && within(elapsed, 5.0), format!("{}, {elapsed:?}", detail.join(", ")))
}

fn closed_form_damping() -> Outcome {
    let p = star(2.0, 1.0, &[(1.0, 0.0, 0.0, 1.0), (3.0, 0.0, 0.0, 1.0)]);
    let sol = solve_damping(&p, &GraphMesh::build(&p, 0.1).unwrap()).unwrap();
    // y linear 1 -> v on [0, 1] and v -> 0 on [0, l2 = 1]: J(v) = (1 - v)^2 + v^2
    let v = 0.5;
    let j = (1.0 - v) * (1.0 - v) + v * v;
    let (k, f) = (kirchhoff_residual(&p, &sol.y), flux_balance_residual(&p, &sol.y));
    let ok = (sol.vertex_value - v).abs() <= 1e-10 && (sol.energy - j).abs() <= 1e-10 && k <= 1e-10 && f <= 1e-10;
    outcome(ok, format!("vertex {}, J {}, kirchhoff {k:e}, flux {f:e}", sol.vertex_value, sol.energy))
}

fn residual_convergence() -> Outcome {
    let start = Instant::now();
    let rows = convergence_study(&canonical(), &[0.1, 0.05, 0.025, 0.0125]).unwrap();
    let elapsed = start.elapsed();
    let metrics: [(&str, fn(&ConvergenceRow) -> f64); 4] = [
        ("kirchhoff", |r| r.kirchhoff),
        ("flux", |r| r.flux),
        ("weak_residual", |r| r.weak_residual),
        ("rest_violation", |r| r.rest_violation),
    ];
    let mut ok = within(elapsed, 60.0);
    let mut detail = Vec::new();
    for (name, get) in metrics {
        let values: Vec<f64> = rows.iter().map(get).collect();
        let monotone = values.windows(2).all(|w| w[1] < w[0]);
        let factor = values[values.len() - 1] / values[0];
        ok &= monotone && factor <= 1e-3;
        detail.push(format!(
            "{name} [{}] monotone={monotone} finest/coarsest={factor:.3e}",
            values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(" ")
        ));
    }
    outcome(ok, format!("{}; {elapsed:?}", detail.join("; ")))
}

fn orthogonality_and_minimality() -> Outcome {
    let p = canonical();
    let sol = solve_damping(&p, &GraphMesh::build(&p, 0.05).unwrap()).unwrap();
    let space = SpaceW::new(&p, sol.y.mesh()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut worst_b, mut worst_drop): (f64, f64) = (0.0, f64::INFINITY);
    let mut ok = true;
    for k in 0..100 {
        let scale = 10f64.powi(k % 5 - 2);
        let c: Vec<f64> = (0..space.dim()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let w = space.reconstruct(&c).unwrap();
        let b = bilinear(&p, &sol.y, &w).unwrap().abs();
        let drop = energy(&p, &sol.y.add_scaled(1.0, &w).unwrap()).unwrap() - sol.energy;
        ok &= b <= 1e-8 * w.sobolev_norm() && drop >= -1e-8;
        worst_b = worst_b.max(b / w.sobolev_norm());
        worst_drop = worst_drop.min(drop);
    }
    outcome(ok, format!("max |B(y,w)|/|w| {worst_b:e}, min J(y+w)-J(y) {worst_drop:e}"))
}

fn interval_reduction() -> Outcome {
    let case = MatchedEdges { q: 2.0, t1: 1.0, t2: 3.0, drift: 0.3, delay_coeff: 0.7, y0: 1.0 };
    let matched: Vec<f64> = [0.1, 0.05].iter().map(|&h| interval_reduction_check(&case, h, None).unwrap()).collect();
    let hs = [0.2, 0.1, 0.05, 0.025];
    let unmatched: Vec<f64> = hs.iter().map(|&h| interval_reduction_check(&case, h, Some(0.7 * h)).unwrap()).collect();
    let decreasing = unmatched.windows(2).all(|w| w[1] < w[0]);
    let vanishing = unmatched[3] <= 0.1 * unmatched[0];
    let ok = matched.iter().all(|&m| m <= 1e-10) && decreasing && vanishing;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ");
    outcome(ok, format!("matched [{}], unmatched [{}]", fmt(&matched), fmt(&unmatched)))
}

fn homogeneity() -> Outcome {
    let p = canonical();
    let mesh = GraphMesh::build(&p, 0.05).unwrap();
    let base = solve_damping(&p, &mesh).unwrap().y;
    let norm = base.sobolev_norm();
    let mut ok = true;
    let mut detail = Vec::new();
    for s in [-1.0, 2.0, 10.0] {
        let ys = solve_damping(&p.with_initial_state(s), &mesh).unwrap().y;
        let diff = ys.add_scaled(-s, &base).unwrap().sobolev_norm();
        ok &= diff <= 1e-10 * s.abs() * norm;
        detail.push(format!("s={s}: {:.3e}", diff / (s.abs() * norm)));
    }
    outcome(ok, detail.join(", "))
}

fn positive_definiteness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    for k in 0..50 {
        let q = 1.0 + rng.random_range(1e-3..=3.0);
        let m = [2, 3, 5][k % 3];
        let t1 = rng.random_range(0.5..2.0);
        let mut edges = vec![(t1, rng.random_range(-2.0..=2.0), rng.random_range(-2.0..=2.0), 1.0)];
        for _ in 1..m {
            edges.push((
                (q - 1.0) * t1 + rng.random_range(0.3..3.0),
                rng.random_range(-2.0..=2.0),
                rng.random_range(-2.0..=2.0),
                rng.random_range(0.1..2.0),
            ));
        }
        let p = star(q, rng.random_range(-2.0..2.0), &edges);
        let h = 0.1f64.min(p.compressed_vertex_time());
        if let Err(e) = solve_damping(&p, &GraphMesh::build(&p, h).unwrap()) {
            failures.push(format!("#{k}: {e}"));
        }
    }
    outcome(failures.is_empty(), format!("50 problems, {} failures {failures:?}", failures.len()))
}

fn weight_semantics() -> Outcome {
    let (inc, out) = ((1.0, 0.5, 1.0, 1.0), (3.0, -0.3, 0.5));
    let single = star(2.0, 1.0, &[inc, (out.0, out.1, out.2, 1.0)]);
    let reference = solve_damping(&single, &GraphMesh::build(&single, 0.05).unwrap()).unwrap().y;
    let mut ok = true;
    let mut detail = Vec::new();
    for (a2, a3) in [(0.5, 0.5), (0.3, 0.7)] {
        let p = star(2.0, 1.0, &[inc, (out.0, out.1, out.2, a2), (out.0, out.1, out.2, a3)]);
        let y = solve_damping(&p, &GraphMesh::build(&p, 0.05).unwrap()).unwrap().y;
        let max_diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, z)| (x - z).abs()).fold(0.0, f64::max);
        let between = max_diff(y.values(1), y.values(2));
        let to_single = max_diff(y.values(1), reference.values(1)).max(max_diff(y.values(0), reference.values(0)));
        ok &= y.mesh().nodes(1) == reference.mesh().nodes(1) && between <= 1e-10 && to_single <= 1e-10;
        detail.push(format!("alpha=({a2},{a3}): outgoing {between:.3e}, vs m=2 {to_single:.3e}"));
    }
    outcome(ok, detail.join(", "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("lifting norm identity", lifting_norm),
        ("pantograph series convergence rate", pantograph_series_rate),
        ("closed-form damping", closed_form_damping),
        ("vertex and weak residual convergence", residual_convergence),
        ("Galerkin orthogonality and minimality", orthogonality_and_minimality),
        ("interval reduction", interval_reduction),
        ("homogeneity in y0", homogeneity),
        ("positive definiteness on random problems", positive_definiteness),
        ("weight semantics", weight_semantics),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.passed {
            failed += 1;
        }
        println!("{} [{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
