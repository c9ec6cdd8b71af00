use proptest::prelude::*;
use stardamp::verify::{flux_balance_residual, interval_reduction_check, kirchhoff_residual};
use stardamp::*;

/// Random valid star problems with two or three edges.
fn problems() -> impl Strategy<Value = ValidatedProblem> {
    (
        1.2f64..3.5,
        0.5f64..1.5,
        -2.0f64..2.0,
        prop::collection::vec((0.5f64..2.0, -2.0f64..2.0, -2.0f64..2.0, 0.2f64..2.0), 2..=3),
    )
        .prop_map(|(q, t1, y0, raw)| {
            let edges = raw
                .iter()
                .enumerate()
                .map(|(j, &(extra, b, c, a))| {
                    if j == 0 {
                        EdgeSpec::new(t1, b, c, 1.0)
                    } else {
                        EdgeSpec::new((q - 1.0) * t1 + extra, b, c, a)
                    }
                })
                .collect();
            StarProblem { q, y0, edges }.validate().unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vertex_residual_routes_coincide(p in problems(), seed in 0u64..1000) {
        let mesh = GraphMesh::build(&p, 0.2).unwrap();
        let space = SpaceW::new(&p, &mesh).unwrap();
        let phi = p.lift_phi(&mesh).unwrap();
        let coeffs: Vec<f64> = (0..space.dim()).map(|d| ((d as u64 * 7919 + seed) % 97) as f64 / 48.0 - 1.0).collect();
        let y = phi.add_scaled(1.0, &space.reconstruct(&coeffs).unwrap()).unwrap();
        let (k, f) = (kirchhoff_residual(&p, &y), flux_balance_residual(&p, &y));
        prop_assert!((k - f).abs() <= 1e-10 * (1.0 + k), "{} vs {}", k, f);
    }

    #[test]
    fn minimiser_satisfies_discrete_identities(p in problems()) {
        let sol = solve_damping(&p, &GraphMesh::build(&p, 0.2).unwrap()).unwrap();
        let u = extract_control(&p, &sol.y).unwrap();
        // the energy of the extracted controls is the minimum
        prop_assert!((u.weighted_energy(&p) - sol.energy).abs() <= 1e-10 * (1.0 + sol.energy));
        prop_assert!(sol.energy >= 0.0);
        // its rest intervals are at rest
        for j in 1..p.edge_count() {
            for (&t, &v) in sol.y.mesh().nodes(j).iter().zip(sol.y.values(j)) {
                if t >= p.rest_onset(j) {
                    prop_assert_eq!(v, 0.0);
                }
            }
        }
        prop_assert!(verify::weak_residual_tilde(&p, &sol.y, sol.y.mesh()).unwrap() <= 1e-9);
    }

    #[test]
    fn energy_is_quadratic_in_y0(p in problems(), s in -5.0f64..5.0) {
        let mesh = GraphMesh::build(&p, 0.25).unwrap();
        let base = solve_damping(&p, &mesh).unwrap();
        let scaled = solve_damping(&p.with_initial_state(s * p.y0()), &mesh).unwrap();
        prop_assert!((scaled.energy - s * s * base.energy).abs() <= 1e-9 * (1.0 + s * s * base.energy));
    }

    #[test]
    fn energy_does_not_increase_on_nested_meshes(p in problems()) {
        let coarse = GraphMesh::build(&p, 0.25).unwrap();
        let fine = coarse.refine();
        let jc = solve_damping(&p, &coarse).unwrap().energy;
        let jf = solve_damping(&p, &fine).unwrap().energy;
        prop_assert!(jf <= jc + 1e-10 * (1.0 + jc), "{} > {}", jf, jc);
    }

    #[test]
    fn identical_outgoing_edges_share_a_trajectory(
        q in 1.2f64..3.0, b in -1.5f64..1.5, c in -1.5f64..1.5, a in 0.05f64..0.95,
    ) {
        let incoming = EdgeSpec::new(1.0, 0.3, -0.6, 1.0);
        let out = |alpha| EdgeSpec::new(q, b, c, alpha);
        let pair = StarProblem { q, y0: 1.0, edges: vec![incoming, out(a), out(1.0 - a)] }.validate().unwrap();
        let single = StarProblem { q, y0: 1.0, edges: vec![incoming, out(1.0)] }.validate().unwrap();
        let y = solve_damping(&pair, &GraphMesh::build(&pair, 0.1).unwrap()).unwrap().y;
        let z = solve_damping(&single, &GraphMesh::build(&single, 0.1).unwrap()).unwrap().y;
        for (v1, v2) in y.values(1).iter().zip(y.values(2)) {
            prop_assert!((v1 - v2).abs() <= 1e-9);
        }
        for (v, w) in y.values(1).iter().zip(z.values(1)) {
            prop_assert!((v - w).abs() <= 1e-9);
        }
    }

    #[test]
    fn matched_edges_reduce_to_interval(
        q in 1.3f64..3.0, t2_extra in 0.3f64..2.0, b in -1.0f64..1.0, c in -1.0f64..1.0, y0 in -2.0f64..2.0,
    ) {
        let case = MatchedEdges { q, t1: 1.0, t2: (q - 1.0) + t2_extra, drift: b, delay_coeff: c, y0 };
        prop_assert!(interval_reduction_check(&case, 0.1, None).unwrap() <= 1e-10);
    }
}
