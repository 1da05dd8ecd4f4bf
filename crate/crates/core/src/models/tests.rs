use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;

use super::*;
use crate::graph::build_graph;
use crate::paths::path_counts;
use crate::testutil::{g0, nonempty_graph, regular_graph};

fn idx(g: &LabeledDigraph, id: &str) -> usize {
    g.space().node_index(id).unwrap()
}

#[test]
fn dcsbm_on_g0() {
    let g = g0();
    let m = fit_dcsbm(&g).unwrap();
    assert_eq!(m.theta_out(idx(&g, "1"), 0), 1.0);
    assert_eq!(m.theta_out(idx(&g, "2"), 0), 0.0);
    assert_eq!(m.omega(), &[vec![1.0, 1.0], vec![1.0, 1.0]]);
    assert_eq!(expected_adjacency(&m, idx(&g, "1"), idx(&g, "2")), 0.5);
}

#[test]
fn dcsbm_equal_degrees_are_uniform() {
    let g = build_graph(
        &[("a", "b", 1), ("b", "c", 1), ("c", "a", 1)],
        &[("a", "x"), ("b", "x"), ("c", "x")],
    )
    .unwrap();
    let m = fit_dcsbm(&g).unwrap();
    for i in 0..3 {
        assert_relative_eq!(m.theta_out(i, 0), 1.0 / 3.0);
        assert_relative_eq!(m.theta_in(i, 0), 1.0 / 3.0);
    }
}

#[test]
fn zero_out_degree_group_is_uniform() {
    let g = build_graph(
        &[("a", "c", 1), ("b", "c", 2)],
        &[("a", "x"), ("b", "x"), ("c", "y"), ("d", "y")],
    )
    .unwrap();
    let m = fit_dcsbm(&g).unwrap();
    assert_eq!(m.theta_out(idx(&g, "c"), 0), 0.5);
    assert_eq!(m.theta_out(idx(&g, "d"), 0), 0.5);
    assert_eq!(m.omega()[1], vec![0.0, 0.0]);
    assert_eq!(expected_adjacency(&m, idx(&g, "c"), idx(&g, "a")), 0.0);
}

#[test]
fn empty_graph_is_rejected() {
    let g = build_graph::<&str>(&[], &[("a", "x")]).unwrap();
    assert!(matches!(fit_dcsbm(&g), Err(Error::EmptyGraph)));
    assert!(matches!(fit_mixed_group(&g), Err(Error::EmptyGraph)));
    assert!(matches!(
        fit_mixed_node(&g, &SolverConfig::default()),
        Err(Error::EmptyGraph)
    ));
}

#[test]
fn mixed_group_on_g0() {
    let g = g0();
    let m = fit_mixed_group(&g).unwrap();
    let (one, two) = (idx(&g, "1"), idx(&g, "2"));
    for s in 0..2 {
        assert_eq!(m.theta_out(one, s), 1.0);
        assert_eq!(m.theta_out(two, s), 0.0);
    }
    assert_eq!(m.omega(), &[vec![1.0, 1.0], vec![1.0, 1.0]]);
    assert!(m.normalization_violation() == 0.0);
    assert_eq!(expected_adjacency(&m, one, idx(&g, "3")), 1.0);
    assert_eq!(expected_adjacency(&m, two, idx(&g, "3")), 0.0);
}

#[test]
fn mixed_node_matches_closed_form_for_equal_degrees() {
    // Every node has out-degree 3 and in-degree 3: a loop, one edge inside
    // its group and one across.
    let edges = [
        ("a", "a", 1),
        ("b", "b", 1),
        ("c", "c", 1),
        ("d", "d", 1),
        ("a", "b", 1),
        ("b", "a", 1),
        ("c", "d", 1),
        ("d", "c", 1),
        ("a", "c", 1),
        ("b", "d", 1),
        ("c", "a", 1),
        ("d", "b", 1),
    ];
    let groups = [("a", "x"), ("b", "x"), ("c", "y"), ("d", "y")];
    let g = build_graph(&edges, &groups).unwrap();
    let st = GroupStats::from_graph(&g);
    assert!(st.d_out_node.iter().all(|&d| d == st.d_out_node[0]));
    assert!(st.d_in_node.iter().all(|&d| d == st.d_in_node[0]));
    let cfg = SolverConfig {
        max_iterations: 10_000,
        tolerance: 1e-12,
    };
    let m = fit_mixed_node(&g, &cfg).unwrap();
    for i in 0..4 {
        for s in 0..2 {
            let expected = st.d_out_node_group[i][s] as f64 / st.d_out_node[i] as f64;
            assert_relative_eq!(m.theta_out(i, s), expected, epsilon = 1e-10);
            let expected = st.d_in_node_group[i][s] as f64 / st.d_in_node[i] as f64;
            assert_relative_eq!(m.theta_in(i, s), expected, epsilon = 1e-10);
        }
    }
    // Equal degrees make the fitted expectations reproduce every
    // per-(node, group) degree.
    let e = m.expected_out_degrees();
    for i in 0..4 {
        for s in 0..2 {
            assert_relative_eq!(e[i][s], st.d_out_node_group[i][s] as f64, epsilon = 1e-8);
        }
    }
}

#[test]
fn mixed_node_single_group_is_forced() {
    let g = build_graph(&[("a", "b", 2), ("b", "a", 1)], &[("a", "x"), ("b", "x")]).unwrap();
    let m = fit_mixed_node(&g, &SolverConfig::default()).unwrap();
    for i in 0..2 {
        assert_eq!(m.theta_out(i, 0), 1.0);
        assert_eq!(m.theta_in(i, 0), 1.0);
    }
}

#[test]
fn mixed_node_on_g0_is_stationary() {
    let g = g0();
    let cfg = SolverConfig {
        max_iterations: 100_000,
        tolerance: 1e-10,
    };
    let m = fit_mixed_node(&g, &cfg).unwrap();
    let report = m.solver().unwrap();
    assert!(report.residual <= 1e-10);
    assert!(stationarity_residual(&m, &g).unwrap() <= 1e-10);
    assert!(m.normalization_violation() <= 1e-12);
    // Group-to-group totals are matched by the omega update.
    let blocks = m.block_means();
    for r in 0..2 {
        for s in 0..2 {
            assert_relative_eq!(blocks[r][s], 1.0, epsilon = 1e-9);
        }
    }
    // Nodes with edges to a group get propensity there; node 2 never sends.
    let one = idx(&g, "1");
    assert!(m.theta_out(one, 0) > 0.0 && m.theta_out(one, 1) > 0.0);
}

/// Node "1" needs two thirds of the a->c edges but node "3" sends only there,
/// so no propensity split reproduces the shares and omega diverges.
fn unattained() -> LabeledDigraph {
    build_graph(
        &[("1", "0", 2), ("1", "1", 1), ("1", "2", 2), ("3", "0", 1)],
        &[("0", "c"), ("1", "a"), ("2", "b"), ("3", "a")],
    )
    .unwrap()
}

#[test]
fn mixed_node_reports_non_convergence() {
    let cfg = SolverConfig {
        max_iterations: 2_000,
        tolerance: 1e-9,
    };
    match fit_mixed_node(&unattained(), &cfg) {
        Err(Error::NonConvergence {
            iterations,
            residual,
        }) => {
            assert_eq!(iterations, 2_000);
            assert!(residual.is_finite() && residual > 1e-9);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn likelihood_of_empty_graph_under_zero_model() {
    let g = build_graph::<&str>(&[], &[("a", "x"), ("b", "x")]).unwrap();
    let m = FittedModel::from_parameters(
        ModelKind::Dcsbm,
        g.space().clone(),
        vec![vec![0.5]; 2],
        vec![vec![0.5]; 2],
        vec![vec![0.0]],
    )
    .unwrap();
    assert_eq!(log_likelihood(&m, &g).unwrap(), 0.0);
}

#[test]
fn impossible_edge_has_minus_infinite_likelihood() {
    let g = build_graph(&[("a", "b", 1)], &[("a", "x"), ("b", "y")]).unwrap();
    let m = FittedModel::from_parameters(
        ModelKind::Dcsbm,
        g.space().clone(),
        vec![vec![1.0]; 2],
        vec![vec![1.0]; 2],
        vec![vec![1.0, 0.0], vec![1.0, 1.0]],
    )
    .unwrap();
    assert_eq!(log_likelihood(&m, &g).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn likelihood_gap_on_g0() {
    let g = g0();
    let mg = log_likelihood(&fit_mixed_group(&g).unwrap(), &g).unwrap();
    let dc = log_likelihood(&fit_dcsbm(&g).unwrap(), &g).unwrap();
    // Hand evaluation: every mixed mean on an edge is 1, four edges total.
    assert_relative_eq!(mg, -4.0, epsilon = 1e-12);
    assert_relative_eq!(mg - dc, 4.0 * 2f64.ln(), epsilon = 1e-12);
}

#[test]
fn likelihood_rejects_foreign_graph() {
    let g = g0();
    let other = build_graph(&[("1", "2", 1)], &[("1", "r"), ("2", "r")]).unwrap();
    let m = fit_dcsbm(&g).unwrap();
    assert!(matches!(
        log_likelihood(&m, &other),
        Err(Error::MismatchedSpace)
    ));
}

#[test]
fn multi_edges_use_log_factorial() {
    let g = build_graph(&[("a", "a", 3)], &[("a", "x")]).unwrap();
    let m = fit_dcsbm(&g).unwrap();
    // mu = 3: 3 ln 3 - 3 - ln 6
    let expected = 3.0 * 3f64.ln() - 3.0 - 6f64.ln();
    assert_relative_eq!(log_likelihood(&m, &g).unwrap(), expected, epsilon = 1e-12);
}

#[test]
fn expected_paths_on_g0() {
    let g = g0();
    let m = fit_mixed_group(&g).unwrap();
    let one = expected_path_counts(&m, 1).unwrap();
    assert_eq!(one.expected, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
    let two = expected_path_counts(&m, 2).unwrap();
    let observed = path_counts(&g, 2).unwrap().counts;
    for r in 0..2 {
        for s in 0..2 {
            assert_eq!(two.expected[r][s], observed[r][s] as f64);
        }
    }
    assert_eq!(two.self_loop_bias, Some(vec![0, 0]));
    assert!(matches!(
        expected_path_counts(&m, 3),
        Err(Error::UnsupportedPathLength(3))
    ));
}

#[test]
fn self_loops_bias_expected_paths() {
    let g = build_graph(&[("1", "1", 2)], &[("1", "r")]).unwrap();
    let m = fit_mixed_group(&g).unwrap();
    let two = expected_path_counts(&m, 2).unwrap();
    assert_eq!(two.expected, vec![vec![4.0]]);
    assert_eq!(path_counts(&g, 2).unwrap().counts, vec![vec![2]]);
    assert_eq!(two.self_loop_bias, Some(vec![2]));
}

#[test]
fn rejects_invalid_parameters() {
    let g = g0();
    let space = g.space().clone();
    let bad_norm = FittedModel::from_parameters(
        ModelKind::Dcsbm,
        space.clone(),
        vec![vec![0.7]; 4],
        vec![vec![0.5]; 4],
        vec![vec![1.0; 2]; 2],
    );
    assert!(bad_norm.is_err());
    let negative = FittedModel::from_parameters(
        ModelKind::Dcsbm,
        space.clone(),
        vec![vec![0.5]; 4],
        vec![vec![0.5]; 4],
        vec![vec![1.0, -1.0], vec![1.0, 1.0]],
    );
    assert!(negative.is_err());
    let wrong_shape = FittedModel::from_parameters(
        ModelKind::MixedNode,
        space,
        vec![vec![0.5]; 4],
        vec![vec![0.5]; 4],
        vec![vec![1.0; 2]; 2],
    );
    assert!(wrong_shape.is_err());
}

#[test]
fn json_round_trip_is_exact() {
    // Every node has out- and in-degree 2, so all three kinds fit.
    let g = build_graph(
        &[
            ("a", "b", 1),
            ("b", "c", 1),
            ("c", "d", 1),
            ("d", "a", 1),
            ("a", "c", 1),
            ("b", "a", 1),
            ("c", "b", 1),
            ("d", "d", 1),
        ],
        &[("a", "x"), ("b", "x"), ("c", "y"), ("d", "y")],
    )
    .unwrap();
    for kind in [
        ModelKind::Dcsbm,
        ModelKind::MixedGroup,
        ModelKind::MixedNode,
    ] {
        let m = fit(&g, kind, &SolverConfig::default()).unwrap();
        let back = FittedModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert!(back.space().as_ref() == g.space().as_ref());
    }
}

#[test]
fn json_with_wrong_schema_is_rejected() {
    let m = fit_dcsbm(&g0()).unwrap();
    let text = m
        .to_json()
        .unwrap()
        .replace("dsbm.fitted_model/1", "other/9");
    assert!(matches!(
        FittedModel::from_json(&text),
        Err(Error::ModelDocument(_))
    ));
}

#[test]
fn kind_names_parse() {
    for kind in [
        ModelKind::Dcsbm,
        ModelKind::MixedGroup,
        ModelKind::MixedNode,
    ] {
        assert_eq!(kind.name().parse::<ModelKind>().unwrap(), kind);
    }
    assert!("sbm".parse::<ModelKind>().is_err());
}

fn strip_counts(m: &FittedModel) -> FittedModel {
    FittedModel::from_parameters(
        m.kind(),
        Arc::clone(m.space()),
        m.theta_out_rows().to_vec(),
        m.theta_in_rows().to_vec(),
        m.omega().to_vec(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fits_satisfy_normalization(g in nonempty_graph()) {
        prop_assert!(fit_dcsbm(&g).unwrap().normalization_violation() <= 1e-12);
        prop_assert!(fit_mixed_group(&g).unwrap().normalization_violation() <= 1e-12);
    }

    #[test]
    fn mixed_node_converges_or_reports(g in nonempty_graph()) {
        // The node-constrained maximum is not always attained: a node may need
        // more than its whole budget to match its share of a block, and the
        // supremum then lies at infinite omega.
        let cfg = SolverConfig { max_iterations: 5_000, tolerance: 1e-9 };
        match fit_mixed_node(&g, &cfg) {
            Ok(m) => {
                prop_assert!(m.normalization_violation() <= 1e-12);
                prop_assert!(m.solver().unwrap().residual <= cfg.tolerance);
                let all = m.theta_out_rows().iter().chain(m.theta_in_rows()).flatten();
                prop_assert!(all.clone().all(|&v| v >= 0.0 && v.is_finite()));
                let mg = log_likelihood(&fit_mixed_group(&g).unwrap(), &g).unwrap();
                let mn = log_likelihood(&m, &g).unwrap();
                prop_assert!(mg >= mn - 1e-9 * mg.abs().max(1.0));
            }
            Err(Error::NonConvergence { iterations, residual }) => {
                prop_assert_eq!(iterations, cfg.max_iterations);
                prop_assert!(residual.is_finite());
            }
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }

    #[test]
    fn mixed_group_omega_is_m(g in nonempty_graph()) {
        let st = GroupStats::from_graph(&g);
        let m = fit_mixed_group(&g).unwrap();
        for r in 0..g.group_count() {
            for s in 0..g.group_count() {
                prop_assert_eq!(m.omega()[r][s], st.m[r][s] as f64);
            }
        }
    }

    #[test]
    fn mixed_group_reproduces_node_group_degrees(g in nonempty_graph()) {
        let st = GroupStats::from_graph(&g);
        let m = fit_mixed_group(&g).unwrap();
        let (eo, ei) = (m.expected_out_degrees(), m.expected_in_degrees());
        // Summing expected_adjacency over each target group is exact too.
        for i in 0..g.node_count() {
            for s in 0..g.group_count() {
                prop_assert_eq!(eo[i][s], st.d_out_node_group[i][s] as f64);
                prop_assert_eq!(ei[i][s], st.d_in_node_group[i][s] as f64);
                let summed: f64 = g.space().members(s).iter()
                    .map(|&j| expected_adjacency(&m, i, j)).sum();
                let d = st.d_out_node_group[i][s] as f64;
                prop_assert!((summed - d).abs() <= 1e-12 * d.max(1.0));
            }
        }
        // The parameter form agrees with the count form.
        let generic = strip_counts(&m);
        let (go, gi) = (generic.expected_out_degrees(), generic.expected_in_degrees());
        for i in 0..g.node_count() {
            for s in 0..g.group_count() {
                prop_assert!((go[i][s] - eo[i][s]).abs() <= 1e-12 * eo[i][s].max(1.0));
                prop_assert!((gi[i][s] - ei[i][s]).abs() <= 1e-12 * ei[i][s].max(1.0));
            }
        }
    }

    #[test]
    fn expected_paths_match_mean_products(g in nonempty_graph()) {
        let m = fit_mixed_group(&g).unwrap();
        let exact = expected_path_counts(&m, 2).unwrap();
        let generic = expected_path_counts(&strip_counts(&m), 2).unwrap();
        // Direct double sum over mean products.
        let groups = g.group_count();
        let n = g.node_count();
        let mut direct = vec![vec![0.0; groups]; groups];
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    let (r, s) = (g.space().group_of(i), g.space().group_of(k));
                    direct[r][s] += m.mean(i, j) * m.mean(j, k);
                }
            }
        }
        for r in 0..groups {
            for s in 0..groups {
                let e = exact.expected[r][s];
                prop_assert!((generic.expected[r][s] - e).abs() <= 1e-9 * e.max(1.0));
                prop_assert!((direct[r][s] - e).abs() <= 1e-9 * e.max(1.0));
            }
        }
        // Without self-loops the expectation is the observed count.
        let observed = path_counts(&g, 2).unwrap().counts;
        let loops = exact.self_loop_bias.unwrap();
        for r in 0..groups {
            for s in 0..groups {
                if r != s || loops[r] == 0 {
                    prop_assert_eq!(exact.expected[r][s], observed[r][s] as f64);
                }
            }
        }
    }

    #[test]
    fn mixed_group_maximizes_likelihood(g in nonempty_graph()) {
        let mg = log_likelihood(&fit_mixed_group(&g).unwrap(), &g).unwrap();
        let dc = log_likelihood(&fit_dcsbm(&g).unwrap(), &g).unwrap();
        prop_assert!(mg >= dc - 1e-9 * mg.abs().max(1.0), "mixed-group {} < dcsbm {}", mg, dc);
    }

    #[test]
    fn mixed_group_beats_mixed_node(g in regular_graph()) {
        let mg = log_likelihood(&fit_mixed_group(&g).unwrap(), &g).unwrap();
        let mn = log_likelihood(&fit_mixed_node(&g, &SolverConfig::default()).unwrap(), &g).unwrap();
        prop_assert!(mg >= mn - 1e-9 * mg.abs().max(1.0), "mixed-group {} < mixed-node {}", mg, mn);
    }

    #[test]
    fn mixed_node_is_stationary(g in regular_graph()) {
        let cfg = SolverConfig { max_iterations: 50_000, tolerance: 1e-9 };
        let m = fit_mixed_node(&g, &cfg).unwrap();
        prop_assert!(m.solver().unwrap().residual <= cfg.tolerance);
        prop_assert!(stationarity_residual(&m, &g).unwrap() <= cfg.tolerance);
        // Group-to-group expected totals match m.
        let st = GroupStats::from_graph(&g);
        let blocks = m.block_means();
        for r in 0..g.group_count() {
            for s in 0..g.group_count() {
                let want = st.m[r][s] as f64;
                prop_assert!((blocks[r][s] - want).abs() <= 1e-8 * want.max(1.0));
            }
        }
    }

    #[test]
    fn mixed_node_closed_form_on_regular_graphs(g in regular_graph()) {
        let st = GroupStats::from_graph(&g);
        let m = fit_mixed_node(&g, &SolverConfig { max_iterations: 50_000, tolerance: 1e-11 }).unwrap();
        for i in 0..g.node_count() {
            for s in 0..g.group_count() {
                let want = st.d_out_node_group[i][s] as f64 / st.d_out_node[i] as f64;
                prop_assert!((m.theta_out(i, s) - want).abs() <= 1e-8);
                let want = st.d_in_node_group[i][s] as f64 / st.d_in_node[i] as f64;
                prop_assert!((m.theta_in(i, s) - want).abs() <= 1e-8);
            }
        }
        // Here the node constraint costs nothing against the group constraint.
        let mg = log_likelihood(&fit_mixed_group(&g).unwrap(), &g).unwrap();
        let mn = log_likelihood(&m, &g).unwrap();
        prop_assert!((mg - mn).abs() <= 1e-8 * mg.abs().max(1.0));
    }
}
