use std::sync::Arc;

use proptest::prelude::*;

use crate::graph::{build_graph, LabeledDigraph, NodeSpace};

/// Two groups `r = {1, 2}`, `s = {3, 4}` with edges 1->2, 3->4, 1->3, 3->1.
pub fn g0() -> LabeledDigraph {
    build_graph(
        &[("1", "2", 1), ("3", "4", 1), ("1", "3", 1), ("3", "1", 1)],
        &[("1", "r"), ("2", "r"), ("3", "s"), ("4", "s")],
    )
    .unwrap()
}

/// Small multigraphs with self-loops, isolated nodes and possibly empty groups.
pub fn graph_strategy(
    max_nodes: usize,
    max_groups: usize,
    max_edges: usize,
) -> impl Strategy<Value = LabeledDigraph> {
    (1usize..=max_nodes, 1usize..=max_groups).prop_flat_map(move |(n, groups)| {
        (
            proptest::collection::vec(0..groups, n),
            proptest::collection::vec((0..n, 0..n, 1u64..=3), 0..=max_edges),
        )
            .prop_map(move |(labels, edges)| {
                let space = NodeSpace::from_parts(
                    (0..n).map(|i| i.to_string()).collect(),
                    (0..groups).map(|g| format!("g{g}")).collect(),
                    labels,
                );
                LabeledDigraph::from_index_edges(Arc::new(space), edges)
            })
    })
}

pub fn random_graph() -> impl Strategy<Value = LabeledDigraph> {
    graph_strategy(8, 3, 10)
}

/// Nonempty graphs for fitting.
pub fn nonempty_graph() -> impl Strategy<Value = LabeledDigraph> {
    graph_strategy(10, 3, 20).prop_filter("needs an edge", |g| g.total_edges() > 0)
}

/// Unions of random permutation graphs: every node has the same out- and
/// in-degree, so the node-constrained maximum has a closed form.
pub fn regular_graph() -> impl Strategy<Value = LabeledDigraph> {
    (2usize..=10, 1usize..=3, 1usize..=4)
        .prop_flat_map(|(n, groups, rounds)| {
            let perm = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
            (
                Just(n),
                Just(groups),
                proptest::collection::vec(0..groups, n),
                proptest::collection::vec(perm, rounds),
            )
        })
        .prop_map(|(n, groups, labels, perms)| {
            let edges = perms
                .iter()
                .flat_map(|p| p.iter().enumerate().map(|(i, &j)| (i, j, 1u64)))
                .collect::<Vec<_>>();
            let space = NodeSpace::from_parts(
                (0..n).map(|i| i.to_string()).collect(),
                (0..groups).map(|g| format!("g{g}")).collect(),
                labels,
            );
            LabeledDigraph::from_index_edges(Arc::new(space), edges)
        })
}

/// DCSBM with groups of the given sizes and fixed uneven propensities.
pub fn dcsbm_model(sizes: &[usize], omega: Vec<Vec<f64>>) -> crate::models::FittedModel {
    let mut group_of = Vec::new();
    for (g, &size) in sizes.iter().enumerate() {
        group_of.extend(std::iter::repeat(g).take(size));
    }
    let n = group_of.len();
    let space = NodeSpace::from_parts(
        (0..n).map(|i| i.to_string()).collect(),
        (0..sizes.len()).map(|g| format!("g{g}")).collect(),
        group_of.clone(),
    );
    let rows = |weight: &dyn Fn(usize) -> f64| {
        let mut raw: Vec<f64> = (0..n).map(weight).collect();
        for g in 0..sizes.len() {
            let total: f64 = (0..n).filter(|&i| group_of[i] == g).map(|i| raw[i]).sum();
            for i in 0..n {
                if group_of[i] == g {
                    raw[i] /= total;
                }
            }
        }
        raw.into_iter().map(|x| vec![x]).collect::<Vec<_>>()
    };
    let theta_out = rows(&|i| 1.0 + (i % 3) as f64);
    let theta_in = rows(&|i| 1.0 + ((i + 1) % 4) as f64);
    crate::models::FittedModel::from_parameters(
        crate::models::ModelKind::Dcsbm,
        Arc::new(space),
        theta_out,
        theta_in,
        omega,
    )
    .unwrap()
}
