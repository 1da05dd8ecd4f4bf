use std::sync::Arc;

use super::{fit_mixed_node, FittedModel, ModelKind, SolverConfig, SourceCounts};
use crate::error::{Error, Result};
use crate::graph::{GroupStats, LabeledDigraph, NodeSpace};

/// `numerator / denominator`, or the uniform share `1/size` when the
/// denominator is zero. Zero-degree blocks carry zero expected edges through
/// omega, so the share only fixes the normalization.
fn share(numerator: u64, denominator: u64, size: usize) -> f64 {
    if denominator == 0 {
        1.0 / size as f64
    } else {
        numerator as f64 / denominator as f64
    }
}

fn omega_from_counts(st: &GroupStats) -> Vec<Vec<f64>> {
    st.m.iter()
        .map(|row| row.iter().map(|&c| c as f64).collect())
        .collect()
}

/// DCSBM maximum-likelihood estimate: `theta_i^o = d_i^o / d_{g_i}^o`,
/// `theta_i^i = d_i^i / d_{g_i}^i`, `omega_rs = m_rs`.
pub fn fit_dcsbm(g: &LabeledDigraph) -> Result<FittedModel> {
    fit_dcsbm_stats(g.space(), &GroupStats::from_graph(g))
}

/// [`fit_dcsbm`] from precomputed aggregates; the DCSBM estimate only
/// depends on node totals and the group-to-group counts.
pub fn fit_dcsbm_stats(space: &Arc<NodeSpace>, st: &GroupStats) -> Result<FittedModel> {
    if st.total_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = space.node_count();
    let mut theta_out = Vec::with_capacity(n);
    let mut theta_in = Vec::with_capacity(n);
    for i in 0..n {
        let r = space.group_of(i);
        let size = space.members(r).len();
        theta_out.push(vec![share(st.d_out_node[i], st.d_out_group[r], size)]);
        theta_in.push(vec![share(st.d_in_node[i], st.d_in_group[r], size)]);
    }
    Ok(FittedModel::from_fit(
        ModelKind::Dcsbm,
        space.clone(),
        theta_out,
        theta_in,
        omega_from_counts(st),
        SourceCounts::from(st),
        None,
    ))
}

/// Group-constrained mixed-propensity estimate:
/// `theta_{i,s}^o = d_{i,s}^o / m_{g_i s}`, `theta_{i,s}^i = d_{i,s}^i / m_{s g_i}`,
/// `omega_rs = m_rs`.
pub fn fit_mixed_group(g: &LabeledDigraph) -> Result<FittedModel> {
    let st = GroupStats::from_graph(g);
    if st.total_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let space = g.space();
    let groups = g.group_count();
    let mut theta_out = Vec::with_capacity(g.node_count());
    let mut theta_in = Vec::with_capacity(g.node_count());
    for i in 0..g.node_count() {
        let r = space.group_of(i);
        let size = space.members(r).len();
        theta_out.push(
            (0..groups)
                .map(|s| share(st.d_out_node_group[i][s], st.m[r][s], size))
                .collect(),
        );
        theta_in.push(
            (0..groups)
                .map(|s| share(st.d_in_node_group[i][s], st.m[s][r], size))
                .collect(),
        );
    }
    Ok(FittedModel::from_fit(
        ModelKind::MixedGroup,
        space.clone(),
        theta_out,
        theta_in,
        omega_from_counts(&st),
        SourceCounts::from(&st),
        None,
    ))
}

/// Fits any model kind; `cfg` is only consulted by the node-constrained solver.
pub fn fit(g: &LabeledDigraph, kind: ModelKind, cfg: &SolverConfig) -> Result<FittedModel> {
    match kind {
        ModelKind::Dcsbm => fit_dcsbm(g),
        ModelKind::MixedGroup => fit_mixed_group(g),
        ModelKind::MixedNode => fit_mixed_node(g, cfg),
    }
}
