//! Directed labeled multigraphs and their degree/edge aggregates.
//!
//! Nodes and groups are interned into dense indices once, at construction.
//! Group indices follow first appearance in the group assignment list, node
//! indices follow the order of that list. Self-loops follow the directed
//! convention: `A_ii` counts each loop once, contributing one out-stub and one
//! in-stub.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The node and group index spaces shared by a graph, the models fitted to
/// it, and every network sampled from those models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpace {
    node_ids: Vec<String>,
    group_labels: Vec<String>,
    group_of: Vec<usize>,
    #[serde(skip)]
    members: Vec<Vec<usize>>,
}

impl NodeSpace {
    /// Builds a space from `(node, group)` assignments. A node listed twice
    /// with the same group is accepted; with different groups it is rejected.
    pub fn from_assignments<S: AsRef<str>>(assignments: &[(S, S)]) -> Result<Self> {
        let mut node_index: HashMap<&str, usize> = HashMap::with_capacity(assignments.len());
        let mut group_index: HashMap<&str, usize> = HashMap::new();
        let mut node_ids = Vec::with_capacity(assignments.len());
        let mut group_labels: Vec<String> = Vec::new();
        let mut group_of: Vec<usize> = Vec::with_capacity(assignments.len());
        for (node, group) in assignments {
            let (node, group) = (node.as_ref(), group.as_ref());
            let next = group_index.len();
            let g = *group_index.entry(group).or_insert_with(|| {
                group_labels.push(group.to_string());
                next
            });
            match node_index.get(node) {
                Some(&i) if group_of[i] == g => continue,
                Some(&i) => {
                    return Err(Error::ConflictingGroup {
                        node: node.to_string(),
                        first: group_labels[group_of[i]].clone(),
                        second: group.to_string(),
                    })
                }
                None => {
                    node_index.insert(node, node_ids.len());
                    node_ids.push(node.to_string());
                    group_of.push(g);
                }
            }
        }
        Ok(Self::from_parts(node_ids, group_labels, group_of))
    }

    pub(crate) fn from_parts(
        node_ids: Vec<String>,
        group_labels: Vec<String>,
        group_of: Vec<usize>,
    ) -> Self {
        let mut members = vec![Vec::new(); group_labels.len()];
        for (i, &g) in group_of.iter().enumerate() {
            members[g].push(i);
        }
        Self {
            node_ids,
            group_labels,
            group_of,
            members,
        }
    }

    /// Builds a space from deserialized parts, checking their consistency.
    pub(crate) fn checked(
        node_ids: Vec<String>,
        group_labels: Vec<String>,
        group_of: Vec<usize>,
    ) -> Result<Self> {
        if node_ids.len() != group_of.len() {
            return Err(Error::ModelDocument(format!(
                "{} node ids but {} group assignments",
                node_ids.len(),
                group_of.len()
            )));
        }
        if let Some(&g) = group_of.iter().find(|&&g| g >= group_labels.len()) {
            return Err(Error::ModelDocument(format!(
                "group index {g} out of range"
            )));
        }
        let unique: std::collections::HashSet<&String> = node_ids.iter().collect();
        if unique.len() != node_ids.len() {
            return Err(Error::ModelDocument("duplicate node id".into()));
        }
        Ok(Self::from_parts(node_ids, group_labels, group_of))
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn group_count(&self) -> usize {
        self.group_labels.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    pub fn group_of(&self, node: usize) -> usize {
        self.group_of[node]
    }

    pub fn groups(&self) -> &[usize] {
        &self.group_of
    }

    /// Nodes of group `g`, in index order.
    pub fn members(&self, g: usize) -> &[usize] {
        &self.members[g]
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == id)
    }
}

/// One directed edge slot with its multiplicity `A_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub count: u64,
}

/// Immutable directed multigraph with one group label per node.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDigraph {
    space: Arc<NodeSpace>,
    /// Sorted by (source, target), one entry per non-zero `A_ij`.
    edges: Vec<Edge>,
    /// `edges[out_offsets[i]..out_offsets[i + 1]]` are the out-edges of `i`.
    out_offsets: Vec<usize>,
}

impl LabeledDigraph {
    /// Builds a graph over an existing space from index triples. Repeated
    /// `(source, target)` pairs are summed and zero counts dropped.
    pub fn from_index_edges<I>(space: Arc<NodeSpace>, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, u64)>,
    {
        let n = space.node_count();
        let mut raw: Vec<(usize, usize, u64)> =
            edges.into_iter().filter(|&(_, _, c)| c > 0).collect();
        raw.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<Edge> = Vec::with_capacity(raw.len());
        for (source, target, count) in raw {
            debug_assert!(source < n && target < n);
            match merged.last_mut() {
                Some(last) if last.source == source && last.target == target => last.count += count,
                _ => merged.push(Edge {
                    source,
                    target,
                    count,
                }),
            }
        }
        let mut out_offsets = vec![0usize; n + 1];
        for e in &merged {
            out_offsets[e.source + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
        }
        Self {
            space,
            edges: merged,
            out_offsets,
        }
    }

    pub fn space(&self) -> &Arc<NodeSpace> {
        &self.space
    }

    pub fn node_count(&self) -> usize {
        self.space.node_count()
    }

    pub fn group_count(&self) -> usize {
        self.space.group_count()
    }

    /// Distinct `(i, j)` slots with `A_ij > 0`, sorted.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, node: usize) -> &[Edge] {
        &self.edges[self.out_offsets[node]..self.out_offsets[node + 1]]
    }

    /// `A_ij`.
    pub fn multiplicity(&self, source: usize, target: usize) -> u64 {
        let out = self.out_edges(source);
        out.binary_search_by_key(&target, |e| e.target)
            .map(|k| out[k].count)
            .unwrap_or(0)
    }

    /// Total edge count `sum_ij A_ij`.
    pub fn total_edges(&self) -> u64 {
        self.edges.iter().map(|e| e.count).sum()
    }

    /// True when `other` describes the same nodes and groups as this graph.
    pub fn shares_space(&self, other: &Arc<NodeSpace>) -> bool {
        Arc::ptr_eq(&self.space, other) || *self.space == **other
    }
}

/// Builds a graph from labeled edges and a `(node, group)` assignment list.
///
/// Nodes absent from `edges` are kept with zero degree.
pub fn build_graph<S: AsRef<str>>(
    edges: &[(S, S, u64)],
    groups: &[(S, S)],
) -> Result<LabeledDigraph> {
    let space = NodeSpace::from_assignments(groups)?;
    let index: HashMap<&str, usize> = space
        .node_ids()
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut triples = Vec::with_capacity(edges.len());
    for (source, target, count) in edges {
        let (source, target) = (source.as_ref(), target.as_ref());
        let i = *index
            .get(source)
            .ok_or_else(|| Error::UnknownNode(source.to_string()))?;
        let j = *index
            .get(target)
            .ok_or_else(|| Error::UnknownNode(target.to_string()))?;
        if *count == 0 {
            return Err(Error::NonPositiveMultiplicity {
                from: source.to_string(),
                to: target.to_string(),
                count: 0,
            });
        }
        triples.push((i, j, *count));
    }
    Ok(LabeledDigraph::from_index_edges(Arc::new(space), triples))
}

/// Degree and edge aggregates of a [`LabeledDigraph`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupStats {
    /// `m_rs`: edges from group r to group s.
    pub m: Vec<Vec<u64>>,
    /// `d_r^o`.
    pub d_out_group: Vec<u64>,
    /// `d_r^i`.
    pub d_in_group: Vec<u64>,
    /// `d_i^o`.
    pub d_out_node: Vec<u64>,
    /// `d_i^i`.
    pub d_in_node: Vec<u64>,
    /// `d_{i,s}^o`: out-edges of node i landing in group s.
    pub d_out_node_group: Vec<Vec<u64>>,
    /// `d_{i,s}^i`: in-edges of node i originating in group s.
    pub d_in_node_group: Vec<Vec<u64>>,
    /// Total `A_ii` over the nodes of each group.
    pub self_loops_per_group: Vec<u64>,
}

impl GroupStats {
    pub fn from_graph(g: &LabeledDigraph) -> Self {
        let n = g.node_count();
        let k = g.group_count();
        let space = g.space();
        let mut m = vec![vec![0u64; k]; k];
        let mut d_out_node_group = vec![vec![0u64; k]; n];
        let mut d_in_node_group = vec![vec![0u64; k]; n];
        let mut self_loops_per_group = vec![0u64; k];
        for e in g.edges() {
            let (r, s) = (space.group_of(e.source), space.group_of(e.target));
            m[r][s] += e.count;
            d_out_node_group[e.source][s] += e.count;
            d_in_node_group[e.target][r] += e.count;
            if e.source == e.target {
                self_loops_per_group[r] += e.count;
            }
        }
        let mut st = Self::from_tables(m, d_out_node_group, d_in_node_group);
        st.self_loops_per_group = self_loops_per_group;
        st
    }

    /// Aggregates from the per-(node, group) degree tables and the block
    /// counts alone. Self-loop totals are unknown here and set to zero.
    pub fn from_tables(
        m: Vec<Vec<u64>>,
        d_out_node_group: Vec<Vec<u64>>,
        d_in_node_group: Vec<Vec<u64>>,
    ) -> Self {
        let k = m.len();
        let d_out_node = d_out_node_group
            .iter()
            .map(|row| row.iter().sum())
            .collect();
        let d_in_node = d_in_node_group.iter().map(|row| row.iter().sum()).collect();
        let d_out_group = m.iter().map(|row| row.iter().sum()).collect();
        let d_in_group = (0..k).map(|s| m.iter().map(|row| row[s]).sum()).collect();
        Self {
            m,
            d_out_group,
            d_in_group,
            d_out_node,
            d_in_node,
            d_out_node_group,
            d_in_node_group,
            self_loops_per_group: vec![0; k],
        }
    }

    pub fn group_count(&self) -> usize {
        self.m.len()
    }

    pub fn total_edges(&self) -> u64 {
        self.d_out_group.iter().sum()
    }
}

pub fn group_stats(g: &LabeledDigraph) -> GroupStats {
    GroupStats::from_graph(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g0() -> LabeledDigraph {
        build_graph(
            &[("1", "2", 1), ("3", "4", 1), ("1", "3", 1), ("3", "1", 1)],
            &[("1", "r"), ("2", "r"), ("3", "s"), ("4", "s")],
        )
        .unwrap()
    }

    #[test]
    fn builds_g0() {
        let g = g0();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.group_count(), 2);
        assert_eq!(g.total_edges(), 4);
        assert_eq!(g.multiplicity(0, 2), 1);
        assert_eq!(g.multiplicity(2, 0), 1);
        assert_eq!(g.multiplicity(1, 0), 0);
    }

    #[test]
    fn sums_repeated_rows() {
        let g = build_graph(&[("1", "2", 1), ("1", "2", 2)], &[("1", "r"), ("2", "r")]).unwrap();
        assert_eq!(g.multiplicity(0, 1), 3);
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn rejects_unknown_endpoint() {
        let err = build_graph(&[("1", "5", 1)], &[("1", "r")]).unwrap_err();
        assert_eq!(err.to_string(), "unknown node 5");
    }

    #[test]
    fn rejects_zero_multiplicity() {
        let err = build_graph(&[("1", "1", 0)], &[("1", "r")]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveMultiplicity { .. }));
    }

    #[test]
    fn rejects_conflicting_groups() {
        let err = build_graph::<&str>(&[], &[("1", "r"), ("1", "s")]).unwrap_err();
        assert!(matches!(err, Error::ConflictingGroup { .. }));
        // a repeated identical assignment is harmless
        let g = build_graph::<&str>(&[], &[("1", "r"), ("1", "r")]).unwrap();
        assert_eq!(g.node_count(), 1);
    }

    #[test]
    fn keeps_isolated_nodes() {
        let g = build_graph(&[("a", "b", 1)], &[("a", "x"), ("b", "x"), ("c", "y")]).unwrap();
        assert_eq!(g.node_count(), 3);
        let st = group_stats(&g);
        assert_eq!(st.d_out_node[2], 0);
        assert_eq!(st.d_in_node[2], 0);
    }

    #[test]
    fn groups_indexed_by_first_appearance() {
        let g = build_graph::<&str>(&[], &[("1", "beta"), ("2", "alpha"), ("3", "beta")]).unwrap();
        assert_eq!(
            g.space().group_labels(),
            &["beta".to_string(), "alpha".to_string()]
        );
        assert_eq!(g.space().members(0), &[0, 2]);
    }

    #[test]
    fn g0_stats_by_hand() {
        let st = group_stats(&g0());
        assert_eq!(st.m, vec![vec![1, 1], vec![1, 1]]);
        assert_eq!(st.d_out_node[0], 2);
        assert_eq!(st.d_out_node_group[0][1], 1);
        assert_eq!(st.d_in_group, vec![2, 2]);
    }

    #[test]
    fn empty_graph_stats_are_zero() {
        let g = build_graph::<&str>(&[], &[("1", "r"), ("2", "r")]).unwrap();
        let st = group_stats(&g);
        assert_eq!(st.m, vec![vec![0]]);
        assert!(st.d_out_node.iter().chain(&st.d_in_node).all(|&d| d == 0));
        assert_eq!(st.self_loops_per_group, vec![0]);
    }

    #[test]
    fn directed_self_loop_counts_once() {
        let g = build_graph(&[("1", "1", 2)], &[("1", "r")]).unwrap();
        let st = group_stats(&g);
        assert_eq!(st.d_out_node[0], 2);
        assert_eq!(st.d_in_node[0], 2);
        assert_eq!(st.m[0][0], 2);
        assert_eq!(st.self_loops_per_group[0], 2);
    }
}
