//! Group-to-group counts of edge-distinct directed paths and the
//! assortativity of the resulting higher-order networks.
//!
//! A path of length k is an ordered sequence of k edge *instances* forming a
//! walk, with no instance used twice. Parallel edges are distinct instances,
//! so a self-loop of multiplicity c yields c(c-1) length-2 paths at its node.
//! Nodes may be revisited (i -> j -> i is a path when both directions exist).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GroupStats, LabeledDigraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCounts {
    pub k: usize,
    /// `P_rs^(k)`.
    pub counts: Vec<Vec<u64>>,
    pub total: u64,
}

impl PathCounts {
    fn new(k: usize, counts: Vec<Vec<u64>>) -> Self {
        let total = counts.iter().flatten().sum();
        Self { k, counts, total }
    }
}

/// Mixing fractions and the assortativity coefficient of one path length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingSummary {
    pub k: usize,
    pub e: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub r_coeff: f64,
}

pub fn path_counts(g: &LabeledDigraph, k: usize) -> Result<PathCounts> {
    path_counts_with_stats(g, &GroupStats::from_graph(g), k)
}

/// As [`path_counts`], reusing precomputed aggregates of `g`.
pub fn path_counts_with_stats(g: &LabeledDigraph, st: &GroupStats, k: usize) -> Result<PathCounts> {
    match k {
        1 => Ok(PathCounts::new(1, st.m.clone())),
        2 => Ok(PathCounts::new(2, length_two(g, st))),
        3 => length_three(g, st).map(|c| PathCounts::new(3, c)),
        other => Err(Error::UnsupportedPathLength(other)),
    }
}

// Walks i -> j -> l number sum_j d_{j,r}^i d_{j,s}^o; the only edge reuse is a
// self-loop instance taken twice, once per loop instance.
fn length_two(g: &LabeledDigraph, st: &GroupStats) -> Vec<Vec<u64>> {
    let groups = st.group_count();
    let mut counts = vec![vec![0u64; groups]; groups];
    for j in 0..g.node_count() {
        let (din, dout) = (&st.d_in_node_group[j], &st.d_out_node_group[j]);
        for (r, row) in counts.iter_mut().enumerate() {
            if din[r] == 0 {
                continue;
            }
            for (s, c) in row.iter_mut().enumerate() {
                *c += din[r] * dout[s];
            }
        }
    }
    for (r, &loops) in st.self_loops_per_group.iter().enumerate() {
        counts[r][r] -= loops;
    }
    counts
}

// Walk count W minus walks that reuse an instance. For a walk e1 e2 e3 the
// reuse events are e1 = e2 (loop at the second node), e2 = e3 (loop at the
// third node) and e1 = e3 (i -> j -> i -> j through the same i -> j
// instance); all three coincide only on a loop traversed three times.
// Inclusion-exclusion gives distinct = W - |e1=e2| - |e2=e3| - |e1=e3| + 2T.
fn length_three(g: &LabeledDigraph, st: &GroupStats) -> Result<Vec<Vec<u64>>> {
    let groups = st.group_count();
    let space = g.space();
    let mut acc = vec![vec![0i128; groups]; groups];
    for e in g.edges() {
        let din = &st.d_in_node_group[e.source];
        let dout = &st.d_out_node_group[e.target];
        let c = e.count as i128;
        for (r, row) in acc.iter_mut().enumerate() {
            if din[r] == 0 {
                continue;
            }
            let left = c * din[r] as i128;
            for (s, a) in row.iter_mut().enumerate() {
                *a += left * dout[s] as i128;
            }
        }
        let (r, s) = (space.group_of(e.source), space.group_of(e.target));
        if e.source == e.target {
            let j = e.source;
            for t in 0..groups {
                // e1 = e2: loop at j, then any out-edge of j.
                acc[r][t] -= c * st.d_out_node_group[j][t] as i128;
                // e2 = e3: any in-edge of j, then the loop.
                acc[t][r] -= st.d_in_node_group[j][t] as i128 * c;
            }
            // e1 = e3 with i = j: e2 is another loop instance (c choices).
            acc[r][r] -= c * c;
            acc[r][r] += 2 * c;
        } else {
            // e1 = e3: i -> j (reused) with j -> i in the middle.
            let back = g.multiplicity(e.target, e.source) as i128;
            acc[r][s] -= c * back;
        }
    }
    acc.into_iter()
        .map(|row| {
            row.into_iter()
                .map(|v| u64::try_from(v).map_err(|_| Error::PathCountOverflow(3)))
                .collect()
        })
        .collect()
}

/// Assortativity `(sum_r e_rr - sum_r a_r b_r) / (1 - sum_r a_r b_r)`.
pub fn assortativity(pc: &PathCounts) -> Result<MixingSummary> {
    if pc.total == 0 {
        return Err(Error::NoPaths);
    }
    let total = pc.total as f64;
    let e: Vec<Vec<f64>> = pc
        .counts
        .iter()
        .map(|row| row.iter().map(|&c| c as f64 / total).collect())
        .collect();
    let groups = e.len();
    let a: Vec<f64> = e.iter().map(|row| row.iter().sum()).collect();
    let b: Vec<f64> = (0..groups)
        .map(|s| e.iter().map(|row| row[s]).sum())
        .collect();
    let expected: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    if 1.0 - expected <= 1e-12 {
        return Err(Error::DegenerateMixing(expected));
    }
    let trace: f64 = (0..groups).map(|r| e[r][r]).sum();
    Ok(MixingSummary {
        k: pc.k,
        r_coeff: (trace - expected) / (1.0 - expected),
        e,
        a,
        b,
    })
}

/// `r^(k)` of a graph, or the reason it is undefined.
pub fn assortativity_of(g: &LabeledDigraph, k: usize) -> Result<f64> {
    assortativity(&path_counts(g, k)?).map(|m| m.r_coeff)
}
