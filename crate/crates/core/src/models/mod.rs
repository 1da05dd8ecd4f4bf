//! Poisson block models with degree (DCSBM) or per-group (mixed-propensity)
//! correction.
//!
//! Every model gives the directed pair `(i, j)` a Poisson edge count with mean
//! `theta_out(i, g_j) * theta_in(j, g_i) * omega[g_i][g_j]`. A DCSBM stores one
//! propensity per node and direction, which is read back for every group.

mod document;
mod fit;
mod mixed_node;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::{GroupStats, LabeledDigraph, NodeSpace};

pub use document::ModelDocument;
pub use fit::{fit, fit_dcsbm, fit_dcsbm_stats, fit_mixed_group};
pub use mixed_node::{fit_mixed_node, stationarity_residual, SolverConfig, SolverReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Dcsbm,
    MixedGroup,
    MixedNode,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Dcsbm => "dcsbm",
            ModelKind::MixedGroup => "mixed-group",
            ModelKind::MixedNode => "mixed-node",
        }
    }

    pub fn per_group_propensities(self) -> bool {
        !matches!(self, ModelKind::Dcsbm)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dcsbm" => Ok(ModelKind::Dcsbm),
            "mixed-group" => Ok(ModelKind::MixedGroup),
            "mixed-node" => Ok(ModelKind::MixedNode),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind `{other}` (expected dcsbm, mixed-group or mixed-node)"
            ))),
        }
    }
}

/// Observed aggregates a model was fitted from. Closed-form expectations of
/// the group-constrained model are exact integer arithmetic on these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceCounts {
    pub m: Vec<Vec<u64>>,
    pub d_out_node_group: Vec<Vec<u64>>,
    pub d_in_node_group: Vec<Vec<u64>>,
    pub self_loops_per_group: Vec<u64>,
}

impl From<&GroupStats> for SourceCounts {
    fn from(st: &GroupStats) -> Self {
        Self {
            m: st.m.clone(),
            d_out_node_group: st.d_out_node_group.clone(),
            d_in_node_group: st.d_in_node_group.clone(),
            self_loops_per_group: st.self_loops_per_group.clone(),
        }
    }
}

/// A fitted (or hand-specified) parameter set `(Theta, Omega)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    kind: ModelKind,
    space: Arc<NodeSpace>,
    /// Row per node; one column for DCSBM, one per group otherwise.
    theta_out: Vec<Vec<f64>>,
    theta_in: Vec<Vec<f64>>,
    omega: Vec<Vec<f64>>,
    source: Option<SourceCounts>,
    solver: Option<SolverReport>,
}

impl FittedModel {
    /// Builds a model from explicit parameters, checking shapes, signs and
    /// the normalization constraint of `kind` (to 1e-9).
    pub fn from_parameters(
        kind: ModelKind,
        space: Arc<NodeSpace>,
        theta_out: Vec<Vec<f64>>,
        theta_in: Vec<Vec<f64>>,
        omega: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let model = Self {
            kind,
            space,
            theta_out,
            theta_in,
            omega,
            source: None,
            solver: None,
        };
        model.validate(1e-9)?;
        Ok(model)
    }

    pub(crate) fn from_fit(
        kind: ModelKind,
        space: Arc<NodeSpace>,
        theta_out: Vec<Vec<f64>>,
        theta_in: Vec<Vec<f64>>,
        omega: Vec<Vec<f64>>,
        source: SourceCounts,
        solver: Option<SolverReport>,
    ) -> Self {
        Self {
            kind,
            space,
            theta_out,
            theta_in,
            omega,
            source: Some(source),
            solver,
        }
    }

    fn validate(&self, tolerance: f64) -> Result<()> {
        let n = self.space.node_count();
        let groups = self.space.group_count();
        let width = if self.kind.per_group_propensities() {
            groups
        } else {
            1
        };
        let bad = |msg: String| Err(Error::ModelDocument(msg));
        if self.theta_out.len() != n || self.theta_in.len() != n {
            return bad(format!("expected {n} propensity rows"));
        }
        if self
            .theta_out
            .iter()
            .chain(&self.theta_in)
            .any(|row| row.len() != width)
        {
            return bad(format!("expected {width} propensities per node"));
        }
        if self.omega.len() != groups || self.omega.iter().any(|row| row.len() != groups) {
            return bad(format!("omega must be {groups}x{groups}"));
        }
        let all = self
            .theta_out
            .iter()
            .chain(&self.theta_in)
            .chain(&self.omega)
            .flatten();
        if let Some(v) = all.clone().find(|v| !v.is_finite() || **v < 0.0) {
            return bad(format!("parameter {v} is negative or not finite"));
        }
        let violation = self.normalization_violation();
        if violation > tolerance {
            return bad(format!(
                "{} normalization violated by {violation:e}",
                self.kind
            ));
        }
        Ok(())
    }

    /// Largest deviation of a constrained propensity sum from 1.
    pub fn normalization_violation(&self) -> f64 {
        let groups = self.space.group_count();
        let mut worst: f64 = 0.0;
        match self.kind {
            ModelKind::Dcsbm => {
                for r in 0..groups {
                    let members = self.space.members(r);
                    if members.is_empty() {
                        continue;
                    }
                    let so: f64 = members.iter().map(|&i| self.theta_out[i][0]).sum();
                    let si: f64 = members.iter().map(|&i| self.theta_in[i][0]).sum();
                    worst = worst.max((so - 1.0).abs()).max((si - 1.0).abs());
                }
            }
            ModelKind::MixedGroup => {
                for r in 0..groups {
                    let members = self.space.members(r);
                    if members.is_empty() {
                        continue;
                    }
                    for s in 0..groups {
                        let so: f64 = members.iter().map(|&i| self.theta_out[i][s]).sum();
                        let si: f64 = members.iter().map(|&i| self.theta_in[i][s]).sum();
                        worst = worst.max((so - 1.0).abs()).max((si - 1.0).abs());
                    }
                }
            }
            ModelKind::MixedNode => {
                for i in 0..self.space.node_count() {
                    let so: f64 = self.theta_out[i].iter().sum();
                    let si: f64 = self.theta_in[i].iter().sum();
                    worst = worst.max((so - 1.0).abs()).max((si - 1.0).abs());
                }
            }
        }
        worst
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
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

    /// Out-propensity of node `i` towards group `s`.
    #[inline]
    pub fn theta_out(&self, i: usize, s: usize) -> f64 {
        let row = &self.theta_out[i];
        if row.len() == 1 {
            row[0]
        } else {
            row[s]
        }
    }

    /// In-propensity of node `j` from group `r`.
    #[inline]
    pub fn theta_in(&self, j: usize, r: usize) -> f64 {
        let row = &self.theta_in[j];
        if row.len() == 1 {
            row[0]
        } else {
            row[r]
        }
    }

    pub fn theta_out_rows(&self) -> &[Vec<f64>] {
        &self.theta_out
    }

    pub fn theta_in_rows(&self) -> &[Vec<f64>] {
        &self.theta_in
    }

    pub fn omega(&self) -> &[Vec<f64>] {
        &self.omega
    }

    pub fn source(&self) -> Option<&SourceCounts> {
        self.source.as_ref()
    }

    fn group_constrained_source(&self) -> Option<&SourceCounts> {
        match self.kind {
            ModelKind::MixedGroup => self.source.as_ref(),
            _ => None,
        }
    }

    pub fn solver(&self) -> Option<&SolverReport> {
        self.solver.as_ref()
    }

    /// Poisson mean of `A_ij`.
    #[inline]
    pub fn mean(&self, i: usize, j: usize) -> f64 {
        let (r, s) = (self.space.group_of(i), self.space.group_of(j));
        self.theta_out(i, s) * self.theta_in(j, r) * self.omega[r][s]
    }

    /// `T^o_rs = sum_{i in r} theta_out(i, s)`, indexed `[r][s]`.
    pub fn out_mass(&self) -> Vec<Vec<f64>> {
        let groups = self.group_count();
        (0..groups)
            .map(|r| {
                (0..groups)
                    .map(|s| {
                        self.space
                            .members(r)
                            .iter()
                            .map(|&i| self.theta_out(i, s))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// `T^i_sr = sum_{j in s} theta_in(j, r)`, indexed `[s][r]`.
    pub fn in_mass(&self) -> Vec<Vec<f64>> {
        let groups = self.group_count();
        (0..groups)
            .map(|s| {
                (0..groups)
                    .map(|r| {
                        self.space
                            .members(s)
                            .iter()
                            .map(|&j| self.theta_in(j, r))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// Expected number of edges from group r to group s.
    pub fn block_means(&self) -> Vec<Vec<f64>> {
        let (to, ti) = (self.out_mass(), self.in_mass());
        let groups = self.group_count();
        (0..groups)
            .map(|r| {
                (0..groups)
                    .map(|s| self.omega[r][s] * to[r][s] * ti[s][r])
                    .collect()
            })
            .collect()
    }

    /// Expected out-degree of each node to each group, `E[sum_{j in s} A_ij]`.
    /// A fitted group-constrained model reproduces the observed counts.
    pub fn expected_out_degrees(&self) -> Vec<Vec<f64>> {
        if let Some(src) = self.group_constrained_source() {
            return as_f64(&src.d_out_node_group);
        }
        let ti = self.in_mass();
        let groups = self.group_count();
        (0..self.node_count())
            .map(|i| {
                let r = self.space.group_of(i);
                (0..groups)
                    .map(|s| self.theta_out(i, s) * self.omega[r][s] * ti[s][r])
                    .collect()
            })
            .collect()
    }

    /// Expected in-degree of each node from each group, `E[sum_{i in r} A_ij]`.
    pub fn expected_in_degrees(&self) -> Vec<Vec<f64>> {
        if let Some(src) = self.group_constrained_source() {
            return as_f64(&src.d_in_node_group);
        }
        let to = self.out_mass();
        let groups = self.group_count();
        (0..self.node_count())
            .map(|j| {
                let s = self.space.group_of(j);
                (0..groups)
                    .map(|r| self.theta_in(j, r) * self.omega[r][s] * to[r][s])
                    .collect()
            })
            .collect()
    }
}

fn as_f64(rows: &[Vec<u64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|row| row.iter().map(|&c| c as f64).collect())
        .collect()
}

/// Poisson log-likelihood `sum_ij [A_ij ln mu_ij - mu_ij - ln A_ij!]`,
/// diagonal included. Returns `-inf` when an observed edge has zero mean.
pub fn log_likelihood(m: &FittedModel, g: &LabeledDigraph) -> Result<f64> {
    if !g.shares_space(m.space()) {
        return Err(Error::MismatchedSpace);
    }
    let mut ll = 0.0;
    for e in g.edges() {
        let mu = m.mean(e.source, e.target);
        if mu <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let a = e.count as f64;
        ll += a * mu.ln();
        if e.count > 1 {
            ll -= ln_gamma(a + 1.0);
        }
    }
    let total_mean: f64 = m.block_means().iter().flatten().sum();
    Ok(ll - total_mean)
}

/// `E[A_ij]` under the model. For a fitted group-constrained model this is
/// `d_{i,g_j}^o d_{j,g_i}^i / m_{g_i g_j}` on the source counts.
pub fn expected_adjacency(m: &FittedModel, i: usize, j: usize) -> f64 {
    if let Some(src) = m.group_constrained_source() {
        let (r, s) = (m.space().group_of(i), m.space().group_of(j));
        let mrs = src.m[r][s];
        if mrs == 0 {
            return 0.0;
        }
        return (src.d_out_node_group[i][s] * src.d_in_node_group[j][r]) as f64 / mrs as f64;
    }
    m.mean(i, j)
}

/// Expected group-to-group path counts of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectedPaths {
    pub k: usize,
    pub expected: Vec<Vec<f64>>,
    /// Per-group self-loop count of the source graph: the amount by which the
    /// expected diagonal `P_rr^(2)` exceeds the observed edge-distinct count.
    pub self_loop_bias: Option<Vec<u64>>,
}

/// Expected `P_rs^(k)` for k in {1, 2}.
///
/// Sampled edges of distinct pairs are independent and an edge-distinct walk
/// through a sampled loop contributes `E[A(A-1)] = mu^2`, so
/// `E[P_rs^(2)] = sum_j E[d_{j,r}^i] E[d_{j,s}^o]` for every model kind. For a
/// fitted group-constrained model those expected degrees are the observed
/// ones and the sum is evaluated exactly in integers.
pub fn expected_path_counts(m: &FittedModel, k: usize) -> Result<ExpectedPaths> {
    let groups = m.group_count();
    if let Some(src) = m.group_constrained_source() {
        let expected = match k {
            1 => as_f64(&src.m),
            2 => {
                let mut acc = vec![vec![0u128; groups]; groups];
                for (din, dout) in src.d_in_node_group.iter().zip(&src.d_out_node_group) {
                    for r in 0..groups {
                        for s in 0..groups {
                            acc[r][s] += din[r] as u128 * dout[s] as u128;
                        }
                    }
                }
                acc.into_iter()
                    .map(|row| row.into_iter().map(|v| v as f64).collect())
                    .collect()
            }
            other => return Err(Error::UnsupportedPathLength(other)),
        };
        return Ok(ExpectedPaths {
            k,
            expected,
            self_loop_bias: (k == 2).then(|| src.self_loops_per_group.clone()),
        });
    }
    let expected = match k {
        1 => m.block_means(),
        2 => {
            let (dout, din) = (m.expected_out_degrees(), m.expected_in_degrees());
            let mut acc = vec![vec![0.0; groups]; groups];
            for (di, dox) in din.iter().zip(&dout) {
                for r in 0..groups {
                    for s in 0..groups {
                        acc[r][s] += di[r] * dox[s];
                    }
                }
            }
            acc
        }
        other => return Err(Error::UnsupportedPathLength(other)),
    };
    Ok(ExpectedPaths {
        k,
        expected,
        self_loop_bias: None,
    })
}

#[cfg(test)]
mod tests;
