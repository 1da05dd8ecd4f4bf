//! Maximum likelihood under the node-level constraint
//! `sum_g theta_{i,g}^o = sum_g theta_{i,g}^i = 1`.
//!
//! Block coordinate ascent over three blocks, each maximized exactly:
//! all out-propensities (given in-propensities and omega), all
//! in-propensities, then `omega_rs = m_rs / (T^o_rs T^i_sr)`. Within a block
//! the objective separates per node into
//! `sum_g d_g ln x_g - sum_g C_g x_g` on the simplex, whose KKT conditions give
//! `x_g = d_g / (C_g + nu)` for a scalar multiplier `nu` found by Newton's
//! method. Nodes without any edges in a direction keep the uniform share.

use serde::{Deserialize, Serialize};

use super::{FittedModel, ModelKind, SourceCounts};
use crate::error::{Error, Result};
use crate::graph::{GroupStats, LabeledDigraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iterations: usize,
    /// Max-norm of the last parameter update (absolute for theta, relative
    /// for omega).
    pub last_update: f64,
    /// Stationarity residual at the returned parameters.
    pub residual: f64,
    pub initialization: String,
}

const INITIALIZATION: &str = "within-node fractions d_is/d_i";

/// Maximizes `sum_g d_g ln x_g - sum_g c_g x_g` over the probability simplex.
/// `d` must have at least one positive entry.
pub(crate) fn simplex_argmax(d: &[f64], c: &[f64]) -> Vec<f64> {
    let groups = d.len();
    if groups == 1 {
        return vec![1.0];
    }
    // phi(t) = sum_{d_g>0} d_g / (c_g - c_min + t) - 1 is convex and
    // decreasing in t > 0, with nu = t - c_min. Newton from the left of the
    // root converges monotonically.
    let (mut c_min, mut d_at_min) = (f64::INFINITY, 0.0);
    for g in 0..groups {
        if d[g] > 0.0 && c[g] < c_min {
            c_min = c[g];
            d_at_min = d[g];
        }
    }
    let phi = |t: f64| -> (f64, f64) {
        let (mut v, mut dv) = (-1.0, 0.0);
        for g in 0..groups {
            if d[g] > 0.0 {
                let z = c[g] - c_min + t;
                v += d[g] / z;
                dv -= d[g] / (z * z);
            }
        }
        (v, dv)
    };
    let mut t = 0.5 * d_at_min;
    for _ in 0..200 {
        let (v, dv) = phi(t);
        let next = t - v / dv;
        if !(next > t) {
            break;
        }
        let done = next - t <= 1e-15 * next;
        t = next;
        if done {
            break;
        }
    }
    let mut nu = t - c_min;

    // A zero-degree group whose cost undercuts the multiplier absorbs the
    // slack: nu is clamped to -c there and the rest of the mass goes to it.
    let zero_min = (0..groups)
        .filter(|&g| d[g] == 0.0)
        .map(|g| c[g])
        .fold(f64::INFINITY, f64::min);
    let clamped = zero_min.is_finite() && nu < -zero_min;
    if clamped {
        nu = -zero_min;
    }
    let mut x: Vec<f64> = (0..groups)
        .map(|g| if d[g] > 0.0 { d[g] / (c[g] + nu) } else { 0.0 })
        .collect();
    if clamped {
        let slack = (1.0 - x.iter().sum::<f64>()).max(0.0);
        let ties: Vec<usize> = (0..groups)
            .filter(|&g| d[g] == 0.0 && c[g] == zero_min)
            .collect();
        for &g in &ties {
            x[g] = slack / ties.len() as f64;
        }
    }
    let total: f64 = x.iter().sum();
    for v in &mut x {
        *v /= total;
    }
    x
}

/// KKT residual of one per-node simplex problem, scaled by `max(1, d_total)`.
fn node_residual(d: &[f64], c: &[f64], x: &[f64]) -> f64 {
    let d_total: f64 = d.iter().sum();
    let nu = d_total - x.iter().zip(c).map(|(x, c)| x * c).sum::<f64>();
    let scale = d_total.max(1.0);
    let mut worst: f64 = 0.0;
    for g in 0..d.len() {
        let grad = d[g] - x[g] * (c[g] + nu);
        worst = worst.max(grad.abs() / scale);
        if x[g] == 0.0 {
            // Dual feasibility for an inactive coordinate.
            worst = worst.max((-(c[g] + nu)).max(0.0) / scale);
        }
    }
    worst
}

struct State<'a> {
    st: &'a GroupStats,
    group_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    out_active: Vec<bool>,
    in_active: Vec<bool>,
    theta_out: Vec<Vec<f64>>,
    theta_in: Vec<Vec<f64>>,
    omega: Vec<Vec<f64>>,
}

impl State<'_> {
    fn groups(&self) -> usize {
        self.members.len()
    }

    fn out_mass(&self) -> Vec<Vec<f64>> {
        let groups = self.groups();
        let mut t = vec![vec![0.0; groups]; groups];
        for (i, row) in self.theta_out.iter().enumerate() {
            let r = self.group_of[i];
            for s in 0..groups {
                t[r][s] += row[s];
            }
        }
        t
    }

    fn in_mass(&self) -> Vec<Vec<f64>> {
        let groups = self.groups();
        let mut t = vec![vec![0.0; groups]; groups];
        for (j, row) in self.theta_in.iter().enumerate() {
            let s = self.group_of[j];
            for r in 0..groups {
                t[s][r] += row[r];
            }
        }
        t
    }

    /// Costs of the out-block for a node in group r: `C_g = omega_rg T^i_gr`.
    fn out_costs(&self, r: usize, ti: &[Vec<f64>]) -> Vec<f64> {
        (0..self.groups())
            .map(|g| self.omega[r][g] * ti[g][r])
            .collect()
    }

    /// Costs of the in-block for a node in group s: `C_g = omega_gs T^o_gs`.
    fn in_costs(&self, s: usize, to: &[Vec<f64>]) -> Vec<f64> {
        (0..self.groups())
            .map(|g| self.omega[g][s] * to[g][s])
            .collect()
    }

    fn degrees(rows: &[Vec<u64>], i: usize) -> Vec<f64> {
        rows[i].iter().map(|&v| v as f64).collect()
    }

    fn update_out(&mut self) -> f64 {
        let ti = self.in_mass();
        let costs: Vec<Vec<f64>> = (0..self.groups()).map(|r| self.out_costs(r, &ti)).collect();
        let mut change: f64 = 0.0;
        for i in 0..self.theta_out.len() {
            if !self.out_active[i] {
                continue;
            }
            let d = Self::degrees(&self.st.d_out_node_group, i);
            let x = simplex_argmax(&d, &costs[self.group_of[i]]);
            change = change.max(max_abs_diff(&x, &self.theta_out[i]));
            self.theta_out[i] = x;
        }
        change
    }

    fn update_in(&mut self) -> f64 {
        let to = self.out_mass();
        let costs: Vec<Vec<f64>> = (0..self.groups()).map(|s| self.in_costs(s, &to)).collect();
        let mut change: f64 = 0.0;
        for j in 0..self.theta_in.len() {
            if !self.in_active[j] {
                continue;
            }
            let d = Self::degrees(&self.st.d_in_node_group, j);
            let x = simplex_argmax(&d, &costs[self.group_of[j]]);
            change = change.max(max_abs_diff(&x, &self.theta_in[j]));
            self.theta_in[j] = x;
        }
        change
    }

    fn update_omega(&mut self) -> f64 {
        let (to, ti) = (self.out_mass(), self.in_mass());
        let groups = self.groups();
        let mut change: f64 = 0.0;
        for r in 0..groups {
            for s in 0..groups {
                let m = self.st.m[r][s] as f64;
                let next = if m == 0.0 {
                    0.0
                } else {
                    m / (to[r][s] * ti[s][r])
                };
                let prev = self.omega[r][s];
                if next != prev {
                    change = change.max((next - prev).abs() / next.abs().max(prev.abs()));
                }
                self.omega[r][s] = next;
            }
        }
        change
    }

    fn residual(&self) -> f64 {
        let (to, ti) = (self.out_mass(), self.in_mass());
        let groups = self.groups();
        let mut worst: f64 = 0.0;
        for i in 0..self.theta_out.len() {
            let g = self.group_of[i];
            if self.out_active[i] {
                let d = Self::degrees(&self.st.d_out_node_group, i);
                worst = worst.max(node_residual(
                    &d,
                    &self.out_costs(g, &ti),
                    &self.theta_out[i],
                ));
            }
            if self.in_active[i] {
                let d = Self::degrees(&self.st.d_in_node_group, i);
                worst = worst.max(node_residual(&d, &self.in_costs(g, &to), &self.theta_in[i]));
            }
        }
        for r in 0..groups {
            for s in 0..groups {
                let m = self.st.m[r][s] as f64;
                let fitted = self.omega[r][s] * to[r][s] * ti[s][r];
                worst = worst.max((m - fitted).abs() / m.max(1.0));
            }
        }
        worst
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn initial_rows(rows: &[Vec<u64>], totals: &[u64], groups: usize) -> Vec<Vec<f64>> {
    rows.iter()
        .zip(totals)
        .map(|(row, &total)| {
            if total == 0 {
                vec![1.0 / groups as f64; groups]
            } else {
                row.iter().map(|&v| v as f64 / total as f64).collect()
            }
        })
        .collect()
}

/// Fits the node-constrained mixed-propensity model.
///
/// Converges when both the largest parameter update and the stationarity
/// residual fall to `cfg.tolerance`; otherwise fails with
/// [`Error::NonConvergence`] carrying the last residual. The maximum is not
/// attained on every graph: when no propensity split reproduces the observed
/// within-block shares, the supremum lies at diverging omega and the solver
/// reports non-convergence rather than a boundary point.
pub fn fit_mixed_node(g: &LabeledDigraph, cfg: &SolverConfig) -> Result<FittedModel> {
    let st = GroupStats::from_graph(g);
    if st.total_edges() == 0 {
        return Err(Error::EmptyGraph);
    }
    let space = g.space();
    let groups = g.group_count();
    let n = g.node_count();
    let mut state = State {
        st: &st,
        group_of: (0..n).map(|i| space.group_of(i)).collect(),
        members: (0..groups).map(|r| space.members(r).to_vec()).collect(),
        out_active: st.d_out_node.iter().map(|&d| d > 0).collect(),
        in_active: st.d_in_node.iter().map(|&d| d > 0).collect(),
        theta_out: initial_rows(&st.d_out_node_group, &st.d_out_node, groups),
        theta_in: initial_rows(&st.d_in_node_group, &st.d_in_node, groups),
        omega: vec![vec![0.0; groups]; groups],
    };
    state.update_omega();

    let mut residual = f64::INFINITY;
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let a = state.update_out();
        let b = state.update_in();
        let c = state.update_omega();
        last_update = a.max(b).max(c);
        if last_update <= cfg.tolerance {
            residual = state.residual();
            if residual <= cfg.tolerance {
                break;
            }
        }
    }
    if !(last_update <= cfg.tolerance && residual <= cfg.tolerance) {
        if !residual.is_finite() {
            residual = state.residual();
        }
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }
    let report = SolverReport {
        iterations,
        last_update,
        residual,
        initialization: INITIALIZATION.to_string(),
    };
    let State {
        theta_out,
        theta_in,
        omega,
        ..
    } = state;
    Ok(FittedModel::from_fit(
        ModelKind::MixedNode,
        space.clone(),
        theta_out,
        theta_in,
        omega,
        SourceCounts::from(&st),
        Some(report),
    ))
}

/// Stationarity residual of the node-constrained likelihood at `m`'s
/// parameters, against the counts of `g`.
pub fn stationarity_residual(m: &FittedModel, g: &LabeledDigraph) -> Result<f64> {
    if m.kind() != ModelKind::MixedNode {
        return Err(Error::WrongModelKind {
            expected: ModelKind::MixedNode.name(),
            found: m.kind().name(),
        });
    }
    if !g.shares_space(m.space()) {
        return Err(Error::MismatchedSpace);
    }
    let st = GroupStats::from_graph(g);
    let space = m.space();
    let state = State {
        st: &st,
        group_of: (0..m.node_count()).map(|i| space.group_of(i)).collect(),
        members: (0..m.group_count())
            .map(|r| space.members(r).to_vec())
            .collect(),
        out_active: st.d_out_node.iter().map(|&d| d > 0).collect(),
        in_active: st.d_in_node.iter().map(|&d| d > 0).collect(),
        theta_out: m.theta_out_rows().to_vec(),
        theta_in: m.theta_in_rows().to_vec(),
        omega: m.omega().to_vec(),
    };
    Ok(state.residual())
}
