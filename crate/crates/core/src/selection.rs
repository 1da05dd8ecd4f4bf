//! Likelihood-ratio selection between the group-constrained mixed model and
//! the DCSBM: the statistic, its null mean and variance, the parametric
//! bootstrap and the sparsity diagnostic.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::graph::{GroupStats, LabeledDigraph, NodeSpace};
use crate::models::{fit_dcsbm_stats, FittedModel, ModelKind};
use crate::moments::{
    a_taylor, a_valid, b_taylor, b_valid, c_taylor, c_valid, centered_cov, f, remainder,
    shared_cov, smoothed_xlogx, xlogx, Pmf,
};
use crate::sampling::{derive_seed, replicate_rng, sample_group_stats};
use crate::stats::{self, Spread};

pub const LLR_REPORT_SCHEMA: &str = "dsbm.llr_report/1";

/// Largest node count accepted by the exact variance.
pub const EXACT_NODE_LIMIT: usize = 200;

pub const DEFAULT_SPARSITY_THRESHOLD: f64 = 5.0;

const TAG_VARIANCE: u64 = 1;
const TAG_BOOTSTRAP: u64 = 2;
const TAG_BIAS: u64 = 3;

/// Log-likelihood ratio of the group-constrained mixed model over the DCSBM,
/// from degree aggregates alone.
pub fn llr_from_stats(st: &GroupStats) -> f64 {
    let table =
        |rows: &[Vec<u64>]| -> f64 { rows.iter().flatten().map(|&x| xlogx(x as f64)).sum() };
    let vector = |v: &[u64]| -> f64 { v.iter().map(|&x| xlogx(x as f64)).sum() };
    table(&st.d_out_node_group) + table(&st.d_in_node_group)
        - vector(&st.d_out_node)
        - vector(&st.d_in_node)
        - 2.0 * table(&st.m)
        + vector(&st.d_out_group)
        + vector(&st.d_in_group)
}

pub fn llr_statistic(g: &LabeledDigraph) -> f64 {
    llr_from_stats(&GroupStats::from_graph(g))
}

/// `(|G| - 1)(|N| - |G|)`.
pub fn dense_null_mean(space: &NodeSpace) -> f64 {
    let (n, g) = (space.node_count() as f64, space.group_count() as f64);
    (g - 1.0) * (n - g)
}

fn require_dcsbm(m: &FittedModel) -> Result<()> {
    if m.kind() != ModelKind::Dcsbm {
        return Err(Error::WrongModelKind {
            expected: ModelKind::Dcsbm.name(),
            found: m.kind().name(),
        });
    }
    Ok(())
}

/// Poisson means of every degree aggregate entering the statistic.
struct AggregateMeans {
    /// `E d^o_{i,s}`, `E d^i_{j,r}`.
    out_group: Vec<Vec<f64>>,
    in_group: Vec<Vec<f64>>,
    out_total: Vec<f64>,
    in_total: Vec<f64>,
    /// `E m_rs`, `E d^o_r`, `E d^i_s`.
    block: Vec<Vec<f64>>,
    row: Vec<f64>,
    col: Vec<f64>,
}

impl AggregateMeans {
    fn new(m: &FittedModel) -> Self {
        let space = m.space();
        let groups = m.group_count();
        let (to, ti) = (m.out_mass(), m.in_mass());
        let omega = m.omega();
        let out_group: Vec<Vec<f64>> = (0..m.node_count())
            .map(|i| {
                let r = space.group_of(i);
                (0..groups)
                    .map(|s| m.theta_out(i, s) * omega[r][s] * ti[s][r])
                    .collect()
            })
            .collect();
        let in_group: Vec<Vec<f64>> = (0..m.node_count())
            .map(|j| {
                let s = space.group_of(j);
                (0..groups)
                    .map(|r| m.theta_in(j, r) * omega[r][s] * to[r][s])
                    .collect()
            })
            .collect();
        let block = m.block_means();
        Self {
            out_total: out_group.iter().map(|r| r.iter().sum()).collect(),
            in_total: in_group.iter().map(|r| r.iter().sum()).collect(),
            row: block.iter().map(|r| r.iter().sum()).collect(),
            col: (0..groups)
                .map(|s| block.iter().map(|r| r[s]).sum())
                .collect(),
            out_group,
            in_group,
            block,
        }
    }

    fn node_part(&self, phi: impl Fn(f64) -> f64) -> f64 {
        let groupwise: f64 = self
            .out_group
            .iter()
            .chain(&self.in_group)
            .flatten()
            .map(|&x| phi(x))
            .sum();
        let totals: f64 = self
            .out_total
            .iter()
            .chain(&self.in_total)
            .map(|&x| phi(x))
            .sum();
        groupwise - totals
    }

    fn group_part(&self, phi: impl Fn(f64) -> f64) -> f64 {
        let blocks: f64 = self.block.iter().flatten().map(|&x| phi(x)).sum();
        let margins: f64 = self.row.iter().chain(&self.col).map(|&x| phi(x)).sum();
        margins - 2.0 * blocks
    }

    fn min_group_degree(&self) -> f64 {
        self.out_group
            .iter()
            .chain(&self.in_group)
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullMean {
    pub dense: f64,
    pub numeric: f64,
}

/// Expected statistic when `m` generated the data: the dense-limit value and
/// the finite-sample value obtained by replacing each `x ln x` term with its
/// Poisson expectation.
pub fn expected_llr_null(m: &FittedModel) -> Result<NullMean> {
    require_dcsbm(m)?;
    let means = AggregateMeans::new(m);
    Ok(NullMean {
        dense: dense_null_mean(m.space()),
        numeric: means.node_part(f) + means.group_part(f),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    ExactNumeric,
    Taylor,
    MonteCarlo,
    /// Sample variance of parametric bootstrap draws; only meaningful inside
    /// [`llr_test`].
    Bootstrap,
}

impl VarianceMethod {
    pub fn name(self) -> &'static str {
        match self {
            VarianceMethod::ExactNumeric => "exact_numeric",
            VarianceMethod::Taylor => "taylor",
            VarianceMethod::MonteCarlo => "monte_carlo",
            VarianceMethod::Bootstrap => "bootstrap",
        }
    }
}

impl FromStr for VarianceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "exact_numeric" | "exact" => Ok(VarianceMethod::ExactNumeric),
            "taylor" => Ok(VarianceMethod::Taylor),
            "monte_carlo" | "mc" => Ok(VarianceMethod::MonteCarlo),
            "bootstrap" => Ok(VarianceMethod::Bootstrap),
            _ => Err(Error::InvalidArgument(format!(
                "unknown variance method `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceOptions {
    pub method: VarianceMethod,
    /// Replicate budget for `monte_carlo`.
    pub replicates: usize,
    pub seed: u64,
    /// Cost guard for `exact_numeric`.
    pub node_limit: usize,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        Self {
            method: VarianceMethod::MonteCarlo,
            replicates: 2000,
            seed: 0,
            node_limit: EXACT_NODE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullVariance {
    pub method: VarianceMethod,
    pub value: f64,
    /// Monte Carlo standard error of `value`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Terms evaluated exactly because an approximation was outside its
    /// validity range.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taylor_fallbacks: Option<usize>,
}

/// Standard error of the sample variance, from the fourth central moment.
fn variance_standard_error(xs: &[f64]) -> f64 {
    let b = xs.len() as f64;
    let mu = stats::mean(xs);
    let s2 = stats::sample_sd(xs).powi(2);
    let m4 = xs.iter().map(|x| (x - mu).powi(4)).sum::<f64>() / b;
    ((m4 - s2 * s2 * (b - 3.0) / (b - 1.0)) / b).max(0.0).sqrt()
}

/// Statistic on `replicates` networks drawn from `m`, replicate `b` on
/// stream `b` of `seed`.
pub fn simulate_llr_null(m: &FittedModel, replicates: usize, seed: u64) -> Vec<f64> {
    (0..replicates)
        .into_par_iter()
        .map(|b| llr_from_stats(&sample_group_stats(m, &mut replicate_rng(seed, b as u64))))
        .collect()
}

/// Variance of the statistic when `m` generated the data.
pub fn llr_variance_null(m: &FittedModel, opts: &VarianceOptions) -> Result<NullVariance> {
    require_dcsbm(m)?;
    match opts.method {
        VarianceMethod::MonteCarlo => {
            if opts.replicates < 2 {
                return Err(Error::InvalidArgument(
                    "monte_carlo variance needs at least 2 replicates".into(),
                ));
            }
            let draws = simulate_llr_null(m, opts.replicates, opts.seed);
            Ok(NullVariance {
                method: opts.method,
                value: stats::sample_sd(&draws).powi(2),
                standard_error: Some(variance_standard_error(&draws)),
                replicates: Some(opts.replicates),
                seed: Some(opts.seed),
                taylor_fallbacks: None,
            })
        }
        VarianceMethod::ExactNumeric => {
            if m.node_count() > opts.node_limit {
                return Err(Error::CostGuard {
                    nodes: m.node_count(),
                    limit: opts.node_limit,
                });
            }
            let (value, _) = analytic_variance(m, false);
            Ok(NullVariance {
                method: opts.method,
                value,
                standard_error: None,
                replicates: None,
                seed: None,
                taylor_fallbacks: None,
            })
        }
        VarianceMethod::Taylor => {
            let (value, fallbacks) = analytic_variance(m, true);
            Ok(NullVariance {
                method: opts.method,
                value,
                standard_error: None,
                replicates: None,
                seed: None,
                taylor_fallbacks: Some(fallbacks),
            })
        }
        VarianceMethod::Bootstrap => Err(Error::InvalidArgument(
            "bootstrap variance is taken from bootstrap draws of an observed graph".into(),
        )),
    }
}

/// `a`, `b`, `c` evaluated exactly, or by their expansions where valid.
struct MomentRule {
    taylor: bool,
}

impl MomentRule {
    fn a(&self, mu: f64, fallbacks: &mut usize) -> f64 {
        if self.taylor && a_valid(mu) {
            return a_taylor(mu);
        }
        if self.taylor && mu > 0.0 {
            *fallbacks += 1;
        }
        shared_cov(mu, 0.0, 0.0)
    }

    fn b(&self, mu: f64, lambda: f64, fallbacks: &mut usize) -> f64 {
        if self.taylor && b_valid(mu, lambda) {
            return b_taylor(mu, lambda);
        }
        if self.taylor && mu > 0.0 {
            *fallbacks += 1;
        }
        shared_cov(mu, 0.0, (lambda - mu).max(0.0))
    }

    fn c(&self, mu: f64, lambda: f64, gamma: f64, fallbacks: &mut usize) -> f64 {
        if self.taylor && c_valid(mu, lambda, gamma) {
            return c_taylor(mu, lambda, gamma);
        }
        if self.taylor && mu > 0.0 {
            *fallbacks += 1;
        }
        shared_cov(mu, (lambda - mu).max(0.0), (gamma - mu).max(0.0))
    }

    /// `2 cov(h(O_is) - h(O_i), h(I_jr) - h(I_j))` where the four sums share
    /// only the single entry `A_ij ~ Poisson(mu)`.
    fn pair(&self, mu: f64, out: (f64, f64), inn: (f64, f64), fallbacks: &mut usize) -> f64 {
        if mu <= 0.0 {
            return 0.0;
        }
        let (og, ot) = out;
        let (ig, it) = inn;
        if self.taylor && c_valid(mu, og, ig) && c_valid(mu, ot, it) {
            return 2.0 * mu * (og / ot).ln() * (ig / it).ln();
        }
        if self.taylor {
            *fallbacks += 1;
        }
        let x = Pmf::poisson(mu);
        let diff = |g: f64, t: f64| -> Vec<f64> {
            let a = smoothed_xlogx(&x, (g - mu).max(0.0));
            let b = smoothed_xlogx(&x, (t - mu).max(0.0));
            a.iter().zip(&b).map(|(a, b)| a - b).collect()
        };
        2.0 * centered_cov(&x.probs, &diff(og, ot), &diff(ig, it))
    }
}

/// Sum of the variances and covariances of all `x ln x` terms of the
/// statistic. Each aggregate is a Poisson sum, and two aggregates covary
/// through the entries they share: nested pairs give `b`, overlapping pairs
/// give `c`. Terms of one node's out-aggregates against another node's
/// in-aggregates share a single entry and are summed pairwise.
fn analytic_variance(m: &FittedModel, taylor: bool) -> (f64, usize) {
    let rule = MomentRule { taylor };
    let means = AggregateMeans::new(m);
    let space = m.space();
    let groups = m.group_count();
    let n = m.node_count();
    let (node_total, node_fallbacks) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut fb = 0usize;
            let r = space.group_of(i);
            let mut v = 0.0;
            // Out-aggregates of i: O_is against O_i, M_rs, R_r, C_s.
            let lo = means.out_total[i];
            for s in 0..groups {
                let mu = means.out_group[i][s];
                let (blk, row, col) = (means.block[r][s], means.row[r], means.col[s]);
                v += rule.a(mu, &mut fb)
                    - 2.0 * rule.b(mu, lo, &mut fb)
                    - 4.0 * rule.b(mu, blk, &mut fb)
                    + 2.0 * rule.b(mu, row, &mut fb)
                    + 2.0 * rule.b(mu, col, &mut fb)
                    + 4.0 * rule.c(mu, lo, blk, &mut fb)
                    - 2.0 * rule.c(mu, lo, col, &mut fb);
            }
            v += rule.a(lo, &mut fb) - 2.0 * rule.b(lo, means.row[r], &mut fb);
            // In-aggregates of i (as a target in group r).
            let li = means.in_total[i];
            for q in 0..groups {
                let mu = means.in_group[i][q];
                let (blk, row, col) = (means.block[q][r], means.row[q], means.col[r]);
                v += rule.a(mu, &mut fb)
                    - 2.0 * rule.b(mu, li, &mut fb)
                    - 4.0 * rule.b(mu, blk, &mut fb)
                    + 2.0 * rule.b(mu, col, &mut fb)
                    + 2.0 * rule.b(mu, row, &mut fb)
                    + 4.0 * rule.c(mu, li, blk, &mut fb)
                    - 2.0 * rule.c(mu, li, row, &mut fb);
            }
            v += rule.a(li, &mut fb) - 2.0 * rule.b(li, means.col[r], &mut fb);
            // Out-aggregates of i against in-aggregates of every j.
            for j in 0..n {
                let s = space.group_of(j);
                v += rule.pair(
                    m.mean(i, j),
                    (means.out_group[i][s], lo),
                    (means.in_group[j][r], means.in_total[j]),
                    &mut fb,
                );
            }
            (v, fb)
        })
        .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let mut fb = node_fallbacks;
    let mut v = node_total;
    for r in 0..groups {
        for s in 0..groups {
            let w = means.block[r][s];
            let (row, col) = (means.row[r], means.col[s]);
            v += 4.0 * rule.a(w, &mut fb)
                - 4.0 * rule.b(w, row, &mut fb)
                - 4.0 * rule.b(w, col, &mut fb)
                + 2.0 * rule.c(w, row, col, &mut fb);
        }
        v += rule.a(means.row[r], &mut fb) + rule.a(means.col[r], &mut fb);
    }
    (v, fb)
}

/// Parametric bootstrap of the statistic under the DCSBM fitted to a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub observed: f64,
    pub replicates: usize,
    pub seed: u64,
    pub summary: Spread,
    pub variance: f64,
    /// Fraction of draws at or above `observed`, at least `1/(B+1)`.
    pub p_value: f64,
    pub values: Vec<f64>,
}

pub const MIN_BOOTSTRAP_REPLICATES: usize = 100;

pub fn bootstrap_llr_null(
    g: &LabeledDigraph,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapReport> {
    bootstrap_from_stats(g.space(), &GroupStats::from_graph(g), replicates, seed)
}

/// [`bootstrap_llr_null`] from the degree aggregates of the observed graph.
pub fn bootstrap_from_stats(
    space: &Arc<NodeSpace>,
    st: &GroupStats,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapReport> {
    if replicates < MIN_BOOTSTRAP_REPLICATES {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP_REPLICATES} replicates, got {replicates}"
        )));
    }
    let null = fit_dcsbm_stats(space, st)?;
    let observed = llr_from_stats(st);
    let values = simulate_llr_null(&null, replicates, seed);
    let exceed = values.iter().filter(|&&v| v >= observed).count() as f64;
    let b = replicates as f64;
    Ok(BootstrapReport {
        observed,
        replicates,
        seed,
        summary: stats::spread(&values),
        variance: stats::sample_sd(&values).powi(2),
        p_value: (exceed / b).max(1.0 / (b + 1.0)),
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub min_expected_group_degree: f64,
    pub threshold: f64,
    pub sparse_flag: bool,
    /// Heuristic estimate of how far plug-in null means fall below the true
    /// one: differences of `f(mu) - mu ln mu - 1/2` between true and refitted
    /// parameters, averaged over resampled networks. `None` when no resample
    /// could be refitted.
    pub plugin_bias_estimate: Option<f64>,
    /// Node-level part (`b1`).
    pub node_term_bias: Option<f64>,
    /// Group-level part (`b2`).
    pub group_term_bias: Option<f64>,
    pub bias_standard_error: Option<f64>,
    pub bias_method: String,
    pub resamples: usize,
    pub seed: u64,
}

pub const DEFAULT_BIAS_RESAMPLES: usize = 200;

pub fn sparsity_diagnostic(
    m: &FittedModel,
    threshold: f64,
    resamples: usize,
    seed: u64,
) -> Result<SparsityReport> {
    require_dcsbm(m)?;
    let means = AggregateMeans::new(m);
    let min = means.min_group_degree();
    let truth = (means.node_part(remainder), means.group_part(remainder));
    let parts: Vec<(f64, f64)> = (0..resamples)
        .into_par_iter()
        .filter_map(|b| {
            let st = sample_group_stats(m, &mut replicate_rng(seed, b as u64));
            let refit = fit_dcsbm_stats(m.space(), &st).ok()?;
            let est = AggregateMeans::new(&refit);
            Some((
                truth.0 - est.node_part(remainder),
                truth.1 - est.group_part(remainder),
            ))
        })
        .collect();
    let (b1, b2, total, se) = if parts.is_empty() {
        (None, None, None, None)
    } else {
        let node: Vec<f64> = parts.iter().map(|p| p.0).collect();
        let group: Vec<f64> = parts.iter().map(|p| p.1).collect();
        let sum: Vec<f64> = parts.iter().map(|p| p.0 + p.1).collect();
        (
            Some(stats::mean(&node)),
            Some(stats::mean(&group)),
            Some(stats::mean(&sum)),
            Some(stats::sample_sd(&sum) / (sum.len() as f64).sqrt()),
        )
    };
    Ok(SparsityReport {
        min_expected_group_degree: min,
        threshold,
        sparse_flag: min < threshold,
        plugin_bias_estimate: total,
        node_term_bias: b1,
        group_term_bias: b2,
        bias_standard_error: se,
        bias_method: "heuristic: resampled plug-in remainder gaps".into(),
        resamples,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LlrOptions {
    pub variance: VarianceOptions,
    /// Run the parametric bootstrap with this many draws.
    pub bootstrap_replicates: Option<usize>,
    pub sparsity_threshold: f64,
    pub bias_resamples: usize,
    pub seed: u64,
}

impl Default for LlrOptions {
    fn default() -> Self {
        Self {
            variance: VarianceOptions::default(),
            bootstrap_replicates: None,
            sparsity_threshold: DEFAULT_SPARSITY_THRESHOLD,
            bias_resamples: DEFAULT_BIAS_RESAMPLES,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub replicates: usize,
    pub seed: u64,
    pub summary: Spread,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlrReport {
    pub schema: String,
    pub lambda_hat: f64,
    pub null_mean_dense: f64,
    pub null_mean_numeric: f64,
    pub null_variance: NullVariance,
    pub z_score: f64,
    /// One-sided: large statistics favour the mixed model.
    pub p_value_normal: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value_bootstrap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapSummary>,
    pub sparsity: SparsityReport,
    pub seed: u64,
}

/// Upper-tail normal probability, kept inside `(0, 1]`.
pub fn normal_upper_p(z: f64) -> f64 {
    (0.5 * erfc(z / std::f64::consts::SQRT_2)).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Full test of the mixed model against the DCSBM fitted to `g`.
pub fn llr_test(g: &LabeledDigraph, opts: &LlrOptions) -> Result<LlrReport> {
    let st = GroupStats::from_graph(g);
    let null = fit_dcsbm_stats(g.space(), &st)?;
    let lambda_hat = llr_from_stats(&st);
    let mean = expected_llr_null(&null)?;
    let boot = match opts.bootstrap_replicates {
        Some(b) => Some(bootstrap_from_stats(
            g.space(),
            &st,
            b,
            derive_seed(opts.seed, TAG_BOOTSTRAP),
        )?),
        None => None,
    };
    let null_variance = if opts.variance.method == VarianceMethod::Bootstrap {
        let boot = boot.as_ref().ok_or_else(|| {
            Error::InvalidArgument("bootstrap variance requires bootstrap replicates".into())
        })?;
        NullVariance {
            method: VarianceMethod::Bootstrap,
            value: boot.variance,
            standard_error: Some(variance_standard_error(&boot.values)),
            replicates: Some(boot.replicates),
            seed: Some(boot.seed),
            taylor_fallbacks: None,
        }
    } else {
        let vopts = VarianceOptions {
            seed: derive_seed(opts.seed, TAG_VARIANCE),
            ..opts.variance
        };
        llr_variance_null(&null, &vopts)?
    };
    let sd = null_variance.value.max(0.0).sqrt();
    let excess = lambda_hat - mean.numeric;
    let (z_score, p_value_normal) = if sd > 0.0 {
        (excess / sd, normal_upper_p(excess / sd))
    } else if excess > 1e-9 {
        (f64::INFINITY, f64::MIN_POSITIVE)
    } else {
        (0.0, 1.0)
    };
    let sparsity = sparsity_diagnostic(
        &null,
        opts.sparsity_threshold,
        opts.bias_resamples,
        derive_seed(opts.seed, TAG_BIAS),
    )?;
    Ok(LlrReport {
        schema: LLR_REPORT_SCHEMA.into(),
        lambda_hat,
        null_mean_dense: mean.dense,
        null_mean_numeric: mean.numeric,
        null_variance,
        z_score,
        p_value_normal,
        p_value_bootstrap: boot.as_ref().map(|b| b.p_value),
        bootstrap: boot.map(|b| BootstrapSummary {
            replicates: b.replicates,
            seed: b.seed,
            summary: b.summary,
            variance: b.variance,
        }),
        sparsity,
        seed: opts.seed,
    })
}
