//! Synthetic generators and scripted simulation studies.

use std::io::Write;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LabeledDigraph, NodeSpace};
use crate::models::{FittedModel, ModelKind, SolverConfig};
use crate::sampling::{derive_seed, predictive_check, replicate_rng, sample_group_stats};
use crate::selection::{bootstrap_from_stats, expected_llr_null, simulate_llr_null};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_nodes: usize,
    /// Groups are contiguous blocks of `n_nodes / n_groups` nodes.
    pub n_groups: usize,
    pub target_total_edges: f64,
    pub in_group_fraction: f64,
    pub powerlaw_exponent: f64,
    /// Support of the propensity density; `None` means `[1, n_nodes]`.
    pub powerlaw_range: Option<(f64, f64)>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(n_nodes: usize, n_groups: usize, target_total_edges: f64, seed: u64) -> Self {
        Self {
            n_nodes,
            n_groups,
            target_total_edges,
            in_group_fraction: 0.7,
            powerlaw_exponent: -0.3,
            powerlaw_range: None,
            seed,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        self.powerlaw_range.unwrap_or((1.0, self.n_nodes as f64))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_groups == 0 || self.n_nodes == 0 {
            return bad("need at least one node and one group".into());
        }
        if !self.n_nodes.is_multiple_of(self.n_groups) {
            return bad(format!(
                "{} nodes cannot be split into {} equal groups",
                self.n_nodes, self.n_groups
            ));
        }
        if !(self.in_group_fraction > 0.0 && self.in_group_fraction < 1.0) {
            return bad(format!(
                "in_group_fraction {} not in (0, 1)",
                self.in_group_fraction
            ));
        }
        if !(self.target_total_edges.is_finite() && self.target_total_edges > 0.0) {
            return bad(format!(
                "target_total_edges {} must be positive",
                self.target_total_edges
            ));
        }
        let (lo, hi) = self.range();
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) || !self.powerlaw_exponent.is_finite() {
            return bad(format!(
                "invalid power law [{lo}, {hi}] ^ {}",
                self.powerlaw_exponent
            ));
        }
        Ok(())
    }

    fn space(&self) -> NodeSpace {
        let size = self.n_nodes / self.n_groups;
        NodeSpace::from_parts(
            (0..self.n_nodes).map(|i| i.to_string()).collect(),
            (0..self.n_groups).map(|g| format!("g{g}")).collect(),
            (0..self.n_nodes).map(|i| i / size).collect(),
        )
    }

    /// Group rates: the in-group share split evenly over the diagonal, the
    /// rest evenly over off-diagonal pairs.
    fn omega(&self) -> Vec<Vec<f64>> {
        let g = self.n_groups;
        let t = self.target_total_edges;
        if g == 1 {
            return vec![vec![t]];
        }
        let within = self.in_group_fraction * t / g as f64;
        let across = (1.0 - self.in_group_fraction) * t / (g * (g - 1)) as f64;
        (0..g)
            .map(|r| {
                (0..g)
                    .map(|s| if r == s { within } else { across })
                    .collect()
            })
            .collect()
    }
}

/// Inverse-CDF draw from the density proportional to `x^alpha` on `[lo, hi]`.
pub fn powerlaw_sample<R: Rng + ?Sized>(alpha: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if lo == hi {
        return lo;
    }
    if (alpha + 1.0).abs() < 1e-12 {
        return lo * (hi / lo).powf(u);
    }
    let e = alpha + 1.0;
    let (a, b) = (lo.powf(e), hi.powf(e));
    (a + u * (b - a)).powf(1.0 / e).clamp(lo, hi)
}

/// Weights normalized to sum to one within each group.
fn normalize_by_group(weights: &[f64], space: &NodeSpace) -> Vec<Vec<f64>> {
    let mut totals = vec![0.0; space.group_count()];
    for (i, w) in weights.iter().enumerate() {
        totals[space.group_of(i)] += w;
    }
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| vec![w / totals[space.group_of(i)]])
        .collect()
}

/// DCSBM with power-law propensities, drawn independently for the out and
/// in sides, and rates scaled to `target_total_edges` in expectation.
pub fn synth_dcsbm(cfg: &SynthConfig) -> Result<FittedModel> {
    cfg.validate()?;
    let space = cfg.space();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (lo, hi) = cfg.range();
    let mut draw = |_| powerlaw_sample(cfg.powerlaw_exponent, lo, hi, &mut rng);
    let out: Vec<f64> = (0..cfg.n_nodes).map(&mut draw).collect();
    let inn: Vec<f64> = (0..cfg.n_nodes).map(&mut draw).collect();
    let theta_out = normalize_by_group(&out, &space);
    let theta_in = normalize_by_group(&inn, &space);
    FittedModel::from_parameters(
        ModelKind::Dcsbm,
        Arc::new(space),
        theta_out,
        theta_in,
        cfg.omega(),
    )
}

/// Smallest and largest expected degree of a node to or from a group.
pub fn group_degree_range(m: &FittedModel) -> (f64, f64) {
    let all = m
        .expected_out_degrees()
        .into_iter()
        .chain(m.expected_in_degrees());
    all.flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
            (lo.min(x), hi.max(x))
        })
}

/// Copy of `m` with every rate multiplied by `factor`.
pub fn scale_rates(m: &FittedModel, factor: f64) -> Result<FittedModel> {
    let omega = m
        .omega()
        .iter()
        .map(|row| row.iter().map(|w| w * factor).collect())
        .collect();
    FittedModel::from_parameters(
        m.kind(),
        m.space().clone(),
        m.theta_out_rows().to_vec(),
        m.theta_in_rows().to_vec(),
        omega,
    )
}

/// Rescales rates so the smallest expected group degree equals `degree`.
pub fn with_min_group_degree(m: &FittedModel, degree: f64) -> Result<FittedModel> {
    scale_rates(m, degree / group_degree_range(m).0)
}

/// Rescales rates so the largest expected group degree equals `degree`.
pub fn with_max_group_degree(m: &FittedModel, degree: f64) -> Result<FittedModel> {
    scale_rates(m, degree / group_degree_range(m).1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrokerageConfig {
    pub n_nodes: usize,
    pub n_groups: usize,
    pub mean_degree: f64,
    pub in_group_fraction: f64,
    /// Share of each group that carries all of its cross-group propensity.
    pub broker_fraction: f64,
    pub seed: u64,
}

impl BrokerageConfig {
    pub fn new(n_nodes: usize, seed: u64) -> Self {
        Self {
            n_nodes,
            n_groups: 2,
            mean_degree: 10.0,
            in_group_fraction: 0.7,
            broker_fraction: 0.1,
            seed,
        }
    }
}

/// Group-constrained mixed model in which only a few brokers per group send
/// and receive cross-group edges. Within-group propensities are spread over
/// all members with power-law weights on `[1, 10]`.
pub fn synth_brokerage(cfg: &BrokerageConfig) -> Result<FittedModel> {
    if !(cfg.broker_fraction > 0.0 && cfg.broker_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "broker_fraction {} not in (0, 1]",
            cfg.broker_fraction
        )));
    }
    let base = SynthConfig {
        in_group_fraction: cfg.in_group_fraction,
        powerlaw_range: Some((1.0, 10.0)),
        ..SynthConfig::new(
            cfg.n_nodes,
            cfg.n_groups,
            cfg.mean_degree * cfg.n_nodes as f64,
            cfg.seed,
        )
    };
    base.validate()?;
    let space = base.space();
    let groups = cfg.n_groups;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut broker = vec![false; cfg.n_nodes];
    for g in 0..groups {
        let mut members = space.members(g).to_vec();
        members.shuffle(&mut rng);
        let k = ((members.len() as f64 * cfg.broker_fraction).ceil() as usize).max(1);
        for &i in &members[..k] {
            broker[i] = true;
        }
    }
    let side = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        let raw: Vec<Vec<f64>> = (0..cfg.n_nodes)
            .map(|i| {
                let w = powerlaw_sample(base.powerlaw_exponent, 1.0, 10.0, rng);
                (0..groups)
                    .map(|s| {
                        if s == space.group_of(i) || broker[i] {
                            w
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let mut totals = vec![vec![0.0; groups]; groups];
        for (i, row) in raw.iter().enumerate() {
            for s in 0..groups {
                totals[space.group_of(i)][s] += row[s];
            }
        }
        raw.iter()
            .enumerate()
            .map(|(i, row)| {
                (0..groups)
                    .map(|s| row[s] / totals[space.group_of(i)][s])
                    .collect()
            })
            .collect()
    };
    let theta_out = side(&mut rng);
    let theta_in = side(&mut rng);
    FittedModel::from_parameters(
        ModelKind::MixedGroup,
        Arc::new(space.clone()),
        theta_out,
        theta_in,
        base.omega(),
    )
}

/// Nodes above which sweeps need `allow_large`.
pub const SWEEP_NODE_GUARD: usize = 5000;

pub const SWEEP_SCHEMA: &str = "dsbm.llr_sweep/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Generator settings; `target_total_edges` is replaced per cell.
    pub base: SynthConfig,
    /// Expected total edge counts, one cell each.
    pub densities: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub allow_large: bool,
}

impl SweepConfig {
    /// Desk-scale grid: 1,000 nodes in two groups, from about one expected
    /// edge per node-group pair up to a dense regime.
    pub fn desk(seed: u64) -> Self {
        Self {
            base: SynthConfig::new(1000, 2, 1.0, seed),
            densities: vec![2e3, 1e4, 5e4, 2e5, 1e6, 1e7],
            replicates: 500,
            seed,
            allow_large: false,
        }
    }

    /// 30,000 nodes in two groups; needs `allow_large`.
    pub fn full_scale(seed: u64) -> Self {
        Self {
            base: SynthConfig::new(30_000, 2, 1.0, seed),
            densities: vec![6e4, 3e5, 1.5e6, 6e6, 3e7, 3e8],
            replicates: 500,
            seed,
            allow_large: true,
        }
    }
}

/// One density cell. Column order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub target_total_edges: f64,
    pub min_expected_group_degree: f64,
    pub max_expected_group_degree: f64,
    pub dense_formula: f64,
    pub numeric_mean: f64,
    pub true_mc_mean: f64,
    pub true_mc_se: f64,
    pub true_mc_sd: f64,
    pub true_mc_p2_5: f64,
    pub true_mc_p97_5: f64,
    pub observed_lambda: f64,
    pub bootstrap_mean: f64,
    pub bootstrap_se: f64,
    pub bootstrap_sd: f64,
    pub bootstrap_p2_5: f64,
    pub bootstrap_p97_5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub schema: String,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

/// For each density: the statistic's distribution under the true model, and
/// the parametric bootstrap from one network drawn from it.
pub fn run_llr_density_sweep(cfg: &SweepConfig) -> Result<SweepTable> {
    if cfg.base.n_nodes > SWEEP_NODE_GUARD && !cfg.allow_large {
        return Err(Error::InvalidArgument(format!(
            "{} nodes exceeds the desk-scale guard of {SWEEP_NODE_GUARD}; enable allow_large",
            cfg.base.n_nodes
        )));
    }
    if cfg.densities.is_empty() {
        return Err(Error::InvalidArgument("empty density grid".into()));
    }
    let mut rows = Vec::with_capacity(cfg.densities.len());
    for (c, &density) in cfg.densities.iter().enumerate() {
        let synth = SynthConfig {
            target_total_edges: density,
            ..cfg.base.clone()
        };
        let model = synth_dcsbm(&synth)?;
        let cell = derive_seed(cfg.seed, c as u64);
        let mean = expected_llr_null(&model)?;
        let truth = stats::spread(&simulate_llr_null(
            &model,
            cfg.replicates,
            derive_seed(cell, 0),
        ));
        let observed = sample_group_stats(&model, &mut replicate_rng(derive_seed(cell, 1), 0));
        let boot = bootstrap_from_stats(
            model.space(),
            &observed,
            cfg.replicates,
            derive_seed(cell, 2),
        )?;
        let (lo, hi) = group_degree_range(&model);
        rows.push(SweepRow {
            target_total_edges: density,
            min_expected_group_degree: lo,
            max_expected_group_degree: hi,
            dense_formula: mean.dense,
            numeric_mean: mean.numeric,
            true_mc_mean: truth.mean,
            true_mc_se: truth.se,
            true_mc_sd: truth.sd,
            true_mc_p2_5: truth.p2_5,
            true_mc_p97_5: truth.p97_5,
            observed_lambda: boot.observed,
            bootstrap_mean: boot.summary.mean,
            bootstrap_se: boot.summary.se,
            bootstrap_sd: boot.summary.sd,
            bootstrap_p2_5: boot.summary.p2_5,
            bootstrap_p97_5: boot.summary.p97_5,
        });
    }
    Ok(SweepTable {
        schema: SWEEP_SCHEMA.into(),
        config: cfg.clone(),
        rows,
    })
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io {
        path: "<csv>".into(),
        source: e.into(),
    }
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<csv>".into(),
        source: e,
    })
}

/// Sweep rows as CSV, columns in [`SweepRow`] field order.
pub fn write_sweep_csv<W: Write>(out: W, table: &SweepTable) -> Result<()> {
    write_rows(out, &table.rows)
}

/// One (graph, model kind, path length) predictive check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcStudyRow {
    pub graph: String,
    pub kind: ModelKind,
    pub k: usize,
    pub observed: Option<f64>,
    pub mc_mean: Option<f64>,
    pub ratio: Option<f64>,
    pub ratio_ci_low: Option<f64>,
    pub ratio_ci_high: Option<f64>,
    pub p_value: Option<f64>,
    pub degenerate_count: Option<usize>,
    /// Why the row has no estimate, when it has none.
    pub flag: Option<String>,
}

/// Predictive checks for every graph, path length and both the DCSBM and
/// the group-constrained mixed model. Rows come grouped by model kind and
/// path length, each group sorted by descending ratio; rows without a ratio
/// go last.
pub fn run_ppc_study(
    graphs: &[(String, LabeledDigraph)],
    k_list: &[usize],
    replicates: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Vec<PpcStudyRow>> {
    let kinds = [ModelKind::Dcsbm, ModelKind::MixedGroup];
    let mut rows = Vec::new();
    for (ki, &kind) in kinds.iter().enumerate() {
        for &k in k_list {
            let mut block = Vec::new();
            for (gi, (name, g)) in graphs.iter().enumerate() {
                let tag = ((gi as u64) << 16) | ((k as u64) << 4) | ki as u64;
                let row =
                    match predictive_check(g, kind, k, replicates, derive_seed(seed, tag), cfg) {
                        Ok(rep) => PpcStudyRow {
                            graph: name.clone(),
                            kind,
                            k,
                            observed: Some(rep.observed),
                            mc_mean: Some(rep.mc_mean),
                            ratio: rep.ratio,
                            ratio_ci_low: rep.ratio_ci_low,
                            ratio_ci_high: rep.ratio_ci_high,
                            p_value: Some(rep.p_value),
                            degenerate_count: Some(rep.degenerate_count),
                            flag: rep
                                .ratio
                                .is_none()
                                .then(|| "observed assortativity is zero".into()),
                        },
                        Err(e) if e.is_numerical() => PpcStudyRow {
                            graph: name.clone(),
                            kind,
                            k,
                            observed: None,
                            mc_mean: None,
                            ratio: None,
                            ratio_ci_low: None,
                            ratio_ci_high: None,
                            p_value: None,
                            degenerate_count: None,
                            flag: Some(e.to_string()),
                        },
                        Err(e) => return Err(e),
                    };
                block.push(row);
            }
            block.sort_by(|a, b| match (a.ratio, b.ratio) {
                (Some(x), Some(y)) => y.total_cmp(&x),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            });
            rows.extend(block);
        }
    }
    Ok(rows)
}

pub fn write_ppc_csv<W: Write>(out: W, rows: &[PpcStudyRow]) -> Result<()> {
    write_rows(out, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::sample_network;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn omega_proportions() {
        let cfg = SynthConfig::new(30_000, 2, 1e6, 1);
        let om = cfg.omega();
        assert_relative_eq!(om[0][0], 0.35e6, max_relative = 1e-12);
        assert_relative_eq!(om[1][1], 0.35e6, max_relative = 1e-12);
        assert_relative_eq!(om[0][1], 0.15e6, max_relative = 1e-12);
        assert_relative_eq!(om[1][0], 0.15e6, max_relative = 1e-12);
        let three = SynthConfig::new(30, 3, 900.0, 1).omega();
        let total: f64 = three.iter().flatten().sum();
        assert_relative_eq!(total, 900.0, max_relative = 1e-12);
    }

    #[test]
    fn propensities_sum_to_one_per_group() {
        let m = synth_dcsbm(&SynthConfig::new(300, 3, 5e3, 4)).unwrap();
        for g in 0..3 {
            let members = m.space().members(g);
            let so: f64 = members.iter().map(|&i| m.theta_out(i, 0)).sum();
            let si: f64 = members.iter().map(|&i| m.theta_in(i, 0)).sum();
            assert!((so - 1.0).abs() < 1e-12 && (si - 1.0).abs() < 1e-12);
        }
        assert!(m.normalization_violation() < 1e-12);
    }

    #[test]
    fn sampled_totals_hit_target() {
        let target = 2500.0;
        let m = synth_dcsbm(&SynthConfig::new(100, 2, target, 8)).unwrap();
        let draws: Vec<f64> = (0..1000)
            .map(|b| sample_group_stats(&m, &mut replicate_rng(3, b)).total_edges() as f64)
            .collect();
        let sp = stats::spread(&draws);
        assert!((sp.mean - target).abs() < 3.0 * sp.se, "{sp:?}");
    }

    #[test]
    fn invalid_configs() {
        let ok = SynthConfig::new(10, 2, 10.0, 0);
        assert!(ok.validate().is_ok());
        for bad in [
            SynthConfig {
                n_nodes: 11,
                ..ok.clone()
            },
            SynthConfig {
                in_group_fraction: 1.0,
                ..ok.clone()
            },
            SynthConfig {
                in_group_fraction: 0.0,
                ..ok.clone()
            },
            SynthConfig {
                target_total_edges: 0.0,
                ..ok.clone()
            },
            SynthConfig {
                powerlaw_range: Some((0.0, 3.0)),
                ..ok.clone()
            },
            SynthConfig {
                powerlaw_range: Some((4.0, 3.0)),
                ..ok.clone()
            },
            SynthConfig {
                n_groups: 0,
                ..ok.clone()
            },
        ] {
            assert!(
                matches!(synth_dcsbm(&bad), Err(Error::InvalidArgument(_))),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn powerlaw_cdf() {
        // Empirical CDF at the median of x^-0.3 on [1, 100] is one half.
        let (a, lo, hi) = (-0.3f64, 1.0f64, 100.0f64);
        let e = a + 1.0;
        let median = ((lo.powf(e) + hi.powf(e)) / 2.0).powf(1.0 / e);
        let mut rng = replicate_rng(1, 0);
        let n = 20_000;
        let below = (0..n)
            .filter(|_| powerlaw_sample(a, lo, hi, &mut rng) < median)
            .count() as f64
            / n as f64;
        assert!((below - 0.5).abs() < 4.0 * (0.25f64 / n as f64).sqrt());
        let x = powerlaw_sample(-1.0, 2.0, 8.0, &mut rng);
        assert!((2.0..=8.0).contains(&x));
        assert_eq!(powerlaw_sample(-0.3, 3.0, 3.0, &mut rng), 3.0);
    }

    #[test]
    fn degree_rescaling() {
        let m = synth_dcsbm(&SynthConfig::new(40, 2, 100.0, 2)).unwrap();
        let dense = with_min_group_degree(&m, 50.0).unwrap();
        assert_relative_eq!(group_degree_range(&dense).0, 50.0, max_relative = 1e-12);
        let sparse = with_max_group_degree(&m, 2.0).unwrap();
        assert_relative_eq!(group_degree_range(&sparse).1, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn brokers_carry_all_cross_group_propensity() {
        let m = synth_brokerage(&BrokerageConfig::new(200, 3)).unwrap();
        assert_eq!(m.kind(), ModelKind::MixedGroup);
        assert!(m.normalization_violation() < 1e-12);
        let space = m.space();
        let mut brokers = 0;
        for i in 0..200 {
            let other = 1 - space.group_of(i);
            let cross = m.theta_out(i, other);
            assert_eq!(cross > 0.0, m.theta_in(i, other) > 0.0);
            brokers += (cross > 0.0) as usize;
        }
        assert_eq!(brokers, 20);
        let g = sample_network(&m, &mut replicate_rng(1, 0));
        assert!(g.total_edges() > 1500);
    }

    fn small_sweep(seed: u64) -> SweepConfig {
        SweepConfig {
            base: SynthConfig::new(40, 2, 1.0, 5),
            densities: vec![200.0, 5e4],
            replicates: 120,
            seed,
            allow_large: false,
        }
    }

    #[test]
    fn sweep_is_reproducible() {
        let a = run_llr_density_sweep(&small_sweep(1)).unwrap();
        let b = run_llr_density_sweep(&small_sweep(1)).unwrap();
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        write_sweep_csv(&mut ca, &a).unwrap();
        write_sweep_csv(&mut cb, &b).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let text = String::from_utf8(ca).unwrap();
        assert!(text.starts_with(
            "target_total_edges,min_expected_group_degree,max_expected_group_degree,dense_formula,"
        ));
        assert_eq!(text.lines().count(), 3);
        assert_ne!(run_llr_density_sweep(&small_sweep(2)).unwrap().rows, a.rows);
        assert_eq!(a.rows[0].dense_formula, 38.0);
    }

    #[test]
    fn sweep_guards() {
        let mut cfg = small_sweep(1);
        cfg.base = SynthConfig::new(6000, 2, 1.0, 1);
        assert!(matches!(
            run_llr_density_sweep(&cfg),
            Err(Error::InvalidArgument(_))
        ));
        cfg.densities.clear();
        cfg.allow_large = true;
        assert!(run_llr_density_sweep(&cfg).is_err());
    }

    #[test]
    fn ppc_study_rows_are_sorted_and_flagged() {
        let mut graphs = Vec::new();
        for seed in 0..3 {
            let m = synth_brokerage(&BrokerageConfig::new(60, seed)).unwrap();
            graphs.push((
                format!("b{seed}"),
                sample_network(&m, &mut replicate_rng(seed, 9)),
            ));
        }
        let single =
            crate::graph::build_graph(&[("a", "b", 1)], &[("a", "x"), ("b", "x")]).unwrap();
        graphs.push(("single".into(), single));
        let rows = run_ppc_study(&graphs, &[1, 2], 40, 3, &SolverConfig::default()).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 4);
        for block in rows.chunks(4) {
            let kind = block[0].kind;
            let k = block[0].k;
            assert!(block.iter().all(|r| r.kind == kind && r.k == k));
            let ratios: Vec<f64> = block.iter().filter_map(|r| r.ratio).collect();
            assert!(ratios.windows(2).all(|w| w[0] >= w[1]));
            let last = block.last().unwrap();
            assert_eq!(last.graph, "single");
            assert!(last.flag.is_some() && last.ratio.is_none());
        }
        let mut buf = Vec::new();
        write_ppc_csv(&mut buf, &rows).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap().lines().count(),
            rows.len() + 1
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn synth_models_are_valid(n_per in 1usize..20, groups in 1usize..4, seed in any::<u64>(),
                                  alpha in -2.0f64..1.0, frac in 0.05f64..0.95) {
            let cfg = SynthConfig {
                in_group_fraction: frac,
                powerlaw_exponent: alpha,
                ..SynthConfig::new(n_per * groups, groups, 1000.0, seed)
            };
            let m = synth_dcsbm(&cfg).unwrap();
            prop_assert!(m.normalization_violation() < 1e-12);
            let total: f64 = m.block_means().iter().flatten().sum();
            prop_assert!((total - 1000.0).abs() < 1e-9);
        }
    }
}
