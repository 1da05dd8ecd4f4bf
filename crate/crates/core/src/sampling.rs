//! Poisson sampling from fitted models and Monte Carlo predictive checks of
//! higher-order assortativity.
//!
//! Every replicate `b` draws from its own ChaCha stream (`seed`, stream `b`),
//! so results do not depend on how replicates are spread over threads.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GroupStats, LabeledDigraph};
use crate::models::{fit, FittedModel, ModelKind, SolverConfig};
use crate::paths::assortativity_of;
use crate::stats;

/// Mixes `tag` into `seed` (splitmix64 finalizer) to get an independent
/// master seed for a separate phase of a computation.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG of replicate `replicate` under master seed `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

pub(crate) fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive Poisson mean")
        .sample(rng) as u64
}

/// Multinomial split of `n` over `weights` by sequential binomials.
fn multinomial<R: Rng + ?Sized>(n: u64, weights: &[f64], rng: &mut R, out: &mut [u64]) {
    let mut left = n;
    let mut mass: f64 = weights.iter().sum();
    for (k, &w) in weights.iter().enumerate() {
        if left == 0 {
            out[k] = 0;
            continue;
        }
        let p = if mass > 0.0 {
            (w / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let x = if k + 1 == weights.len() || p >= 1.0 {
            left
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(left, p).expect("valid binomial").sample(rng)
        };
        out[k] = x;
        left -= x;
        mass -= w;
    }
}

/// One network with `A_ij ~ Poisson(mean(i, j))` independently.
///
/// Each block draws its edge total from a Poisson and then places every edge
/// by independent alias draws of source and target, which is the same law.
pub fn sample_network<R: Rng + ?Sized>(m: &FittedModel, rng: &mut R) -> LabeledDigraph {
    let space = m.space();
    let blocks = m.block_means();
    let groups = m.group_count();
    let mut edges = Vec::new();
    for r in 0..groups {
        for s in 0..groups {
            let count = poisson(blocks[r][s], rng);
            if count == 0 {
                continue;
            }
            let (src, dst) = (space.members(r), space.members(s));
            let wo: Vec<f64> = src.iter().map(|&i| m.theta_out(i, s)).collect();
            let wi: Vec<f64> = dst.iter().map(|&j| m.theta_in(j, r)).collect();
            let ao = WeightedAliasIndex::new(wo).expect("positive block mass");
            let ai = WeightedAliasIndex::new(wi).expect("positive block mass");
            edges.reserve(count as usize);
            for _ in 0..count {
                edges.push((src[ao.sample(rng)], dst[ai.sample(rng)], 1));
            }
        }
    }
    LabeledDigraph::from_index_edges(space.clone(), edges)
}

/// Degree tables of a network drawn from `m`, without materializing edges.
///
/// Given the block total `m_rs`, the out-endpoints and the in-endpoints of
/// the block's edges are independent multinomials, so the per-(node, group)
/// degrees are exact draws. Cost is linear in nodes times groups. Self-loop
/// totals are not tracked.
pub fn sample_group_stats<R: Rng + ?Sized>(m: &FittedModel, rng: &mut R) -> GroupStats {
    let space = m.space();
    let blocks = m.block_means();
    let groups = m.group_count();
    let n = m.node_count();
    let mut counts = vec![vec![0u64; groups]; groups];
    let mut d_out = vec![vec![0u64; groups]; n];
    let mut d_in = vec![vec![0u64; groups]; n];
    let mut buf = Vec::new();
    for r in 0..groups {
        for s in 0..groups {
            let total = poisson(blocks[r][s], rng);
            counts[r][s] = total;
            if total == 0 {
                continue;
            }
            let (src, dst) = (space.members(r), space.members(s));
            let wo: Vec<f64> = src.iter().map(|&i| m.theta_out(i, s)).collect();
            buf.resize(src.len(), 0);
            multinomial(total, &wo, rng, &mut buf);
            for (&i, &x) in src.iter().zip(&buf) {
                d_out[i][s] = x;
            }
            let wi: Vec<f64> = dst.iter().map(|&j| m.theta_in(j, r)).collect();
            buf.resize(dst.len(), 0);
            multinomial(total, &wi, rng, &mut buf);
            for (&j, &x) in dst.iter().zip(&buf) {
                d_in[j][r] = x;
            }
        }
    }
    GroupStats::from_tables(counts, d_out, d_in)
}

/// Monte Carlo distribution of `r^(k)` under a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub k: usize,
    pub replicates: usize,
    pub seed: u64,
    /// One entry per replicate; `None` where `r^(k)` is undefined.
    pub values: Vec<Option<f64>>,
    pub degenerate_count: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl McSummary {
    pub fn defined(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }
}

pub fn assortativity_distribution(
    m: &FittedModel,
    k: usize,
    replicates: usize,
    seed: u64,
) -> Result<McSummary> {
    if !(1..=3).contains(&k) {
        return Err(Error::UnsupportedPathLength(k));
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be positive".into()));
    }
    let values = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let g = sample_network(m, &mut replicate_rng(seed, b as u64));
            match assortativity_of(&g, k) {
                Ok(r) => Ok(Some(r)),
                Err(Error::NoPaths | Error::DegenerateMixing(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::AllReplicatesDegenerate(replicates));
    }
    let spread = stats::spread(&defined);
    Ok(McSummary {
        k,
        replicates,
        seed,
        degenerate_count: replicates - defined.len(),
        mean: spread.mean,
        sd: spread.sd,
        ci_low: spread.p2_5,
        ci_high: spread.p97_5,
        values,
    })
}

/// Two-tailed Monte Carlo p-value `2 min(P(x >= obs), P(x <= obs))`,
/// clipped to `[2/(B+1), 1]` with `B` the number of draws.
pub fn two_sided_p(draws: &[f64], observed: f64) -> f64 {
    let b = draws.len() as f64;
    let ge = draws.iter().filter(|&&x| x >= observed).count() as f64 / b;
    let le = draws.iter().filter(|&&x| x <= observed).count() as f64 / b;
    (2.0 * ge.min(le)).clamp(2.0 / (b + 1.0), 1.0)
}

/// Posterior predictive check of `r^(k)` for one graph and model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcReport {
    pub kind: ModelKind,
    pub k: usize,
    pub observed: f64,
    pub replicates: usize,
    pub degenerate_count: usize,
    pub mc_mean: f64,
    pub mc_sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `mc_mean / observed`; absent when the observed value is zero.
    pub ratio: Option<f64>,
    pub ratio_ci_low: Option<f64>,
    pub ratio_ci_high: Option<f64>,
    pub p_value: f64,
    pub seed: u64,
}

pub fn predictive_check(
    g: &LabeledDigraph,
    kind: ModelKind,
    k: usize,
    replicates: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<PpcReport> {
    let observed = assortativity_of(g, k)?;
    let model = fit(g, kind, cfg)?;
    let mc = assortativity_distribution(&model, k, replicates, seed)?;
    let draws = mc.defined();
    let (ratio, lo, hi) = if observed != 0.0 {
        let (a, b) = (mc.ci_low / observed, mc.ci_high / observed);
        (Some(mc.mean / observed), Some(a.min(b)), Some(a.max(b)))
    } else {
        (None, None, None)
    };
    Ok(PpcReport {
        kind,
        k,
        observed,
        replicates,
        degenerate_count: mc.degenerate_count,
        mc_mean: mc.mean,
        mc_sd: mc.sd,
        ci_low: mc.ci_low,
        ci_high: mc.ci_high,
        ratio,
        ratio_ci_low: lo,
        ratio_ci_high: hi,
        p_value: two_sided_p(&draws, observed),
        seed,
    })
}

/// Replicate draws as CSV with columns `replicate,value`; undefined draws
/// leave `value` empty.
pub fn write_replicates_csv<W: Write>(out: W, values: &[Option<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "<replicates>".into(),
        source: e.into(),
    };
    w.write_record(["replicate", "value"]).map_err(io)?;
    for (b, v) in values.iter().enumerate() {
        let v = v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([b.to_string(), v]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "<replicates>".into(),
        source: e,
    })
}
