//! Directed stochastic block models with degree-corrected and
//! mixed-propensity parametrizations: fitting, sampling, higher-order
//! assortativity, and likelihood-ratio model selection.

pub mod error;
pub mod experiments;
pub mod graph;
pub mod io;
pub mod models;
pub mod moments;
pub mod paths;
pub mod sampling;
pub mod selection;
pub mod stats;

pub use error::{Error, Result};
pub use experiments::{
    run_llr_density_sweep, run_ppc_study, synth_brokerage, synth_dcsbm, BrokerageConfig,
    PpcStudyRow, SweepConfig, SweepRow, SweepTable, SynthConfig,
};
pub use graph::{build_graph, group_stats, Edge, GroupStats, LabeledDigraph, NodeSpace};
pub use models::{
    expected_adjacency, expected_path_counts, fit, fit_dcsbm, fit_dcsbm_stats, fit_mixed_group,
    fit_mixed_node, log_likelihood, FittedModel, ModelKind, SolverConfig,
};
pub use moments::{
    poisson_xlogx_mean, xlogx_moments, xlogx_moments_taylor, TaylorMoments, XlogxMoments,
};
pub use paths::{assortativity, path_counts, MixingSummary, PathCounts};
pub use sampling::{
    assortativity_distribution, predictive_check, sample_group_stats, sample_network, McSummary,
    PpcReport,
};
pub use selection::{
    bootstrap_llr_null, expected_llr_null, llr_statistic, llr_test, llr_variance_null,
    sparsity_diagnostic, LlrOptions, LlrReport, NullVariance, SparsityReport, VarianceMethod,
    VarianceOptions,
};

#[cfg(test)]
pub(crate) mod testutil;
