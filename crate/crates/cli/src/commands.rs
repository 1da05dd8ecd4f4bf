use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use dsbm_core::experiments::{run_llr_density_sweep, write_sweep_csv, SweepConfig, SynthConfig};
use dsbm_core::io::{load_graph, write_edges, write_groups};
use dsbm_core::models::ModelDocument;
use dsbm_core::sampling::{replicate_rng, write_replicates_csv};
use dsbm_core::{
    assortativity, bootstrap_llr_null, fit, llr_test, log_likelihood, path_counts,
    predictive_check, sample_network, FittedModel, LabeledDigraph, LlrOptions, ModelKind,
    SolverConfig, VarianceOptions,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::output::{csv_with_preamble, emit, json, Artifact};
use crate::{Command, GraphArgs, OutArgs, Usage};

/// Uses the given seed, or draws one and reports it on stderr.
fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn load(graph: &GraphArgs) -> Result<LabeledDigraph> {
    Ok(load_graph(&graph.edges, &graph.groups)?)
}

fn base(sub: &'static str, graph: &GraphArgs, out: &OutArgs) -> RunConfig {
    let mut run = RunConfig::new(sub, out.out.clone(), out.format);
    run.edges = Some(graph.edges.clone());
    run.groups = Some(graph.groups.clone());
    run
}

fn csv_rows<T: Serialize>(buf: &mut Vec<u8>, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(buf);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the artifact `stem.json` or `stem.csv` depending on the format.
fn single<T: Serialize>(
    run: &RunConfig,
    out: &OutArgs,
    stem: &str,
    result: &T,
    csv_body: impl FnOnce(&mut Vec<u8>) -> Result<()>,
) -> Result<()> {
    let artifact = match out.format {
        Format::Json => Artifact::new(format!("{stem}.json"), json(run, result)?),
        Format::Csv => Artifact::new(format!("{stem}.csv"), csv_with_preamble(run, csv_body)?),
    };
    emit(out.out.as_deref(), out.force, &[artifact])
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit {
            graph,
            model,
            max_iterations,
            tolerance,
            out,
        } => cmd_fit(
            &graph,
            model,
            SolverConfig {
                max_iterations,
                tolerance,
            },
            &out,
        ),
        Command::Sample {
            model_file,
            edges,
            groups,
            model,
            replicates,
            seed,
            out,
            force,
        } => cmd_sample(
            model_file, edges, groups, model, replicates, seed, &out, force,
        ),
        Command::Assort { graph, k, out } => cmd_assort(&graph, k, &out),
        Command::Ppc {
            graph,
            model,
            k,
            replicates,
            seed,
            out,
        } => cmd_ppc(&graph, model, k, replicates, seed, &out),
        Command::Llr {
            graph,
            variance,
            replicates,
            bootstrap,
            seed,
            out,
        } => {
            let seed = resolve_seed(seed);
            let mut run = base("llr", &graph, &out);
            run.replicates = Some(replicates);
            run.seed = Some(seed);
            run.extra = json!({ "variance": variance, "bootstrap": bootstrap });
            let g = load(&graph)?;
            let opts = LlrOptions {
                variance: VarianceOptions {
                    method: variance,
                    replicates,
                    seed,
                    ..Default::default()
                },
                bootstrap_replicates: bootstrap,
                seed,
                ..Default::default()
            };
            let report = llr_test(&g, &opts)?;
            single(&run, &out, "llr", &report, |buf| {
                #[derive(Serialize)]
                struct Row {
                    lambda_hat: f64,
                    null_mean_dense: f64,
                    null_mean_numeric: f64,
                    null_variance: f64,
                    variance_method: &'static str,
                    z_score: f64,
                    p_value_normal: f64,
                    p_value_bootstrap: Option<f64>,
                    min_expected_group_degree: f64,
                    sparse_flag: bool,
                    seed: u64,
                }
                csv_rows(
                    buf,
                    &[Row {
                        lambda_hat: report.lambda_hat,
                        null_mean_dense: report.null_mean_dense,
                        null_mean_numeric: report.null_mean_numeric,
                        null_variance: report.null_variance.value,
                        variance_method: report.null_variance.method.name(),
                        z_score: report.z_score,
                        p_value_normal: report.p_value_normal,
                        p_value_bootstrap: report.p_value_bootstrap,
                        min_expected_group_degree: report.sparsity.min_expected_group_degree,
                        sparse_flag: report.sparsity.sparse_flag,
                        seed: report.seed,
                    }],
                )
            })
        }
        Command::Bootstrap {
            graph,
            replicates,
            seed,
            out,
        } => {
            let seed = resolve_seed(seed);
            let mut run = base("bootstrap", &graph, &out);
            run.replicates = Some(replicates);
            run.seed = Some(seed);
            let g = load(&graph)?;
            let report = bootstrap_llr_null(&g, replicates, seed)?;
            single(&run, &out, "bootstrap", &report, |buf| {
                let values: Vec<Option<f64>> = report.values.iter().copied().map(Some).collect();
                Ok(write_replicates_csv(buf, &values)?)
            })
        }
        Command::Sweep {
            n_nodes,
            n_groups,
            densities,
            replicates,
            seed,
            full_scale,
            allow_large,
            out,
        } => cmd_sweep(
            n_nodes,
            n_groups,
            densities,
            replicates,
            seed,
            full_scale,
            allow_large,
            &out,
        ),
    }
}

fn parameter_count(kind: ModelKind, n: usize, g: usize) -> usize {
    let omega = g * g;
    match kind {
        ModelKind::Dcsbm => 2 * (n - g) + omega,
        ModelKind::MixedGroup => 2 * (n * g - g * g) + omega,
        ModelKind::MixedNode => 2 * n * (g - 1) + omega,
    }
}

#[derive(Serialize)]
struct FitSummary {
    kind: ModelKind,
    nodes: usize,
    groups: usize,
    edges: u64,
    log_likelihood: f64,
    parameters: usize,
    normalization_violation: f64,
}

#[derive(Serialize)]
struct FitResult {
    summary: FitSummary,
    model: ModelDocument,
}

#[derive(Serialize)]
struct ThetaRow<'a> {
    node: &'a str,
    group: &'a str,
    side: &'static str,
    other_group: &'a str,
    theta: f64,
}

fn cmd_fit(graph: &GraphArgs, kind: ModelKind, solver: SolverConfig, out: &OutArgs) -> Result<()> {
    let mut run = base("fit", graph, out);
    run.model = Some(kind.name().into());
    if kind == ModelKind::MixedNode {
        run.extra =
            json!({ "max_iterations": solver.max_iterations, "tolerance": solver.tolerance });
    }
    let g = load(graph)?;
    let m = fit(&g, kind, &solver)?;
    let result = FitResult {
        summary: FitSummary {
            kind,
            nodes: g.node_count(),
            groups: g.group_count(),
            edges: g.total_edges(),
            log_likelihood: log_likelihood(&m, &g)?,
            parameters: parameter_count(kind, g.node_count(), g.group_count()),
            normalization_violation: m.normalization_violation(),
        },
        model: ModelDocument::from(&m),
    };
    single(&run, out, "fit", &result, |buf| {
        let space = m.space();
        let labels = space.group_labels();
        let mut rows = Vec::new();
        for (i, id) in space.node_ids().iter().enumerate() {
            let group = &labels[space.group_of(i)];
            for (side, thetas) in [
                ("out", &m.theta_out_rows()[i]),
                ("in", &m.theta_in_rows()[i]),
            ] {
                for (s, &theta) in thetas.iter().enumerate() {
                    // DCSBM propensities do not depend on the other group.
                    let other = if thetas.len() == 1 {
                        "*"
                    } else {
                        labels[s].as_str()
                    };
                    rows.push(ThetaRow {
                        node: id,
                        group,
                        side,
                        other_group: other,
                        theta,
                    });
                }
            }
        }
        csv_rows(buf, &rows)
    })
}

/// Reads a model from a `fit` artifact or a bare model document.
fn load_model(path: &Path) -> Result<FittedModel> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(model) = value.pointer_mut("/result/model") {
        value = model.take();
    }
    let doc: ModelDocument = serde_json::from_value(value)
        .map_err(dsbm_core::Error::from)
        .with_context(|| format!("{}", path.display()))?;
    Ok(doc.into_model()?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    model_file: Option<PathBuf>,
    edges: Option<PathBuf>,
    groups: Option<PathBuf>,
    kind: Option<ModelKind>,
    replicates: usize,
    seed: Option<u64>,
    out: &Path,
    force: bool,
) -> Result<()> {
    if replicates == 0 {
        return Err(Usage("--replicates must be positive".into()).into());
    }
    let mut run = RunConfig::new("sample", Some(out.to_path_buf()), Format::Csv);
    let m = match (&model_file, &edges, &groups, kind) {
        (Some(path), ..) => {
            run.model_file = Some(path.clone());
            load_model(path)?
        }
        (None, Some(e), Some(gr), Some(kind)) => {
            let graph = GraphArgs {
                edges: e.clone(),
                groups: gr.clone(),
            };
            run.edges = Some(e.clone());
            run.groups = Some(gr.clone());
            run.model = Some(kind.name().into());
            fit(&load(&graph)?, kind, &SolverConfig::default())?
        }
        _ => {
            return Err(
                Usage("sample needs --model-file, or --edges, --groups and --model".into()).into(),
            )
        }
    };
    let seed = resolve_seed(seed);
    run.replicates = Some(replicates);
    run.seed = Some(seed);
    let width = (replicates - 1).to_string().len().max(3);
    let mut artifacts = Vec::with_capacity(replicates + 1);
    for b in 0..replicates {
        let g = sample_network(&m, &mut replicate_rng(seed, b as u64));
        if b == 0 {
            let bytes = csv_with_preamble(&run, |buf| Ok(write_groups(&g, buf)?))?;
            artifacts.push(Artifact::new("groups.csv", bytes));
        }
        let bytes = csv_with_preamble(&run, |buf| {
            writeln!(buf, "# replicate: {b}")?;
            Ok(write_edges(&g, buf)?)
        })?;
        artifacts.push(Artifact::new(format!("sample_{b:0width$}.csv"), bytes));
    }
    emit(Some(out), force, &artifacts)
}

#[derive(Serialize)]
struct AssortRow {
    k: usize,
    total_paths: u64,
    r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct AssortDetail {
    #[serde(flatten)]
    row: AssortRow,
    counts: Vec<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixing: Option<dsbm_core::MixingSummary>,
}

fn cmd_assort(graph: &GraphArgs, k: Vec<usize>, out: &OutArgs) -> Result<()> {
    let mut run = base("assort", graph, out);
    run.k = k.clone();
    let g = load(graph)?;
    let mut details = Vec::new();
    for &k in &k {
        let pc = path_counts(&g, k)?;
        let (mixing, note) = match assortativity(&pc) {
            Ok(m) => (Some(m), None),
            Err(e) if e.is_numerical() => (None, Some(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        details.push(AssortDetail {
            row: AssortRow {
                k,
                total_paths: pc.total,
                r: mixing.as_ref().map(|m| m.r_coeff),
                note,
            },
            counts: pc.counts,
            mixing,
        });
    }
    single(&run, out, "assort", &details, |buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["k", "total_paths", "r", "note"])?;
        for d in &details {
            let r = d.row.r.map(|r| r.to_string()).unwrap_or_default();
            let note = d.row.note.clone().unwrap_or_default();
            w.write_record([d.row.k.to_string(), d.row.total_paths.to_string(), r, note])?;
        }
        w.flush()?;
        Ok(())
    })
}

fn cmd_ppc(
    graph: &GraphArgs,
    kind: ModelKind,
    k: Vec<usize>,
    replicates: usize,
    seed: Option<u64>,
    out: &OutArgs,
) -> Result<()> {
    let seed = resolve_seed(seed);
    let mut run = base("ppc", graph, out);
    run.model = Some(kind.name().into());
    run.k = k.clone();
    run.replicates = Some(replicates);
    run.seed = Some(seed);
    let g = load(graph)?;
    let reports = k
        .iter()
        .map(|&k| predictive_check(&g, kind, k, replicates, seed, &SolverConfig::default()))
        .collect::<dsbm_core::Result<Vec<_>>>()?;
    single(&run, out, "ppc", &reports, |buf| csv_rows(buf, &reports))
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    n_nodes: usize,
    n_groups: usize,
    densities: Vec<f64>,
    replicates: usize,
    seed: Option<u64>,
    full_scale: bool,
    allow_large: bool,
    out: &OutArgs,
) -> Result<()> {
    let seed = resolve_seed(seed);
    let mut cfg = if full_scale {
        SweepConfig::full_scale(seed)
    } else {
        let mut cfg = SweepConfig::desk(seed);
        cfg.base = SynthConfig::new(n_nodes, n_groups, 1.0, seed);
        cfg
    };
    if !densities.is_empty() {
        cfg.densities = densities;
    }
    cfg.replicates = replicates;
    cfg.allow_large |= allow_large;
    let mut run = RunConfig::new("sweep", out.out.clone(), out.format);
    run.replicates = Some(replicates);
    run.seed = Some(seed);
    run.extra = json!({
        "n_nodes": cfg.base.n_nodes,
        "n_groups": cfg.base.n_groups,
        "densities": cfg.densities,
        "full_scale": full_scale,
        "allow_large": cfg.allow_large,
    });
    let table = run_llr_density_sweep(&cfg)?;
    let json_artifact = Artifact::new("sweep.json", json(&run, &table)?);
    let csv_artifact = Artifact::new(
        "sweep.csv",
        csv_with_preamble(&run, |buf| Ok(write_sweep_csv(buf, &table)?))?,
    );
    // Both tables go to an output directory; stdout gets the chosen format.
    let artifacts = match (out.out.is_some(), out.format) {
        (true, _) | (false, Format::Json) => vec![json_artifact, csv_artifact],
        (false, Format::Csv) => vec![csv_artifact],
    };
    emit(out.out.as_deref(), out.force, &artifacts)
}
