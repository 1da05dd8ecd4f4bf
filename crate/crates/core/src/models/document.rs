use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FittedModel, ModelKind, SolverReport, SourceCounts};
use crate::error::{Error, Result};
use crate::graph::NodeSpace;

pub const MODEL_SCHEMA: &str = "dsbm.fitted_model/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Propensities {
    PerNode(Vec<f64>),
    PerNodeGroup(Vec<Vec<f64>>),
}

/// Serialized form of a [`FittedModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    schema: String,
    kind: ModelKind,
    node_ids: Vec<String>,
    group_labels: Vec<String>,
    /// Group index of each node, in `node_ids` order.
    group_of: Vec<usize>,
    theta_out: Propensities,
    theta_in: Propensities,
    omega: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<SourceCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<SolverReport>,
}

fn pack(kind: ModelKind, rows: &[Vec<f64>]) -> Propensities {
    match kind {
        ModelKind::Dcsbm => Propensities::PerNode(rows.iter().map(|r| r[0]).collect()),
        _ => Propensities::PerNodeGroup(rows.to_vec()),
    }
}

fn unpack(p: Propensities) -> Vec<Vec<f64>> {
    match p {
        Propensities::PerNode(v) => v.into_iter().map(|x| vec![x]).collect(),
        Propensities::PerNodeGroup(rows) => rows,
    }
}

impl From<&FittedModel> for ModelDocument {
    fn from(m: &FittedModel) -> Self {
        let space = m.space();
        Self {
            schema: MODEL_SCHEMA.to_string(),
            kind: m.kind(),
            node_ids: space.node_ids().to_vec(),
            group_labels: space.group_labels().to_vec(),
            group_of: (0..space.node_count()).map(|i| space.group_of(i)).collect(),
            theta_out: pack(m.kind(), m.theta_out_rows()),
            theta_in: pack(m.kind(), m.theta_in_rows()),
            omega: m.omega().to_vec(),
            source: m.source().cloned(),
            solver: m.solver().cloned(),
        }
    }
}

impl ModelDocument {
    pub fn into_model(self) -> Result<FittedModel> {
        if self.schema != MODEL_SCHEMA {
            return Err(Error::ModelDocument(format!(
                "unsupported schema `{}` (expected `{MODEL_SCHEMA}`)",
                self.schema
            )));
        }
        let space = NodeSpace::checked(self.node_ids, self.group_labels, self.group_of)?;
        let groups = space.group_count();
        let n = space.node_count();
        if let Some(src) = &self.source {
            let square = |rows: &Vec<Vec<u64>>, h: usize| {
                rows.len() == h && rows.iter().all(|r| r.len() == groups)
            };
            if !square(&src.m, groups)
                || !square(&src.d_out_node_group, n)
                || !square(&src.d_in_node_group, n)
                || src.self_loops_per_group.len() != groups
            {
                return Err(Error::ModelDocument(
                    "source counts have the wrong shape".into(),
                ));
            }
        }
        let mut model = FittedModel::from_parameters(
            self.kind,
            Arc::new(space),
            unpack(self.theta_out),
            unpack(self.theta_in),
            self.omega,
        )?;
        model.source = self.source;
        model.solver = self.solver;
        Ok(model)
    }
}

impl FittedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.into_model()
    }
}
