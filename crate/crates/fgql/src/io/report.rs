//! Versioned JSON documents emitted by the command-line tool.
//!
//! Every document embeds the manifest that produced it and a
//! `schema_version` field. Deserialization rejects unknown fields, so
//! round-tripping a document through these types is a schema check.

use serde::{Deserialize, Serialize};

use crate::design::FitConfig;
use crate::schedule::TuningSchedule;
use crate::sim::{SimulationScenario, StudyReport};
use crate::solver::FitResult;

pub const SCHEMA_VERSION: &str = "1";

/// Provenance of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub library_version: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit_config: Option<FitConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scenario: Option<SimulationScenario>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub schedule: Option<TuningSchedule>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub iterations: Option<usize>,
    /// Present only when timing output was requested; kept out of the
    /// default output so identical runs produce identical bytes.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_ms: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            fit_config: None,
            scenario: None,
            schedule: None,
            iterations: None,
            wall_clock_ms: None,
        }
    }
}

/// One fitted group: id, source columns, values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupReport {
    pub group: usize,
    pub columns: Vec<String>,
    pub values: Vec<f64>,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_primal_residual: Option<f64>,
    pub final_dual_residual: Option<f64>,
}

/// Output of `fgql fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitDocument {
    pub schema_version: String,
    pub coefficients: Vec<GroupReport>,
    pub active_groups: Vec<usize>,
    pub fused_pairs: Vec<usize>,
    pub objective: f64,
    pub diagnostics: FitDiagnostics,
    pub manifest: RunManifest,
}

impl FitDocument {
    pub fn new(result: &FitResult, feature_names: &[String], manifest: RunManifest) -> Self {
        let beta = &result.coefficients;
        let partition = beta.partition();
        let mut coefficients = Vec::with_capacity(beta.num_groups());
        for j in 1..=beta.num_groups() {
            let range = partition.range(j);
            coefficients.push(GroupReport {
                group: j,
                columns: feature_names[range.clone()].to_vec(),
                values: beta.group(j).to_vec(),
                norm: beta.group_norm(j),
            });
        }
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            coefficients,
            active_groups: result.active_groups.clone(),
            fused_pairs: result.fused_pairs.clone(),
            objective: result.objective_value,
            diagnostics: FitDiagnostics {
                iterations: result.iterations,
                converged: result.converged,
                final_primal_residual: result.primal_residuals.last().copied(),
                final_dual_residual: result.dual_residuals.last().copied(),
            },
            manifest,
        }
    }
}

/// Truth sidecar written next to a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthDocument {
    pub schema_version: String,
    pub n: usize,
    pub replication: u64,
    pub group_sizes: Vec<usize>,
    pub true_beta: Vec<f64>,
    pub active_groups: Vec<usize>,
    pub fused_pairs: Vec<usize>,
    pub tau: f64,
    pub manifest: RunManifest,
}

/// Output of `fgql study`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyDocument {
    pub schema_version: String,
    pub report: StudyReport,
    pub manifest: RunManifest,
}

/// Output of `fgql validate-schedule`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub schema_version: String,
    pub schedule: TuningSchedule,
    pub conditions: Vec<crate::schedule::ConditionRecord>,
    pub admissible: bool,
    pub manifest: RunManifest,
}

/// Canonical JSON emission: pretty, trailing newline, deterministic field
/// order (struct order).
pub fn to_json_string<T: Serialize>(doc: &T) -> crate::error::Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}
