use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Provenance record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub versions: BTreeMap<String, String>,
    /// Files written by the run, relative to the output directory.
    pub outputs: Vec<String>,
    pub wall_time_seconds: f64,
}

pub fn versions() -> BTreeMap<String, String> {
    [
        ("scenegraph-tools", env!("CARGO_PKG_VERSION")),
        ("scenegraph-core", scenegraph_core::VERSION),
        ("scene-graph-schema", "1"),
        ("srl-document-schema", "1"),
        ("checkpoint-format", "1"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}
