//! On-disk formats: JSON documents with versioned schemas, tab-separated
//! tables, parameter checkpoints and run manifests.

mod checkpoint;
mod manifest;
mod scene_graph;
mod srl;
mod stats;
mod tsv;

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{IoContext, Result, ToolError};

pub use checkpoint::{Checkpoint, ParamRecord, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use manifest::{versions, Manifest};
pub use scene_graph::{
    EdgeRecord, EntityRecord, PredicateRecord, RoleName, SceneGraphFile, TripletRecord, SCENE_GRAPH_FORMAT,
    SCENE_GRAPH_VERSION,
};
pub use srl::{FrameRecord, SpanRecord, SrlDocumentFile, SRL_FORMAT, SRL_VERSION};
pub use stats::stats_table;
pub use tsv::{fmt_f64, fmt_opt, Table};

/// Pretty JSON with two-space indentation and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory serialization");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json(value)).at(path)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).at(path)?;
    serde_json::from_str(&text).map_err(|source| ToolError::Json { path: path.to_path_buf(), source })
}
