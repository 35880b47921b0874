//! File formats, experiment runners and the `sgt` command line for
//! `scenegraph-core`.
//!
//! Every run writes its outputs, the resolved `config.txt` and a
//! `manifest.json` into one output directory.

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;
pub mod settings;

pub use error::{Result, ToolError};
