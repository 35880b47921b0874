//! Multihop graph attention over visual scene graphs.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. It contains:
//!
//! - [`graph`]: scene-graph data model, skip edges and hop distances.
//! - [`numerics`]: a small dense tensor type with a reverse-mode tape,
//!   losses, optimizers and a finite-difference checker.
//! - [`encoder`]: token embeddings and the multihop graph Transformer.
//! - [`pretrain`]: triplet-constrained masking and masked node modeling.
//! - [`weaksg`]: pseudo scene graphs distilled from semantic-role frames.
//! - [`harness`]: synthetic data and the desk-scale experiments.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod encoder;
pub mod error;
pub mod graph;
pub mod harness;
pub mod math;
pub mod numerics;
pub mod pretrain;
pub mod rng;
pub mod weaksg;

pub use error::{Error, Result};
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
