//! Layered ego-network analysis of directed interaction logs.
//!
//! Events are aggregated into relationships, relationships into a graph,
//! and each active ego's contact frequencies are clustered with exact 1-D
//! k-means to find its layers.

pub mod cli;
pub mod cluster;
pub mod egonet;
pub mod error;
pub mod ingest;
pub mod layers;
pub mod reviewtypes;
pub mod synth;
pub mod time;

pub use error::{Error, Result};
