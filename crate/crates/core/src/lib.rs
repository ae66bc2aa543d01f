//! Batch analytics for conversation cascades: ingestion of newline-delimited
//! posts, reply-tree reconstruction and structural classification, response
//! and evolution dynamics, hashtag topic propagation, and SI/Bass growth fits.

pub mod cascade;
pub mod dynamics;
pub mod error;
pub mod growth;
pub mod ingest;
pub mod stats;
pub mod synth;
pub mod topics;

pub use error::{Error, Result};
