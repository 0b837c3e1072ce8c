//! poseforge: pipeline companion to `poseforge-core`.
//!
//! Everything that touches the outside world lives here: COCO file
//! ingestion, the chat-completion backend (live HTTPS + deterministic mock)
//! with retries, rate limiting and a disk cache, dataset assembly, benchmark
//! construction, judge evaluation, and the CLI.

pub mod assets;
pub mod backend;
pub mod benchmark;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod files;
pub mod generate;
pub mod ingest;
pub mod judge;
pub mod runlog;
pub mod train_config;

pub use error::PipelineError;
