//! Library surface of the batch tool: configuration schema and validation,
//! pipeline orchestration, artifact emission, and report re-rendering. The
//! `sentivol` binary is a thin argument-parsing layer over these modules.

pub mod artifacts;
pub mod config;
pub mod pipeline;
pub mod report_cmd;
