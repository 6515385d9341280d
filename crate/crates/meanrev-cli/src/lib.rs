//! Batch driver for mean-reverting basket experiments: configuration,
//! synthetic-universe generation, the windowed experiment protocol, and
//! report aggregation. The `meanrev` binary is a thin wrapper over these
//! modules.

pub mod config;
pub mod experiment;
pub mod gen;
pub mod report;
