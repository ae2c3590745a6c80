//! Reproducible experiments: configuration, protocol audits, execution and
//! the command-line front end.

pub mod audit;
pub mod cli;
pub mod config;
pub mod run;

pub use audit::{audit_protocol, draw_protocol, Protocol, ProtocolAudit, ProtocolSpace};
pub use config::{validate, ChannelSpec, ExperimentConfig, Problem, ThetaSpec, UnitariesSpec};
pub use run::{run, run_with_threads, RunOutcome};
