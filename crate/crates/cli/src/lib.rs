//! Batch driver: run configurations, command pipelines and exporters.

pub mod config;
pub mod export;
pub mod run;
pub mod samples_io;

pub use config::{parse_config, ConfigError, ConfigErrors, MeshFormat, RunConfig, SampleModel};
pub use run::{run, write_error_record, Check, Command, Manifest, RunContext, RunError};
