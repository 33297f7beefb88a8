//! Design documents, grid files and the solve / verify / residual pipelines.

mod config;
mod demo;
mod gridfile;
mod run;

pub use config::*;
pub use demo::{demo_config, DEMO_NAMES};
pub use gridfile::GridFile;
pub use run::*;
