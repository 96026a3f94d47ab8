//! Command-line pipeline and HTTP service around `pea_design`.
//!
//! A project config names task files and their roles; [`run_pipeline`]
//! turns it into a bundle of `quadratics.json`, `problem.json`,
//! `regions.json`, `regions.svg`, `solution.json` and `metrics.csv`.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod service;

pub use config::{ProjectConfig, Role, TaskRef};
pub use error::{ErrorClass, Stage, StageError, StageResult};
pub use pipeline::{build_bundle, run_pipeline, Bundle, Project};
