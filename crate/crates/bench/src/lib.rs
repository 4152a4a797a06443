//! Configuration, output formats and the run driver behind the `emacfem`
//! command line tool.

pub mod config;
pub mod csv;
pub mod run;
pub mod vtk;

pub use config::{parse_pairs, ConfigError, RunConfig};
pub use run::{execute, RunError, RunSummary};
