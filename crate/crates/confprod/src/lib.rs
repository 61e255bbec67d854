//! Scene and report formats, quasi-random sampling and the batch commands
//! behind the `confprod` binary.

pub mod commands;
pub mod error;
pub mod io;
pub mod report;
pub mod sampling;
pub mod scene;
pub mod search_config;
pub mod tolerances;

pub use error::{CliError, CliResult};
pub use report::Report;
pub use scene::{Scene, SceneFile};
pub use tolerances::Tolerances;
