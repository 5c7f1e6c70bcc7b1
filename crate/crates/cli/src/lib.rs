//! Command-line surface of the solver: `solve`, `analyze`, `experiment`
//! and `precondition`.

pub mod commands;
pub mod error;
pub mod experiment;
pub mod instance;
pub mod options;
pub mod pipeline;

pub use commands::{run, Cli};
pub use error::{CliError, CliResult};
pub use experiment::{run_experiment, ExperimentRow, ExperimentSpec, ExperimentSummary};
