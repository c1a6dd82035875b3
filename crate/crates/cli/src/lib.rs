//! Command-line front end for the two-qubit field model: trajectories,
//! parameter sweeps, revival analysis, figure datasets and the oracle audit.

pub mod config;
pub mod error;
pub mod output;
pub mod repro;
pub mod revival;
pub mod sweep;
pub mod verify;

pub use config::{Observable, OutputFormat, RunConfig, TimeScale};
pub use error::{CliError, CliResult};
pub use revival::{RevivalConfig, RevivalMarkers, detect_revival};
pub use sweep::{AxisValue, Dataset, SweepAxis, Trajectory, run_sweep, run_trajectory};
