//! Verification driver: configuration, the Taylor-Green case, L2 errors,
//! convergence orders and file output.

mod config;
mod errors;
mod run;
mod vtk;

pub use config::{parse_config, ConfigError, MeshSource, Provenance, RunConfig};
pub use errors::{compute_l2_errors, sigma, taylor_green_exact, ErrorReport};
pub use run::{
    peak_memory_mb, run_case, run_convergence_study, write_errors_csv, HarnessError, RunOutcome,
};
pub use vtk::{format_vtk, write_vtk};
