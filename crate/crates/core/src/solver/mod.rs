//! Semi-implicit staggered space-time DG time stepping.
//!
//! Unknown layout, time-major inside every element block:
//! * pressure: `pressure[t * n_phi_st + l * n_phi + k]` for triangle `t`,
//!   temporal node `l` and spatial node `k`;
//! * velocity: `velocity[c][q * n_psi_st + l * n_psi + k]` for component
//!   `c` (0 = u, 1 = v) of dual element `q`.
//!
//! One slab runs a fixed number of Picard iterations, each made of a
//! momentum predictor with explicit convection, a pressure Poisson solve and
//! a velocity correction.

mod discretization;
mod state;
mod step;

use std::fmt;
use std::sync::Arc;

pub use discretization::Discretization;
pub use state::{project_initial_condition, SpaceTimeState};
pub use step::{
    advance_time_step, assemble_pressure_system, cfl_time_step, compute_timestep, max_signal_speed,
    momentum_predictor, run_to, velocity_correction, StepReport,
};

use crate::linsys::LinsysError;
use crate::mesh::MeshError;
use crate::real::{Real, Vec2};

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Linsys(#[from] LinsysError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("only fully periodic meshes are supported")]
    NotPeriodic,
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

/// Source term `S(v, x, t)` in acceleration units.
pub type SourceFn<T> = Arc<dyn Fn(Vec2<T>, Vec2<T>, T) -> Vec2<T> + Send + Sync>;

/// Normalized fluid parameters: kinematic viscosity and an optional source.
#[derive(Clone)]
pub struct FluidParams<T> {
    pub nu: T,
    pub source: Option<SourceFn<T>>,
}

impl<T: Real> FluidParams<T> {
    pub fn new(nu: T) -> Result<Self, SolverError> {
        if !(nu >= T::zero()) {
            return Err(SolverError::Parameter(format!(
                "nu = {nu} must be non-negative"
            )));
        }
        Ok(FluidParams { nu, source: None })
    }

    pub fn with_source(
        mut self,
        source: impl Fn(Vec2<T>, Vec2<T>, T) -> Vec2<T> + Send + Sync + 'static,
    ) -> Self {
        self.source = Some(Arc::new(source));
        self
    }
}

impl<T: fmt::Debug> fmt::Debug for FluidParams<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FluidParams")
            .field("nu", &self.nu)
            .field("source", &self.source.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

/// CFL control of the convective time step.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TimeStepControl<T> {
    pub cfl: T,
    /// Last computed step.
    pub dt: T,
    /// Last computed maximum signal speed.
    pub s_max: T,
    pub h_min: T,
    /// Step used when the velocity vanishes everywhere.
    pub dt_max: T,
}

impl<T: Real> TimeStepControl<T> {
    pub fn new(cfl: T, h_min: T, dt_max: T) -> Self {
        TimeStepControl {
            cfl,
            dt: dt_max,
            s_max: T::zero(),
            h_min,
            dt_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PicardConfig {
    pub n_pic: usize,
    /// Print the iterate change of every Picard iteration to stderr.
    pub log_residuals: bool,
}

impl PicardConfig {
    pub fn for_order(p_gamma: usize) -> Self {
        PicardConfig {
            n_pic: p_gamma + 1,
            log_residuals: false,
        }
    }
}

/// Picard settings plus linear-solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    pub picard: PicardConfig,
    pub momentum_tol: f64,
    pub pressure_tol: f64,
    pub max_iter: usize,
}

impl SolverConfig {
    pub fn for_order(p_gamma: usize) -> Self {
        SolverConfig {
            picard: PicardConfig::for_order(p_gamma),
            momentum_tol: 1e-12,
            pressure_tol: 1e-10,
            max_iter: 5000,
        }
    }
}
