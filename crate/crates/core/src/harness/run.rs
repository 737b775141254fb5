use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use super::{
    compute_l2_errors, sigma, taylor_green_exact, write_vtk, ConfigError, ErrorReport, MeshSource,
    RunConfig,
};
use crate::mesh::{generate_structured_mesh, load_mesh, MeshError, PrimaryMesh, Rect};
use crate::solver::{
    project_initial_condition, run_to, Discretization, FluidParams, PicardConfig, SolverConfig,
    SolverError, SpaceTimeState, StepReport, TimeStepControl,
};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("a convergence study needs at least two levels")]
    TooFewLevels,
    #[error("level {level} failed after {completed} completed levels: {source}")]
    Level {
        level: usize,
        completed: usize,
        source: Box<HarnessError>,
    },
}

/// Peak resident set size of this process (Linux `VmHWM`).
pub fn peak_memory_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

/// Rough storage count of the dominant arrays, used when the OS does not
/// report peak memory.
fn model_memory_mb(disc: &Discretization<f64>) -> f64 {
    let m = &disc.matrices;
    let bs = disc.order.n_psi_st();
    let n_psi = disc.order.n_psi();
    let doubles = m.spacetime.n_blocks() * bs * bs
        + m.viscous.n_blocks() * n_psi * n_psi
        + disc.pressure_matrix().n_blocks() * disc.order.n_phi().pow(2)
        + 2 * m.mass.len() * n_psi * n_psi
        + 20 * disc.n_elements() * bs;
    doubles as f64 * 8.0 / (1024.0 * 1024.0)
}

fn load(config: &RunConfig) -> Result<PrimaryMesh<f64>, HarnessError> {
    Ok(match &config.mesh {
        MeshSource::Generate(n) => generate_structured_mesh(*n, Rect::periodic_box())?,
        MeshSource::File(path) => load_mesh(path)?,
    })
}

/// Result of one Taylor-Green run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: ErrorReport,
    pub initial_energy: f64,
    /// Kinetic energy at the end of every slab.
    pub energies: Vec<f64>,
    pub slabs: Vec<StepReport>,
    pub mesh_checksum: u64,
    pub state: SpaceTimeState<f64>,
}

impl RunOutcome {
    pub fn max_divergence(&self) -> f64 {
        self.slabs.iter().map(|s| s.divergence).fold(0.0, f64::max)
    }
}

#[derive(serde::Serialize)]
struct RunJson<'a> {
    program: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    mesh: MeshJson,
    result: ResultJson<'a>,
}

#[derive(serde::Serialize)]
struct MeshJson {
    vertices: usize,
    triangles: usize,
    checksum: String,
    h_min: f64,
}

#[derive(serde::Serialize)]
struct ResultJson<'a> {
    errors: &'a ErrorReport,
    initial_energy: f64,
    final_energy: f64,
    max_divergence: f64,
    slabs: &'a [StepReport],
}

/// Run the Taylor-Green case for `config`, writing `run.json` (and the final
/// fields as VTK when enabled) into `config.out`.
pub fn run_case(config: &RunConfig) -> Result<RunOutcome, HarnessError> {
    let start = Instant::now();
    if !config.periodic {
        return Err(SolverError::NotPeriodic.into());
    }
    let mesh = load(config)?;
    let checksum = mesh.checksum();
    let (n_vertices, n_triangles) = (mesh.n_vertices(), mesh.n_triangles());
    let nu = config.nu;
    let mut disc = Discretization::new(mesh, config.order(), nu)?;
    let params = FluidParams::new(nu)?;
    let solver_config = SolverConfig {
        picard: PicardConfig {
            n_pic: config.n_pic,
            log_residuals: config.log_picard,
        },
        momentum_tol: config.momentum_tol,
        pressure_tol: config.pressure_tol,
        max_iter: config.max_iter,
    };
    let h_min = disc.geom.h_min;
    let mut control = TimeStepControl::new(config.cfl, h_min, config.t_end / 10.0);

    let state = project_initial_condition(&disc, |x| taylor_green_exact(x, 0.0, nu), 0.0);
    let initial_energy = state.kinetic_energy(&disc);
    let mut energies = Vec::new();
    let mut slabs = Vec::new();
    let mass = disc.matrices.mass.clone();
    let state = run_to(
        &mut disc,
        &params,
        state,
        &mut control,
        config.t_end,
        &solver_config,
        |s, r| {
            energies.push(s.kinetic_energy_with(&mass));
            slabs.push(r.clone());
        },
    )?;

    let t = state.t_end;
    let (e2_p, e2_v) = compute_l2_errors(&disc, &state, |x| taylor_green_exact(x, t, nu), 0);
    let cpu_s = start.elapsed().as_secs_f64();
    let report = ErrorReport {
        elements: n_triangles,
        h_min,
        e2_p,
        e2_v,
        sigma_v: None,
        steps: slabs.len(),
        cpu_s,
        mem_mb: peak_memory_mb().unwrap_or_else(|| model_memory_mb(&disc)),
    };

    std::fs::create_dir_all(&config.out)?;
    if config.vtk {
        write_vtk(&disc, &state, config.out.join("fields_final.vtk"))?;
    }
    let json = RunJson {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        mesh: MeshJson {
            vertices: n_vertices,
            triangles: n_triangles,
            checksum: format!("{checksum:016x}"),
            h_min,
        },
        result: ResultJson {
            errors: &report,
            initial_energy,
            final_energy: energies.last().copied().unwrap_or(initial_energy),
            max_divergence: slabs.iter().map(|s| s.divergence).fold(0.0, f64::max),
            slabs: &slabs,
        },
    };
    serde_json::to_writer_pretty(std::fs::File::create(config.out.join("run.json"))?, &json)?;

    Ok(RunOutcome {
        report,
        initial_energy,
        energies,
        slabs,
        mesh_checksum: checksum,
        state,
    })
}

/// `elements,E2_p,E2_v,sigma_v,cpu_s,mem_mb`; the first row has an empty
/// order.
pub fn write_errors_csv(path: impl AsRef<Path>, reports: &[ErrorReport]) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "elements,E2_p,E2_v,sigma_v,cpu_s,mem_mb")?;
    for r in reports {
        let sigma = r.sigma_v.map(|s| format!("{s:.3}")).unwrap_or_default();
        writeln!(
            f,
            "{},{:.6e},{:.6e},{},{:.3},{:.1}",
            r.elements, r.e2_p, r.e2_v, sigma, r.cpu_s, r.mem_mb
        )?;
    }
    f.flush()
}

/// Run the Taylor-Green case on generator levels `levels`, each in
/// `base.out/level_<n>`, and write `errors.csv` into `base.out`.
///
/// A failing level aborts the study; the rows finished so far are still
/// written to `errors.csv`.
pub fn run_convergence_study(
    levels: &[usize],
    base: &RunConfig,
) -> Result<Vec<ErrorReport>, HarnessError> {
    if levels.len() < 2 {
        return Err(HarnessError::TooFewLevels);
    }
    std::fs::create_dir_all(&base.out)?;
    let mut reports: Vec<ErrorReport> = Vec::new();
    for &n in levels {
        let mut config = base.clone();
        config.set("gen", &n.to_string(), super::Provenance::Derived)?;
        config.out = base.out.join(format!("level_{n}"));
        match run_case(&config) {
            Ok(outcome) => {
                let mut r = outcome.report;
                if let Some(prev) = reports.last() {
                    r.sigma_v = Some(sigma(prev.e2_v, r.e2_v, prev.h_min, r.h_min));
                }
                reports.push(r);
            }
            Err(e) => {
                write_errors_csv(base.out.join("errors.csv"), &reports)?;
                return Err(HarnessError::Level {
                    level: n,
                    completed: reports.len(),
                    source: Box::new(e),
                });
            }
        }
    }
    write_errors_csv(base.out.join("errors.csv"), &reports)?;
    Ok(reports)
}
