use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nssolver::harness::{parse_config, run_case, run_convergence_study, RunConfig};

#[derive(Parser)]
#[command(
    name = "nssolver",
    version,
    about = "Staggered space-time DG solver for 2D incompressible Navier-Stokes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    pgamma: Option<usize>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    tend: Option<f64>,
    #[arg(long)]
    npic: Option<usize>,
    #[arg(long, conflicts_with = "gen")]
    mesh: Option<PathBuf>,
    /// Structured periodic mesh with N x N cells.
    #[arg(long)]
    gen: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        let mut push = |k: &str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k.to_string(), x));
            }
        };
        push("p", self.p.map(|x| x.to_string()));
        push("p_gamma", self.pgamma.map(|x| x.to_string()));
        push("nu", self.nu.map(|x| x.to_string()));
        push("cfl", self.cfl.map(|x| x.to_string()));
        push("t_end", self.tend.map(|x| x.to_string()));
        push("n_pic", self.npic.map(|x| x.to_string()));
        push("mesh", self.mesh.as_ref().map(|x| x.display().to_string()));
        push("gen", self.gen.map(|x| x.to_string()));
        push("out", self.out.as_ref().map(|x| x.display().to_string()));
        v
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the Taylor-Green case once.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Convergence study over generated mesh levels.
    Converge {
        #[arg(long, default_value = "taylor-green")]
        case: String,
        #[arg(long, value_delimiter = ',', default_value = "6,8,14,21")]
        levels: Vec<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn resolve(config: Option<&PathBuf>, overrides: &Overrides) -> Result<RunConfig, String> {
    let pairs = overrides.pairs();
    match config {
        Some(path) => RunConfig::from_file(path, &pairs),
        None => parse_config("", &pairs),
    }
    .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, overrides } => resolve(config.as_ref(), overrides).and_then(|cfg| {
            let outcome = run_case(&cfg).map_err(|e| e.to_string())?;
            let r = &outcome.report;
            println!(
                "elements {} steps {} E2_p {:.4e} E2_v {:.4e}",
                r.elements, r.steps, r.e2_p, r.e2_v
            );
            println!(
                "max |Dv| {:.3e}, wall {:.2} s, report in {}",
                outcome.max_divergence(),
                r.cpu_s,
                cfg.out.display()
            );
            Ok(())
        }),
        Command::Converge {
            case,
            levels,
            config,
            overrides,
        } => {
            if case != "taylor-green" {
                Err(format!("unknown case `{case}` (available: taylor-green)"))
            } else {
                resolve(config.as_ref(), overrides).and_then(|cfg| {
                    let reports = run_convergence_study(levels, &cfg).map_err(|e| e.to_string())?;
                    println!(
                        "{:>9} {:>11} {:>11} {:>7} {:>9}",
                        "elements", "E2_p", "E2_v", "sigma_v", "cpu_s"
                    );
                    for r in &reports {
                        let s = r
                            .sigma_v
                            .map(|s| format!("{s:.2}"))
                            .unwrap_or_else(|| "-".into());
                        println!(
                            "{:>9} {:>11.3e} {:>11.3e} {:>7} {:>9.2}",
                            r.elements, r.e2_p, r.e2_v, s, r.cpu_s
                        );
                    }
                    println!("errors.csv written to {}", cfg.out.display());
                    Ok(())
                })
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
