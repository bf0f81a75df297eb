//! Command line driver.
//!
//! ```text
//! dmh solve    --config <path> [--out <dir>] [--vtk] [--matrix-market]
//! dmh converge --config <path> [--out <dir>]
//! dmh sweep    --config <path> [--out <dir>]
//! dmh check    --config <path>
//! ```
//!
//! Exit codes: 0 on success, 1 for configuration errors, 2 for numerical
//! failures.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ConfigFile;
use dmh_core::analytic::AnalyticSolution;
use dmh_core::assembly::{assemble_reduced, condense_all};
use dmh_core::mesh::{build_cube_mesh, Mesh};
use dmh_core::postprocess::{
    compute_errors, line_profile, recover_fields, ErrorReport, SolutionFields,
};
use dmh_core::problem::{ProblemSpec, StabilizationMode};

#[derive(Parser)]
#[command(name = "dmh", about = "Mixed hybrid solver for advection-diffusion-reaction transmission problems on the unit cube", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/VTK files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve on a single mesh and write profile/error tables.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the mesh and cell fields as legacy ASCII VTK.
        #[arg(long)]
        vtk: bool,
        /// Also export the reduced system in Matrix Market format.
        #[arg(long)]
        matrix_market: bool,
    },
    /// Solve over a list of resolutions and report observed orders.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the stabilization sweep cases with all three modes.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the solvability constants report.
    Check {
        /// Configuration file (key = value lines).
        #[arg(long)]
        config: PathBuf,
        /// Trace constant C* (overrides the config value).
        #[arg(long)]
        c_star: Option<f64>,
    },
}

/// Error class for exit code selection.
enum CliError {
    Config(String),
    Numerical(String),
}

impl From<dmh_core::Error> for CliError {
    fn from(e: dmh_core::Error) -> Self {
        match e {
            dmh_core::Error::InvalidResolution(_)
            | dmh_core::Error::InvalidCoefficient { .. }
            | dmh_core::Error::InvalidTraceConstant(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems count as configuration errors; --help and
            // --version exit cleanly.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Solve {
            common,
            vtk,
            matrix_market,
        } => cmd_solve(&common, vtk, matrix_market),
        Command::Converge { common } => cmd_converge(&common),
        Command::Sweep { common } => cmd_sweep(&common),
        Command::Check { config, c_star } => cmd_check(&config, c_star),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    text.parse::<ConfigFile>()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Numerical(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

struct SolveOutput {
    mesh: Mesh,
    fields: SolutionFields,
    report: Option<ErrorReport>,
}

fn run_single(
    spec: &ProblemSpec,
    n: usize,
    reference: Option<&AnalyticSolution>,
) -> Result<SolveOutput, CliError> {
    let mesh = build_cube_mesh(n)?;
    let condensed = condense_all(&mesh, spec)?;
    let system = assemble_reduced(&mesh, spec, &condensed)?;
    let face = system.solve()?;
    let fields = recover_fields(&face, &condensed, &mesh)?;
    let report = reference.map(|exact| compute_errors(&fields, exact, &mesh));
    Ok(SolveOutput {
        mesh,
        fields,
        report,
    })
}

fn cmd_solve(common: &CommonArgs, vtk: bool, matrix_market: bool) -> Result<(), CliError> {
    let config = load_config(&common.config)?;
    let n = *config.resolutions.first().expect("validated by parser");
    ensure_out_dir(&common.out)?;
    let spec = config.problem_spec();
    let reference = config.reference_solution();
    let solved = run_single(&spec, n, reference.as_ref())?;

    let profile = line_profile(&solved.fields, &solved.mesh);
    write_file(&common.out, "profile.csv", &output::profile_csv(&profile))?;
    if let Some(report) = solved.report {
        write_file(&common.out, "errors.csv", &output::error_csv(&[(n, report)]))?;
    } else {
        println!("no closed-form reference for this configuration; skipping errors.csv");
    }
    if vtk {
        write_file(
            &common.out,
            "solution.vtk",
            &output::vtk(&solved.mesh, &solved.fields),
        )?;
    }
    if matrix_market {
        let condensed = condense_all(&solved.mesh, &spec)?;
        let system = assemble_reduced(&solved.mesh, &spec, &condensed)?;
        let (mat, rhs) = output::matrix_market(&system);
        write_file(&common.out, "system.mtx", &mat)?;
        write_file(&common.out, "rhs.mtx", &rhs)?;
    }
    Ok(())
}

fn cmd_converge(common: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&common.config)?;
    ensure_out_dir(&common.out)?;
    let spec = config.problem_spec();
    let reference = config
        .reference_solution()
        .ok_or_else(|| CliError::Config(
            "converge requires a configuration with a closed-form reference (uniform coefficients, z-axis advection, r > 0, standard boundary data, analytic = auto)".into(),
        ))?;

    let mut rows = Vec::new();
    for &n in &config.resolutions {
        let solved = run_single(&spec, n, Some(&reference))?;
        let report = solved.report.expect("reference present");
        println!(
            "n={n:<3} h={:.4}  u_L2={:.3e}  P0u_L2={:.3e}  ustar_L2={:.3e}  J_Hdiv={:.3e}",
            report.h, report.u_l2, report.p0u_l2, report.ustar_l2, report.flux_hdiv
        );
        rows.push((n, report));
    }
    write_file(&common.out, "errors.csv", &output::error_csv(&rows))?;
    if rows.len() >= 2 {
        write_file(&common.out, "orders.csv", &output::orders_csv(&rows))?;
        let last = &rows[rows.len() - 2..];
        let order = |a: f64, b: f64| (a / b).ln() / 2.0f64.ln();
        println!(
            "observed orders ({} -> {}): u_L2={:.2} u_maxh={:.2} P0u_L2={:.2} ustar_L2={:.2} J_L2={:.2} J_Hdiv={:.2}",
            last[0].0,
            last[1].0,
            order(last[0].1.u_l2, last[1].1.u_l2),
            order(last[0].1.u_maxh, last[1].1.u_maxh),
            order(last[0].1.p0u_l2, last[1].1.p0u_l2),
            order(last[0].1.ustar_l2, last[1].1.ustar_l2),
            order(last[0].1.flux_l2, last[1].1.flux_l2),
            order(last[0].1.flux_hdiv, last[1].1.flux_hdiv),
        );
    }
    Ok(())
}

const SWEEP_MODES: [(StabilizationMode, &str); 3] = [
    (StabilizationMode::None, "none"),
    (StabilizationMode::Sg, "sg"),
    (StabilizationMode::Upwind, "upwind"),
];

fn cmd_sweep(common: &CommonArgs) -> Result<(), CliError> {
    let config = load_config(&common.config)?;
    if config.sweep_cases.is_empty() {
        return Err(CliError::Config(
            "sweep requires `sweep_cases = mu:vz, ...`".into(),
        ));
    }
    ensure_out_dir(&common.out)?;
    let n = *config.resolutions.first().expect("validated by parser");
    let mesh = build_cube_mesh(n)?;
    let h = mesh.size();

    let mut summary = Vec::new();
    for (case, &(mu, vz)) in config.sweep_cases.iter().enumerate() {
        // Case-level Peclet number |v| h / (2 mu) of the mesh.
        let peclet = vz.abs() * h / (2.0 * mu);
        let mut case_config = config.clone();
        case_config.mu1 = mu;
        case_config.mu2 = mu;
        case_config.v1 = [0.0, 0.0, vz];
        case_config.v2 = [0.0, 0.0, vz];
        let reference = case_config.reference_solution();
        let reference_max = reference.as_ref().map(|exact| {
            (0..=4000)
                .map(|k| exact.u(k as f64 / 4000.0))
                .fold(f64::NEG_INFINITY, f64::max)
        });
        println!("case {case}: mu={mu} vz={vz} Pe={peclet:.4}");

        for (mode, mode_name) in SWEEP_MODES {
            let spec = case_config.problem_spec().with_stabilization(mode);
            let solved = run_single(&spec, n, None)?;
            let profile = line_profile(&solved.fields, &solved.mesh);
            write_file(
                &common.out,
                &format!("sweep_case{case}_{mode_name}.csv"),
                &output::profile_csv(&profile),
            )?;
            let max_star = profile
                .iter()
                .map(|s| s.u_star)
                .fold(f64::NEG_INFINITY, f64::max);
            let min_star = profile.iter().map(|s| s.u_star).fold(f64::INFINITY, f64::min);
            let overshoot = reference_max.map(|m| max_star - m);
            let undershoot = reference.as_ref().map(|exact| {
                let reference_min = (0..=4000)
                    .map(|k| exact.u(k as f64 / 4000.0))
                    .fold(f64::INFINITY, f64::min);
                min_star - reference_min
            });
            if let (Some(over), Some(under)) = (overshoot, undershoot) {
                println!("  {mode_name:<7} overshoot {over:+.4}  undershoot {under:+.4}");
            }
            summary.push(output::SweepRow {
                case,
                mu,
                vz,
                peclet,
                mode: mode_name,
                overshoot,
                undershoot,
            });
        }
    }
    write_file(
        &common.out,
        "sweep_summary.csv",
        &output::sweep_summary_csv(&summary),
    )?;
    Ok(())
}

fn cmd_check(config_path: &Path, c_star: Option<f64>) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let spec = config.problem_spec();
    let c_star = c_star.unwrap_or(config.c_star);
    let report = dmh_core::wellposedness::smallness(&spec, c_star)?;
    println!("{report}");
    Ok(())
}
