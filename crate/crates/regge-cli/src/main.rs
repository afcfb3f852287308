use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

/// Distributional curvature of Regge metrics on polytopal meshes.
#[derive(Debug, Parser)]
#[command(name = "regge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Options shared by all subcommands; each can also be set through the
/// matching `REGGE_*` environment variable.
#[derive(Debug, Args)]
pub struct Common {
    /// Mesh JSON file.
    #[arg(long, global = true, env = "REGGE_MESH")]
    pub mesh: Option<std::path::PathBuf>,
    /// Metric JSON file; the induced metric when omitted.
    #[arg(long, global = true, env = "REGGE_METRIC")]
    pub metric: Option<std::path::PathBuf>,
    /// Scalar test function in chart coordinates x1..xm.
    #[arg(long, global = true, env = "REGGE_PHI")]
    pub phi: Option<String>,
    /// Test field JSON file (`{"kind": "gauss", ...}` or `{"kind": "components", ...}`).
    #[arg(long, global = true, env = "REGGE_TEST_FIELD")]
    pub test_field: Option<std::path::PathBuf>,
    /// Quadrature degree; chosen from the metric when omitted.
    #[arg(long, global = true, env = "REGGE_QUAD_DEGREE")]
    pub quad_degree: Option<usize>,
    /// Pass/fail tolerance of the subcommand's check.
    #[arg(long, global = true, env = "REGGE_TOL")]
    pub tol: Option<f64>,
    /// Refinement levels for `refine-study`.
    #[arg(long, global = true, env = "REGGE_LEVELS", default_value_t = 3)]
    pub levels: usize,
    /// RK4 steps for `frame-evolve`.
    #[arg(long, global = true, env = "REGGE_STEPS", default_value_t = 100)]
    pub steps: usize,
    /// Output file; standard output when omitted.
    #[arg(long, global = true, env = "REGGE_OUT")]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, global = true, env = "REGGE_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true, env = "REGGE_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Check mesh structure and tangential-tangential continuity of the metric.
    Validate,
    /// Assemble the curvature pairing with a test field.
    Curvature,
    /// Surface Gauss-Bonnet check, or the Gauss pairing with `--phi`.
    GaussBonnet,
    /// Compare the exterior-algebra and contracted forms of the curvature terms.
    EquivCheck,
    /// Build compatible frames from the flat background and report drift.
    FrameEvolve,
    /// Gauss-Bonnet totals over uniform refinements.
    RefineStudy,
}

/// Outcome of a subcommand.
pub enum Failure {
    /// Malformed or unsupported input.
    Input(String),
    /// A numeric check did not meet its tolerance.
    Check(String),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.common.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match cli.command {
        Command::Validate => commands::validate(&cli.common),
        Command::Curvature => commands::curvature(&cli.common),
        Command::GaussBonnet => commands::gauss_bonnet(&cli.common),
        Command::EquivCheck => commands::equiv_check(&cli.common),
        Command::FrameEvolve => commands::frame_evolve(&cli.common),
        Command::RefineStudy => commands::refine_study(&cli.common),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
    }
}
