mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reparam_core::Error as CoreError;
use serde::Serialize;

/// Reparametrize curves and surfaces with compositions of elementary
/// diffeomorphisms, interpolate between shapes and run bound experiments.
#[derive(Parser, Debug)]
#[command(name = "reparam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Align a source curve to a target curve.
    ReparamCurve(CurveArgs),
    /// Align a source surface (CSV or PGM image) to a target surface.
    ReparamSurface(SurfaceArgs),
    /// Write an interpolation path between two shapes.
    Interpolate(InterpolateArgs),
    /// Train one network per (L, M) cell and tabulate final losses.
    Sweep(SweepArgs),
    /// Empirical C^k composition-bound ratios and the Schröder table.
    Bounds(BoundsArgs),
    /// Gradient descent baseline against the layered network on one pair.
    CompareGd(CompareArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct OptimArgs {
    /// Maximum optimizer iterations.
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Stop when the gradient's max-norm falls below this value.
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    /// Per-layer feasibility margin in (0, 1).
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Seed for every random choice of the run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CurveInputs {
    /// Target curve CSV (one point per row).
    #[arg(long, requires = "source", conflicts_with = "builtin")]
    target: Option<PathBuf>,
    /// Source curve CSV, reparametrized to match the target.
    #[arg(long, requires = "target")]
    source: Option<PathBuf>,
    /// Use the built-in figure-eight and its warped copy.
    #[arg(long)]
    builtin: bool,
    /// Nodes per curve for the built-in pair.
    #[arg(long, default_value_t = 1024)]
    grid: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CurveArgs {
    #[command(flatten)]
    inputs: CurveInputs,
    /// Number of layers L.
    #[arg(long, default_value_t = 10)]
    layers: usize,
    /// Sine basis functions per layer M.
    #[arg(long, default_value_t = 10)]
    basis: usize,
    #[arg(long, value_enum, default_value_t = Transform::Srvt)]
    transform: Transform,
    /// Fit on this many seeded uniform points instead of the grid nodes.
    #[arg(long)]
    resample_points: Option<usize>,
    #[command(flatten)]
    optim: OptimArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SurfaceInputs {
    /// Target surface: CSV (`x,y,z` rows) or a PGM image.
    #[arg(long, requires = "source", conflicts_with = "builtin")]
    target: Option<PathBuf>,
    /// Source surface: CSV or PGM image.
    #[arg(long, requires = "target")]
    source: Option<PathBuf>,
    /// Use the built-in graph surface and its seeded warp.
    #[arg(long)]
    builtin: bool,
    /// Nodes per axis for built-in surfaces and lifted images.
    #[arg(long, default_value_t = 64)]
    grid: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SurfaceArgs {
    #[command(flatten)]
    inputs: SurfaceInputs,
    #[arg(long, default_value_t = 5)]
    layers: usize,
    /// Maximal frequency N of the tangent basis.
    #[arg(long, default_value_t = 3)]
    basis: usize,
    #[arg(long, value_enum, default_value_t = Transform::Qsurf)]
    transform: Transform,
    #[arg(long)]
    resample_points: Option<usize>,
    #[command(flatten)]
    optim: OptimArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Transform {
    Srvt,
    Q,
    Srnf,
    Qsurf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    Direct,
    ReparamLerp,
    Geodesic,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum ShapeKind {
    Curve,
    Surface,
}

#[derive(Args, Debug, Clone, Serialize)]
struct InterpolateArgs {
    #[arg(long, value_enum, default_value_t = Mode::Direct)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = ShapeKind::Curve)]
    kind: ShapeKind,
    /// Shape reached at tau = 1.
    #[arg(long, requires = "source", conflicts_with = "builtin")]
    target: Option<PathBuf>,
    /// Shape at tau = 0 (after reparametrization in reparam-lerp mode).
    #[arg(long, requires = "target")]
    source: Option<PathBuf>,
    /// Built-in pair: the figure-eight curves, or the disk and half-disk images.
    #[arg(long)]
    builtin: bool,
    /// Nodes per axis for built-in shapes and lifted images.
    #[arg(long)]
    grid: Option<usize>,
    /// Number of equally spaced tau values from 0 to 1.
    #[arg(long, default_value_t = 11)]
    taus: usize,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    basis: Option<usize>,
    #[arg(long, value_enum)]
    transform: Option<Transform>,
    #[command(flatten)]
    optim: OptimArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    inputs: CurveInputs,
    /// Cells as `L:M` pairs; defaults to the depth series at M = 10, the
    /// width series at L = 10, and the pairs 10:3 and 1:30.
    #[arg(long, value_delimiter = ',')]
    cells: Vec<String>,
    #[arg(long, value_enum, default_value_t = Transform::Srvt)]
    transform: Transform,
    #[command(flatten)]
    optim: OptimArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BoundsArgs {
    /// Derivative orders k.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    orders: Vec<usize>,
    /// Layer counts L.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    layers: Vec<usize>,
    /// Basis sizes M.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    basis: Vec<usize>,
    /// Normal-init runs per cell (besides the all-ones run); 0 runs nothing.
    #[arg(long, default_value_t = 500)]
    runs: usize,
    /// Evaluation nodes on [0, 1] for grid norms.
    #[arg(long, default_value_t = 10001)]
    grid: usize,
    /// Print the Schröder numbers up to this order.
    #[arg(long, default_value_t = 10)]
    kmax: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CompareArgs {
    #[command(flatten)]
    inputs: CurveInputs,
    /// Layers of the deep network.
    #[arg(long, default_value_t = 6)]
    layers: usize,
    /// Basis size for both methods.
    #[arg(long, default_value_t = 6)]
    basis: usize,
    #[arg(long, value_enum, default_value_t = Transform::Srvt)]
    transform: Transform,
    #[command(flatten)]
    optim: OptimArgs,
}

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self { code, error: error.into() }
    }
}

/// 2: input, parse or parameter errors; 3: optimization failure;
/// 4: degenerate geometry; 5: vanishing interpolation.
pub fn exit_code(err: &CoreError) -> u8 {
    match err {
        CoreError::DegenerateCurve { .. } | CoreError::DegenerateSurface { .. } => 4,
        CoreError::VanishingCombination { .. } => 5,
        CoreError::InfeasibleLayer { .. }
        | CoreError::NearSingularDerivative { .. }
        | CoreError::StagnatedStep { .. } => 3,
        _ => 2,
    }
}

impl From<CoreError> for Failure {
    fn from(err: CoreError) -> Self {
        Failure::new(exit_code(&err), err)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
