use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Topography of Gaussian mixtures along the ridgeline manifold.
///
/// Component indices are 1-based. Outputs are written only to the paths
/// given; every command prints a one-line summary. Exit codes: 0 success,
/// 1 usage error, 2 invalid input, 3 numerical failure.
#[derive(Debug, Parser)]
#[command(name = "mixtopo", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file and report its size.
    Validate(ModelArg),
    /// Enumerate modes and saddles, then cross-check them against the brute-force oracle.
    Analyze(AnalyzeArgs),
    /// Elevation h along the ridgeline of a pair.
    Elevation(ElevationArgs),
    /// The pi-function of a pair, its crossings and the weight bands of each mode count.
    Pi(PiArgs),
    /// Ridgeline curvature of a pair and the closed-form special-case report.
    Curvature(CurvatureArgs),
    /// Elevation over the barycentric grid of a three-component mixture.
    Contour(ContourArgs),
    /// Pairwise linkage graph and supercomponents.
    Linkage(LinkageArgs),
    /// Fit a full-covariance mixture to CSV data by EM.
    Fit(FitArgs),
    /// Brute-force mode search compared with the ridgeline topography.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model JSON: {"dim": D, "weights": [...], "components": [{"mean": [...], "cov": [[...]]}]}.
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct PairArg {
    /// Component pair, 1-based. May be omitted for two-component models.
    #[arg(long, num_args = 2, value_names = ["I", "J"])]
    pub pair: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Barycentric grid resolution for three components.
    #[arg(long, default_value_t = 400)]
    pub resolution: usize,
    /// Multistart count for four or more components.
    #[arg(long, default_value_t = 1000)]
    pub starts: usize,
    /// Seed of the multistart sequence.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON: critical points with alpha, x, elevation, kind, neg_eigs, plus the verification checks.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum XAxis {
    Alpha,
    Arclength,
}

#[derive(Debug, Args)]
pub struct ElevationArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub pair: PairArg,
    /// Abscissa of the SVG plot.
    #[arg(long = "x", value_enum, default_value_t = XAxis::Alpha)]
    pub x_axis: XAxis,
    /// Uniform alpha samples; refined geometrically toward both ends.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Profile CSV: alpha,arclength,x_1..x_D,h.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PiArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub pair: PairArg,
    /// Uniform alpha samples; refined geometrically toward both ends.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Analyze the pair at weight 1/2 instead of its renormalized weight.
    #[arg(long)]
    pub equal_weights: bool,
    /// Curve CSV: alpha,pi.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Bands JSON: breakpoints and mode count per weight interval.
    #[arg(long)]
    pub bands: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvatureArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[command(flatten)]
    pub pair: PairArg,
    /// Uniform alpha samples; refined geometrically toward both ends.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Curve CSV: alpha,p,q,kappa.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Special-case report JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Barycentric grid resolution.
    #[arg(long, default_value_t = 400)]
    pub resolution: usize,
    /// Grid CSV: a1,a2,a3,tx,ty,h,is_local_max.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Contour lines of log h on the triangle.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LinkageArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Also link bimodal pairs whose lowest saddle reaches this fraction of the lower peak, in (0, 1). No default: without it only unimodal pairs are linked.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Analyze every pair at weight 1/2 instead of its renormalized weights.
    #[arg(long)]
    pub equal_weights: bool,
    /// Graph JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Graph DOT text.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Numeric CSV, one observation per row.
    pub data: PathBuf,
    /// Number of components.
    #[arg(long)]
    pub k: usize,
    /// The first row holds values, not column names.
    #[arg(long)]
    pub no_header: bool,
    /// Random restarts; the best log-likelihood wins.
    #[arg(long, default_value_t = 50)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Relative log-likelihood change that counts as converged.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Fitted model JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Grid points per dimension [default: 2001, 401, 201 for D = 1, 2, 3].
    #[arg(long)]
    pub points: Option<usize>,
    /// Multistart count, used instead of the grid when D > 3.
    #[arg(long, default_value_t = 1000)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Barycentric grid resolution of the topography being checked.
    #[arg(long, default_value_t = 400)]
    pub resolution: usize,
    /// Oracle modes and the comparison, as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
