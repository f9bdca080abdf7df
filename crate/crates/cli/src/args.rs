use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aak", version, about = "Archetypal analysis, SiVM and identity-approximation certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit archetypes by alternating constrained least squares.
    Factorize(FactorizeArgs),
    /// Pick archetypes among the data points with simplex volume maximization.
    Sivm(SivmArgs),
    /// Closed-form error values for approximating the identity with rank k.
    Bounds(BoundsArgs),
    /// Synthetic 2-D data with its hull and the archetypal hulls for a range of k.
    Demo(DemoArgs),
    /// Run the certificate suite; exits 3 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Sivm,
    Random,
    Uniform,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeArg {
    Ring,
    Blob,
    Square,
}

#[derive(Debug, Args)]
pub struct FactorizeArgs {
    /// CSV file, one point per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of archetypes.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Starting archetypes.
    #[arg(long, value_enum, default_value = "sivm")]
    pub init: InitArg,
    /// Maximum number of outer (B, A) sweeps.
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Relative rss decrease below which the fit stops.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Writes <prefix>.B.csv, <prefix>.A.csv, <prefix>.Z.csv and <prefix>.report.json.
    #[arg(long)]
    pub out_prefix: PathBuf,
    /// Record per-phase wall-clock times in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct SivmArgs {
    /// CSV file, one point per row.
    #[arg(long)]
    pub input: PathBuf,
    /// Number of archetypes.
    #[arg(long)]
    pub k: usize,
    /// Recorded in the report; the selection itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes <prefix>.B.csv, <prefix>.A.csv, <prefix>.Z.csv and <prefix>.report.json.
    #[arg(long)]
    pub out_prefix: PathBuf,
    /// Record per-phase wall-clock times in the report.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Number of extreme points.
    #[arg(long)]
    pub q: usize,
    /// Number of archetypes.
    #[arg(long)]
    pub k: usize,
    /// Part sizes for the partition construction, e.g. 3,3,2 (default: balanced).
    #[arg(long, value_delimiter = ',')]
    pub partition: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, value_enum, default_value = "ring")]
    pub shape: ShapeArg,
    /// Number of points.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Inclusive range of archetype counts, A..B.
    #[arg(long, default_value = "3..10")]
    pub k_range: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output SVG overlay.
    #[arg(long, default_value = "aak-demo.svg")]
    pub svg: PathBuf,
    /// Also write <prefix>.points.csv and <prefix>.k<K>.Z.csv.
    #[arg(long)]
    pub csv_prefix: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest q in the exhaustive identity checks.
    #[arg(long, default_value_t = 30)]
    pub qmax: usize,
    /// Random (B, A) pairs for the sampling checks.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the full JSON report (all certificates) here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub self_test_break: bool,
}
