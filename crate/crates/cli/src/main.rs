use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod mnist;

use error::CliError;

#[derive(Parser)]
#[command(name = "gsvd-align", version, about = "Alignment angles between two datasets via the generalized SVD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose two matrices (CSV, columns are samples) and save the factors.
    Decompose(DecomposeArgs),
    /// Score the columns of a matrix against saved factors.
    Score(ScoreArgs),
    /// Run the full MNIST protocol for one digit pair.
    Mnist(MnistArgs),
    /// Compare two angle histograms.
    Frdist(FrdistArgs),
    /// Align paired instance sets in the shared frame.
    Procrustes(ProcrustesArgs),
    /// Sweep the decision threshold over labelled validation images.
    TauSweep(TauSweepArgs),
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Relative rank threshold.
    #[arg(long, default_value_t = gsvd_align::gsvd::DEFAULT_RANK_TOL)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    factors: PathBuf,
    /// Samples as columns.
    #[arg(long)]
    z: PathBuf,
    /// Relative truncation for the inverse spectra.
    #[arg(long, default_value_t = gsvd_align::matrix::TRUNCATION_TOL)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
    /// Exit 0 even when most samples are flagged non-relational.
    #[arg(long)]
    allow_non_relational: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Centering {
    /// One mean over both selections, also applied to test samples.
    Shared,
    /// Each selection centered with its own mean; test samples with their
    /// average.
    PerClass,
}

#[derive(Args)]
pub struct MnistArgs {
    /// Directory holding the four standard IDX files.
    #[arg(long, env = "GSVD_ALIGN_MNIST_DIR", default_value = "data/mnist")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub test_images: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    pub digit_a: String,
    #[arg(long)]
    pub digit_b: String,
    #[arg(long, default_value_t = 900)]
    pub p: usize,
    #[arg(long, default_value_t = 800)]
    pub q: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = gsvd_align::infogeo::DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub tau: f64,
    #[arg(long, default_value_t = gsvd_align::matrix::TRUNCATION_TOL)]
    pub trunc_tol: f64,
    #[arg(long, value_enum, default_value_t = Centering::Shared)]
    pub center: Centering,
    /// Class-A prior for bin posteriors; defaults to the test-set proportion.
    #[arg(long)]
    pub prior_a: Option<f64>,
    /// Also evaluate with shared directions pruned at this band.
    #[arg(long)]
    pub prune_band: Option<f64>,
    #[arg(long)]
    pub save_model: bool,
    /// Exit 0 even when most test samples are flagged non-relational.
    #[arg(long)]
    pub allow_non_relational: bool,
    #[arg(long, env = "GSVD_ALIGN_OUTDIR", default_value = "out")]
    pub outdir: PathBuf,
}

#[derive(Args)]
struct FrdistArgs {
    #[arg(long)]
    hist_a: PathBuf,
    #[arg(long)]
    hist_b: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    prior_a: f64,
}

#[derive(Args)]
struct ProcrustesArgs {
    #[arg(long)]
    factors: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TauSweepArgs {
    /// Factors or model JSON; a model's labels and center are used.
    #[arg(long)]
    factors: PathBuf,
    #[arg(long)]
    val_images: PathBuf,
    #[arg(long)]
    val_labels: PathBuf,
    #[arg(long, default_value_t = 45)]
    grid: usize,
    #[arg(long)]
    label_a: Option<String>,
    #[arg(long)]
    label_b: Option<String>,
    /// Write the accuracy curve here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decompose(a) => commands::decompose(&a.a, &a.b, a.tol, &a.out),
        Command::Score(a) => commands::score(&a.factors, &a.z, a.tol, &a.out, a.allow_non_relational),
        Command::Mnist(a) => mnist::run(&a),
        Command::Frdist(a) => commands::frdist(&a.hist_a, &a.hist_b, a.prior_a),
        Command::Procrustes(a) => commands::procrustes(&a.factors, &a.x, &a.y, a.threshold, &a.out),
        Command::TauSweep(a) => commands::tau_sweep(
            &a.factors,
            &a.val_images,
            &a.val_labels,
            a.grid,
            a.label_a.as_deref(),
            a.label_b.as_deref(),
            a.out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
