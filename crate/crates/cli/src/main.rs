//! `truncft` command-line interface.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use truncft::spectrum::{Normalization, Quadrature};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Usage(m) | CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<truncft::Error> for CliError {
    fn from(e: truncft::Error) -> Self {
        match e {
            truncft::Error::NoConvergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "truncft", version, about = "Truncated Fourier transform experiments")]
struct Cli {
    /// Directory for CSV, SVG, JSON and manifest files
    #[arg(long, global = true, env = "TRUNCFT_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// RNG seed; overrides the seed in a config file
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the truncated transform of f_k on the grid -B, -B+h, ..., B-h
    Transform(TransformArgs),
    /// Invert (possibly noisy) samples of f_k and report the error
    Reconstruct(ReconstructArgs),
    /// Stability constants for (L, B0, B, gamma)
    Stability(StabilityArgs),
    /// Finite-difference harmonic measure of the slit [0, B]
    HarmonicMeasure(HarmonicArgs),
    /// Singular values of the discretized truncated transform
    Spectrum(SpectrumArgs),
    /// Mean reconstruction error over a bandwidth grid
    Sweep(ConfigArgs),
    /// Critical bandwidths and their line fit
    Critical(ConfigArgs),
    /// Noise scaling of the reconstruction error and the sup-norm bound
    NoiseBound(NoiseBoundArgs),
}

#[derive(Args, Debug)]
struct TransformArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    bandwidth: f64,
    #[arg(long)]
    spacing: f64,
    /// Use the closed form instead of quadrature of sampled f_k
    #[arg(long)]
    closed_form: bool,
    /// Spatial samples for the quadrature
    #[arg(long, default_value_t = 4096)]
    n_space: usize,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    bandwidth: f64,
    /// Grid spacing h; 2B/h must be an integer
    #[arg(long, conflicts_with = "rate")]
    spacing: Option<f64>,
    /// Sampling rate r with M = ceil(rB) (default 16)
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
}

#[derive(Args, Debug)]
struct StabilityArgs {
    /// Half-height L of the strip
    #[arg(long = "L")]
    l: f64,
    #[arg(long = "B0")]
    b0: f64,
    #[arg(long = "B")]
    b: f64,
    #[arg(long)]
    gamma: f64,
    /// Finite-difference mesh for w; L and B must be multiples of it
    #[arg(long, default_value_t = 1.0 / 64.0)]
    mesh: f64,
}

#[derive(Args, Debug)]
struct HarmonicArgs {
    #[arg(long = "L")]
    l: f64,
    #[arg(long = "B")]
    b: f64,
    #[arg(long, default_value_t = 1.0 / 32.0)]
    mesh: f64,
    /// Truncation length of the half-strip (default: large enough for --at-x)
    #[arg(long)]
    x_max: Option<f64>,
    /// Evaluation point
    #[arg(long, default_value_t = 0.0)]
    at_x: f64,
    #[arg(long, default_value_t = 0.0)]
    at_y: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    Angular,
    Landau,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QuadArg {
    LeftPoint,
    GaussLegendre,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    bandwidth: f64,
    /// Spatial samples
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Frequency samples (default: same as --n)
    #[arg(long)]
    n_freq: Option<usize>,
    /// `landau` maps B to the band [-πB/2, πB/2]
    #[arg(long, value_enum, default_value_t = NormArg::Landau)]
    normalization: NormArg,
    #[arg(long, value_enum, default_value_t = QuadArg::LeftPoint)]
    quadrature: QuadArg,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// TOML experiment config
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct NoiseBoundArgs {
    #[arg(long, default_value_t = 15)]
    k: u32,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 16.0)]
    rate: f64,
    /// Smallest bandwidth (default ω(f_k))
    #[arg(long)]
    b_min: Option<f64>,
    /// Largest bandwidth (default 4ω(f_k))
    #[arg(long)]
    b_max: Option<f64>,
    #[arg(long, default_value_t = 13)]
    points: usize,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Angular => Normalization::Angular,
            NormArg::Landau => Normalization::Landau,
        }
    }
}

impl From<QuadArg> for Quadrature {
    fn from(q: QuadArg) -> Self {
        match q {
            QuadArg::LeftPoint => Quadrature::LeftPoint,
            QuadArg::GaussLegendre => Quadrature::GaussLegendre,
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Transform(a) => commands::transform(a, out, cli.seed),
        Command::Reconstruct(a) => commands::reconstruct(a, out, cli.seed),
        Command::Stability(a) => commands::stability(a, out, cli.seed),
        Command::HarmonicMeasure(a) => commands::harmonic(a, out, cli.seed),
        Command::Spectrum(a) => commands::spectrum(a, out, cli.seed),
        Command::Sweep(a) => commands::sweep(a, out, cli.seed),
        Command::Critical(a) => commands::critical(a, out, cli.seed),
        Command::NoiseBound(a) => commands::noise_bound(a, out, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            if matches!(e, CliError::Usage(_)) {
                eprintln!("\nRun `truncft --help` for usage.");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
