use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_CODES: &str = "\
Exit codes:
  0   success
  2   usage error (unknown flag, malformed value)
  3   invalid argument (out-of-range parameter)
  4   drive constraint violated (nonzero mean or non-antisymmetric phase)
  5   overflow or diverged evolution
  6   no unbroken phase at the requested frequency
  7   search interval does not bracket the onset
  8   insufficient data for a fit, or zero-norm state
  9   numerical inconsistency
  10  I/O or input-file parse error

Environment:
  PTFLOQUET_THREADS   cap on worker threads for parallel scans";

/// Floquet spectra, PT phase diagram and wavepacket transport of a driven
/// tight-binding lattice. All quantities are in units of the hopping rate.
#[derive(Debug, Parser)]
#[command(name = "ptfloquet", version, after_help = EXIT_CODES)]
pub struct Cli {
    /// Hopping rate κ.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub kappa: f64,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file, or `-` for standard output.
    #[arg(long, global = true, default_value = "-")]
    pub out: String,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quasi-energy bands E(q) = E' + iE'' on a uniform Bloch-momentum grid.
    Spectrum(SpectrumArgs),
    /// Broken/unbroken classification over an (ω, Δ₀) grid.
    PhaseDiagram(PhaseDiagramArgs),
    /// Largest unbroken square-wave amplitude at one or more frequencies.
    Threshold(ThresholdArgs),
    /// Lowest frequency admitting an unbroken phase.
    MinFrequency(MinFrequencyArgs),
    /// Real-space evolution of a lattice excitation.
    Evolve(EvolveArgs),
    /// High-frequency effective hopping κ' = κ ⟨exp(-2Φ)⟩.
    Hopping(HoppingArgs),
    /// Check the zero-mean and antisymmetry constraints of a drive.
    CheckDrive(CheckDriveArgs),
}

#[derive(Debug, Clone, Args)]
pub struct WaveformArgs {
    /// `square`, `sin` or `file:<path>` (one `re im` pair per line).
    #[arg(long, default_value = "square")]
    pub waveform: String,
    /// Drive frequency ω.
    #[arg(long, default_value_t = 15.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta0_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta0_im: f64,
    /// Phase offset θ in Δ(t) = Δ₀ f(ωt + θ); defaults to the antisymmetric
    /// choice (π/2 for square, 0 otherwise).
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    /// Bloch-momentum grid size.
    #[arg(long, default_value_t = 512)]
    pub nq: usize,
    /// Classification tolerance on max |E''|.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Skip the golden-section search between grid points.
    #[arg(long)]
    pub no_refine: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    #[arg(long, default_value_t = 512)]
    pub nq: usize,
}

#[derive(Debug, Args)]
pub struct PhaseDiagramArgs {
    #[arg(long, default_value_t = 1.0)]
    pub omega_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub omega_max: f64,
    #[arg(long, default_value_t = 77)]
    pub omega_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    pub delta_min: f64,
    #[arg(long, default_value_t = 16.0)]
    pub delta_max: f64,
    #[arg(long, default_value_t = 65)]
    pub delta_steps: usize,
    #[command(flatten)]
    pub classify: ClassifyArgs,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    /// One or more frequencies.
    #[arg(long, num_args = 1.., required = true)]
    pub omega: Vec<f64>,
    #[arg(long, default_value_t = 1e-3)]
    pub bisect_tol: f64,
    #[command(flatten)]
    pub classify: ClassifyArgs,
}

#[derive(Debug, Args)]
pub struct MinFrequencyArgs {
    #[arg(long, default_value_t = 1.0)]
    pub omega_lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega_hi: f64,
    /// Bisection precision on ω.
    #[arg(long, default_value_t = 1e-3)]
    pub omega_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub bisect_tol: f64,
    #[command(flatten)]
    pub classify: ClassifyArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Single,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    /// Odd number of lattice sites.
    #[arg(long, default_value_t = 201)]
    pub sites: usize,
    #[arg(long, value_enum, default_value_t = Init::Single)]
    pub init: Init,
    /// Gaussian width w in exp[-(n/w)² + i q₀ n].
    #[arg(long, default_value_t = 4.0)]
    pub width: f64,
    /// Gaussian carrier momentum q₀.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4, allow_negative_numbers = true)]
    pub momentum: f64,
    #[arg(long, default_value_t = 80)]
    pub periods: usize,
    #[arg(long, default_value_t = 512)]
    pub steps_per_period: usize,
    #[arg(long, default_value_t = 1)]
    pub snapshots_every: usize,
    /// Also write |c_n|² per snapshot to this file.
    #[arg(long)]
    pub dump_field: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HoppingArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
}

#[derive(Debug, Args)]
pub struct CheckDriveArgs {
    #[command(flatten)]
    pub waveform: WaveformArgs,
    /// Number of sample times for the antisymmetry check.
    #[arg(long, default_value_t = 1024)]
    pub samples: usize,
    /// Tolerance; defaults to 1e-10 for closed-form and 1e-6 for sampled shapes.
    #[arg(long)]
    pub tol: Option<f64>,
}
