//! `pasem`: simulate shaped-QAM channels, estimate their parameters blindly or
//! from known symbols, score the estimates, and sweep DA against EM.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "pasem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw symbols, pass them through the channel and write samples plus a sidecar.
    Simulate(SimulateArgs),
    /// Fit channel parameters with multi-start EM or the data-aided estimator.
    Estimate(EstimateArgs),
    /// Score a parameter set on samples with known symbols.
    Evaluate(EvaluateArgs),
    /// Compare DA and EM achievable rates over modes, SNR points and seeds.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Bin,
    Csv,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Bits per label of the square QAM constellation [default: 6].
    #[arg(long)]
    m: Option<u32>,
    /// Shaping preset (mode1 to mode4); fixes the constellation and pmf.
    #[arg(long, conflicts_with_all = ["nu", "pmf"])]
    mode: Option<String>,
    /// Maxwell-Boltzmann parameter of the input law.
    #[arg(long, conflicts_with = "pmf")]
    nu: Option<f64>,
    /// Explicit pmf, comma separated, one entry per point in label order.
    #[arg(long, value_delimiter = ',')]
    pmf: Option<Vec<f64>>,
    /// Channel gain.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Noise variance.
    #[arg(long, conflicts_with = "snr_db", required_unless_present = "snr_db")]
    sigma2: Option<f64>,
    /// SNR in dB, `10 log10(delta^2 E|X|^2 / sigma2)`.
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Number of channel uses.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Observation file; `.bin` or `.csv` selects the format.
    #[arg(long)]
    out: PathBuf,
    /// Symbol file [default: `<out stem>.sym.<ext>`].
    #[arg(long)]
    symbols: Option<PathBuf>,
    /// Sidecar JSON [default: `<out stem>.json`].
    #[arg(long)]
    params: Option<PathBuf>,
    /// Overrides the format implied by the extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Em,
    Da,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DistModeArg {
    /// One free probability per point.
    General,
    /// Maxwell-Boltzmann family.
    Mb,
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Observation file.
    #[arg(long)]
    input: PathBuf,
    /// Transmitted-symbol file.
    #[arg(long)]
    symbols: Option<PathBuf>,
    /// Overrides the format implied by the extensions.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Bits per label of the data's constellation [default: 6, or the sidecar's].
    #[arg(long)]
    m: Option<u32>,
    /// Sidecar written by `simulate`, used for the constellation size.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Em)]
    method: MethodArg,
    /// Cluster counts of the EM starts.
    #[arg(long, value_delimiter = ',', default_value = "4,16,36,64")]
    ks: Vec<usize>,
    /// Parameterization of the estimated pmf.
    #[arg(long, value_enum, default_value_t = DistModeArg::General)]
    mode: DistModeArg,
    #[arg(long = "em-max-iters", default_value_t = 100)]
    em_max_iters: usize,
    /// Relative log-likelihood increase below which EM stops.
    #[arg(long = "em-tol", default_value_t = 1e-8)]
    em_tol: f64,
    /// Floor applied to every estimated probability.
    #[arg(long = "prob-floor", default_value_t = 0.0)]
    prob_floor: f64,
    /// Report JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Parameters: a sidecar, an `estimate` report or a bare parameter record.
    #[arg(long)]
    params: PathBuf,
    /// Metric report JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Shaping presets, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "mode1,mode2,mode3,mode4")]
    mode: Vec<String>,
    /// Strictly increasing SNR grid in dB, comma separated.
    #[arg(long = "snr-db", value_delimiter = ',', required = true, allow_hyphen_values = true)]
    snr_db: Vec<f64>,
    /// Number of seeds per cell.
    #[arg(long, default_value_t = 5)]
    seeds: u64,
    /// First seed; cells use `seed .. seed + seeds`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Channel uses per cell.
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "4,16,36,64")]
    ks: Vec<usize>,
    #[arg(long = "em-max-iters", default_value_t = 100)]
    em_max_iters: usize,
    #[arg(long = "em-tol", default_value_t = 1e-8)]
    em_tol: f64,
    /// Per-run CSV table.
    #[arg(long)]
    out: PathBuf,
    /// Per-cell means [default: `<out stem>.aggregate.csv`].
    #[arg(long)]
    aggregate: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match outcome {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
