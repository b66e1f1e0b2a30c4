mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

/// Design, simulate and inspect torus-layer analog codes.
///
/// Every command accepts `--config FILE` with one `key = value` per line (keys
/// are long flag names, `#` starts a comment). Flags given on the command line
/// override the file. Output files start with `#` lines recording the
/// effective settings.
#[derive(Debug, Parser)]
#[command(name = "torus-layer", version, args_override_self = true)]
struct Cli {
    /// Read default flag values from this file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a code and write it to a file.
    Design(DesignArgs),
    /// Monte-Carlo mse sweep over an SNR grid.
    Simulate(SimulateArgs),
    /// Total curve length of the layered and single-torus schemes per radius.
    Compare(CompareArgs),
    /// Noiseless encode/decode over a grid; exit status 1 above 1e-9 error.
    Roundtrip(RoundtripArgs),
    /// Map source values (one per stdin line) to channel points.
    Encode(CodecArgs),
    /// Map received points (2N numbers per stdin line) to source estimates.
    Decode(CodecArgs),
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Torus dimension N of the permutation layers.
    #[arg(long)]
    n: Option<usize>,
    /// Permutation parameter t of the layers.
    #[arg(long, conflicts_with_all = ["d0", "layers"])]
    t: Option<f64>,
    /// Minimum distance between layers; solved for t.
    #[arg(long, conflicts_with = "layers")]
    d0: Option<f64>,
    /// Load the layers from a spherical code file instead.
    #[arg(long, value_name = "FILE")]
    layers: Option<PathBuf>,
    /// Winding of the first layer, e.g. 1,2,198; other layers get the
    /// coordinate-aligned permutation.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["w", "delta", "r_target"])]
    winding: Option<Vec<i64>>,
    /// Use the scaled lifting of the densest-lattice target at this w.
    #[arg(long, conflicts_with_all = ["delta", "r_target"])]
    w: Option<i64>,
    /// Sweep w for the longest curve whose small-ball radius is at least this
    /// (default: half the layer distance).
    #[arg(long, conflicts_with = "r_target")]
    delta: Option<f64>,
    /// Sweep w for the longest curve whose fold spacing is at least this.
    #[arg(long)]
    r_target: Option<f64>,
    /// Average transmit power.
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Fraction of each curve in use.
    #[arg(long, default_value_t = torus_layer::codec::DEFAULT_ALPHA)]
    alpha: f64,
    /// Code file to write.
    #[arg(long, short, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Source {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Noise {
    /// SNR = P / sigma^2 with sigma^2 the variance of each coordinate.
    PerDimension,
    /// SNR = P / sigma^2 with sigma^2 the total noise power.
    Total,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Code file from `design`.
    #[arg(long, value_name = "FILE", required_unless_present = "linear")]
    code: Option<PathBuf>,
    /// SNR grid in dB: comma-separated values or start:stop:step ranges.
    #[arg(long, default_value = "0:40:5")]
    snr: String,
    /// Samples per SNR point.
    #[arg(long, default_value_t = 50_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Source::Uniform)]
    source: Source,
    /// Standard deviation of the Gaussian source.
    #[arg(long, default_value_t = 0.5)]
    sigma_s: f64,
    #[arg(long, value_enum, default_value_t = Noise::PerDimension)]
    noise: Noise,
    /// Override the power stored in the code file.
    #[arg(long)]
    power: Option<f64>,
    /// Also run linear modulation of a uniform source.
    #[arg(long)]
    linear: bool,
    /// Dimension N for the linear run when no code is given.
    #[arg(long)]
    n: Option<usize>,
    /// CSV for the linear run when a code is simulated as well.
    #[arg(long, value_name = "FILE")]
    linear_out: Option<PathBuf>,
    /// CSV to write (default: stdout). The threshold SNR, the first grid
    /// point whose mse is within twice the low-noise prediction, is reported
    /// separately.
    #[arg(long, short, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Small-ball radii: comma-separated values or start:stop:step ranges.
    #[arg(long, default_value = "0.01:0.2:0.01")]
    deltas: String,
    #[arg(long, short, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RoundtripArgs {
    #[arg(long, value_name = "FILE")]
    code: PathBuf,
    /// Evenly spaced grid size; interval endpoints are always added.
    #[arg(long, default_value_t = 10_001)]
    points: usize,
}

#[derive(Debug, Args)]
struct CodecArgs {
    #[arg(long, value_name = "FILE")]
    code: PathBuf,
    #[arg(long, value_enum, default_value_t = Source::Uniform)]
    source: Source,
    #[arg(long, default_value_t = 0.5)]
    sigma_s: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match config::expand(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let cmd = Cli::command();
    let sub_cmd = cmd.find_subcommand(name).expect("known subcommand");
    let header = config::echo(sub_cmd, sub);
    match commands::run(cli.command, &header) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
