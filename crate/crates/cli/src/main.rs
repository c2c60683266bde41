//! `triphoton`: batch front end for triphoton-core.
//!
//! Exit codes: 0 on success, 1 when the inputs are well formed but no result
//! exists (or a verification fails), 2 for bad input, config, usage, or I/O.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "triphoton", version, about = "Tripartite entanglement of SPDC photon triplets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact tripartite entanglement of formation of a triple-Gaussian state.
    E3f(E3fArgs),
    /// Closed-form witness and exact E3F of the fitted state over a range of pump radii.
    Sweep(SweepArgs),
    /// Mean triplet generation rate for a pump/medium config.
    Rate(RateArgs),
    /// Adaptive multiresolution scan of a simulated source, with the resulting witness.
    Simulate(SimulateArgs),
    /// Check the entanglement-correlation relation on random pure states.
    Validate(ValidateArgs),
    /// Draw Monte Carlo triplets from a triple-Gaussian state into a CSV.
    Sample(SampleArgs),
    /// Witness from position and momentum sample CSVs.
    Witness(WitnessArgs),
}

#[derive(Args, Debug)]
struct E3fArgs {
    /// Width along (x1+x2+x3)/sqrt(3), meters.
    #[arg(long)]
    sigma_u: f64,
    /// Width along each of the two relative coordinates, meters.
    #[arg(long)]
    sigma_v: f64,
    /// Print a full JSON report instead of the bare value.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Smallest pump radius, meters.
    #[arg(long)]
    sigma_p_min: f64,
    /// Largest pump radius, meters.
    #[arg(long)]
    sigma_p_max: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override the config's QPM order.
    #[arg(long)]
    qpm_order: Option<u32>,
    /// Override the config's pump power, W.
    #[arg(long)]
    pump_power: Option<f64>,
    /// Override the config's medium length, m.
    #[arg(long = "L-z", alias = "length")]
    l_z: Option<f64>,
    /// Index modulation depth used for phase matching instead of QPM.
    #[arg(long, requires = "chi3_sensitivity")]
    index_modulation: Option<f64>,
    /// Relative change of chi3 per unit index change.
    #[arg(long)]
    chi3_sensitivity: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["sigma_u", "config"]))]
struct SimulateArgs {
    /// Position-space width along the diagonal, meters.
    #[arg(long, requires = "sigma_v")]
    sigma_u: Option<f64>,
    #[arg(long)]
    sigma_v: Option<f64>,
    /// Defaults to sigma_v.
    #[arg(long)]
    sigma_w: Option<f64>,
    /// Use the Gaussian fit of this pump/medium config as the source.
    #[arg(long, conflicts_with_all = ["sigma_u", "sigma_v", "sigma_w"])]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    /// Refinement threshold; defaults to max(16, n/4096).
    #[arg(long)]
    threshold: Option<u64>,
    #[arg(long, default_value_t = 8)]
    depth: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    coeffs: CoeffArgs,
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    /// Report path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `<prefix>_x.csv` and `<prefix>_k.csv` with `path,count` leaf records.
    #[arg(long)]
    tree_prefix: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CoeffArgs {
    /// Position weights `a,b,c`.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "1,-0.5,-0.5")]
    eta: [f64; 3],
    /// Momentum weights `a,b,c`.
    #[arg(long, value_parser = parse_triple, allow_hyphen_values = true, default_value = "1,1,1")]
    beta: [f64; 3],
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum BasisArg {
    Position,
    Momentum,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    sigma_u: f64,
    #[arg(long)]
    sigma_v: f64,
    #[arg(long)]
    sigma_w: Option<f64>,
    /// Basis of the output; momentum samples use the Fourier-dual widths.
    #[arg(long, value_enum, default_value = "position")]
    basis: BasisArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WitnessArgs {
    /// CSV with header `x1,x2,x3`.
    #[arg(long)]
    positions: PathBuf,
    /// CSV with header `k1,k2,k3`.
    #[arg(long)]
    momenta: PathBuf,
    #[arg(long)]
    bin_width_x: f64,
    #[arg(long)]
    bin_width_k: f64,
    #[command(flatten)]
    coeffs: CoeffArgs,
    /// Search for better coefficients first, starting from --eta/--beta.
    #[arg(long)]
    optimize: bool,
    #[arg(long, default_value_t = 200)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    bootstrap_seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(v).map_err(|v| format!("expected 3 comma-separated numbers, got {}", v.len()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("triphoton: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
