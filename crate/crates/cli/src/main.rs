use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod init;

use qgossip::analysis::{DEFAULT_BURN_IN, DEFAULT_M_QUBIT_CAP, DEFAULT_TRIALS};
use qgossip::qstate::DEFAULT_QUBIT_CAP;

/// Quantum clique-gossip experiments.
///
/// Initial states are given as a comma list of per-qubit symbols 0, 1, + and
/// -, with `[..]xN` repeating a group: `--init '[0,1,+,-,0]x2'`.
#[derive(Parser, Debug)]
#[command(name = "qgossip", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dispersion h(t) of the single-qubit reduced states.
    SimulateReduced(SimulateReducedArgs),
    /// Distance g(t) of the full network state from its limit.
    SimulateFull(SimulateFullArgs),
    /// Convergence rates as a JSON report.
    Rates(RatesArgs),
    /// Finite-time averaging feasibility as a JSON report.
    Feasibility(FeasibilityArgs),
    /// Validates a file written by this tool.
    SchemaCheck(SchemaCheckArgs),
}

#[derive(Args, Debug)]
struct Network {
    /// Number of qubits; must match the initial-state spec when both are given.
    #[arg(long)]
    n: Option<usize>,
    /// Initial state of each qubit.
    #[arg(long)]
    init: String,
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct Mode {
    /// Exact expectation (default).
    #[arg(long)]
    exact: bool,
    /// Monte Carlo estimate with standard errors; needs --seed.
    #[arg(long)]
    mc: bool,
}

#[derive(Args, Debug)]
struct SimulateReducedArgs {
    #[command(flatten)]
    network: Network,
    /// Clique sizes of the random schedule, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "graph", conflicts_with = "graph")]
    k: Vec<usize>,
    /// Clique graph (JSON) to run round-robin instead of random cliques.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    mode: Mode,
    /// Output directory.
    #[arg(long, env = "QGOSSIP_OUT_DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SimulateFullArgs {
    #[command(flatten)]
    network: Network,
    /// Clique sizes of the random schedule, comma separated.
    #[arg(long, value_delimiter = ',', required_unless_present = "graph", conflicts_with = "graph")]
    k: Vec<usize>,
    /// Clique graph (JSON) to run round-robin instead of random cliques.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 60)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, required_unless_present = "graph")]
    seed: Option<u64>,
    /// Largest network simulated as a dense density matrix.
    #[arg(long, default_value_t = DEFAULT_QUBIT_CAP)]
    cap_n: usize,
    /// Output directory.
    #[arg(long, env = "QGOSSIP_OUT_DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Initial reduced states for the h(t) fit; defaults to 0,1,+,-,0 repeated.
    #[arg(long)]
    init: Option<String>,
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[arg(long, default_value_t = DEFAULT_BURN_IN)]
    burn_in: usize,
    /// Also compute the full-state rate from the 4^n x 4^n mean-square matrix.
    #[arg(long)]
    nu_star: bool,
    /// Largest n for which the mean-square matrix is built.
    #[arg(long, default_value_t = DEFAULT_M_QUBIT_CAP)]
    cap_n: usize,
    /// Write the eigenvalue table as CSV.
    #[arg(long, requires = "nu_star")]
    eigen_csv: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FeasibilityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Search for a fastest schedule and write it as a schedule file.
    #[arg(long)]
    schedule_out: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FileKind {
    /// CSV `t,value,stderr`.
    Series,
    /// CSV `t,metric,value,trial`.
    Trajectory,
    /// CSV `magnitude,multiplicity`.
    Eigenvalues,
    RateReport,
    Feasibility,
    Graph,
    Schedule,
    /// JSON written next to full-state series.
    FullSidecar,
}

#[derive(Args, Debug)]
struct SchemaCheckArgs {
    #[arg(long, value_enum)]
    kind: FileKind,
    path: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::SimulateReduced(a) => commands::simulate_reduced(a),
        Command::SimulateFull(a) => commands::simulate_full(a),
        Command::Rates(a) => commands::rates(a),
        Command::Feasibility(a) => commands::feasibility(a),
        Command::SchemaCheck(a) => commands::schema_check(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
