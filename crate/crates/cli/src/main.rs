//! `ptlab`: exact counts, Wick moments, limit laws, freeness verdicts and
//! Monte Carlo estimates for partial transposes of Wishart matrices.
//!
//! Exit codes: 0 success, 1 failed selftest or internal error, 2 invalid
//! input, 3 job refused by a budget.

mod commands;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

#[derive(Parser)]
#[command(name = "ptlab", version, about = "Partial transposes of Wishart matrices: exact and sampled")]
struct Cli {
    /// Output format (default json; sweep configs may choose their own).
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct ShapeArgs {
    /// Side length M of the square factor.
    #[arg(long = "M")]
    pub m: usize,
    /// Number of columns P of the Ginibre factor (defaults to M).
    #[arg(long = "P")]
    pub p: Option<usize>,
}

#[derive(Args, Clone)]
pub struct ExactLimits {
    /// Largest enumeration cost accepted for an exact computation.
    #[arg(long)]
    pub budget: Option<u128>,
    /// Largest word length accepted for an exact computation.
    #[arg(long)]
    pub max_order: Option<usize>,
}

#[derive(Args, Clone)]
pub struct McArgs {
    /// Estimate by Monte Carlo.
    #[arg(long)]
    pub mc: bool,
    /// Number of Wishart samples.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// RNG seed; required with --mc.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Agreement counts of two entry permutations.
    Count {
        #[arg(long = "M")]
        m: usize,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Also report the projection counters.
        #[arg(long)]
        all: bool,
    },
    /// Mixed moment E tr(W^σ1 ⋯ W^σm).
    Moment {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        word: String,
        /// Exact rational value (default unless only --mc is given).
        #[arg(long)]
        exact: bool,
        /// List every pairing term.
        #[arg(long)]
        breakdown: bool,
        #[command(flatten)]
        limits: ExactLimits,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Mixed free cumulant κ_m(W^σ1, …, W^σm).
    Cumulant {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        word: String,
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        limits: ExactLimits,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Covariance of the unnormalised traces of two words.
    Covariance {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        word1: String,
        #[arg(long)]
        word2: String,
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        limits: ExactLimits,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Limit cumulants and moments of a constant partial-transpose word.
    Limit {
        /// Limit of the block count, an integer or `inf`.
        #[arg(long)]
        b: String,
        /// Limit of the block size, an integer or `inf`.
        #[arg(long)]
        d: String,
        /// Limit of P/M.
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long, default_value_t = 6)]
        orders: usize,
    },
    /// Pairwise asymptotic freeness verdicts for families of partial transposes.
    Verdict {
        /// Families such as `G(N,N);LG(N,N);G(N^2,1)`.
        #[arg(long)]
        family: String,
        /// Sampling grid such as `N=2,4,8,16`.
        #[arg(long)]
        grid: String,
        /// Also report exact agreement densities along the grid.
        #[arg(long)]
        probe: bool,
    },
    /// Monte Carlo estimates of normalised traces, optionally along an M grid.
    Simulate {
        /// Word literal or template in M; repeat for several words.
        #[arg(long, required = true)]
        word: Vec<String>,
        /// Side length, or use --grid.
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "P")]
        p: Option<usize>,
        /// Grid such as `M=8,16,32` with P = M.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Compare against exact values.
        #[arg(long)]
        exact: bool,
        /// Emit one realisation per grid point instead of averages.
        #[arg(long)]
        path: bool,
    },
    /// Run a JSON experiment configuration over a shape grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Print the normalised configuration instead of running it.
        #[arg(long)]
        emit_config: bool,
    },
    /// Run the verification suite.
    Selftest {
        /// Also run the Monte Carlo checks (needs --seed).
        #[arg(long)]
        mc: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Core(ptlab_core::Error),
    Usage(String),
    SelftestFailed(output::Report),
}

impl From<ptlab_core::Error> for CliError {
    fn from(e: ptlab_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Debug for output::Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Report({} rows)", self.rows.len())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use ptlab_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::SelftestFailed(_) => 1,
            CliError::Core(E::Budget { .. }) => 3,
            CliError::Core(E::Parse(_) | E::Domain(_) | E::DimensionMismatch { .. } | E::Io(_)) => 2,
            CliError::Core(E::MissingMoment(_)) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("PTLAB_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("PTLAB_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

type Outcome = (output::Report, Option<Format>, Option<PathBuf>);

fn run(command: Command) -> CliResult<Outcome> {
    configure_threads()?;
    let plain = |r: CliResult<output::Report>| r.map(|r| (r, None, None));
    match command {
        Command::Sweep { config, emit_config } => sweep::run(&config, emit_config),
        other => plain(run_plain(other)),
    }
}

fn run_plain(command: Command) -> CliResult<output::Report> {
    match command {
        Command::Count { m, a, b, all } => commands::count(m, &a, &b, all),
        Command::Moment { shape, word, exact, breakdown, limits, mc } => {
            commands::moment(&shape, &word, exact, breakdown, &limits, &mc)
        }
        Command::Cumulant { shape, word, exact, limits, mc } => commands::cumulant(&shape, &word, exact, &limits, &mc),
        Command::Covariance { shape, word1, word2, exact, limits, mc } => {
            commands::covariance(&shape, &word1, &word2, exact, &limits, &mc)
        }
        Command::Limit { b, d, c, orders } => commands::limit(&b, &d, &c, orders),
        Command::Verdict { family, grid, probe } => commands::verdict(&family, &grid, probe),
        Command::Simulate { word, m, p, grid, samples, seed, exact, path } => {
            commands::simulate(&word, m, p, grid.as_deref(), samples, seed, exact, path)
        }
        Command::Sweep { .. } => unreachable!(),
        Command::Selftest { mc, seed } => commands::selftest(mc, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (format, out) = (cli.format, cli.out.clone());
    let emit = |report: &output::Report, fmt: Option<Format>, path: Option<PathBuf>| -> Result<(), String> {
        let bytes = report.render(format.or(fmt).unwrap_or(Format::Json))?;
        output::write_to(out.clone().or(path).as_deref(), &bytes).map_err(|e| e.to_string())
    };
    match run(cli.command) {
        Ok((report, fmt, path)) => match emit(&report, fmt, path) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("ptlab: {e}");
                ExitCode::from(1)
            }
        },
        Err(CliError::SelftestFailed(report)) => {
            if let Err(e) = emit(&report, None, None) {
                eprintln!("ptlab: {e}");
            }
            eprintln!("ptlab: selftest failed");
            ExitCode::from(1)
        }
        Err(e) => {
            let code = e.exit_code();
            match e {
                CliError::Core(e) => eprintln!("ptlab: {e}"),
                CliError::Usage(msg) => eprintln!("ptlab: {msg}"),
                CliError::SelftestFailed(_) => unreachable!(),
            }
            ExitCode::from(code)
        }
    }
}
