//! `ficoder`: synthesize, bound and verify functional index codes.
//!
//! Exit status: 0 success, 1 verification failure, 2 usage or input error,
//! 3 search budget exhausted.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ficoder::coloring::DEFAULT_SEARCH_BUDGET;
use ficoder::DEFAULT_VERTEX_BUDGET;

use report::Format;

#[derive(Parser)]
#[command(
    name = "ficoder",
    version,
    about = "Functional index code synthesis and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Instance file (JSON).
    #[arg(long)]
    pub instance: PathBuf,
    /// Lift to this many sub-packets per message (the instance must have n = 1).
    /// For `bounds`, the block length the codebook bounds refer to.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Option<u64>,
    /// Node budget for the exact searches.
    #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: u64,
    /// Largest confusion graph to materialize.
    #[arg(long, default_value_t = DEFAULT_VERTEX_BUDGET, value_parser = positive)]
    pub vertex_budget: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Where to write the command's artifact (code file, coloring).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub struct CodeSource {
    /// Code file: one `{labels} -> codeword` line per class.
    #[arg(long, conflicts_with = "matrix")]
    pub assignment: Option<PathBuf>,
    /// Encoding matrix file (`q rows cols` header, rows of symbols).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance and report warnings.
    Validate(Common),
    /// Build the confusion graph.
    Graph {
        #[command(flatten)]
        common: Common,
        /// Write the graph in DOT format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Color the confusion graph, certifying χ when the budget allows.
    Color(Common),
    /// Synthesize a code from a coloring of the confusion graph.
    Synthesize {
        #[command(flatten)]
        common: Common,
        /// Reuse the classes and codewords of an existing code file.
        #[arg(long)]
        assignment: Option<PathBuf>,
        /// Solve consecutive blocks of sub-packets separately, e.g. `1,1`.
        #[arg(long, conflicts_with = "assignment", value_delimiter = ',')]
        partition: Option<Vec<usize>>,
    },
    /// Bounds on the code size and length, including the entropy bound.
    Bounds(Common),
    /// Verify a code against every receiver.
    Verify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        code: CodeSource,
    },
    /// Check the pairwise distance condition for correcting δ errors.
    EccVerify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        code: CodeSource,
        #[arg(long, default_value_t = 1)]
        delta: usize,
    },
    /// Concatenate a code with an outer error-correcting code.
    EccConcat {
        #[command(flatten)]
        common: Common,
        /// Inner code; synthesized when omitted.
        #[command(flatten)]
        code: CodeSource,
        /// repetition, hamming74, shortened633, mds423, or search.
        #[arg(long)]
        outer: String,
        #[arg(long, default_value_t = 1)]
        delta: usize,
    },
    /// Inject errors and decode every message.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        code: CodeSource,
        #[arg(long, default_value_t = 1)]
        delta: usize,
        /// Single error pattern to add to every codeword; exhaustive otherwise.
        #[arg(long)]
        pattern: Option<String>,
        /// Most (message, pattern) trials to run.
        #[arg(long, default_value_t = 1 << 26)]
        trials: u128,
    },
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("FICODER_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            anyhow::anyhow!("FICODER_THREADS must be a positive integer, got {v:?}")
        })?;
        anyhow::ensure!(n > 0, "FICODER_THREADS must be positive");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Validate(c) => commands::validate(&c),
        Command::Graph { common, dot } => commands::graph(&common, dot.as_deref()),
        Command::Color(c) => commands::color(&c),
        Command::Synthesize {
            common,
            assignment,
            partition,
        } => commands::synthesize(&common, assignment.as_deref(), partition.as_deref()),
        Command::Bounds(c) => commands::bounds(&c),
        Command::Verify { common, code } => commands::verify(&common, &code),
        Command::EccVerify {
            common,
            code,
            delta,
        } => commands::ecc_verify(&common, &code, delta),
        Command::EccConcat {
            common,
            code,
            outer,
            delta,
        } => commands::ecc_concat(&common, &code, &outer, delta),
        Command::Simulate {
            common,
            code,
            delta,
            pattern,
            trials,
        } => commands::simulate(&common, &code, delta, pattern.as_deref(), trials),
    });
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code_for(&e) as u8)
        }
    }
}
