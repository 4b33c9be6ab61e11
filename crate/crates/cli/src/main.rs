//! `kplanar` — command-line front end for randomized k-plane edge
//! distribution: resolvable design construction and search, typed partition
//! schemes, exact crossing-survival probabilities, bound tables, drawing
//! generation, and seeded split runs with certified per-plane layouts.
//!
//! Exit codes: 0 success, 2 validation failure, 3 infeasible search,
//! 4 parse error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "kplanar",
    version,
    about = "Distribute a drawing's edges over k planes via typed partition schemes, \
             with exact survival probabilities and certified crossing counts"
)]
pub struct Cli {
    /// Output format (`csv` is available for `table` only).
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Seed for randomized commands (defaults to 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Node budget for backtracking searches.
    #[arg(long, global = true)]
    pub budget: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Construct, search for, or verify resolvable designs.
    Designs {
        #[command(subcommand)]
        cmd: DesignsCmd,
    },
    /// Build or validate typed partition schemes.
    Scheme {
        #[command(subcommand)]
        cmd: SchemeCmd,
    },
    /// Exact and closed-form crossing-survival probabilities.
    Q {
        #[command(subcommand)]
        cmd: QCmd,
    },
    /// Emit the bound-comparison table for a range of k.
    Table(TableArgs),
    /// Generate drawings and count their crossings.
    Draw {
        #[command(subcommand)]
        cmd: DrawCmd,
    },
    /// Run the randomized split on a drawing.
    Split {
        #[command(subcommand)]
        cmd: SplitCmd,
    },
    /// Run build → validate → split mc from a key=value config file.
    Pipeline(PipelineArgs),
}

#[derive(Subcommand)]
pub enum DesignsCmd {
    /// Construct a design, using bundled instances and direct constructions
    /// before falling back to search.
    Build(DesignParams),
    /// Run the deterministic backtracking search only (no shortcuts).
    Search(DesignParams),
    /// Parse a design file and re-verify every invariant.
    Verify {
        /// Design or decomposition file.
        file: PathBuf,
    },
}

#[derive(Args)]
pub struct DesignParams {
    /// Number of points.
    #[arg(long)]
    pub points: u32,
    /// Block size of a resolvable design.
    #[arg(long, conflicts_with = "triangle_matching")]
    pub block: Option<u32>,
    /// Ask for a triangle+matching decomposition instead of a design.
    #[arg(long)]
    pub triangle_matching: bool,
}

#[derive(Subcommand)]
pub enum SchemeCmd {
    /// Build a scheme and emit it as JSON.
    Build(SchemeArgs),
    /// Re-check every invariant of a scheme JSON file.
    Validate {
        /// Scheme JSON file.
        file: PathBuf,
    },
}

/// Where a scheme comes from: a JSON file, or a named case with parameters.
#[derive(Args, Clone, Default)]
pub struct SchemeArgs {
    /// Scheme JSON file produced by `scheme build`.
    #[arg(long, value_name = "FILE",
          conflicts_with_all = ["case", "k", "points", "block", "design"])]
    pub scheme: Option<PathBuf>,
    /// Built-in case: seven-label, odd-loops, bipartite, two-planes,
    /// design, or triangle-matching.
    #[arg(long)]
    pub case: Option<String>,
    /// Plane count for odd-loops / bipartite cases.
    #[arg(long)]
    pub k: Option<u32>,
    /// Point count for design / triangle-matching cases.
    #[arg(long)]
    pub points: Option<u32>,
    /// Block size for the design case.
    #[arg(long)]
    pub block: Option<u32>,
    /// Design or decomposition file backing a design / triangle-matching
    /// case (instead of --points/--block).
    #[arg(long, value_name = "FILE")]
    pub design: Option<PathBuf>,
}

/// Where a drawing comes from: a file, or a built-in generator.
#[derive(Args, Clone, Default)]
pub struct DrawingArgs {
    /// Drawing file: rectilinear (`v`/`e` lines) or abstract (`x` lines).
    #[arg(long, value_name = "FILE")]
    pub drawing: Option<PathBuf>,
    /// Complete graph K_n with vertices in convex position.
    #[arg(long, value_name = "N", conflicts_with = "drawing")]
    pub convex: Option<u32>,
    /// Complete bipartite K_{m,n} drawn on two horizontal lines.
    #[arg(long, num_args = 2, value_names = ["M", "N"],
          conflicts_with_all = ["drawing", "convex"])]
    pub two_line: Option<Vec<u32>>,
}

#[derive(Subcommand)]
pub enum QCmd {
    /// Exact survival probability by full labeling enumeration.
    Exact {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Endpoint pattern: disjoint, shared-one, shared-one-a,
        /// shared-one-b, or parallel.
        #[arg(long, default_value = "disjoint")]
        pattern: String,
    },
    /// Closed-form value of a named bound case at a given k.
    Formula {
        /// Case name, e.g. seven-label, triple-design, odd-loops,
        /// design(9,3), pair-scheme, lower, bipartite.
        #[arg(long)]
        case: String,
        #[arg(long)]
        k: u32,
    },
    /// Audit the disjoint-pattern enumeration against a family's
    /// closed-form counting cases.
    Cases {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Family: seven-label, design, odd-loops, or triangle-matching.
        #[arg(long)]
        family: String,
    },
}

#[derive(Args)]
pub struct TableArgs {
    /// First k (inclusive, ≥ 2).
    #[arg(long)]
    pub from: u32,
    /// Last k (inclusive, ≤ 50).
    #[arg(long)]
    pub to: u32,
}

#[derive(Subcommand)]
pub enum DrawCmd {
    /// Generate a built-in drawing and write it as text.
    Gen {
        #[command(flatten)]
        drawing: DrawingArgs,
    },
    /// Count the crossings of a drawing file, split by endpoint pattern.
    Count {
        /// Drawing file (rectilinear or abstract; detected from content).
        file: PathBuf,
    },
}

#[derive(Subcommand)]
pub enum SplitCmd {
    /// One seeded split: plane assignment, types, surviving crossings, and
    /// (for rectilinear inputs) a certified per-plane layout.
    Run {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        drawing: DrawingArgs,
        /// Write one straight-line drawing per plane into this directory.
        #[arg(long, value_name = "DIR")]
        layout_dir: Option<PathBuf>,
    },
    /// Monte Carlo: repeated splits under derived seeds, with exact
    /// expectation for comparison.
    Mc {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        drawing: DrawingArgs,
        /// Number of trials (≥ 1).
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Keep the best of N seeded splits (fewest surviving crossings).
    Best {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        drawing: DrawingArgs,
        /// Number of trials (≥ 1).
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
}

#[derive(Args)]
pub struct PipelineArgs {
    /// Flat key=value config file; see `kplanar pipeline --help`.
    ///
    /// Keys: scheme.case, scheme.k, scheme.points, scheme.block,
    /// scheme.design, scheme.file, drawing.kind (convex|two-line|file),
    /// drawing.n, drawing.m, drawing.file, trials, seed, budget.
    pub config: PathBuf,
}

/// Command failure with the exit-code contract: 2 validation failure,
/// 3 infeasible search, 4 parse error.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Infeasible(String),
    Parse(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Parse(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation failure",
            CliError::Infeasible(_) => "infeasible search",
            CliError::Parse(_) => "parse error",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Infeasible(m) | CliError::Parse(m) => m,
        }
    }

    /// Prefix the message with a pipeline stage name.
    pub fn at_stage(self, stage: &str) -> CliError {
        let msg = format!("stage {stage}: {}", self.message());
        match self {
            CliError::Validation(_) => CliError::Validation(msg),
            CliError::Infeasible(_) => CliError::Infeasible(msg),
            CliError::Parse(_) => CliError::Parse(msg),
        }
    }
}

impl From<kplanar::ParseError> for CliError {
    fn from(e: kplanar::ParseError) -> CliError {
        CliError::Parse(e.to_string())
    }
}

impl From<kplanar::drawing::DrawingError> for CliError {
    fn from(e: kplanar::drawing::DrawingError) -> CliError {
        match e {
            kplanar::drawing::DrawingError::Parse(p) => CliError::Parse(p.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<kplanar::schemes::SchemeError> for CliError {
    fn from(e: kplanar::schemes::SchemeError) -> CliError {
        CliError::Validation(e.to_string())
    }
}

impl From<kplanar::designs::DesignError> for CliError {
    fn from(e: kplanar::designs::DesignError) -> CliError {
        CliError::Validation(e.to_string())
    }
}

impl From<kplanar::probability::ProbabilityError> for CliError {
    fn from(e: kplanar::probability::ProbabilityError) -> CliError {
        CliError::Validation(e.to_string())
    }
}

impl From<kplanar::splitter::SplitError> for CliError {
    fn from(e: kplanar::splitter::SplitError) -> CliError {
        CliError::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if format == Format::Json {
                let obj = serde_json::json!({
                    "error": err.message(),
                    "kind": err.kind(),
                    "exit": err.exit_code(),
                });
                eprintln!("{obj}");
            } else {
                eprintln!("error: {}", err.message());
            }
            ExitCode::from(err.exit_code())
        }
    }
}
