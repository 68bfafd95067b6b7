use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kns::io::MatrixFormat;
use kns::ProjectionSense;

mod commands;

#[derive(Parser)]
#[command(name = "kns", version, about = "Section-space outlier detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a data file and print the ranked table.
    Score(ScoreArgs),
    /// Generate a labelled synthetic dataset.
    Synth(SynthArgs),
    /// Run detectors on synthetic replicas and write precision/recall reports.
    Bench(BenchArgs),
    /// Evaluate a score table against a labels file.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoName {
    Kns,
    Psd,
    Lof,
    Rpgs,
}

impl AlgoName {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgoName::Kns => "kns",
            AlgoName::Psd => "psd",
            AlgoName::Lof => "lof",
            AlgoName::Rpgs => "rpgs",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Delimited,
    Arcene,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Delimited => MatrixFormat::Delimited,
            FormatArg::Arcene => MatrixFormat::Arcene,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SenseArg {
    Inverted,
    Literal,
}

impl From<SenseArg> for ProjectionSense {
    fn from(s: SenseArg) -> Self {
        match s {
            SenseArg::Inverted => ProjectionSense::Inverted,
            SenseArg::Literal => ProjectionSense::Literal,
        }
    }
}

/// Detector parameters. Unset values come from `--preset`, then defaults.
#[derive(Args, Clone, Debug, Default)]
pub struct ParamArgs {
    /// Neighbours per projection (k-NS).
    #[arg(long)]
    pub k: Option<usize>,
    /// Sections per dimension (k-NS, PSD, RPGS).
    #[arg(long)]
    pub scn: Option<u32>,
    /// Random projection passes.
    #[arg(long)]
    pub alpha: Option<usize>,
    /// Cluster size parameter (PSD).
    #[arg(long)]
    pub dst: Option<usize>,
    /// Neighbourhood size (LOF).
    #[arg(long)]
    pub knn: Option<usize>,
    /// How k-NS projection ratios enter the score.
    #[arg(long, value_enum)]
    pub sense: Option<SenseArg>,
    /// Benchmark row preset, `row1`..`row8`.
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Args)]
pub struct ScoreArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "kns")]
    pub algo: AlgoName,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Rows printed and flagged in the table.
    #[arg(long, default_value_t = 20)]
    pub top: usize,
    /// `point_id,label` file; prints precision/recall at the top cutoff.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "delimited")]
    pub format: FormatArg,
    /// Directory for `scores.csv` and `config.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Shape from a table row preset, `row1`..`row8`.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Args)]
pub struct BenchArgs {
    /// `paper-table1` for the full sweep, or a single `rowN`.
    #[arg(long = "preset", default_value = "paper-table1")]
    pub dataset: String,
    /// Seeds as `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "1..5")]
    pub seeds: String,
    /// Algorithms to run; defaults to k-NS, PSD and LOF.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub algo: Vec<AlgoName>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub scn: Option<u32>,
    #[arg(long)]
    pub alpha: Option<usize>,
    #[arg(long)]
    pub dst: Option<usize>,
    #[arg(long)]
    pub knn: Option<usize>,
    #[arg(long, value_enum)]
    pub sense: Option<SenseArg>,
    /// Include the 10000-dimension row in the sweep.
    #[arg(long)]
    pub include_xl: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; 1 keeps CPU timings comparable.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Re-run from the `config` block of an earlier `report.json`.
    #[arg(long, conflicts_with_all = ["dataset", "seeds", "algo"])]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Score table written by `kns score --out`.
    pub scores: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// Writes the precision/recall table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(e: &kns::Error) -> u8 {
    match e {
        kns::Error::Parameter(_) => 2,
        kns::Error::InvalidData(_) | kns::Error::Io(_) => 3,
        kns::Error::Contract(_) => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Score(a) => commands::score(a),
        Command::Synth(a) => commands::synth(a),
        Command::Bench(a) => commands::bench(a),
        Command::Eval(a) => commands::eval(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
