//! `posdef-lab`: evaluate, test and search the kernels `(1-|x|)/(1-|x|^r)`.
//!
//! Exit status: 0 when every expectation holds, 1 when a scientific
//! expectation fails, 2 on usage, configuration or I/O errors.

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

use posdef_core::search::DEFAULT_SEED;

#[derive(Parser, Debug, Serialize)]
#[command(name = "posdef-lab", version, about = "Positivity certification and falsification for (1-|x|)/(1-|x|^r)")]
pub struct Cli {
    /// Seed for every randomized component.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Tabulate f, g = 1/f, f' and f'' on a grid.
    Eval(EvalArgs),
    /// Exact sign analysis of the convexity and log-convexity numerators.
    PolyAnalyze(PolyArgs),
    /// Build a kernel matrix on a point configuration and test it.
    MatrixTest(MatrixArgs),
    /// Run one function-level probe.
    Probe(ProbeArgs),
    /// Replay the fixed suite of claims and print a PASS/FAIL table.
    ReproducePaper(ReproduceArgs),
    /// Run a search campaign from a JSON plan.
    Search(SearchArgs),
    /// Re-verify a records file or a witness file.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
pub struct EvalArgs {
    /// Exponent, decimal or p/q.
    #[arg(long)]
    pub r: String,
    /// Comma-separated points (default: 0, 0.5, ..., 4).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Vec<f64>,
    /// Half-width of the band around t = 1 evaluated by series.
    #[arg(long, default_value_t = posdef_core::kernel::DEFAULT_BAND)]
    pub band: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PolyArgs {
    /// Exact exponent p/q (decimals are rejected).
    #[arg(long)]
    pub r: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum MatrixTestKind {
    Psd,
    Cnd,
    Infdiv,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorArg {
    Gaussian,
    Lattice,
    Line,
    Simplex,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DirectionArg {
    F,
    G,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Certified,
    Violated,
}

#[derive(Args, Debug, Serialize)]
pub struct MatrixArgs {
    #[arg(long)]
    pub r: String,
    /// Kernel f or its reciprocal g (cnd tests default to g).
    #[arg(long, value_enum)]
    pub direction: Option<DirectionArg>,
    #[arg(long, value_enum, default_value_t = MatrixTestKind::Psd)]
    pub test: MatrixTestKind,
    #[arg(long, value_enum, default_value_t = GeneratorArg::Gaussian)]
    pub generator: GeneratorArg,
    #[arg(long, default_value_t = 20)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Hadamard exponents for `--test infdiv`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0])]
    pub alphas: Vec<f64>,
    /// Absolute eigenvalue tolerance (default 1e-9 * m * max|a|).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Exit with status 1 unless the verdict matches.
    #[arg(long, value_enum)]
    pub expect: Option<Expectation>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ProbeArgs {
    #[command(subcommand)]
    pub kind: ProbeKind,
    /// Exit with status 1 unless the verdict matches.
    #[arg(long, value_enum, global = true)]
    pub expect: Option<ProbeExpectation>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ProbeExpectation {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum CmTarget {
    /// h(s) = f(sqrt s)
    H,
    F,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    /// Complete monotonicity: Hankel matrix and signed finite differences.
    Cm {
        #[arg(long)]
        r: String,
        #[arg(long, value_enum, default_value_t = CmTarget::H)]
        target: CmTarget,
        /// Hankel points (positive, distinct).
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.15, 0.4, 0.8, 1.5, 3.0])]
        points: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        max_order: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Bernstein property of g = 1/f.
    Bernstein {
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 5)]
        max_order: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Upper half-plane sampling of (1 - z^q) / (1 - z^p).
    Pick {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = posdef_core::probes::PICK_TOLERANCE)]
        tol: f64,
    },
    /// Midpoint log-convexity of h(s) = f(sqrt s) on pairs x:y.
    Logconvex {
        #[arg(long)]
        r: String,
        #[arg(long, value_delimiter = ',', default_values_t = ["0.36:0.64".to_string()])]
        pairs: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Polya criterion hypotheses for f on [0, 50].
    Polya {
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Quadratic-growth obstruction for g (PASS = obstruction present).
    Growth {
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 1e6)]
        x_max: f64,
    },
    /// Integral representation of (1 - t^q) / (1 - t^p).
    Quadrature {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 32)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// f_4 against 1/((1+t)(1+t^2)) on [0, 100].
    Factor4 {
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Damped radial Fourier transform of f on R^n.
    Bochner {
        #[arg(long)]
        r: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0])]
        freqs: Vec<f64>,
        #[arg(long, default_value_t = 1e-3)]
        damping: f64,
    },
}

#[derive(Args, Debug, Serialize)]
pub struct ReproduceArgs {
    /// Comma-separated claim ids or id prefixes.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// Absolute tolerance on the r = 9 log-convexity gap.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Also write the rows with details as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// List the claim ids and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct SearchArgs {
    /// Campaign plan (JSON).
    #[arg(long)]
    pub plan: PathBuf,
    /// Directory for records.jsonl, summary.csv, evidence.json and witnesses.
    #[arg(long, default_value = "search-out")]
    pub out_dir: PathBuf,
    /// Most witness files to write.
    #[arg(long, default_value_t = 50)]
    pub max_witnesses: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    /// JSON-lines records file written by `search`.
    #[arg(long, conflicts_with = "witness", required_unless_present = "witness")]
    pub records: Option<PathBuf>,
    /// Witness file written by `search` or `matrix-test`.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

/// Result of a command that ran to completion.
pub enum Outcome {
    Met,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(Outcome::Met) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
