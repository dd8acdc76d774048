//! `spidercert`: generate instances, build and verify certificates, refute
//! CSPs, evaluate the feasible-point lower bound and run benchmarks.

mod commands;
mod selftest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "spidercert", version, about = "Spider-based Sherali–Adams certificates for max-cut, 2-XOR and CSPs")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Omit the metadata envelope (timestamps, timings) for byte-identical output.
    #[arg(long, global = true)]
    pub no_meta: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Master seed.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Tolerance override, `rel` or `rel,abs`.
    #[arg(long, env = "SPIDERCERT_TOL", global = true)]
    pub tol: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    Maxcut,
    #[value(name = "2xor")]
    TwoXor,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Gnp,
    Regular,
    Complete,
    Cycle,
    Xor,
    Csp,
}

#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Target ε; parameters come from the selection rule.
    #[arg(long, conflicts_with_all = ["k", "ell"])]
    pub epsilon: Option<f64>,
    /// Spider legs.
    #[arg(long, requires = "ell")]
    pub k: Option<usize>,
    /// Spider leg length.
    #[arg(long, requires = "k")]
    pub ell: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a graph or instance as JSON.
    Gen {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: usize,
        /// Average degree (gnp) or degree (regular).
        #[arg(long)]
        degree: Option<f64>,
        /// Retry the configuration model until the graph is simple.
        #[arg(long)]
        simple: bool,
        /// Arity (xor).
        #[arg(long)]
        arity: Option<usize>,
        /// Probability of each `±1` term (xor).
        #[arg(long)]
        p: Option<f64>,
        /// Expected clause count (csp).
        #[arg(long)]
        m: Option<f64>,
        /// Truth table bitstring, index bit a set meaning z_{a+1} = −1 (csp).
        #[arg(long)]
        predicate: Option<String>,
        /// Give every graph edge a uniform random sign.
        #[arg(long)]
        random_signs: bool,
    },
    /// Build a certificate for a graph.
    Certify {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        input: PathBuf,
    },
    /// Independently re-derive and check a certificate.
    VerifyCert {
        /// Graph the certificate is about.
        #[arg(long)]
        input: PathBuf,
        /// Certificate JSON (bare or inside a metadata envelope).
        #[arg(long)]
        cert: PathBuf,
        /// Monte Carlo samples; exhaustive enumeration when absent.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 8)]
        test_vectors: usize,
    },
    /// Refute a k-XOR instance through its 2-XOR reduction.
    RefuteXor {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Refute a predicate CSP through its Fourier decomposition.
    RefuteCsp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Feasible-point lower bound on the R-round Sherali–Adams value.
    Lowerbound {
        #[arg(long)]
        rounds: usize,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run an experiment grid and compare all bounds.
    Bench {
        /// Experiment config JSON; the flags below build one otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        model: Option<Model>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        degree: Option<f64>,
        #[arg(long, value_enum, default_value_t = KindArg::Maxcut)]
        kind: KindArg,
        #[command(flatten)]
        params: ParamArgs,
        /// Number of seeds, starting at `--seed`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 1)]
        lb_rounds: usize,
        #[arg(long, default_value_t = 20)]
        brute_cap: usize,
        #[arg(long)]
        random_signs: bool,
    },
    /// Check the spider matrix identities and PSD-ness for one (k, ℓ).
    SpiderCheck {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
        /// Defaults to k^(1/2ℓ).
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Exhaustive fixtures, f-properties and spider identity suites.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
