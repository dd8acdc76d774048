//! Generators, exact oracles, spectral baselines and the experiment harness.

mod brute;
mod eig;
mod experiment;
mod gen;

pub use brute::{brute_csp, brute_graph, brute_xor, Optimum, BRUTE_FORCE_CAP};
pub use eig::{eig_bounds, EigBounds};
pub use experiment::{run_experiment, run_one, to_csv, Experiment, ExperimentConfig, Generator, CSV_COLUMNS};
pub use gen::{gen_gnp, gen_regular, relabel, with_random_signs, RegularGraph, SIMPLE_RETRY_CAP};
