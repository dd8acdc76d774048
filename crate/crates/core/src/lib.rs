//! Local Sherali–Adams / degree-2 SOS refutation certificates for max-cut,
//! 2-XOR and Boolean CSPs on spectrally expanding graphs.

pub mod bench;
pub mod certifier;
pub mod csp;
pub mod error;
pub mod feaspoint;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod spider;
pub mod tol;

pub use error::{Error, Result};
pub use tol::Tolerances;
