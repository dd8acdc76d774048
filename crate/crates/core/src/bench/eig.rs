use crate::error::{Error, Result};
use crate::graph::{SignedGraph, WalkKind, WalkOperator};
use crate::linalg::{sym_eigenvalues, Matrix, DENSE_EIGEN_CAP};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigBounds {
    /// `n λ_max(D + Ξ∘A) / (2 Σ deg)`; `(|V|/4|E|) λ_max(D − A)` for max-cut.
    pub laplacian: f64,
    /// `½ + ½ λ_max(K̄)`; `½ + ½ λ_max(−D^{-1}A)` for max-cut.
    pub walk: f64,
}

pub fn eig_bounds(g: &SignedGraph) -> Result<EigBounds> {
    let n = g.n();
    if n > DENSE_EIGEN_CAP {
        return Err(Error::TooLargeForDense { order: n, cap: DENSE_EIGEN_CAP });
    }
    let mut lap = Matrix::zeros(n, n);
    for v in 0..n {
        lap[(v, v)] = g.degree(v) as f64;
    }
    for e in g.edges() {
        let w = e.sign as f64 * e.multiplicity as f64;
        lap[(e.u, e.v)] += w;
        if e.u != e.v {
            lap[(e.v, e.u)] += w;
        }
    }
    let lmax = *sym_eigenvalues(&lap).last().expect("n ≥ 1");
    let laplacian = n as f64 * lmax / (2.0 * g.total_degree() as f64);
    let walk_max = *WalkOperator::new(g)?.eigenvalues(WalkKind::Signed).last().expect("n ≥ 1");
    Ok(EigBounds { laplacian, walk: 0.5 + 0.5 * walk_max })
}
