//! Square-completion bound `E_u Σ_v M_uv X_u X_v ≤ γ E_u X_u²`.

use crate::graph::spectral_radius;
use crate::linalg::{spectral_norm, symmetrize, Matrix};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct WackTerm {
    pub m: Matrix,
    pub pi: Vec<f64>,
    pub pi_star: f64,
    pub norm: f64,
    /// `ρ(M)` when `M` is self-adjoint under `π`.
    pub radius: Option<f64>,
    /// `π_*^{-1/2}‖M‖₂`.
    pub gamma: f64,
    /// `π_*^{-1/2}ρ(M)`, valid for self-adjoint `M`.
    pub gamma_pi: Option<f64>,
    /// `Σ_v M_uv²` per row.
    pub row_norm2: Vec<f64>,
    /// `Σ_v M_uv² / π(v)` per row.
    pub row_weighted: Vec<f64>,
}

/// Result of expanding the per-pair squares at a given `γ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WackDecomposition {
    pub gamma: f64,
    /// `max |γΠ − sym(ΠM) − SOS − diag(slack)|`.
    pub residual: f64,
    pub min_slack: f64,
    pub pass: bool,
}

pub fn wack_bound(m: &Matrix, pi: &[f64]) -> WackTerm {
    let n = m.nrows();
    let pi_star = pi.iter().copied().fold(f64::INFINITY, f64::min);
    let norm = spectral_norm(m);
    let radius = spectral_radius(m, pi).ok();
    let scale = pi_star.powf(-0.5);
    let row_norm2 = (0..n).map(|u| (0..n).map(|v| m[(u, v)].powi(2)).sum()).collect();
    let row_weighted = (0..n).map(|u| (0..n).map(|v| m[(u, v)].powi(2) / pi[v]).sum()).collect();
    WackTerm {
        m: m.clone(),
        pi: pi.to_vec(),
        pi_star,
        norm,
        radius,
        gamma: scale * norm,
        gamma_pi: radius.map(|r| scale * r),
        row_norm2,
        row_weighted,
    }
}

impl WackTerm {
    /// `(M_uv²/(2γπ(v)), γπ(v)/2)`, the squared coefficients of
    /// `(a X_u − b X_v)²` with `2ab = M_uv`.
    pub fn coefficients(&self, gamma: f64, u: usize, v: usize) -> (f64, f64) {
        if gamma == 0.0 {
            return (0.0, 0.0);
        }
        let muv = self.m[(u, v)];
        (muv * muv / (2.0 * gamma * self.pi[v]), gamma * self.pi[v] / 2.0)
    }

    /// `Σ_v M_uv² ≤ ‖M‖₂²` for every row.
    pub fn row_condition_norm(&self) -> f64 {
        self.row_norm2.iter().map(|r| r - self.norm * self.norm).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Worst `Σ_v M_uv²/π(v) − γ²` over rows.
    pub fn row_condition(&self, gamma: f64) -> f64 {
        self.row_weighted.iter().map(|r| r - gamma * gamma).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Expands `Σ_u π(u) Σ_v (a_uv X_u − b_uv X_v)²` as a matrix and checks
    /// `γΠ − sym(ΠM)` equals it plus a nonnegative diagonal.
    pub fn decompose(&self, gamma: f64, tol: f64) -> WackDecomposition {
        let n = self.m.nrows();
        let mut sos = Matrix::zeros(n, n);
        for u in 0..n {
            let w = self.pi[u];
            for v in 0..n {
                let (a2, b2) = self.coefficients(gamma, u, v);
                let a = a2.sqrt() * self.m[(u, v)].signum();
                let b = b2.sqrt();
                // (a e_u − b e_v)(a e_u − b e_v)ᵀ
                sos[(u, u)] += w * a * a;
                sos[(v, v)] += w * b * b;
                sos[(u, v)] -= w * a * b;
                sos[(v, u)] -= w * a * b;
            }
        }
        let mut lhs = symmetrize(&Matrix::from_fn(n, n, |u, v| self.pi[u] * self.m[(u, v)])) * -1.0;
        for u in 0..n {
            lhs[(u, u)] += gamma * self.pi[u];
        }
        let diff = &lhs - &sos;
        let slack: Vec<f64> = (0..n).map(|u| diff[(u, u)]).collect();
        let mut residual: f64 = 0.0;
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    residual = residual.max(diff[(u, v)].abs());
                }
            }
        }
        let min_slack = slack.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = gamma.max(1.0);
        WackDecomposition {
            gamma,
            residual,
            min_slack,
            pass: residual <= tol * scale && min_slack >= -tol * scale,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{SignedGraph, WalkOperator};
    use crate::linalg::mat_pow;

    #[test]
    fn identity_gives_sqrt_n() {
        let w = wack_bound(&Matrix::identity(9, 9), &[1.0 / 9.0; 9]);
        assert!((w.gamma - 3.0).abs() < 1e-12);
        assert!(w.decompose(w.gamma, 1e-12).pass);
    }

    #[test]
    fn zero_matrix_is_trivial() {
        let w = wack_bound(&Matrix::zeros(3, 3), &[1.0 / 3.0; 3]);
        assert_eq!(w.gamma, 0.0);
        assert_eq!(w.coefficients(0.0, 0, 1), (0.0, 0.0));
        assert!(w.decompose(0.0, 1e-12).pass);
    }

    #[test]
    fn four_cycle_alternating() {
        let g = SignedGraph::new(4, [(0, 1, 1, 1), (1, 2, 1, -1), (2, 3, 1, 1), (3, 0, 1, -1)]).unwrap();
        let op = WalkOperator::new(&g).unwrap();
        let rho = op.radius(crate::graph::WalkKind::Signed).unwrap();
        let w = wack_bound(&mat_pow(&op.kbar, 2), &op.pi);
        assert!((w.gamma_pi.unwrap() - 2.0 * rho * rho).abs() < 1e-12);
        assert!((w.gamma - 2.0 * w.norm).abs() < 1e-12);
        assert!(w.row_condition_norm() <= 1e-12);
        for gamma in [w.gamma, w.gamma_pi.unwrap()] {
            assert!(w.row_condition(gamma) <= 1e-12);
            assert!(w.decompose(gamma, 1e-12).pass);
        }
    }

    #[test]
    fn too_small_gamma_leaves_negative_slack() {
        let w = wack_bound(&Matrix::identity(4, 4), &[0.25; 4]);
        assert!(!w.decompose(0.5 * w.gamma, 1e-12).pass);
    }
}
