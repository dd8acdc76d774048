use super::SignedGraph;
use crate::error::{Error, Result};
use crate::linalg::{asymmetry, max_abs_entry, power_radius, sym_eigenvalues, symmetrize, Matrix, DENSE_EIGEN_CAP};
use crate::tol::Tolerances;

/// Dense walk operators of a graph.
///
/// `j` is the stationary projector `J_uv = π(v)`, so `kprime = k - j`
/// annihilates constants and `(K - J)^n = K^n - J`.
#[derive(Debug, Clone)]
pub struct WalkOperator {
    pub k: Matrix,
    pub xi: Matrix,
    pub kbar: Matrix,
    pub j: Matrix,
    pub kprime: Matrix,
    pub pi: Vec<f64>,
}

/// Which operator a matrix-free routine should act with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkKind {
    /// `K`.
    Plain,
    /// `K̄ = Ξ∘K`.
    Signed,
    /// `K' = K - J`.
    Centered,
}

impl WalkOperator {
    pub fn new(g: &SignedGraph) -> Result<Self> {
        let n = g.n();
        if n > DENSE_EIGEN_CAP {
            return Err(Error::TooLargeForDense { order: n, cap: DENSE_EIGEN_CAP });
        }
        let mut k = Matrix::zeros(n, n);
        let mut xi = Matrix::zeros(n, n);
        for u in 0..n {
            let d = g.degree(u) as f64;
            for a in g.neighbors(u) {
                k[(u, a.to)] = a.multiplicity as f64 / d;
                xi[(u, a.to)] = a.sign as f64;
            }
        }
        let kbar = k.component_mul(&xi);
        let pi = g.pi().to_vec();
        let j = Matrix::from_fn(n, n, |_, v| pi[v]);
        let kprime = &k - &j;
        Ok(Self { k, xi, kbar, j, kprime, pi })
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn get(&self, kind: WalkKind) -> &Matrix {
        match kind {
            WalkKind::Plain => &self.k,
            WalkKind::Signed => &self.kbar,
            WalkKind::Centered => &self.kprime,
        }
    }

    /// `Π·M`, the Gram form of `M` under `⟨·,·⟩_π`.
    pub fn pi_weighted(&self, m: &Matrix) -> Matrix {
        let mut out = m.clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row *= self.pi[i];
        }
        out
    }

    /// `⟨f, g⟩_π`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.pi.iter().zip(f).zip(g).map(|((p, a), b)| p * a * b).sum()
    }

    /// `⟨f, M g⟩_π`.
    pub fn form(&self, m: &Matrix, f: &[f64], g: &[f64]) -> f64 {
        let mg = m * crate::linalg::Vector::from_column_slice(g);
        self.inner(f, mg.as_slice())
    }

    /// `ρ` of one of the stored operators.
    pub fn radius(&self, kind: WalkKind) -> Result<f64> {
        spectral_radius(self.get(kind), &self.pi)
    }

    /// Eigenvalues of `K` (real, since `K` is reversible), ascending.
    pub fn eigenvalues(&self, kind: WalkKind) -> Vec<f64> {
        sym_eigenvalues(&similar(self.get(kind), &self.pi))
    }
}

/// `Π^{1/2} M Π^{-1/2}`, symmetric when `M` is self-adjoint under `π`.
fn similar(m: &Matrix, pi: &[f64]) -> Matrix {
    let n = m.nrows();
    let s: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    symmetrize(&Matrix::from_fn(n, n, |i, j| s[i] * m[(i, j)] / s[j]))
}

pub fn spectral_radius(m: &Matrix, pi: &[f64]) -> Result<f64> {
    spectral_radius_with(m, pi, &Tolerances::default())
}

/// Maximum `|λ|` of an operator self-adjoint under `⟨·,·⟩_π`.
pub fn spectral_radius_with(m: &Matrix, pi: &[f64], tol: &Tolerances) -> Result<f64> {
    let n = m.nrows();
    if m.ncols() != n || pi.len() != n {
        return Err(Error::InvalidParameter(format!(
            "operator is {}x{} but distribution has {} entries",
            n,
            m.ncols(),
            pi.len()
        )));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let weighted = Matrix::from_fn(n, n, |i, j| pi[i] * m[(i, j)]);
    let skew = asymmetry(&weighted);
    if skew > tol.abs + tol.rel * max_abs_entry(&weighted) {
        return Err(Error::NotSelfAdjoint(skew));
    }
    let s = similar(m, pi);
    if n <= DENSE_EIGEN_CAP {
        return Ok(sym_eigenvalues(&s).into_iter().fold(0.0, |a, x| a.max(x.abs())));
    }
    Ok(power_radius(
        n,
        |x, y| {
            let v = &s * crate::linalg::Vector::from_column_slice(x);
            y.copy_from_slice(v.as_slice());
        },
        None,
        1e-12,
        100_000,
    ))
}

impl SignedGraph {
    /// Matrix-free `ρ(K̄)` or `ρ(K')` by power iteration; for graphs too
    /// large for [`WalkOperator`].
    pub fn spectral_radius_sparse(&self, kind: WalkKind, tol: f64, max_iter: usize) -> f64 {
        let n = self.n();
        let sqrt_pi: Vec<f64> = self.pi().iter().map(|p| p.sqrt()).collect();
        let signed = kind == WalkKind::Signed;
        let deflate = if kind == WalkKind::Centered { Some(sqrt_pi.as_slice()) } else { None };
        let mut scratch = vec![0.0; n];
        let scratch_cell = std::cell::RefCell::new(&mut scratch);
        power_radius(
            n,
            |x, y| {
                let mut buf = scratch_cell.borrow_mut();
                for i in 0..n {
                    buf[i] = x[i] / sqrt_pi[i];
                }
                self.apply_walk(&buf, y, signed);
                for i in 0..n {
                    y[i] *= sqrt_pi[i];
                }
            },
            deflate,
            tol,
            max_iter,
        )
    }
}
