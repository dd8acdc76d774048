//! The `(k, ℓ)`-spider and its PSD weight matrix `Ψ`.
//!
//! Vertex ids: the root is `0`; depth `t ∈ 1..=ℓ` on leg `j ∈ 0..k` is
//! `1 + j·ℓ + (t − 1)`.
//!
//! `Ψ` is a combination of the level vectors `μ_t`, which have disjoint
//! supports, so it is stored as an `(ℓ+1)×(ℓ+1)` coefficient matrix `C` with
//! `Ψ = Σ_{s,t} C_st μ_s μ_tᵀ`. The dense `S×S` matrix is built from the
//! explicit vectors only when it fits.

use crate::error::{Error, Result};
use crate::graph::Tree;
use crate::linalg::{sym_eigenvalues, Matrix, Vector};
use crate::tol::Tolerances;
use serde::Serialize;

/// Spiders up to this size get a dense `Ψ` automatically.
pub const AUTO_DENSE_CAP: usize = 4096;
/// Hard cap for [`SpiderMatrix::materialize`].
pub const DENSE_PSI_CAP: usize = 20_001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Spider {
    pub k: usize,
    pub ell: usize,
}

pub fn build_spider(k: usize, ell: usize) -> Result<Spider> {
    if k == 0 || ell == 0 {
        return Err(Error::InvalidParameter(format!("spider needs k ≥ 1 and ℓ ≥ 1, got k = {k}, ℓ = {ell}")));
    }
    k.checked_mul(ell)
        .and_then(|s| s.checked_add(1))
        .ok_or_else(|| Error::InvalidParameter("spider size overflows".into()))?;
    Ok(Spider { k, ell })
}

impl Spider {
    pub fn size(&self) -> usize {
        self.k * self.ell + 1
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn diameter(&self) -> usize {
        if self.k == 1 {
            self.ell
        } else {
            2 * self.ell
        }
    }

    pub fn id(&self, leg: usize, depth: usize) -> usize {
        if depth == 0 {
            0
        } else {
            1 + leg * self.ell + (depth - 1)
        }
    }

    /// `(leg, depth)`; the root reports leg 0, depth 0.
    pub fn position(&self, v: usize) -> (usize, usize) {
        if v == 0 {
            (0, 0)
        } else {
            ((v - 1) / self.ell, (v - 1) % self.ell + 1)
        }
    }

    pub fn level_of(&self, v: usize) -> usize {
        self.position(v).1
    }

    pub fn dist(&self, a: usize, b: usize) -> usize {
        let (la, ta) = self.position(a);
        let (lb, tb) = self.position(b);
        if ta == 0 || tb == 0 || la == lb {
            ta.abs_diff(tb)
        } else {
            ta + tb
        }
    }

    /// Vertices at depth `t`.
    pub fn level(&self, t: usize) -> Vec<usize> {
        if t == 0 {
            vec![0]
        } else {
            (0..self.k).map(|j| self.id(j, t)).collect()
        }
    }

    pub fn tree(&self) -> Tree {
        let mut edges = Vec::with_capacity(self.size() - 1);
        for j in 0..self.k {
            for t in 1..=self.ell {
                edges.push((self.id(j, t - 1), self.id(j, t)));
            }
        }
        Tree::new(self.size(), &edges).expect("spider is a tree")
    }

    /// Dense distance-`d` adjacency matrix `A^(d)`.
    pub fn distance_matrix(&self, d: usize) -> Matrix {
        let s = self.size();
        Matrix::from_fn(s, s, |a, b| if self.dist(a, b) == d { 1.0 } else { 0.0 })
    }
}

/// `μ_sᵀ A^(d) μ_t` from the case analysis over leg pairs.
pub fn level_inner(k: usize, alpha: f64, s: usize, t: usize, d: usize) -> f64 {
    match (s, t) {
        (0, 0) => f64::from(d == 0),
        (0, t) | (t, 0) => {
            if d == t {
                alpha.powi(t as i32)
            } else {
                0.0
            }
        }
        (s, t) => {
            let kf = k as f64;
            let mut p = 0.0;
            if d == s.abs_diff(t) {
                p += 1.0 / kf;
            }
            if d == s + t {
                p += 1.0 - 1.0 / kf;
            }
            alpha.powi((s + t) as i32) * p
        }
    }
}

/// Table `T[d][s][t] = μ_sᵀ A^(d) μ_t` for `0 ≤ d ≤ 2ℓ`, `0 ≤ s, t ≤ ℓ`.
pub fn intermediate_inner_products(spider: &Spider, alpha: f64) -> Vec<Matrix> {
    let l = spider.ell;
    (0..=2 * l)
        .map(|d| Matrix::from_fn(l + 1, l + 1, |s, t| level_inner(spider.k, alpha, s, t, d)))
        .collect()
}

/// `Σ_{t=1}^{ℓ-1} α^{2t}`.
fn inner_geometric(ell: usize, alpha: f64) -> f64 {
    (1..ell).map(|t| alpha.powi(2 * t as i32)).sum()
}

/// `⟨Ψ, A^(d)⟩` for `d = 0..=2ℓ` as stated by the spider theorem.
pub fn theorem_inner_products(k: usize, ell: usize, alpha: f64) -> Vec<f64> {
    let kf = k as f64;
    let top = alpha.powi(2 * ell as i32);
    let mut out = vec![0.0; 2 * ell + 1];
    out[0] = 1.0 + top / (2.0 * kf) + (top - alpha * alpha) / ((kf - 1.0) * (alpha * alpha - 1.0));
    out[1] = alpha;
    out[2 * ell] += (1.0 - 1.0 / kf) / 2.0 * top;
    out
}

/// `⟨Ψ̃, A^(d)⟩` for `d = 0..=2ℓ` from the explicit expansion of `Ψ̃`.
pub fn tilde_inner_products(k: usize, ell: usize, alpha: f64) -> Vec<f64> {
    let kf = k as f64;
    let g = inner_geometric(ell, alpha);
    let top = alpha.powi(2 * ell as i32);
    let mut out = vec![0.0; 2 * ell + 1];
    out[0] = 2.0 + 2.0 / kf * g + top / kf;
    out[1] = 2.0 * alpha;
    out[2] += -2.0 / kf * g;
    out[2 * ell] += (1.0 - 1.0 / kf) * top;
    out
}

/// Spider coefficient `η = (α^{2ℓ-2} − 1) / ((k − 1)(α² − 1))`, summed as a
/// geometric series.
pub fn eta(k: usize, ell: usize, alpha: f64) -> f64 {
    (0..ell.saturating_sub(1)).map(|t| alpha.powi(2 * t as i32)).sum::<f64>() / (k as f64 - 1.0)
}

/// `α = k^{1/2ℓ}`.
pub fn canonical_alpha(k: usize, ell: usize) -> f64 {
    ((k as f64).ln() / (2.0 * ell as f64)).exp()
}

#[derive(Debug, Clone)]
pub struct SpiderMatrix {
    pub spider: Spider,
    pub alpha: f64,
    pub eta: f64,
    /// `Ψ = Σ coeff[s][t] μ_s μ_tᵀ`.
    pub coeff: Matrix,
    /// Same for `Ψ̃`.
    pub tilde_coeff: Matrix,
    /// `|μ_t|²`.
    pub mu_norm2: Vec<f64>,
    /// `⟨Ψ, A^(d)⟩`, `d = 0..=2ℓ`, from the level table.
    pub inner: Vec<f64>,
    /// Dense `Ψ` built from the explicit vectors, when materialised.
    pub psi: Option<Matrix>,
}

pub fn build_psi(spider: &Spider, alpha: f64) -> Result<SpiderMatrix> {
    let (k, l) = (spider.k, spider.ell);
    if k < 2 {
        return Err(Error::InvalidParameter("Ψ needs k ≥ 2 (η has a 1/(k−1) factor)".into()));
    }
    if !(alpha.is_finite() && alpha > 0.0) || alpha == 1.0 {
        return Err(Error::InvalidParameter(format!("α must be positive and ≠ 1, got {alpha}")));
    }
    let eta = eta(k, l, alpha);
    let mut tilde = Matrix::zeros(l + 1, l + 1);
    for (s, t) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        tilde[(s, t)] += 1.0;
    }
    for t in 0..l {
        tilde[(t, t)] += 1.0;
        if t + 2 <= l {
            tilde[(t + 2, t + 2)] += 1.0;
            tilde[(t, t + 2)] -= 1.0;
            tilde[(t + 2, t)] -= 1.0;
        }
    }
    let mut coeff = &tilde * 0.5;
    coeff[(1, 1)] += eta;

    let mu_norm2 = (0..=l).map(|t| if t == 0 { 1.0 } else { alpha.powi(2 * t as i32) / k as f64 }).collect();
    let table = intermediate_inner_products(spider, alpha);
    let inner = table.iter().map(|tab| coeff.component_mul(tab).sum()).collect();
    let mut sm = SpiderMatrix { spider: *spider, alpha, eta, coeff, tilde_coeff: tilde, mu_norm2, inner, psi: None };
    if spider.size() <= AUTO_DENSE_CAP {
        sm.materialize()?;
    }
    Ok(sm)
}

impl SpiderMatrix {
    pub fn k(&self) -> usize {
        self.spider.k
    }

    pub fn ell(&self) -> usize {
        self.spider.ell
    }

    pub fn c0(&self) -> f64 {
        self.inner[0]
    }

    /// `μ_t`: `α^t / k` on level `t` (`e_root` for `t = 0`).
    pub fn mu(&self, t: usize) -> Vector {
        let mut v = Vector::zeros(self.spider.size());
        if t == 0 {
            v[0] = 1.0;
        } else if t <= self.spider.ell {
            let w = self.alpha.powi(t as i32) / self.spider.k as f64;
            for i in self.spider.level(t) {
                v[i] = w;
            }
        }
        v
    }

    /// `χ = μ_0 + μ_1`.
    pub fn chi(&self) -> Vector {
        self.mu(0) + self.mu(1)
    }

    /// `ψ_t = μ_t − μ_{t+2}`, with `μ_{ℓ+1} = 0`.
    pub fn psi_vec(&self, t: usize) -> Vector {
        self.mu(t) - self.mu(t + 2)
    }

    /// Builds dense `Ψ = ½(χχᵀ + Σ ψ_tψ_tᵀ) + η μ_1μ_1ᵀ`.
    pub fn materialize(&mut self) -> Result<&Matrix> {
        let s = self.spider.size();
        if s > DENSE_PSI_CAP {
            return Err(Error::TooLargeForDense { order: s, cap: DENSE_PSI_CAP });
        }
        if self.psi.is_none() {
            let chi = self.chi();
            let mut tilde = &chi * chi.transpose();
            for t in 0..self.spider.ell {
                let p = self.psi_vec(t);
                tilde += &p * p.transpose();
            }
            let mu1 = self.mu(1);
            self.psi = Some(tilde * 0.5 + (&mu1 * mu1.transpose()) * self.eta);
        }
        Ok(self.psi.as_ref().expect("just built"))
    }

    /// Dense `Ψ` rebuilt from the coefficient matrix (independent of the
    /// explicit vector recipe).
    pub fn dense_from_coeff(&self) -> Result<Matrix> {
        let s = self.spider.size();
        if s > DENSE_PSI_CAP {
            return Err(Error::TooLargeForDense { order: s, cap: DENSE_PSI_CAP });
        }
        let w: Vec<f64> = (0..=self.spider.ell)
            .map(|t| if t == 0 { 1.0 } else { self.alpha.powi(t as i32) / self.spider.k as f64 })
            .collect();
        let sp = self.spider;
        Ok(Matrix::from_fn(s, s, |a, b| {
            let (ta, tb) = (sp.level_of(a), sp.level_of(b));
            self.coeff[(ta, tb)] * w[ta] * w[tb]
        }))
    }

    /// `Ψ_ab` without materialising.
    pub fn entry(&self, a: usize, b: usize) -> f64 {
        let sp = self.spider;
        let (ta, tb) = (sp.level_of(a), sp.level_of(b));
        let w = |t: usize| if t == 0 { 1.0 } else { self.alpha.powi(t as i32) / sp.k as f64 };
        self.coeff[(ta, tb)] * w(ta) * w(tb)
    }

    /// Nonzero spectrum of `Ψ` via `D^{1/2} C D^{1/2}`, `D = diag(|μ_t|²)`.
    /// `Ψ` has rank at most `ℓ+1`; its other eigenvalues are zero.
    pub fn compressed_eigenvalues(&self) -> Vec<f64> {
        let l = self.spider.ell;
        let d: Vec<f64> = self.mu_norm2.iter().map(|x| x.sqrt()).collect();
        let m = Matrix::from_fn(l + 1, l + 1, |s, t| d[s] * self.coeff[(s, t)] * d[t]);
        sym_eigenvalues(&m)
    }

    /// `⟨P, A^(d)⟩` for every `d` by one pass over all pairs.
    pub fn frobenius_by_distance(&self, p: &Matrix) -> Vec<f64> {
        let s = self.spider.size();
        let mut out = vec![0.0; self.spider.diameter().max(2 * self.spider.ell) + 1];
        for a in 0..s {
            for b in 0..s {
                out[self.spider.dist(a, b)] += p[(a, b)];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PsiReport {
    pub k: usize,
    pub ell: usize,
    pub alpha: f64,
    /// `⟨Ψ, A^(d)⟩` recomputed from scratch (dense Frobenius when available,
    /// else the level table).
    pub inner: Vec<f64>,
    pub dense: bool,
    pub expected: Vec<f64>,
    /// `|got − expected|` per distance.
    pub residuals: Vec<f64>,
    pub tilde_inner: Vec<f64>,
    pub tilde_expected: Vec<f64>,
    pub identities_pass: bool,
    pub tilde_pass: bool,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub structural_psd: bool,
    pub psd_pass: bool,
    /// `Some(true)` when `k ≥ 3^ℓ`, `α = k^{1/2ℓ}` and `3/2 ≤ c₀ ≤ 2`.
    pub corollary: Option<bool>,
    pub pass: bool,
}

fn identity_ok(got: f64, want: f64, d: usize, ell: usize, tol: &Tolerances) -> bool {
    if d >= 2 && d < 2 * ell {
        // Vanishing identities are absolute.
        (got - want).abs() <= tol.rel.max(1e-9)
    } else {
        tol.close(got, want)
    }
}

pub fn verify_psi(sm: &SpiderMatrix) -> PsiReport {
    verify_psi_with(sm, &Tolerances::default())
}

pub fn verify_psi_with(sm: &SpiderMatrix, tol: &Tolerances) -> PsiReport {
    let (k, l, alpha) = (sm.spider.k, sm.spider.ell, sm.alpha);
    let table = intermediate_inner_products(&sm.spider, alpha);
    let (inner, tilde_inner, eig, dense) = match &sm.psi {
        Some(psi) => {
            let mu1 = sm.mu(1);
            let tilde = (psi - (&mu1 * mu1.transpose()) * sm.eta) * 2.0;
            let ev = sym_eigenvalues(&crate::linalg::symmetrize(psi));
            (sm.frobenius_by_distance(psi), sm.frobenius_by_distance(&tilde), ev, true)
        }
        None => {
            let inner = table.iter().map(|t| sm.coeff.component_mul(t).sum()).collect();
            let tilde = table.iter().map(|t| sm.tilde_coeff.component_mul(t).sum()).collect();
            (inner, tilde, sm.compressed_eigenvalues(), false)
        }
    };
    let expected = theorem_inner_products(k, l, alpha);
    let tilde_expected = tilde_inner_products(k, l, alpha);
    let residuals: Vec<f64> = inner.iter().zip(&expected).map(|(a, b)| (a - b).abs()).collect();
    let identities_pass = (0..=2 * l).all(|d| identity_ok(inner[d], expected[d], d, l, tol));
    let tilde_pass = (0..=2 * l).all(|d| identity_ok(tilde_inner[d], tilde_expected[d], d, l, tol));
    let min_eigenvalue = eig.first().copied().unwrap_or(0.0).min(if dense { f64::INFINITY } else { 0.0 });
    let max_eigenvalue = eig.last().copied().unwrap_or(0.0).max(0.0);
    let structural_psd = sm.eta >= 0.0;
    let psd_pass = min_eigenvalue >= -1e-9 * max_eigenvalue.max(1.0);
    let corollary = if (k as f64) >= 3f64.powi(l as i32) && tol.close(alpha, canonical_alpha(k, l)) {
        let slack = tol.rel.max(1e-12) * 2.0;
        Some(inner[0] >= 1.5 - slack && inner[0] <= 2.0 + slack)
    } else {
        None
    };
    let pass = identities_pass && tilde_pass && psd_pass && corollary != Some(false);
    PsiReport {
        k,
        ell: l,
        alpha,
        inner,
        dense,
        expected,
        residuals,
        tilde_inner,
        tilde_expected,
        identities_pass,
        tilde_pass,
        min_eigenvalue,
        max_eigenvalue,
        structural_psd,
        psd_pass,
        corollary,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spider_shapes() {
        let s = build_spider(2, 1).unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.diameter(), 2);
        let s = build_spider(3, 2).unwrap();
        assert_eq!(s.size(), 7);
        assert_eq!(s.dist(s.id(0, 2), s.id(2, 2)), 4);
        assert_eq!(s.dist(s.id(1, 1), s.id(1, 2)), 1);
        assert!(build_spider(0, 1).is_err());
        assert!(build_spider(2, 0).is_err());
    }

    #[test]
    fn tree_distances_match_closed_form() {
        let s = build_spider(4, 3).unwrap();
        let t = s.tree();
        for a in 0..s.size() {
            let bfs = t.distances_from(a);
            for b in 0..s.size() {
                assert_eq!(bfs[b], s.dist(a, b));
            }
        }
    }

    #[test]
    fn distance_matrices_partition_ones() {
        let s = build_spider(3, 2).unwrap();
        let total: Matrix = (0..=4).map(|d| s.distance_matrix(d)).fold(Matrix::zeros(7, 7), |a, b| a + b);
        assert_eq!(total, Matrix::from_element(7, 7, 1.0));
        assert_eq!(s.distance_matrix(0), Matrix::identity(7, 7));
    }

    #[test]
    fn three_one_example() {
        let a = 3f64.sqrt();
        let sm = build_psi(&build_spider(3, 1).unwrap(), a).unwrap();
        let dense = sm.frobenius_by_distance(sm.psi.as_ref().unwrap());
        for (got, want) in [(dense[0], 1.5), (dense[1], a), (dense[2], 1.0)] {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(sm.eta, 0.0);
        assert!(verify_psi(&sm).pass);
    }

    #[test]
    fn nine_two_corollary_values() {
        let a = canonical_alpha(9, 2);
        let sm = build_psi(&build_spider(9, 2).unwrap(), a).unwrap();
        assert!((sm.inner[4] - 4.0).abs() < 1e-12);
        assert!((sm.inner[1] - 3f64.sqrt()).abs() < 1e-12);
        let r = verify_psi(&sm);
        assert!(r.pass && r.corollary == Some(true));
    }

    #[test]
    fn level_table_cases() {
        let a = 1.7;
        assert!((level_inner(4, a, 1, 1, 2) - 0.75 * a * a).abs() < 1e-15);
        assert!((level_inner(4, a, 0, 2, 2) - a * a).abs() < 1e-15);
        assert_eq!(level_inner(4, a, 1, 1, 1), 0.0);
    }

    #[test]
    fn level_table_matches_dense() {
        let sp = build_spider(3, 3).unwrap();
        let sm = build_psi(&sp, 1.3).unwrap();
        let table = intermediate_inner_products(&sp, 1.3);
        for d in 0..=6 {
            let ad = sp.distance_matrix(d);
            for s in 0..=3 {
                for t in 0..=3 {
                    let dense = (sm.mu(s).transpose() * &ad * sm.mu(t))[(0, 0)];
                    assert!((dense - table[d][(s, t)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn coefficient_form_matches_vector_recipe() {
        let sm = build_psi(&build_spider(5, 3).unwrap(), 0.8).unwrap();
        let diff = (sm.dense_from_coeff().unwrap() - sm.psi.as_ref().unwrap()).abs().max();
        assert!(diff < 1e-14);
        let ev = sym_eigenvalues(sm.psi.as_ref().unwrap());
        let compressed = sm.compressed_eigenvalues();
        assert!((ev.last().unwrap() - compressed.last().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn perturbation_is_detected() {
        let mut sm = build_psi(&build_spider(4, 2).unwrap(), canonical_alpha(4, 2)).unwrap();
        assert!(verify_psi(&sm).pass);
        sm.psi.as_mut().unwrap()[(0, 1)] += 1e-3;
        let r = verify_psi(&sm);
        assert!(!r.identities_pass && !r.pass);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sp = build_spider(1, 2).unwrap();
        assert!(build_psi(&sp, 2.0).is_err());
        let sp = build_spider(3, 2).unwrap();
        assert!(build_psi(&sp, 1.0).is_err());
        assert!(build_psi(&sp, -2.0).is_err());
    }

    #[test]
    fn huge_spider_uses_compressed_form() {
        let sp = build_spider(390_625, 2).unwrap();
        let sm = build_psi(&sp, 25.0).unwrap();
        assert!(sm.psi.is_none());
        let r = verify_psi(&sm);
        assert!(r.pass, "{r:?}");
        assert!((sm.c0() - 1.5016).abs() < 1e-4);
    }
}
