//! Spider-based local SOS certificates for 2-XOR and max-cut.
//!
//! A certificate is symbolic: spider parameters, the inner products
//! `⟨Ψ, A^(d)⟩`, the lemma constant for `M = K̄^{2ℓ}` (or `(K − J)^{2ℓ}`),
//! and the scalar chain to `β`. [`verify_certificate`] re-derives every piece
//! from the graph.

mod verify;
mod wack;

pub use verify::{aggregation_identity, verify_certificate, verify_certificate_with, Check, VerificationReport, VerifyMode};
pub use wack::{wack_bound, WackDecomposition, WackTerm};

use crate::error::{Error, Result};
use crate::graph::{SignedGraph, WalkKind, WalkOperator};
use crate::linalg::{mat_pow, DENSE_EIGEN_CAP};
use crate::spider::{build_psi, build_spider, canonical_alpha, SpiderMatrix};
use crate::tol::Tolerances;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertKind {
    #[serde(alias = "2xor")]
    TwoXor,
    #[serde(alias = "maxcut")]
    MaxCut,
}

impl std::fmt::Display for CertKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CertKind::TwoXor => "2xor",
            CertKind::MaxCut => "maxcut",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub ell: usize,
    pub k: usize,
    /// `R = kℓ + 1`.
    pub r: usize,
}

impl Parameters {
    pub fn new(k: usize, ell: usize) -> Result<Self> {
        let r = k
            .checked_mul(ell)
            .and_then(|x| x.checked_add(1))
            .ok_or_else(|| Error::InvalidParameter("kℓ + 1 overflows".into()))?;
        Ok(Self { ell, k, r })
    }
}

/// How a certificate's spider is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamChoice {
    Explicit { k: usize, ell: usize },
    Epsilon(f64),
}

/// `β = k π_*^{-1/2} ρ^{2ℓ} / (2 k^{1/2ℓ}) + 2 / k^{1/2ℓ}`.
pub fn beta_paper(k: usize, ell: usize, pi_star: f64, rho: f64) -> f64 {
    let alpha = canonical_alpha(k, ell);
    k as f64 * pi_star.powf(-0.5) * rho.powi(2 * ell as i32) / (2.0 * alpha) + 2.0 / alpha
}

/// `(c₀ + ½(k − 1) π_*^{-1/2} ρ^{2ℓ}) / k^{1/2ℓ}`.
pub fn beta_sharp(c0: f64, k: usize, ell: usize, pi_star: f64, rho: f64) -> f64 {
    let alpha = canonical_alpha(k, ell);
    (c0 + 0.5 * (k as f64 - 1.0) * pi_star.powf(-0.5) * rho.powi(2 * ell as i32)) / alpha
}

fn three_pow(ell: usize) -> f64 {
    3f64.powi(ell as i32)
}

/// `ℓ = max(1, ⌈¼ log(ε²π_*) / log(ρ/ε)⌉)`, `k = ⌈ε^{-2ℓ}⌉`, `R = kℓ + 1`.
///
/// Requires `ρ < ε`. Rejects choices with `k < 3^ℓ` or `β > 5ε/2`.
pub fn select_parameters(epsilon: f64, pi_star: f64, rho: f64) -> Result<Parameters> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    if !(pi_star > 0.0 && pi_star <= 1.0) {
        return Err(Error::InvalidParameter(format!("π_* must lie in (0, 1], got {pi_star}")));
    }
    if !(rho >= 0.0) || rho >= epsilon {
        return Err(Error::SpectralPremise { rho, epsilon });
    }
    let ratio = 0.25 * (epsilon * epsilon * pi_star).ln() / (rho / epsilon).ln();
    let ell = (ratio.ceil().max(1.0)) as usize;
    let kf = epsilon.powi(-2 * ell as i32).ceil();
    if !(kf <= 1e15) {
        return Err(Error::InvalidParameter(format!("k = ε^(-2ℓ) = {kf:.3e} is too large (ℓ = {ell})")));
    }
    let k = kf as usize;
    if (k as f64) < three_pow(ell) {
        return Err(Error::InvalidParameter(format!(
            "selected k = {k} is below 3^ℓ = {} (ε = {epsilon} too large)",
            three_pow(ell)
        )));
    }
    let beta = beta_paper(k, ell, pi_star, rho);
    if beta > 2.5 * epsilon * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "selected (k, ℓ) = ({k}, {ell}) gives β = {beta:.6} above 5ε/2 = {:.6}",
            2.5 * epsilon
        )));
    }
    Parameters::new(k, ell)
}

/// Constants of the lemma applied to `M = K̄^{2ℓ}` (or `(K − J)^{2ℓ}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WackSummary {
    /// `π_*^{-1/2}‖M‖₂` (absent when `M` was not materialised).
    pub gamma_norm: Option<f64>,
    /// `π_*^{-1/2}ρ^{2ℓ}`, the constant entering `β`.
    pub gamma: f64,
    pub dense: bool,
}

/// One direction `±K̄` of a two-sided certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub sign: i8,
    pub rho: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertKind,
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    /// `kℓ + 1`.
    pub r: usize,
    /// Locality of the proof: `R` for 2-XOR, `2R` for max-cut.
    pub locality: usize,
    pub epsilon: Option<f64>,
    pub alpha: f64,
    pub c0: f64,
    pub spider_inner: Vec<f64>,
    pub rho: f64,
    pub pi_star: f64,
    pub beta_paper: f64,
    pub beta_sharp: f64,
    pub theta: Option<f64>,
    pub iota: Option<f64>,
    pub wack: WackSummary,
    pub directions: Vec<Direction>,
    /// `½ + β_paper/2`.
    pub bound_paper: f64,
    /// `½ + β_sharp/2`; the certified objective bound.
    pub bound_obj: f64,
    /// `β_sharp ≥ 1`: the bound says nothing beyond `OBJ ≤ 1`.
    pub vacuous: bool,
}

impl Certificate {
    pub fn beta(&self) -> f64 {
        self.beta_sharp
    }
}

/// Measured spectral data a certificate is built from.
struct Spectrum {
    rho: f64,
    pi_star: f64,
    wack: WackSummary,
}

fn measure(g: &SignedGraph, kind: CertKind, ell: usize) -> Result<Spectrum> {
    let walk_kind = match kind {
        CertKind::TwoXor => WalkKind::Signed,
        CertKind::MaxCut => WalkKind::Centered,
    };
    let pi_star = g.pi_star();
    if g.n() <= DENSE_EIGEN_CAP {
        let op = WalkOperator::new(g)?;
        let rho = op.radius(walk_kind)?;
        let m = mat_pow(op.get(walk_kind), 2 * ell as u32);
        let w = wack_bound(&m, &op.pi);
        Ok(Spectrum {
            rho,
            pi_star,
            wack: WackSummary { gamma_norm: Some(w.gamma), gamma: pi_star.powf(-0.5) * rho.powi(2 * ell as i32), dense: true },
        })
    } else {
        let rho = g.spectral_radius_sparse(walk_kind, 1e-12, 200_000);
        Ok(Spectrum {
            rho,
            pi_star,
            wack: WackSummary { gamma_norm: None, gamma: pi_star.powf(-0.5) * rho.powi(2 * ell as i32), dense: false },
        })
    }
}

/// Spectral radius of the walk operator a certificate of this kind uses.
pub fn walk_radius(g: &SignedGraph, kind: CertKind) -> Result<f64> {
    let walk_kind = match kind {
        CertKind::TwoXor => WalkKind::Signed,
        CertKind::MaxCut => WalkKind::Centered,
    };
    if g.n() <= DENSE_EIGEN_CAP {
        WalkOperator::new(g)?.radius(walk_kind)
    } else {
        Ok(g.spectral_radius_sparse(walk_kind, 1e-12, 200_000))
    }
}

/// Resolves the parameter choice against a graph's spectrum.
pub fn resolve_parameters(g: &SignedGraph, kind: CertKind, choice: ParamChoice) -> Result<Parameters> {
    match choice {
        ParamChoice::Explicit { k, ell } => Parameters::new(k, ell),
        ParamChoice::Epsilon(eps) => select_parameters(eps, g.pi_star(), walk_radius(g, kind)?),
    }
}

/// `ι = (c₀ + α + ½(k − 1)) / (½(k − 1))` and `θ = ι − √(ι² − 1)`.
pub fn theta_iota(c0: f64, alpha: f64, k: usize) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::InvalidParameter("max-cut certificates need k ≥ 2 (½(k − 1) = 0)".into()));
    }
    let half = 0.5 * (k as f64 - 1.0);
    let iota = (c0 + alpha + half) / half;
    let theta = iota - (iota * iota - 1.0).sqrt();
    Ok((theta, iota))
}

pub fn certify_2xor(g: &SignedGraph, choice: ParamChoice) -> Result<Certificate> {
    certify(g, CertKind::TwoXor, choice)
}

pub fn certify_maxcut(g: &SignedGraph, choice: ParamChoice) -> Result<Certificate> {
    certify(g, CertKind::MaxCut, choice)
}

pub fn certify(g: &SignedGraph, kind: CertKind, choice: ParamChoice) -> Result<Certificate> {
    let params = resolve_parameters(g, kind, choice)?;
    let (k, ell) = (params.k, params.ell);
    if k == 1 {
        return Err(Error::InvalidParameter("k = 1 leaves ½(k − 1) = 0; use k ≥ 3^ℓ".into()));
    }
    if (k as f64) < three_pow(ell) {
        return Err(Error::InvalidParameter(format!("k = {k} is below 3^ℓ = {}", three_pow(ell))));
    }
    let spec = measure(g, kind, ell)?;
    let sm = psi_for(k, ell)?;
    let alpha = sm.alpha;
    let c0 = sm.c0();
    let bp = beta_paper(k, ell, spec.pi_star, spec.rho);
    let bs = beta_sharp(c0, k, ell, spec.pi_star, spec.rho);
    let (theta, iota, locality, directions) = match kind {
        CertKind::TwoXor => {
            // The bound depends on ρ(±K̄) = ρ(K̄) only.
            let directions = [1i8, -1].iter().map(|&sign| Direction { sign, rho: spec.rho, beta: bs }).collect();
            (None, None, params.r, directions)
        }
        CertKind::MaxCut => {
            let (theta, iota) = theta_iota(c0, alpha, k)?;
            (Some(theta), Some(iota), 2 * params.r, vec![Direction { sign: -1, rho: spec.rho, beta: bs }])
        }
    };
    Ok(Certificate {
        kind,
        n: g.n(),
        k,
        ell,
        r: params.r,
        locality,
        epsilon: match choice {
            ParamChoice::Epsilon(e) => Some(e),
            ParamChoice::Explicit { .. } => None,
        },
        alpha,
        c0,
        spider_inner: sm.inner.clone(),
        rho: spec.rho,
        pi_star: spec.pi_star,
        beta_paper: bp,
        beta_sharp: bs,
        theta,
        iota,
        wack: spec.wack,
        directions,
        bound_paper: 0.5 + bp / 2.0,
        bound_obj: 0.5 + bs / 2.0,
        vacuous: bs >= 1.0,
    })
}

/// `Ψ` for the canonical `α = k^{1/2ℓ}`.
pub fn psi_for(k: usize, ell: usize) -> Result<SpiderMatrix> {
    build_psi(&build_spider(k, ell)?, canonical_alpha(k, ell))
}

/// Default tolerance used by the verifier's matrix identities.
pub fn default_tolerances() -> Tolerances {
    Tolerances::default()
}
