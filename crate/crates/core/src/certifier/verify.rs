use super::{certify, theta_iota, Certificate, CertKind, ParamChoice};
use crate::error::{Error, Result};
use crate::graph::{enumerate_tree_walks, SignedGraph, Tree, TreeWalkSampler, WalkKind, WalkOperator, DEFAULT_MAX_SUPPORT};
use crate::linalg::{mat_pow, max_abs_entry, sym_eigenvalues, symmetrize, Matrix, DENSE_EIGEN_CAP};
use crate::rng::{stream, tag};
use crate::spider::{build_psi, build_spider, canonical_alpha, verify_psi_with, SpiderMatrix};
use crate::tol::Tolerances;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the aggregation identity is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Every spider homomorphism, with exact probabilities.
    Exhaustive { max_support: u64 },
    /// Monte Carlo over stationary spider walks, tested on random `±1`
    /// vectors; deterministic under `seed` for any worker count.
    Sampled { samples: u64, seed: u64, test_vectors: usize },
}

impl VerifyMode {
    pub fn exhaustive() -> Self {
        VerifyMode::Exhaustive { max_support: DEFAULT_MAX_SUPPORT }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), residual, tolerance, pass: residual <= tolerance, note: None }
    }

    fn flag(name: &str, pass: bool, note: impl Into<String>) -> Self {
        Self { name: name.into(), residual: if pass { 0.0 } else { 1.0 }, tolerance: 0.0, pass, note: Some(note.into()) }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: CertKind,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn verify_certificate(cert: &Certificate, g: &SignedGraph, mode: VerifyMode) -> Result<VerificationReport> {
    verify_certificate_with(cert, g, mode, &Tolerances::default())
}

fn matrix_tol(tol: &Tolerances, scale: f64) -> f64 {
    1e-10f64.max(tol.abs) * scale.max(1.0)
}

/// `Σ_d c_d · sym(Π M^d)`.
fn aggregate_target(op: &WalkOperator, m: &Matrix, coeffs: &[f64]) -> Matrix {
    let n = op.n();
    let mut acc = Matrix::zeros(n, n);
    let mut power = Matrix::identity(n, n);
    for (d, &c) in coeffs.iter().enumerate() {
        if d > 0 {
            power = &power * m;
        }
        if c != 0.0 {
            acc += symmetrize(&op.pi_weighted(&power)) * c;
        }
    }
    acc
}

pub fn verify_certificate_with(
    cert: &Certificate,
    g: &SignedGraph,
    mode: VerifyMode,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let (k, ell) = (cert.k, cert.ell);
    let mut checks = Vec::new();

    // Recompute the certificate from the graph and compare the ledger.
    let fresh = certify(g, cert.kind, ParamChoice::Explicit { k, ell })?;
    let ledger = [
        (cert.rho, fresh.rho),
        (cert.c0, fresh.c0),
        (cert.pi_star, fresh.pi_star),
        (cert.beta_paper, fresh.beta_paper),
        (cert.beta_sharp, fresh.beta_sharp),
        (cert.bound_obj, fresh.bound_obj),
    ]
    .iter()
    .map(|&(a, b)| tol.scaled_residual(a, b))
    .fold(0.0, f64::max);
    checks.push(Check::new("ledger", ledger, 1.0).with_note("stored values vs recomputation, in tolerance units"));

    // (a) Ψ is PSD and satisfies the spider identities.
    let sm = build_psi(&build_spider(k, ell)?, canonical_alpha(k, ell))?;
    let report = verify_psi_with(&sm, tol);
    let scale = report.max_eigenvalue.max(1.0);
    checks.push(
        Check::new("psi_psd", (-report.min_eigenvalue).max(0.0), 1e-9 * scale)
            .with_note(format!("min eigenvalue {:.3e}", report.min_eigenvalue)),
    );
    checks.push(Check::flag(
        "psi_identities",
        report.identities_pass && report.tilde_pass && report.corollary != Some(false),
        format!("max residual {:.3e}", report.residuals.iter().copied().fold(0.0, f64::max)),
    ));

    let dense = g.n() <= DENSE_EIGEN_CAP;
    let op = if dense { Some(WalkOperator::new(g)?) } else { None };

    if cert.kind == CertKind::MaxCut {
        let (theta, iota) = (cert.theta.unwrap_or(f64::NAN), cert.iota.unwrap_or(f64::NAN));
        // Ψ̇ = ½ (v vᵀ) ⊗ Ψ with v = (θ^{-1/2}, −θ^{1/2}); its spectrum is
        // {0, ι} × spec(Ψ).
        let min_dot = (iota * report.min_eigenvalue).min(0.0);
        let mut c = Check::new("psi_dot_psd", -min_dot, 1e-9 * scale * iota.max(1.0));
        if sm.spider.size() <= 256 {
            let psi = sm.psi.as_ref().expect("small spiders are dense");
            let s = sm.spider.size();
            let mut dot = Matrix::zeros(2 * s, 2 * s);
            dot.view_mut((0, 0), (s, s)).copy_from(&(psi * (0.5 / theta)));
            dot.view_mut((0, s), (s, s)).copy_from(&(psi * -0.5));
            dot.view_mut((s, 0), (s, s)).copy_from(&(psi * -0.5));
            dot.view_mut((s, s), (s, s)).copy_from(&(psi * (0.5 * theta)));
            let ev = sym_eigenvalues(&dot);
            c.residual = c.residual.max(-ev[0]);
            c.pass = c.residual <= c.tolerance && theta > 0.0;
            c.note = Some(format!("dense min eigenvalue {:.3e}", ev[0]));
        }
        checks.push(c);
    }

    // (b) aggregation identity.
    let mode_name;
    let mut samples = None;
    match mode {
        VerifyMode::Exhaustive { max_support } => {
            mode_name = "exhaustive".to_string();
            let op = op.as_ref().ok_or(Error::TooLargeForDense { order: g.n(), cap: DENSE_EIGEN_CAP })?;
            checks.extend(aggregation_exhaustive(cert.kind, g, op, &sm, max_support)?);
        }
        VerifyMode::Sampled { samples: count, seed, test_vectors } => {
            mode_name = "sampled".to_string();
            samples = Some(count);
            checks.extend(aggregation_sampled(cert.kind, g, &sm, count, seed, test_vectors.max(1)));
        }
    }

    // (c) square-completion lemma for M = K̄^{2ℓ} or (K − J)^{2ℓ}.
    let rho_pow = cert.rho.powi(2 * ell as i32);
    let gamma = cert.pi_star.powf(-0.5) * rho_pow;
    let walk_kind = if cert.kind == CertKind::TwoXor { WalkKind::Signed } else { WalkKind::Centered };
    if let Some(op) = &op {
        let m = mat_pow(op.get(walk_kind), 2 * ell as u32);
        let w = super::wack_bound(&m, &op.pi);
        let radius = w.radius.unwrap_or(f64::NAN);
        checks.push(Check::new("wack_radius", (radius - rho_pow).abs(), 1e-9 * rho_pow.max(1e-300) + 1e-14));
        let row_tol = 1e-9 * w.norm.powi(2).max(1e-300);
        checks.push(Check::new("wack_row_norm", w.row_condition_norm().max(0.0), row_tol));
        checks.push(Check::new(
            "wack_row_weighted",
            w.row_condition(gamma).max(0.0),
            1e-9 * gamma.powi(2).max(1e-300),
        ));
        let dec = w.decompose(gamma, 1e-9);
        checks.push(
            Check::new("wack_decomposition", dec.residual.max((-dec.min_slack).max(0.0)), 1e-9 * gamma.max(1.0))
                .with_note(format!("γ = {:.6e}, norm-form γ = {:.6e}", gamma, w.gamma)),
        );
        let dec_norm = w.decompose(w.gamma, 1e-9);
        checks.push(Check::new(
            "wack_decomposition_norm",
            dec_norm.residual.max((-dec_norm.min_slack).max(0.0)),
            1e-9 * w.gamma.max(1.0),
        ));
    } else {
        checks.push(Check::flag("wack_radius", true, "matrix-free: lemma applied through ρ^{2ℓ}"));
    }

    // (d) scalar chain to β.
    let beta = (sm.c0() + 0.5 * (k as f64 - 1.0) * gamma) / sm.alpha;
    checks.push(Check::new("beta_chain", tol.scaled_residual(beta, cert.beta_sharp), 1.0));
    checks.push(Check::new("beta_paper_dominates", (cert.beta_sharp - cert.beta_paper).max(0.0), 1e-12));
    checks.push(Check::new("bound_obj", tol.scaled_residual(cert.bound_obj, 0.5 + cert.beta_sharp / 2.0), 1.0));
    if cert.kind == CertKind::TwoXor {
        let consistent = cert.directions.len() == 2
            && cert.directions.iter().any(|d| d.sign == 1)
            && cert.directions.iter().any(|d| d.sign == -1)
            && cert.directions.iter().all(|d| tol.close(d.beta, cert.beta_sharp));
        checks.push(Check::flag("two_sided", consistent, "±K̄ directions carry the same β"));
    }
    if let Some(op) = &op {
        let ev_kind = if cert.kind == CertKind::TwoXor { WalkKind::Signed } else { WalkKind::Plain };
        let ev = op.eigenvalues(ev_kind);
        let worst = match cert.kind {
            CertKind::TwoXor => ev.iter().fold(0.0f64, |a, x| a.max(x.abs())),
            CertKind::MaxCut => -ev[0],
        };
        checks.push(
            Check::new("spectrum_below_beta", (worst - cert.beta_sharp).max(0.0), 1e-9)
                .with_note(format!("spectral value {worst:.6e}")),
        );
    }

    // (e) max-cut bookkeeping.
    if cert.kind == CertKind::MaxCut {
        let (theta, iota) = theta_iota(sm.c0(), sm.alpha, k)?;
        let half = 0.5 * (k as f64 - 1.0);
        let total = sm.c0() + sm.alpha + half;
        let mut res = tol.scaled_residual(total, iota * half);
        res = res.max(tol.scaled_residual(iota, 0.5 * (1.0 / theta + theta)));
        if let (Some(t), Some(i)) = (cert.theta, cert.iota) {
            res = res.max(tol.scaled_residual(t, theta)).max(tol.scaled_residual(i, iota));
        }
        let mut c = Check::new("theta_iota", res, 1.0);
        if !(theta > 0.0 && theta <= 1.0) {
            c.pass = false;
        }
        checks.push(c);
        if let Some(op) = &op {
            let two_l = 2 * ell as u32;
            let lhs = op.pi_weighted(&(mat_pow(&op.k, two_l) - &op.j));
            let rhs = op.pi_weighted(&mat_pow(&op.kprime, two_l));
            checks.push(Check::new("centering_identity", (&lhs - &rhs).abs().max(), matrix_tol(tol, max_abs_entry(&lhs))));
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerificationReport { kind: cert.kind, mode: mode_name, samples, checks, pass })
}

/// Exhaustive check of `E[Σ_ij Ψ_ij σ_iσ_j e_φ(i) e_φ(j)ᵀ] = Σ_d ⟨Ψ, A^(d)⟩ sym(Π M^d)`
/// for any spider and `α`, independent of a certificate.
pub fn aggregation_identity(
    g: &SignedGraph,
    kind: CertKind,
    k: usize,
    ell: usize,
    alpha: f64,
    max_support: u64,
) -> Result<Vec<Check>> {
    let op = WalkOperator::new(g)?;
    let sm = build_psi(&build_spider(k, ell)?, alpha)?;
    aggregation_exhaustive(kind, g, &op, &sm, max_support)
}

fn aggregation_exhaustive(
    kind: CertKind,
    g: &SignedGraph,
    op: &WalkOperator,
    sm: &SpiderMatrix,
    max_support: u64,
) -> Result<Vec<Check>> {
    let n = g.n();
    let tree: Tree = sm.spider.tree();
    let s = sm.spider.size();
    let psi = match &sm.psi {
        Some(p) => p.clone(),
        None => return Err(Error::TooLargeForDense { order: s, cap: crate::spider::AUTO_DENSE_CAP }),
    };
    let signed = kind == CertKind::TwoXor;
    let mut q = Matrix::zeros(n, n);
    let mut marginals = Matrix::zeros(s, n);
    let mut total = 0.0;
    for sample in enumerate_tree_walks(g, &tree, sm.spider.root(), max_support)? {
        let p = sample.probability();
        total += p;
        for i in 0..s {
            marginals[(i, sample.phi[i])] += p;
            for j in 0..s {
                let sign = if signed { f64::from(sample.sigma[i] * sample.sigma[j]) } else { 1.0 };
                q[(sample.phi[i], sample.phi[j])] += p * psi[(i, j)] * sign;
            }
        }
    }
    let m = if signed { &op.kbar } else { &op.k };
    let target = aggregate_target(op, m, &sm.inner);
    let mut checks = vec![
        Check::new("walk_probability_mass", (total - 1.0).abs(), 1e-10),
        Check::new("aggregation", (&q - &target).abs().max(), matrix_tol(&Tolerances::default(), max_abs_entry(&target))),
    ];
    if !signed {
        // Independent walks: E[x₁ x₂ᵀ] pushes forward to (Σ_d c_d) ππᵀ.
        let pi = crate::linalg::Vector::from_column_slice(&op.pi);
        let z = marginals.transpose() * &psi * &marginals;
        let z_target = (&pi * pi.transpose()) * sm.inner.iter().sum::<f64>();
        checks.push(Check::new("aggregation_z", (&z - &z_target).abs().max(), matrix_tol(&Tolerances::default(), max_abs_entry(&z_target))));
        let marginal_err = (0..s)
            .map(|i| (0..n).map(|v| (marginals[(i, v)] - op.pi[v]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        checks.push(Check::new("marginals_stationary", marginal_err, 1e-10));
    }
    Ok(checks)
}

/// Level sums `w_t Σ_{i ∈ V_t} σ_i f(φ(i))` for a fresh spider walk.
fn spider_levels<R: Rng>(
    rng: &mut R,
    sampler: &TreeWalkSampler<'_>,
    sm: &SpiderMatrix,
    signed: bool,
    fs: &[Vec<f64>],
    out: &mut [Vec<f64>],
) {
    let (k, ell) = (sm.spider.k, sm.spider.ell);
    let root = sampler.stationary(rng);
    for (f, levels) in fs.iter().zip(out.iter_mut()) {
        levels.iter_mut().for_each(|x| *x = 0.0);
        levels[0] = f[root];
    }
    for _ in 0..k {
        let mut v = root;
        let mut sign = 1.0;
        for t in 1..=ell {
            let arc = sampler.step(rng, v);
            v = arc.to;
            if signed {
                sign *= f64::from(arc.sign);
            }
            for (f, levels) in fs.iter().zip(out.iter_mut()) {
                levels[t] += sign * f[v];
            }
        }
    }
    for levels in out.iter_mut() {
        for (t, x) in levels.iter_mut().enumerate().skip(1) {
            *x *= sm.alpha.powi(t as i32) / k as f64;
        }
    }
}

fn quad(c: &Matrix, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for s in 0..a.len() {
        for t in 0..b.len() {
            acc += c[(s, t)] * a[s] * b[t];
        }
    }
    acc
}

#[derive(Clone)]
struct Moments {
    sum: Vec<f64>,
    sum2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self { sum: vec![0.0; len], sum2: vec![0.0; len] }
    }

    fn push(&mut self, i: usize, x: f64) {
        self.sum[i] += x;
        self.sum2[i] += x * x;
    }

    fn merge(mut self, other: &Moments) -> Self {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum2[i] += other.sum2[i];
        }
        self
    }
}

const CHUNK: u64 = 1024;

fn aggregation_sampled(
    kind: CertKind,
    g: &SignedGraph,
    sm: &SpiderMatrix,
    samples: u64,
    seed: u64,
    vectors: usize,
) -> Vec<Check> {
    let n = g.n();
    let signed = kind == CertKind::TwoXor;
    let fs: Vec<Vec<f64>> = (0..vectors)
        .map(|j| {
            let mut rng = stream(seed, tag::WALKS, u64::MAX - j as u64);
            (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()
        })
        .collect();
    let tree = Tree::path(1);
    let sampler = TreeWalkSampler::new(g, &tree, 0);
    let levels = sm.spider.ell + 1;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, tag::WALKS, c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut m = Moments::new(2 * vectors);
            let mut a = vec![vec![0.0; levels]; vectors];
            let mut b = vec![vec![0.0; levels]; vectors];
            for _ in 0..count {
                spider_levels(&mut rng, &sampler, sm, signed, &fs, &mut a);
                for j in 0..vectors {
                    m.push(j, quad(&sm.coeff, &a[j], &a[j]));
                }
                if !signed {
                    spider_levels(&mut rng, &sampler, sm, false, &fs, &mut b);
                    for j in 0..vectors {
                        m.push(vectors + j, quad(&sm.coeff, &a[j], &b[j]));
                    }
                }
            }
            m
        })
        .collect();
    let total = parts.iter().fold(Moments::new(2 * vectors), |acc, m| acc.merge(m));

    // Exact expectations via repeated walk steps.
    let pi = g.pi();
    let inner = |f: &[f64], h: &[f64]| -> f64 { pi.iter().zip(f).zip(h).map(|((p, a), b)| p * a * b).sum() };
    let count = samples as f64;
    let mut worst_y: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for (j, f) in fs.iter().enumerate() {
        let mut power = f.clone();
        let mut next = vec![0.0; n];
        let mut expected = 0.0;
        for (d, &c) in sm.inner.iter().enumerate() {
            if d > 0 {
                g.apply_walk(&power, &mut next, signed);
                std::mem::swap(&mut power, &mut next);
            }
            expected += c * inner(f, &power);
        }
        let z_units = |sum: f64, sum2: f64, want: f64| -> f64 {
            let mean = sum / count;
            let var = (sum2 / count - mean * mean).max(0.0) * count / (count - 1.0).max(1.0);
            let se = (var / count).sqrt();
            let diff = (mean - want).abs();
            if se > 0.0 {
                diff / se
            } else if diff <= 1e-9 * want.abs().max(1.0) {
                0.0
            } else {
                f64::INFINITY
            }
        };
        worst_y = worst_y.max(z_units(total.sum[j], total.sum2[j], expected));
        if !signed {
            let mean_f = inner(f, &vec![1.0; n]);
            let want = sm.inner.iter().sum::<f64>() * mean_f * mean_f;
            worst_z = worst_z.max(z_units(total.sum[vectors + j], total.sum2[vectors + j], want));
        }
    }
    let mut checks = vec![Check::new("aggregation", worst_y, 4.0).with_note("Monte Carlo deviation in standard errors")];
    if !signed {
        checks.push(Check::new("aggregation_z", worst_z, 4.0).with_note("Monte Carlo deviation in standard errors"));
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::{certify_2xor, certify_maxcut};

    #[test]
    fn triangle_exhaustive() {
        let g = SignedGraph::complete(3).unwrap();
        let c = certify_2xor(&g, ParamChoice::Explicit { k: 3, ell: 1 }).unwrap();
        let r = verify_certificate(&c, &g, VerifyMode::exhaustive()).unwrap();
        assert!(r.pass, "{r:#?}");
        assert!(r.check("aggregation").unwrap().residual < 1e-12);
    }

    #[test]
    fn maxcut_exhaustive_on_four_cycle() {
        let g = SignedGraph::cycle(4).unwrap();
        let c = certify_maxcut(&g, ParamChoice::Explicit { k: 3, ell: 1 }).unwrap();
        let r = verify_certificate(&c, &g, VerifyMode::exhaustive()).unwrap();
        assert!(r.pass, "{r:#?}");
    }

    #[test]
    fn tampered_certificate_fails_ledger() {
        let g = SignedGraph::cycle(5).unwrap();
        let mut c = certify_2xor(&g, ParamChoice::Explicit { k: 3, ell: 1 }).unwrap();
        c.beta_sharp *= 0.9;
        let r = verify_certificate(&c, &g, VerifyMode::exhaustive()).unwrap();
        assert!(!r.pass);
        assert!(!r.check("ledger").unwrap().pass);
    }

    #[test]
    fn sampled_is_deterministic_and_consistent() {
        let g = SignedGraph::new(5, [(0, 1, 1, 1), (1, 2, 1, -1), (2, 3, 2, 1), (3, 4, 1, -1), (4, 0, 1, 1), (1, 3, 1, -1)]).unwrap();
        let c = certify_2xor(&g, ParamChoice::Explicit { k: 9, ell: 2 }).unwrap();
        let mode = VerifyMode::Sampled { samples: 20_000, seed: 11, test_vectors: 3 };
        let a = verify_certificate(&c, &g, mode).unwrap();
        let b = verify_certificate(&c, &g, mode).unwrap();
        assert_eq!(a, b);
        assert!(a.check("aggregation").unwrap().pass, "{a:#?}");
    }
}
