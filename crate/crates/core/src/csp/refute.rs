//! XOR and predicate refutation pipelines on top of the graph certifier.

use super::fourier::FourierTable;
use super::instance::{decompose_instance, CspInstance};
use super::reduce::{reduce_to_2xor, to_graph, ReductionKind};
use super::xor::XorInstance;
use crate::certifier::{certify_2xor, select_parameters, walk_radius, CertKind, Certificate, ParamChoice, Parameters};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Largest `ℓ` tried by the refutation rule.
pub const ELL_CAP: usize = 8;
/// Largest spider branching factor the rule will accept.
pub const K_CAP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamRule {
    /// Smallest `ℓ` with `N^{1/4ℓ} ρ ≤ ½ ε^{2ℓ}`, `k = ⌈ε^{-2ℓ}⌉`.
    Proposition,
    /// [`select_parameters`] on the measured `π_*` and `ρ`.
    Selection,
}

/// Empirical weight statistics over all `n^k` keys.
#[derive(Debug, Clone, Serialize)]
pub struct WeightSummary {
    pub abs_mean: f64,
    pub sigma: f64,
    pub max_abs: i64,
    /// `σ log N / (E|w| √(n^q)) · max(1, M/√(n^q))` with `N` the flat
    /// variable count (constant factors dropped).
    pub rho_formula_log_flat: f64,
    /// The same with `log n`.
    pub rho_formula_log_n: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct XorRefutation {
    pub n: usize,
    pub k: usize,
    pub m_abs: u64,
    pub epsilon: f64,
    pub reduction: ReductionKind,
    pub flat_variables: usize,
    pub graph_vertices: usize,
    pub d_min: u64,
    pub d_max: u64,
    pub pi_star: f64,
    /// Measured `ρ(K̄)` of the reduced graph.
    pub rho: f64,
    /// `Σ deg / 2m`.
    pub scale: f64,
    pub weights: WeightSummary,
    pub rule: Option<ParamRule>,
    pub ell: Option<usize>,
    pub spider_k: Option<usize>,
    /// Certifier locality times the reduction's degree factor.
    pub rounds: Option<usize>,
    /// `2q ℓ ε^{-2ℓ}` as stated in the proposition.
    pub rounds_formula: Option<f64>,
    pub certificate: Option<Certificate>,
    /// `scale · β_sharp`: certified `|Σ b x^S| / m ≤ β′`.
    pub beta_prime: Option<f64>,
    /// `½ + β′/2`.
    pub bound_raw: Option<f64>,
    /// `min(1, bound_raw)`; `½` when every term cancels.
    pub bound: f64,
    /// `½ + scale · β_paper / 2`.
    pub bound_paper: Option<f64>,
    /// `½ + 3ε/2`.
    pub target: f64,
    pub refuted: bool,
    pub note: String,
}

fn weight_summary(inst: &XorInstance, flat_n: usize) -> WeightSummary {
    let size = inst.keys().size() as f64;
    let abs_mean = inst.m_abs() as f64 / size;
    let sigma = (inst.terms.values().map(|&w| (w * w) as f64).sum::<f64>() / size).sqrt();
    let max_abs = inst.terms.values().map(|w| w.abs()).max().unwrap_or(0);
    let side = (inst.n as f64).powi((inst.k / 2) as i32).sqrt();
    let core = sigma / (abs_mean * side) * (max_abs as f64 / side).max(1.0);
    WeightSummary {
        abs_mean,
        sigma,
        max_abs,
        rho_formula_log_flat: core * (flat_n as f64).ln(),
        rho_formula_log_n: core * (inst.n as f64).ln(),
    }
}

fn proposition_rule(flat_n: usize, rho: f64, epsilon: f64) -> Option<Parameters> {
    (1..=ELL_CAP).find_map(|ell| {
        let lhs = (flat_n as f64).powf(0.25 / ell as f64) * rho;
        if lhs > 0.5 * epsilon.powi(2 * ell as i32) {
            return None;
        }
        let kf = epsilon.powi(-2 * ell as i32).ceil();
        if kf > K_CAP || kf < 3f64.powi(ell as i32) {
            return None;
        }
        Parameters::new(kf as usize, ell).ok()
    })
}

/// Refutes `Σ b_S x^S` by flattening or lifting to 2-XOR and certifying the
/// signed multigraph. Failure to refute is reported, not raised.
pub fn refute_xor(inst: &XorInstance, epsilon: f64, seed: u64) -> Result<XorRefutation> {
    if inst.k < 2 {
        return Err(Error::InvalidInstance("refute_xor needs arity ≥ 2; arity 1 is bounded by Σ|w| directly".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    let red = reduce_to_2xor(inst, seed)?;
    let flat_n = red.instance.n;
    let weights = weight_summary(inst, flat_n);
    let target = 0.5 + 1.5 * epsilon;
    let mut rep = XorRefutation {
        n: inst.n,
        k: inst.k,
        m_abs: inst.m_abs(),
        epsilon,
        reduction: red.kind,
        flat_variables: flat_n,
        graph_vertices: 0,
        d_min: 0,
        d_max: 0,
        pi_star: 0.0,
        rho: 0.0,
        scale: 0.0,
        weights,
        rule: None,
        ell: None,
        spider_k: None,
        rounds: None,
        rounds_formula: None,
        certificate: None,
        beta_prime: None,
        bound_raw: None,
        bound: 1.0,
        bound_paper: None,
        target,
        refuted: false,
        note: String::new(),
    };
    let Some(fg) = to_graph(&red.instance)? else {
        rep.bound = 0.5;
        rep.refuted = true;
        rep.note = "all terms cancel in W + Wᵀ; the objective is identically ½".into();
        return Ok(rep);
    };
    let g = &fg.graph;
    rep.graph_vertices = g.n();
    rep.d_min = g.min_degree();
    rep.d_max = g.max_degree();
    rep.pi_star = g.pi_star();
    rep.scale = fg.scale;
    rep.rho = walk_radius(g, CertKind::TwoXor)?;

    let (rule, params) = match proposition_rule(flat_n, rep.rho, epsilon) {
        Some(p) => (ParamRule::Proposition, p),
        None => match select_parameters(epsilon, rep.pi_star, rep.rho) {
            Ok(p) => (ParamRule::Selection, p),
            Err(e) => {
                rep.note = format!("no admissible (k, ℓ) with ℓ ≤ {ELL_CAP}: {e}");
                return Ok(rep);
            }
        },
    };
    let cert = certify_2xor(g, ParamChoice::Explicit { k: params.k, ell: params.ell })?;
    let beta_prime = fg.scale * cert.beta_sharp;
    let bound_raw = 0.5 + beta_prime / 2.0;
    rep.rule = Some(rule);
    rep.ell = Some(params.ell);
    rep.spider_k = Some(params.k);
    rep.rounds = Some(cert.locality * red.degree_factor);
    rep.rounds_formula = Some(2.0 * (inst.k / 2) as f64 * params.ell as f64 * epsilon.powi(-2 * params.ell as i32));
    rep.beta_prime = Some(beta_prime);
    rep.bound_raw = Some(bound_raw);
    rep.bound = bound_raw.min(1.0);
    rep.bound_paper = Some(0.5 + fg.scale * cert.beta_paper / 2.0);
    rep.refuted = bound_raw < 1.0;
    rep.note = if rep.refuted {
        format!("certified OBJ ≤ {bound_raw:.6}")
    } else {
        format!("certificate vacuous: β′ = {beta_prime:.4} ≥ 1 at ρ = {:.4}", rep.rho)
    };
    rep.certificate = Some(cert);
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartMethod {
    /// `I^α ≡ 0`.
    Empty,
    /// `|I^α| ≤ m_α/m` in one round.
    L1,
    /// Two-sided XOR refutation of `(m/m_α) I^α`.
    Xor,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartReport {
    pub alpha: usize,
    pub size: usize,
    pub coefficient: f64,
    pub m_alpha: u64,
    pub method: PartMethod,
    /// Certified `|(m/m_α) I^α| ≤ β′`, capped at 1.
    pub beta_prime: f64,
    /// Certified `|I^α| ≤ (m_α/m) · β′`.
    pub abs_bound: f64,
    pub refuted: bool,
    pub xor: Option<XorRefutation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredicateRefutation {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub predicate: String,
    pub p: Option<f64>,
    pub epsilon: f64,
    pub delta: f64,
    /// `ε / (3 · 2^{k/2−1})`, handed to each sub-refutation.
    pub epsilon_sub: f64,
    /// Measured `δ = log_n(m / n^{⌈k/2⌉})`.
    pub density_exponent: Option<f64>,
    /// `⌈⌈k/2⌉ / 2δ⌉`.
    pub ell_theorem: usize,
    /// `kℓ(3·2^{k/2−1}/ε)^{2ℓ} + k`.
    pub rounds_theorem: f64,
    /// Largest sub-refutation round count actually used.
    pub rounds: usize,
    pub mean: f64,
    pub parts: Vec<PartReport>,
    /// `P̂(∅) + Σ_α |P̂(α)| · |I^α|`-bound, capped at 1.
    pub bound_sharp: f64,
    /// `P̂(∅) + √(2^k) · max_α |I^α|`-bound, capped at 1.
    pub bound_cauchy_schwarz: f64,
    /// `P̂(∅) + Σ_α |P̂(α)| m_α/m`: one round, always available.
    pub bound_l1: f64,
    /// `P̂(∅) + √(2^k) · 3ε/2`.
    pub target: f64,
    pub bound: f64,
    pub refuted: bool,
    /// `α` whose sub-refutation failed.
    pub blocking: Vec<usize>,
}

fn theorem_rounds(k: usize, epsilon: f64, delta: f64) -> (usize, f64) {
    let ell = ((k.div_ceil(2)) as f64 / (2.0 * delta)).ceil().max(1.0) as usize;
    let base = 3.0 * 2f64.powf(k as f64 / 2.0 - 1.0) / epsilon;
    (ell, (k * ell) as f64 * base.powi(2 * ell as i32) + k as f64)
}

/// Refutes a predicate instance level by level in its Fourier expansion.
pub fn refute_predicate(inst: &CspInstance, epsilon: f64, delta: f64, seed: u64) -> Result<PredicateRefutation> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1), got {epsilon}")));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("δ must be positive, got {delta}")));
    }
    let k = inst.k;
    let dec = decompose_instance(inst)?;
    let table: &FourierTable = &dec.fourier;
    let m = dec.m;
    let epsilon_sub = epsilon / (3.0 * 2f64.powf(k as f64 / 2.0 - 1.0));
    let (ell_theorem, rounds_theorem) = theorem_rounds(k, epsilon, delta);
    let mean = table.mean();

    let parts: Vec<PartReport> = table
        .support()
        .into_par_iter()
        .map(|alpha| -> Result<PartReport> {
            let part = &dec.parts[alpha];
            let size = alpha.count_ones() as usize;
            let m_alpha = part.m_abs();
            let frac = if m == 0 { 0.0 } else { m_alpha as f64 / m as f64 };
            let base = PartReport {
                alpha,
                size,
                coefficient: table.coefficient(alpha),
                m_alpha,
                method: PartMethod::Empty,
                beta_prime: 0.0,
                abs_bound: 0.0,
                refuted: true,
                xor: None,
            };
            if part.is_empty() {
                return Ok(base);
            }
            if size == 1 {
                return Ok(PartReport { method: PartMethod::L1, beta_prime: 1.0, abs_bound: frac, ..base });
            }
            let rep = refute_xor(part, epsilon_sub, seed ^ alpha as u64)?;
            // An identically-½ reduction means Σ w_T x^T ≡ 0.
            let beta_prime = match rep.beta_prime {
                Some(b) => b.min(1.0),
                None if rep.refuted => 0.0,
                None => 1.0,
            };
            Ok(PartReport {
                method: PartMethod::Xor,
                beta_prime,
                abs_bound: frac * beta_prime,
                refuted: rep.refuted,
                xor: Some(rep),
                ..base
            })
        })
        .collect::<Result<_>>()?;

    let sharp = mean + parts.iter().map(|p| p.coefficient.abs() * p.abs_bound).sum::<f64>();
    let max_part = parts.iter().map(|p| p.abs_bound).fold(0.0, f64::max);
    let cs = mean + 2f64.powf(k as f64 / 2.0) * max_part;
    let l1 = mean
        + parts
            .iter()
            .map(|p| p.coefficient.abs() * if m == 0 { 0.0 } else { p.m_alpha as f64 / m as f64 })
            .sum::<f64>();
    let blocking: Vec<usize> = parts.iter().filter(|p| !p.refuted).map(|p| p.alpha).collect();
    let rounds = parts
        .iter()
        .map(|p| match (&p.method, &p.xor) {
            (PartMethod::L1, _) => 1,
            (PartMethod::Xor, Some(x)) => x.rounds.unwrap_or(0),
            _ => 0,
        })
        .max()
        .unwrap_or(0);
    let bound = sharp.min(1.0);
    Ok(PredicateRefutation {
        n: inst.n,
        k,
        m,
        predicate: inst.predicate.to_bits(),
        p: inst.p,
        epsilon,
        delta,
        epsilon_sub,
        density_exponent: (m > 0 && inst.n > 1)
            .then(|| (m as f64 / (inst.n as f64).powi(k.div_ceil(2) as i32)).ln() / (inst.n as f64).ln()),
        ell_theorem,
        rounds_theorem,
        rounds,
        mean,
        parts,
        bound_sharp: bound,
        bound_cauchy_schwarz: cs.min(1.0),
        bound_l1: l1.min(1.0),
        target: mean + 2f64.powf(k as f64 / 2.0) * 1.5 * epsilon,
        bound,
        refuted: blocking.is_empty() && bound < 1.0,
        blocking,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::fourier::Predicate;
    use crate::csp::gen::{gen_csp, gen_weighted_xor, WeightDist};

    #[test]
    fn consistent_instance_not_refuted() {
        let mut inst = XorInstance::new(8, 2).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i != j {
                    inst.add(&[i, j], 1).unwrap();
                }
            }
        }
        let r = refute_xor(&inst, 0.3, 0).unwrap();
        assert!((r.rho - 1.0).abs() < 1e-9);
        assert!(!r.refuted);
        assert_eq!(r.bound, 1.0);
    }

    #[test]
    fn cancelling_instance() {
        let inst = XorInstance::from_terms(3, 2, [(vec![0, 1], 1), (vec![1, 0], -1)]).unwrap();
        let r = refute_xor(&inst, 0.3, 0).unwrap();
        assert_eq!(r.bound, 0.5);
        assert!(r.refuted);
    }

    #[test]
    fn always_true_predicate() {
        let inst = gen_csp(6, &Predicate::constant(2, true), 20.0, 1).unwrap();
        let r = refute_predicate(&inst, 0.2, 0.5, 0).unwrap();
        assert_eq!(r.mean, 1.0);
        assert!(r.parts.is_empty());
        assert_eq!(r.bound, 1.0);
    }

    #[test]
    fn bound_dominates_xor_objective() {
        let inst = gen_weighted_xor(8, 2, &WeightDist::Rademacher { p: 1.0 }, 3).unwrap();
        let r = refute_xor(&inst, 0.3, 0).unwrap();
        let best = (0..256u32)
            .map(|mask| {
                let x: Vec<i8> = (0..8).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
                inst.objective(&x)
            })
            .fold(0.0, f64::max);
        assert!(r.bound + 1e-12 >= best, "{} < {best}", r.bound);
    }

    #[test]
    fn theorem_round_formula() {
        let (ell, r) = theorem_rounds(2, 0.5, 0.5);
        assert_eq!(ell, 1);
        // 2·1·(3/0.5)² + 2
        assert!((r - 74.0).abs() < 1e-9);
    }
}
