use super::fourier::Predicate;
use super::instance::{Clause, CspInstance};
use super::weights::sample_w;
use super::xor::{KeySpace, XorInstance};
use crate::error::{Error, Result};
use crate::rng::{stream, tag};
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

/// Largest key space enumerated one key at a time.
pub const DENSE_GEN_CAP: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightDist {
    /// `±1` with probability `p`, else 0.
    Rademacher { p: f64 },
    /// A `W_N(p)` draw per key.
    Binomial { big_n: u64, p: f64 },
    /// Integer atoms with probabilities summing to 1.
    Table { atoms: Vec<(i64, f64)> },
}

impl WeightDist {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            Self::Rademacher { p } | Self::Binomial { p, .. } if !(0.0..=1.0).contains(p) => {
                bad(format!("probability {p} outside [0, 1]"))
            }
            Self::Table { atoms } => {
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if atoms.is_empty() || atoms.iter().any(|a| a.1 < 0.0) || (total - 1.0).abs() > 1e-9 {
                    bad(format!("weight table probabilities must be nonnegative and sum to 1, got {total}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Visits each index of `0..size` independently with probability `p`.
fn bernoulli_positions<R: Rng>(rng: &mut R, size: u64, p: f64, mut f: impl FnMut(&mut R, u64)) {
    if p <= 0.0 || size == 0 {
        return;
    }
    if p >= 1.0 {
        (0..size).for_each(|i| f(rng, i));
        return;
    }
    let geo = Geometric::new(p).expect("p in (0, 1)");
    let mut pos = 0u64;
    loop {
        let skip = geo.sample(rng);
        pos = match pos.checked_add(skip) {
            Some(v) if v < size => v,
            _ => return,
        };
        f(rng, pos);
        pos += 1;
    }
}

pub fn gen_weighted_xor(n: usize, k: usize, dist: &WeightDist, seed: u64) -> Result<XorInstance> {
    dist.validate()?;
    let ks = KeySpace::new(n, k)?;
    let mut inst = XorInstance::new(n, k)?;
    let mut rng = stream(seed, tag::XOR, 0);
    match dist {
        WeightDist::Rademacher { p } => {
            bernoulli_positions(&mut rng, ks.size(), *p, |r, key| {
                inst.add_key(key, if r.random::<bool>() { 1 } else { -1 })
            });
        }
        other => {
            if ks.size() > DENSE_GEN_CAP {
                return Err(Error::InvalidParameter(format!(
                    "key space {} too large for per-key sampling (cap {DENSE_GEN_CAP})",
                    ks.size()
                )));
            }
            for key in 0..ks.size() {
                let w = match other {
                    WeightDist::Binomial { big_n, p } => sample_w(&mut rng, *big_n, *p),
                    WeightDist::Table { atoms } => {
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        atoms.iter().find(|a| { acc += a.1; u < acc }).unwrap_or(&atoms[atoms.len() - 1]).0
                    }
                    WeightDist::Rademacher { .. } => unreachable!(),
                };
                inst.add_key(key, w);
            }
        }
    }
    Ok(inst)
}

/// Random `P` instance: each `S ∈ [n]^k` independently with probability
/// `p = m / n^k`, with a uniform negation pattern.
pub fn gen_csp(n: usize, predicate: &Predicate, m: f64, seed: u64) -> Result<CspInstance> {
    let k = predicate.k;
    let ks = KeySpace::new(n, k)?;
    if !(m >= 0.0) {
        return Err(Error::InvalidParameter(format!("expected clause count {m} must be nonnegative")));
    }
    let p = (m / ks.size() as f64).min(1.0);
    let mut rng = stream(seed, tag::CSP, 0);
    let mut clauses = Vec::new();
    bernoulli_positions(&mut rng, ks.size(), p, |r, key| {
        clauses.push(Clause { key, zeta: r.random_range(0..1u32 << k) })
    });
    let mut inst = CspInstance::new(n, predicate.clone(), clauses)?;
    inst.p = Some(p);
    Ok(inst)
}

#[derive(Debug, Clone, Serialize)]
pub struct ClauseCount {
    pub expected: f64,
    pub observed: usize,
    /// `4√(p n^k (1−p))`.
    pub band: f64,
    pub within: bool,
}

pub fn clause_count(inst: &CspInstance) -> ClauseCount {
    let size = inst.keys().size() as f64;
    let p = inst.p.unwrap_or(inst.m() as f64 / size);
    let expected = p * size;
    let band = 4.0 * (expected * (1.0 - p)).sqrt();
    let observed = inst.m();
    ClauseCount { expected, observed, band, within: (observed as f64 - expected).abs() <= band }
}
