use super::fourier::{fourier, FourierTable, Predicate};
use super::xor::{KeySpace, XorInstance};
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// One constraint `P(x^S ⊙ ζ_S)`. Bit `a` of `zeta` set means
/// `(ζ_S)_{a+1} = −1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Clause {
    pub key: u64,
    pub zeta: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CspInstance {
    pub n: usize,
    pub k: usize,
    pub predicate: Predicate,
    pub clauses: Vec<Clause>,
    /// Clause probability used by the generator, if any.
    pub p: Option<f64>,
}

impl CspInstance {
    pub fn new(n: usize, predicate: Predicate, clauses: Vec<Clause>) -> Result<Self> {
        let k = predicate.k;
        let ks = KeySpace::new(n, k)?;
        for c in &clauses {
            if c.key >= ks.size() {
                return Err(Error::InvalidInstance(format!("clause key {} outside [n]^k", c.key)));
            }
            if c.zeta >> k != 0 {
                return Err(Error::InvalidInstance(format!("negation mask {:#b} wider than arity {k}", c.zeta)));
            }
        }
        Ok(Self { n, k, predicate, clauses, p: None })
    }

    pub fn keys(&self) -> KeySpace {
        KeySpace { n: self.n, k: self.k }
    }

    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    fn input_index(&self, x: &[i8], vars: &mut [usize], c: &Clause) -> usize {
        self.keys().decode_into(c.key, vars);
        let mut idx = 0;
        for (a, &v) in vars.iter().enumerate() {
            let z = x[v] * if c.zeta >> a & 1 == 1 { -1 } else { 1 };
            if z < 0 {
                idx |= 1 << a;
            }
        }
        idx
    }

    pub fn satisfied(&self, x: &[i8]) -> usize {
        let mut vars = vec![0; self.k];
        self.clauses.iter().filter(|c| self.predicate.table[self.input_index(x, &mut vars, c)]).count()
    }

    /// Satisfied fraction; an empty instance has objective `0`.
    pub fn objective(&self, x: &[i8]) -> f64 {
        if self.clauses.is_empty() {
            return 0.0;
        }
        self.satisfied(x) as f64 / self.m() as f64
    }
}

/// `α ↦ I^α` with unnormalised integer weights `w_T`; the objective is
/// `OBJ(x) = Σ_α P̂(α) · value_α(x) / m`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub fourier: FourierTable,
    pub m: usize,
    /// Indexed by `α`; entry 0 is the empty instance (value `m` by convention).
    pub parts: Vec<XorInstance>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartSummary {
    pub alpha: usize,
    pub size: usize,
    pub coefficient: f64,
    pub terms: usize,
    pub m_alpha: u64,
}

impl Decomposition {
    /// `Σ_T w_T x^T` for `α`, with `m` for `α = ∅`.
    pub fn part_value(&self, alpha: usize, x: &[i8]) -> i64 {
        if alpha == 0 {
            self.m as i64
        } else {
            self.parts[alpha].value(x)
        }
    }

    /// `2^k · #satisfied(x)` reassembled from the levels.
    pub fn scaled_value(&self, x: &[i8]) -> i64 {
        self.fourier
            .numerators
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(alpha, &c)| c * self.part_value(alpha, x))
            .sum()
    }

    pub fn objective(&self, x: &[i8]) -> f64 {
        if self.m == 0 {
            return 0.0;
        }
        self.scaled_value(x) as f64 / (self.fourier.denominator() as f64 * self.m as f64)
    }

    pub fn summaries(&self) -> Vec<PartSummary> {
        (1..self.parts.len())
            .map(|alpha| PartSummary {
                alpha,
                size: alpha.count_ones() as usize,
                coefficient: self.fourier.coefficient(alpha),
                terms: self.parts[alpha].terms.len(),
                m_alpha: self.parts[alpha].m_abs(),
            })
            .collect()
    }
}

pub fn decompose_instance(inst: &CspInstance) -> Result<Decomposition> {
    let table = fourier(&inst.predicate);
    let k = inst.k;
    let mut parts = Vec::with_capacity(1 << k);
    let mut acc: Vec<BTreeMap<u64, i64>> = vec![BTreeMap::new(); 1 << k];
    let ks = inst.keys();
    let mut vars = vec![0; k];
    for c in &inst.clauses {
        ks.decode_into(c.key, &mut vars);
        for alpha in 1..1usize << k {
            let mut t_key = 0u64;
            let mut sign = 1i64;
            for a in 0..k {
                if alpha >> a & 1 == 1 {
                    t_key = t_key * inst.n as u64 + vars[a] as u64;
                    if c.zeta >> a & 1 == 1 {
                        sign = -sign;
                    }
                }
            }
            *acc[alpha].entry(t_key).or_insert(0) += sign;
        }
    }
    for (alpha, terms) in acc.into_iter().enumerate() {
        let t = alpha.count_ones() as usize;
        let mut inst_alpha = XorInstance::new(inst.n, t.max(1))?;
        if alpha != 0 {
            inst_alpha.k = t;
            for (key, w) in terms {
                inst_alpha.add_key(key, w);
            }
        }
        parts.push(inst_alpha);
    }
    Ok(Decomposition { fourier: table, m: inst.m(), parts })
}
