use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Largest allowed key space `n^k` (48 bits).
pub const MAX_KEY_BITS: f64 = 48.0;

/// Digits of ordered multisets `S ∈ [n]^k` packed base `n`, first element
/// most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeySpace {
    pub n: usize,
    pub k: usize,
}

impl KeySpace {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("instance needs at least one variable".into()));
        }
        if k == 0 {
            return Err(Error::InvalidInstance("arity must be at least 1".into()));
        }
        if k as f64 * (n as f64).log2() > MAX_KEY_BITS {
            return Err(Error::InvalidInstance(format!(
                "key space n^k = {n}^{k} exceeds 2^{MAX_KEY_BITS}"
            )));
        }
        Ok(Self { n, k })
    }

    pub fn size(&self) -> u64 {
        (self.n as u64).pow(self.k as u32)
    }

    pub fn encode(&self, vars: &[usize]) -> u64 {
        vars.iter().fold(0u64, |acc, &v| acc * self.n as u64 + v as u64)
    }

    pub fn decode(&self, key: u64) -> Vec<usize> {
        let mut out = vec![0; self.k];
        self.decode_into(key, &mut out);
        out
    }

    pub fn decode_into(&self, mut key: u64, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = (key % self.n as u64) as usize;
            key /= self.n as u64;
        }
    }
}

/// `x^S = Π_{i ∈ S} x_i` for `x ∈ {±1}^n`.
pub fn monomial(x: &[i8], vars: &[usize]) -> i64 {
    vars.iter().fold(1i64, |acc, &v| acc * x[v] as i64)
}

/// Weighted arity-`k` XOR objective `Σ_S b_S x^S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorInstance {
    pub n: usize,
    pub k: usize,
    /// Nonzero weights by packed key.
    pub terms: BTreeMap<u64, i64>,
}

impl XorInstance {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        KeySpace::new(n, k)?;
        Ok(Self { n, k, terms: BTreeMap::new() })
    }

    /// Builds from `(vars, weight)` pairs, summing repeated keys.
    pub fn from_terms<I>(n: usize, k: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, i64)>,
    {
        let mut inst = Self::new(n, k)?;
        for (vars, w) in terms {
            inst.add(&vars, w)?;
        }
        Ok(inst)
    }

    pub fn keys(&self) -> KeySpace {
        KeySpace { n: self.n, k: self.k }
    }

    pub fn add(&mut self, vars: &[usize], weight: i64) -> Result<()> {
        if vars.len() != self.k {
            return Err(Error::InvalidInstance(format!("term has {} variables, arity is {}", vars.len(), self.k)));
        }
        if let Some(&v) = vars.iter().find(|&&v| v >= self.n) {
            return Err(Error::InvalidInstance(format!("variable {v} out of range for n = {}", self.n)));
        }
        let key = self.keys().encode(vars);
        self.add_key(key, weight);
        Ok(())
    }

    pub fn add_key(&mut self, key: u64, weight: i64) {
        if weight == 0 {
            return;
        }
        let slot = self.terms.entry(key).or_insert(0);
        *slot += weight;
        if *slot == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn m_abs(&self) -> u64 {
        self.terms.values().map(|w| w.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self { n: self.n, k: self.k, terms: self.terms.iter().map(|(&k, &w)| (k, -w)).collect() }
    }

    /// `Σ_S b_S x^S`.
    pub fn value(&self, x: &[i8]) -> i64 {
        let ks = self.keys();
        let mut vars = vec![0; self.k];
        self.terms
            .iter()
            .map(|(&key, &w)| {
                ks.decode_into(key, &mut vars);
                w * monomial(x, &vars)
            })
            .sum()
    }

    /// `½ + Σ_S b_S x^S / (2 Σ|b_S|)`; `½` for an empty instance.
    pub fn objective(&self, x: &[i8]) -> f64 {
        let m = self.m_abs();
        if m == 0 {
            return 0.5;
        }
        0.5 + self.value(x) as f64 / (2.0 * m as f64)
    }

    /// Iterates `(vars, weight)`.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, i64)> + '_ {
        let ks = self.keys();
        self.terms.iter().map(move |(&key, &w)| (ks.decode(key), w))
    }
}
