use crate::error::{Error, Result};
use serde::Serialize;

/// Boolean predicate on `{±1}^k` as a truth table.
///
/// Input index bit `a` set means `z_{a+1} = −1`; so `"1000"` is AND and
/// `"0110"` is 2-bit parity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub k: usize,
    pub table: Vec<bool>,
}

impl Predicate {
    pub fn new(k: usize, table: Vec<bool>) -> Result<Self> {
        if k == 0 || k > 20 {
            return Err(Error::InvalidInstance(format!("predicate arity {k} outside 1..=20")));
        }
        if table.len() != 1 << k {
            return Err(Error::InvalidInstance(format!("truth table has {} entries, need {}", table.len(), 1 << k)));
        }
        Ok(Self { k, table })
    }

    pub fn from_bits(bits: &str) -> Result<Self> {
        let table = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidInstance(format!("predicate bitstring has character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        if !table.len().is_power_of_two() {
            return Err(Error::InvalidInstance(format!("predicate length {} is not a power of two", table.len())));
        }
        Self::new(table.len().trailing_zeros() as usize, table)
    }

    pub fn to_bits(&self) -> String {
        self.table.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// `z_1 ⋯ z_k = −1` accepted (`negate = false`) or `= +1`.
    pub fn parity(k: usize, negate: bool) -> Self {
        let table = (0..1usize << k).map(|i| (i.count_ones() % 2 == 1) != negate).collect();
        Self { k, table }
    }

    /// Accepts only the all-`+1` input.
    pub fn and(k: usize) -> Self {
        Self { k, table: (0..1usize << k).map(|i| i == 0).collect() }
    }

    pub fn constant(k: usize, value: bool) -> Self {
        Self { k, table: vec![value; 1 << k] }
    }

    pub fn index(z: &[i8]) -> usize {
        z.iter().enumerate().fold(0, |acc, (a, &v)| if v < 0 { acc | 1 << a } else { acc })
    }

    pub fn eval(&self, z: &[i8]) -> bool {
        self.table[Self::index(z)]
    }

    pub fn accepting(&self) -> usize {
        self.table.iter().filter(|&&b| b).count()
    }
}

/// Fourier coefficients `P̂(α) = numerator[α] / 2^k`, `α` a bitmask over
/// positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FourierTable {
    pub k: usize,
    pub numerators: Vec<i64>,
}

pub fn fourier(p: &Predicate) -> FourierTable {
    let size = 1usize << p.k;
    let numerators = (0..size)
        .map(|alpha| {
            p.table
                .iter()
                .enumerate()
                .filter(|(_, &acc)| acc)
                .map(|(z, _)| if (z & alpha).count_ones() % 2 == 0 { 1 } else { -1 })
                .sum()
        })
        .collect();
    FourierTable { k: p.k, numerators }
}

impl FourierTable {
    pub fn denominator(&self) -> i64 {
        1 << self.k
    }

    pub fn coefficient(&self, alpha: usize) -> f64 {
        self.numerators[alpha] as f64 / self.denominator() as f64
    }

    /// `E[P] = P̂(∅)`.
    pub fn mean(&self) -> f64 {
        self.coefficient(0)
    }

    /// `Σ_α num(α)² = 2^k · #accepting`, exactly.
    pub fn parseval_holds(&self, p: &Predicate) -> bool {
        let lhs: i64 = self.numerators.iter().map(|c| c * c).sum();
        lhs == self.denominator() * p.accepting() as i64
    }

    /// `2^k P(z) = Σ_α num(α) Π_{a ∈ α} z_a` on all inputs.
    pub fn reconstruction_holds(&self, p: &Predicate) -> bool {
        (0..1usize << self.k).all(|z| {
            let sum: i64 = self
                .numerators
                .iter()
                .enumerate()
                .map(|(alpha, &c)| if (z & alpha).count_ones() % 2 == 0 { c } else { -c })
                .sum();
            sum == if p.table[z] { self.denominator() } else { 0 }
        })
    }

    /// Nonempty `α` with nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (1..self.numerators.len()).filter(|&a| self.numerators[a] != 0).collect()
    }
}
