//! The Sherali–Adams feasible point built from a sphere embedding: for
//! `r = 2R + 3`, `Ẽ[x_i x_j] = f(b_ij / r)` with `f(z) = 1 − (2/π) arccos z`.

use crate::csp::{KeySpace, XorInstance};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::linalg::{sym_eigenvalues, Matrix};
use crate::rng::{stream, tag};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::PI;

pub fn f(z: f64) -> f64 {
    1.0 - 2.0 / PI * z.clamp(-1.0, 1.0).acos()
}

/// Signed constraint pattern `b_ij ∈ {±1}` on unordered pairs `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraints {
    pub n: usize,
    pub b: BTreeMap<(usize, usize), i8>,
}

impl Constraints {
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize, i8)>) -> Result<Self> {
        let mut b = BTreeMap::new();
        for (i, j, s) in pairs {
            if i >= n || j >= n {
                return Err(Error::InvalidInstance(format!("pair ({i}, {j}) outside {n} variables")));
            }
            if i == j {
                return Err(Error::InvalidInstance(format!("self-constraint on {i} has no pair moment")));
            }
            if s != 1 && s != -1 {
                return Err(Error::InvalidInstance(format!("constraint weight {s} on ({i}, {j}) is not ±1")));
            }
            if b.insert((i.min(j), i.max(j)), s).is_some() {
                return Err(Error::InvalidInstance(format!("pair ({i}, {j}) constrained twice")));
            }
        }
        Ok(Self { n, b })
    }

    /// From an arity-2 instance; `(i, j)` and `(j, i)` terms are combined and
    /// must total `−1`, `0` or `+1`.
    pub fn from_xor(inst: &XorInstance) -> Result<Self> {
        if inst.k != 2 {
            return Err(Error::InvalidInstance(format!("feasible point needs arity 2, got {}", inst.k)));
        }
        let ks = KeySpace { n: inst.n, k: 2 };
        let mut sum: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for (&key, &w) in &inst.terms {
            let v = ks.decode(key);
            if v[0] == v[1] {
                return Err(Error::InvalidInstance(format!("term x_{0}x_{0} is constant", v[0])));
            }
            *sum.entry((v[0].min(v[1]), v[0].max(v[1]))).or_insert(0) += w;
        }
        let mut pairs = Vec::new();
        for ((i, j), w) in sum {
            match w {
                0 => {}
                1 | -1 => pairs.push((i, j, w as i8)),
                _ => return Err(Error::InvalidInstance(format!("weight {w} on ({i}, {j}) is not ±1"))),
            }
        }
        Self::new(inst.n, pairs)
    }

    /// From a graph with unit multiplicities and no loops.
    pub fn from_graph(g: &SignedGraph) -> Result<Self> {
        let mut pairs = Vec::new();
        for e in g.edges() {
            if e.multiplicity != 1 {
                return Err(Error::InvalidInstance(format!(
                    "edge ({}, {}) has multiplicity {}; constraints must be ±1",
                    e.u, e.v, e.multiplicity
                )));
            }
            pairs.push((e.u, e.v, e.sign));
        }
        Self::new(g.n(), pairs)
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        *self.b.get(&(i.min(j), i.max(j))).unwrap_or(&0)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.b.keys().filter(|&&(a, c)| a == i || c == i).count()
    }

    pub fn negated(&self) -> Self {
        Self { n: self.n, b: self.b.iter().map(|(&p, &s)| (p, -s)).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoMoments {
    pub rounds: usize,
    /// `2R + 3`.
    pub r: usize,
    pub constraints: Constraints,
    /// `Ẽ[x_i x_j]` on constrained pairs; every other pair has moment 0.
    pub values: BTreeMap<(usize, usize), f64>,
}

impl PseudoMoments {
    pub fn moment(&self, i: usize, j: usize) -> f64 {
        if i == j {
            1.0
        } else {
            *self.values.get(&(i.min(j), i.max(j))).unwrap_or(&0.0)
        }
    }
}

pub fn cmm_point(constraints: &Constraints, rounds: usize) -> Result<PseudoMoments> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("R must be at least 1".into()));
    }
    let r = 2 * rounds + 3;
    let values = constraints.b.iter().map(|(&p, &s)| (p, f(s as f64 / r as f64))).collect();
    Ok(PseudoMoments { rounds, r, constraints: constraints.clone(), values })
}

/// `½ + ½ · mean_{ij} b_ij Ẽ[x_i x_j]`.
pub fn feasible_value(pm: &PseudoMoments) -> f64 {
    let c = &pm.constraints.b;
    if c.is_empty() {
        return 0.5;
    }
    0.5 + 0.5 * c.iter().map(|(p, &s)| s as f64 * pm.values[p]).sum::<f64>() / c.len() as f64
}

/// `½ + (1/π)/r`, the value [`feasible_value`] always meets.
pub fn feasible_floor(rounds: usize) -> f64 {
    0.5 + 1.0 / (PI * (2 * rounds + 3) as f64)
}

/// Subset counts beyond this are spot-checked instead of enumerated.
pub const EXHAUSTIVE_SUBSET_CAP: u64 = 200_000;
pub const SPOT_CHECKS: usize = 2_000;
pub const PSD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingReport {
    pub rounds: usize,
    pub r: usize,
    /// `max_i min(deg i, r − 1) / r`, the worst row sum over `r`-subsets.
    pub max_row_sum: f64,
    /// `max_i deg i / r` over the whole vertex set.
    pub max_row_sum_full: f64,
    pub diagonally_dominant: bool,
    /// Full-set row sum exactly 1.
    pub boundary: bool,
    pub exhaustive: bool,
    pub subsets_checked: u64,
    pub subset_size: usize,
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue of `M_V` on the whole vertex set (when `n ≤ 512`).
    pub min_eigenvalue_full: Option<f64>,
    pub failures: Vec<Vec<usize>>,
    pub pass: bool,
}

fn m_s(c: &Constraints, r: usize, s: &[usize]) -> Matrix {
    Matrix::from_fn(s.len(), s.len(), |a, b| {
        if a == b {
            1.0
        } else {
            c.get(s[a], s[b]) as f64 / r as f64
        }
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn subsets_of_size(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    if size > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..size).rev().find(|&i| cur[i] < n - size + i) else { break };
        cur[pos] += 1;
        for i in pos + 1..size {
            cur[i] = cur[i - 1] + 1;
        }
    }
    out
}

/// Checks that every `r` points embed on the unit sphere: `M_S = I + B_S`
/// is PSD for `|S| ≤ r`, by diagonal dominance and by eigensolve.
pub fn check_embeddability(c: &Constraints, rounds: usize, seed: u64) -> Result<EmbeddingReport> {
    if rounds == 0 {
        return Err(Error::InvalidParameter("R must be at least 1".into()));
    }
    let r = 2 * rounds + 3;
    let max_deg = (0..c.n).map(|i| c.degree(i)).max().unwrap_or(0);
    let max_row_sum = max_deg.min(r - 1) as f64 / r as f64;
    let max_row_sum_full = max_deg as f64 / r as f64;
    let size = r.min(c.n);
    // PSD of every smaller subset follows from the size-`size` ones by interlacing.
    let total = binomial(c.n as u64, size as u64);
    let exhaustive = total <= EXHAUSTIVE_SUBSET_CAP;
    let subsets: Vec<Vec<usize>> = if exhaustive {
        subsets_of_size(c.n, size)
    } else {
        (0..SPOT_CHECKS as u64)
            .map(|i| {
                let mut rng = stream(seed, tag::SUBSETS, i);
                let mut s = sample(&mut rng, c.n, size).into_vec();
                s.sort_unstable();
                s
            })
            .collect()
    };
    let mins: Vec<f64> = subsets
        .par_iter()
        .map(|s| sym_eigenvalues(&m_s(c, r, s)).first().copied().unwrap_or(1.0))
        .collect();
    let min_eigenvalue = mins.iter().copied().fold(1.0, f64::min);
    let failures: Vec<Vec<usize>> =
        subsets.iter().zip(&mins).filter(|(_, &m)| m < -PSD_TOL).map(|(s, _)| s.clone()).take(10).collect();
    let min_eigenvalue_full = (c.n <= 512).then(|| {
        let all: Vec<usize> = (0..c.n).collect();
        sym_eigenvalues(&m_s(c, r, &all)).first().copied().unwrap_or(1.0)
    });
    let diagonally_dominant = max_row_sum <= 1.0;
    Ok(EmbeddingReport {
        rounds,
        r,
        max_row_sum,
        max_row_sum_full,
        diagonally_dominant,
        boundary: max_deg == r,
        exhaustive,
        subsets_checked: subsets.len() as u64,
        subset_size: size,
        min_eigenvalue,
        min_eigenvalue_full,
        pass: diagonally_dominant && failures.is_empty(),
        failures,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FProperties {
    pub points: usize,
    /// `max |f(z) + f(−z)|`.
    pub odd_residual: f64,
    /// `min_{z ∈ [0,1]} f(z) − (2/π)z`.
    pub linear_margin: f64,
    /// Finite-difference derivatives of `f(z) − (2/π)z` that were negative.
    pub derivative_negatives: usize,
    pub pass: bool,
}

/// Oddness and `f(z) ≥ (2/π)z` on a uniform grid over `[−1, 1]`.
pub fn f_properties(points: usize) -> FProperties {
    let grid: Vec<f64> = (0..points).map(|i| -1.0 + 2.0 * i as f64 / (points - 1).max(1) as f64).collect();
    let odd_residual = grid.iter().map(|&z| (f(z) + f(-z)).abs()).fold(0.0, f64::max);
    let linear_margin = grid.iter().filter(|&&z| z >= 0.0).map(|&z| f(z) - 2.0 / PI * z).fold(f64::INFINITY, f64::min);
    let h = 1e-6;
    let g = |z: f64| f(z) - 2.0 / PI * z;
    let derivative_negatives =
        grid.iter().filter(|&&z| z > h && z < 1.0 - h).filter(|&&z| g(z + h) - g(z - h) < 0.0).count();
    FProperties {
        points,
        odd_residual,
        linear_margin,
        derivative_negatives,
        pass: odd_residual <= 1e-12 && linear_margin >= -1e-12 && derivative_negatives == 0,
    }
}

/// `½ + (2/π)/(2R+3)` against the proposition's `½ + 1/(πR) − 1/(2R²)`.
pub fn lb_arithmetic(rounds: usize) -> (f64, f64) {
    let rf = rounds as f64;
    (0.5 + 2.0 / PI / (2.0 * rf + 3.0), 0.5 + 1.0 / (PI * rf) - 0.5 / (rf * rf))
}
