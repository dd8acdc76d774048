//! Exact optima by Gray-code enumeration with single-flip updates.

use crate::csp::{CspInstance, XorInstance};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use rayon::prelude::*;
use serde::Serialize;

pub const BRUTE_FORCE_CAP: usize = 26;
/// High bits fixed per parallel chunk.
const CHUNK_BITS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Optimum {
    /// Optimum is `numerator / denominator` exactly.
    pub numerator: i64,
    pub denominator: i64,
    pub value: f64,
    pub argmax: Vec<i8>,
}

/// An integer objective with `O(deg)` single-variable flips.
trait Incremental: Clone + Send {
    fn vars(&self) -> usize;
    fn reset(&mut self, x: &[i8]);
    /// Flips `x_v` (already flipped in `x`) and updates the value.
    fn flip(&mut self, x: &[i8], v: usize);
    fn value(&self) -> i64;
}

fn assignment(bits: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect()
}

fn maximize<T: Incremental + Sync>(proto: &T) -> (i64, Vec<i8>) {
    let n = proto.vars();
    let low = n.saturating_sub(CHUNK_BITS).min(n);
    let chunks = 1u64 << (n - low);
    let best = (0..chunks)
        .into_par_iter()
        .map(|hi| {
            let mut st = proto.clone();
            let mut x = assignment(hi << low, n);
            st.reset(&x);
            let mut best = (st.value(), x.clone());
            for i in 1u64..1 << low {
                let v = i.trailing_zeros() as usize;
                x[v] = -x[v];
                st.flip(&x, v);
                if st.value() > best.0 {
                    best = (st.value(), x.clone());
                }
            }
            best
        })
        .collect::<Vec<_>>();
    // ties resolve to the earliest chunk
    best.into_iter().fold((i64::MIN, Vec::new()), |acc, b| if b.0 > acc.0 { b } else { acc })
}

fn check_cap(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_CAP {
        return Err(Error::TooLargeForBruteForce { n, cap: BRUTE_FORCE_CAP });
    }
    Ok(())
}

#[derive(Clone)]
struct GraphState<'a> {
    g: &'a SignedGraph,
    form: i64,
}

impl Incremental for GraphState<'_> {
    fn vars(&self) -> usize {
        self.g.n()
    }
    fn reset(&mut self, x: &[i8]) {
        self.form = self.g.signed_form(x);
    }
    fn flip(&mut self, x: &[i8], v: usize) {
        let mut delta = 0i64;
        for a in self.g.neighbors(v) {
            if a.to != v {
                delta += a.sign as i64 * a.multiplicity as i64 * x[a.to] as i64;
            }
        }
        // each ordered pair appears twice and flips from −s to +s
        self.form += 4 * delta * x[v] as i64;
    }
    fn value(&self) -> i64 {
        self.form
    }
}

/// Largest satisfied fraction of `ξ_uv x_u x_v = 1` (the max-cut value for
/// all-negative signs).
pub fn brute_graph(g: &SignedGraph) -> Result<Optimum> {
    check_cap(g.n())?;
    let (form, argmax) = maximize(&GraphState { g, form: 0 });
    let td = g.total_degree() as i64;
    Ok(Optimum { numerator: td + form, denominator: 2 * td, value: (td + form) as f64 / (2 * td) as f64, argmax })
}

#[derive(Clone)]
struct XorState {
    n: usize,
    weights: Vec<i64>,
    /// Terms in which each variable occurs an odd number of times.
    occurs: Vec<Vec<usize>>,
    vars: Vec<Vec<usize>>,
    mono: Vec<i8>,
    total: i64,
}

impl XorState {
    fn new(inst: &XorInstance) -> Self {
        let mut occurs = vec![Vec::new(); inst.n];
        let mut vars = Vec::new();
        let mut weights = Vec::new();
        for (t, (vs, w)) in inst.iter().enumerate() {
            let mut counts = std::collections::BTreeMap::new();
            for &v in &vs {
                *counts.entry(v).or_insert(0) += 1;
            }
            for (v, c) in counts {
                if c % 2 == 1 {
                    occurs[v].push(t);
                }
            }
            vars.push(vs);
            weights.push(w);
        }
        let mono = vec![1; weights.len()];
        Self { n: inst.n, weights, occurs, vars, mono, total: 0 }
    }
}

impl Incremental for XorState {
    fn vars(&self) -> usize {
        self.n
    }
    fn reset(&mut self, x: &[i8]) {
        for (t, vs) in self.vars.iter().enumerate() {
            self.mono[t] = vs.iter().fold(1i8, |a, &v| a * x[v]);
        }
        self.total = self.weights.iter().zip(&self.mono).map(|(w, &m)| w * m as i64).sum();
    }
    fn flip(&mut self, _x: &[i8], v: usize) {
        for &t in &self.occurs[v] {
            self.total -= 2 * self.weights[t] * self.mono[t] as i64;
            self.mono[t] = -self.mono[t];
        }
    }
    fn value(&self) -> i64 {
        self.total
    }
}

/// `max_x ½ + Σ b x^S / (2m)`.
pub fn brute_xor(inst: &XorInstance) -> Result<Optimum> {
    check_cap(inst.n)?;
    let m = inst.m_abs() as i64;
    if m == 0 {
        return Ok(Optimum { numerator: 1, denominator: 2, value: 0.5, argmax: vec![1; inst.n] });
    }
    let (total, argmax) = maximize(&XorState::new(inst));
    Ok(Optimum { numerator: m + total, denominator: 2 * m, value: (m + total) as f64 / (2 * m) as f64, argmax })
}

#[derive(Clone)]
struct CspState<'a> {
    inst: &'a CspInstance,
    /// `(clause, positions mask)` per variable.
    occurs: Vec<Vec<(usize, usize)>>,
    index: Vec<usize>,
    sat: i64,
}

impl<'a> CspState<'a> {
    fn new(inst: &'a CspInstance) -> Self {
        let mut occurs = vec![Vec::new(); inst.n];
        let ks = inst.keys();
        let mut vars = vec![0; inst.k];
        for (c, cl) in inst.clauses.iter().enumerate() {
            ks.decode_into(cl.key, &mut vars);
            let mut masks = std::collections::BTreeMap::new();
            for (a, &v) in vars.iter().enumerate() {
                *masks.entry(v).or_insert(0usize) |= 1 << a;
            }
            for (v, mask) in masks {
                occurs[v].push((c, mask));
            }
        }
        Self { inst, occurs, index: vec![0; inst.clauses.len()], sat: 0 }
    }
}

impl Incremental for CspState<'_> {
    fn vars(&self) -> usize {
        self.inst.n
    }
    fn reset(&mut self, x: &[i8]) {
        let ks = self.inst.keys();
        let mut vars = vec![0; self.inst.k];
        for (c, cl) in self.inst.clauses.iter().enumerate() {
            ks.decode_into(cl.key, &mut vars);
            let mut idx = cl.zeta as usize;
            for (a, &v) in vars.iter().enumerate() {
                if x[v] < 0 {
                    idx ^= 1 << a;
                }
            }
            self.index[c] = idx;
        }
        self.sat = self.index.iter().filter(|&&i| self.inst.predicate.table[i]).count() as i64;
    }
    fn flip(&mut self, _x: &[i8], v: usize) {
        let table = &self.inst.predicate.table;
        for &(c, mask) in &self.occurs[v] {
            let old = self.index[c];
            let new = old ^ mask;
            self.sat += table[new] as i64 - table[old] as i64;
            self.index[c] = new;
        }
    }
    fn value(&self) -> i64 {
        self.sat
    }
}

/// Largest satisfied fraction; `0` for an empty instance.
pub fn brute_csp(inst: &CspInstance) -> Result<Optimum> {
    check_cap(inst.n)?;
    let m = inst.m() as i64;
    if m == 0 {
        return Ok(Optimum { numerator: 0, denominator: 1, value: 0.0, argmax: vec![1; inst.n] });
    }
    let (sat, argmax) = maximize(&CspState::new(inst));
    Ok(Optimum { numerator: sat, denominator: m, value: sat as f64 / m as f64, argmax })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{gen_csp, gen_weighted_xor, Predicate, WeightDist};

    fn naive<F: Fn(&[i8]) -> f64>(n: usize, f: F) -> f64 {
        (0..1u64 << n).map(|b| f(&assignment(b, n))).fold(f64::MIN, f64::max)
    }

    #[test]
    fn classic_cuts() {
        let k3 = brute_graph(&SignedGraph::complete(3).unwrap()).unwrap();
        assert_eq!(k3.numerator * 3, k3.denominator * 2);
        assert_eq!(brute_graph(&SignedGraph::cycle(4).unwrap()).unwrap().value, 1.0);
        let c5 = brute_graph(&SignedGraph::cycle(5).unwrap()).unwrap();
        assert_eq!(c5.numerator * 5, c5.denominator * 4);
        assert_eq!(SignedGraph::cycle(5).unwrap().objective(&c5.argmax), 0.8);
    }

    fn close(o: &Optimum, best: f64, at_argmax: f64) {
        assert!((o.value - best).abs() < 1e-12, "{} vs {best}", o.value);
        assert!((o.value - at_argmax).abs() < 1e-12);
        assert!((o.value - o.numerator as f64 / o.denominator as f64).abs() < 1e-15);
    }

    #[test]
    fn matches_naive_enumeration() {
        for seed in 0..5 {
            let g = crate::bench::gen_gnp(9, 3.0, seed).unwrap();
            let o = brute_graph(&g).unwrap();
            close(&o, naive(g.n(), |x| g.objective(x)), g.objective(&o.argmax));
            let inst = gen_weighted_xor(8, 3, &WeightDist::Rademacher { p: 0.2 }, seed).unwrap();
            let o = brute_xor(&inst).unwrap();
            close(&o, naive(8, |x| inst.objective(x)), inst.objective(&o.argmax));
            let csp = gen_csp(9, &Predicate::and(3), 30.0, seed).unwrap();
            let o = brute_csp(&csp).unwrap();
            close(&o, naive(9, |x| csp.objective(x)), csp.objective(&o.argmax));
        }
    }

    #[test]
    fn repeated_variables() {
        let inst = XorInstance::from_terms(3, 3, [(vec![0, 0, 1], 1), (vec![2, 2, 2], -1), (vec![1, 2, 1], 1)]).unwrap();
        let o = brute_xor(&inst).unwrap();
        close(&o, naive(3, |x| inst.objective(x)), inst.objective(&o.argmax));
    }

    #[test]
    fn cap_enforced() {
        let g = SignedGraph::cycle(27).unwrap();
        assert!(matches!(brute_graph(&g), Err(Error::TooLargeForBruteForce { n: 27, .. })));
    }
}
