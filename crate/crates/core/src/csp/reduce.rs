//! Reductions from arity-`k` XOR to 2-XOR and from 2-XOR to signed graphs.

use super::xor::{monomial, KeySpace, XorInstance};
use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::rng::{stream, tag};
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReductionKind {
    /// Arity 2 already.
    Identity,
    /// Arity `2q`; `y_S = x^S` for `S ∈ [n]^q`.
    Flatten { q: usize },
    /// Arity `2q+1`; `y_S = x^S` for `S ∈ [n]^{q+1}` and `z_{T,i} = x^T`
    /// for `T ∈ [n]^q`, `i ∈ [n]`.
    Lift { q: usize },
}

#[derive(Debug, Clone)]
pub struct Reduction {
    pub kind: ReductionKind,
    pub n: usize,
    /// The arity-2 instance on tuple variables.
    pub instance: XorInstance,
    /// Round multiplier from tuple variables back to `x`.
    pub degree_factor: usize,
    /// `i_U` per original key (lift only).
    pub lift_indices: BTreeMap<u64, usize>,
}

impl Reduction {
    /// Tuple-variable assignment induced by `x`.
    pub fn pullback(&self, x: &[i8]) -> Vec<i8> {
        match self.kind {
            ReductionKind::Identity => x.to_vec(),
            ReductionKind::Flatten { q } => tuple_values(self.n, q, x),
            ReductionKind::Lift { q } => {
                let mut y = tuple_values(self.n, q + 1, x);
                for t in tuple_values(self.n, q, x) {
                    y.extend(std::iter::repeat_n(t, self.n));
                }
                y
            }
        }
    }

    /// Index of `z_{T,i}` for a lift.
    pub fn z_index(&self, t_key: u64, i: usize) -> usize {
        match self.kind {
            ReductionKind::Lift { q } => {
                let ys = (self.n as u64).pow(q as u32 + 1);
                (ys + t_key * self.n as u64 + i as u64) as usize
            }
            _ => panic!("z variables exist only for lifts"),
        }
    }
}

/// `x^S` for every `S ∈ [n]^q` in key order.
fn tuple_values(n: usize, q: usize, x: &[i8]) -> Vec<i8> {
    let ks = KeySpace { n, k: q };
    let mut vars = vec![0; q];
    (0..ks.size())
        .map(|key| {
            ks.decode_into(key, &mut vars);
            monomial(x, &vars) as i8
        })
        .collect()
}

/// Even arity `2q`: `U = (S, T)` with `S` the first `q` entries. Packed keys
/// are unchanged because base-`n` digits split at the same place.
pub fn flatten_even(inst: &XorInstance) -> Result<Reduction> {
    if !inst.k.is_multiple_of(2) {
        return Err(Error::InvalidInstance(format!("flattening needs even arity, got {}", inst.k)));
    }
    let q = inst.k / 2;
    let flat_n = KeySpace::new(inst.n, q)?.size() as usize;
    let kind = if q == 1 { ReductionKind::Identity } else { ReductionKind::Flatten { q } };
    Ok(Reduction {
        kind,
        n: inst.n,
        instance: XorInstance { n: flat_n, k: 2, terms: inst.terms.clone() },
        degree_factor: q,
        lift_indices: BTreeMap::new(),
    })
}

/// Odd arity `2q+1 ≥ 3`: each `U = (S, T)` with `|S| = q+1` becomes the
/// term `b_U y_S z_{T,i_U}` for a uniformly random `i_U`.
pub fn lift_odd(inst: &XorInstance, seed: u64) -> Result<Reduction> {
    if inst.k.is_multiple_of(2) {
        return Err(Error::InvalidInstance(format!("lifting needs odd arity, got {}", inst.k)));
    }
    if inst.k == 1 {
        return Err(Error::InvalidInstance(
            "arity-1 instances are bounded directly by Σ|w|; they are not lifted".into(),
        ));
    }
    let q = (inst.k - 1) / 2;
    let n = inst.n as u64;
    let tail = n.pow(q as u32);
    let ys = n.pow(q as u32 + 1);
    let total = 2 * ys;
    KeySpace::new(total as usize, 2)?;
    let mut rng = stream(seed, tag::LIFT, 0);
    let mut out = XorInstance::new(total as usize, 2)?;
    let mut lift_indices = BTreeMap::new();
    for (&key, &w) in &inst.terms {
        let (s, t) = (key / tail, key % tail);
        let i = rng.random_range(0..inst.n);
        lift_indices.insert(key, i);
        let z = ys + t * n + i as u64;
        out.add_key(s * total + z, w);
    }
    Ok(Reduction { kind: ReductionKind::Lift { q }, n: inst.n, instance: out, degree_factor: q + 1, lift_indices })
}

/// Flattens or lifts according to arity.
pub fn reduce_to_2xor(inst: &XorInstance, seed: u64) -> Result<Reduction> {
    if inst.k.is_multiple_of(2) {
        flatten_even(inst)
    } else {
        lift_odd(inst, seed)
    }
}

/// Signed multigraph of an arity-2 instance: `2B = W + Wᵀ` gives
/// `|W_ij + W_ji|` parallel edges of sign `sgn(W_ij + W_ji)` for `i ≠ j`, and
/// `2|W_ii|` loops at `i`.
#[derive(Debug, Clone)]
pub struct FlatGraph {
    pub graph: SignedGraph,
    /// Instance variable behind each graph vertex.
    pub variables: Vec<usize>,
    pub m_abs: u64,
    /// `Σ deg / (2 m_abs) ≤ 1`.
    pub scale: f64,
}

impl FlatGraph {
    /// Restricts a tuple assignment to graph vertices.
    pub fn restrict(&self, y: &[i8]) -> Vec<i8> {
        self.variables.iter().map(|&v| y[v]).collect()
    }
}

/// `None` when every term cancels in `W + Wᵀ`.
pub fn to_graph(inst: &XorInstance) -> Result<Option<FlatGraph>> {
    if inst.k != 2 {
        return Err(Error::InvalidInstance(format!("graph construction needs arity 2, got {}", inst.k)));
    }
    let ks = inst.keys();
    let mut sym: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for (&key, &w) in &inst.terms {
        let v = ks.decode(key);
        let (i, j) = (v[0].min(v[1]), v[0].max(v[1]));
        *sym.entry((i, j)).or_insert(0) += if i == j { 2 * w } else { w };
    }
    sym.retain(|_, w| *w != 0);
    if sym.is_empty() {
        return Ok(None);
    }
    let mut variables: Vec<usize> = sym.keys().flat_map(|&(i, j)| [i, j]).collect();
    variables.sort_unstable();
    variables.dedup();
    let index: BTreeMap<usize, usize> = variables.iter().enumerate().map(|(a, &v)| (v, a)).collect();
    let graph = SignedGraph::new(
        variables.len(),
        sym.iter().map(|(&(i, j), &w)| (index[&i], index[&j], w.unsigned_abs(), w.signum() as i8)),
    )?;
    let m_abs = inst.m_abs();
    let scale = graph.total_degree() as f64 / (2.0 * m_abs as f64);
    Ok(Some(FlatGraph { graph, variables, m_abs, scale }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_assignments(n: usize) -> impl Iterator<Item = Vec<i8>> {
        (0..1u32 << n).map(move |mask| (0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    #[test]
    fn arity_two_is_identity() {
        let inst = XorInstance::from_terms(3, 2, [(vec![0, 1], 1), (vec![2, 1], -1)]).unwrap();
        let r = flatten_even(&inst).unwrap();
        assert_eq!(r.kind, ReductionKind::Identity);
        assert_eq!(r.instance, inst);
    }

    #[test]
    fn single_four_term() {
        let inst = XorInstance::from_terms(4, 4, [(vec![0, 1, 2, 3], 5)]).unwrap();
        let r = flatten_even(&inst).unwrap();
        let ks = KeySpace { n: 4, k: 2 };
        let expected = XorInstance::from_terms(16, 2, [(vec![ks.encode(&[0, 1]) as usize, ks.encode(&[2, 3]) as usize], 5)]).unwrap();
        assert_eq!(r.instance, expected);
    }

    #[test]
    fn full_four_xor_pullback() {
        let mut inst = XorInstance::new(3, 4).unwrap();
        for key in 0..81 {
            inst.add_key(key, 1);
        }
        let r = flatten_even(&inst).unwrap();
        assert_eq!(r.instance.n, 9);
        assert_eq!(r.instance.terms.len(), 81);
        for x in all_assignments(3) {
            assert_eq!(inst.value(&x), r.instance.value(&r.pullback(&x)));
        }
    }

    #[test]
    fn single_three_term_lift() {
        let inst = XorInstance::from_terms(3, 3, [(vec![0, 1, 2], -2)]).unwrap();
        let r = lift_odd(&inst, 4).unwrap();
        assert_eq!(r.degree_factor, 2);
        let i = r.lift_indices[&inst.keys().encode(&[0, 1, 2])];
        let y = KeySpace { n: 3, k: 2 }.encode(&[0, 1]) as usize;
        let z = r.z_index(2, i);
        let expected = XorInstance::from_terms(18, 2, [(vec![y, z], -2)]).unwrap();
        assert_eq!(r.instance, expected);
    }

    #[test]
    fn lift_rejects_bad_arity() {
        assert!(lift_odd(&XorInstance::from_terms(2, 1, [(vec![0], 1)]).unwrap(), 0).is_err());
        assert!(lift_odd(&XorInstance::new(2, 2).unwrap(), 0).is_err());
        assert!(flatten_even(&XorInstance::new(2, 3).unwrap()).is_err());
    }

    #[test]
    fn graph_form_matches_instance() {
        let inst = XorInstance::from_terms(
            4,
            2,
            [(vec![0, 1], 2), (vec![1, 0], 1), (vec![2, 2], -1), (vec![2, 3], 1), (vec![3, 2], -1), (vec![0, 2], -3)],
        )
        .unwrap();
        let fg = to_graph(&inst).unwrap().unwrap();
        assert_eq!(fg.graph.multiplicity(0, 1), 3);
        assert!(fg.scale <= 1.0);
        for x in all_assignments(4) {
            assert_eq!(2 * inst.value(&x), fg.graph.signed_form(&fg.restrict(&x)));
        }
        // Vertex 3 only touches the cancelled pair, so it is dropped.
        assert_eq!(fg.variables, vec![0, 1, 2]);
    }

    #[test]
    fn fully_cancelling_instance_has_no_graph() {
        let inst = XorInstance::from_terms(2, 2, [(vec![0, 1], 1), (vec![1, 0], -1)]).unwrap();
        assert!(to_graph(&inst).unwrap().is_none());
    }
}
