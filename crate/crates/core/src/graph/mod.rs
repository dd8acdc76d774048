//! Signed multigraphs and the random-walk operators living on them.
//!
//! Vertices are `0..n`. A self-loop contributes 1 to its vertex's degree and
//! counts as half an edge, so `Σ_v deg(v) = 2|E|` always holds. All parallel
//! copies of an edge share one sign.

mod tree;
mod walk;

pub use tree::{enumerate_tree_walks, Tree, TreeWalkSampler, TreeWalks, WalkSample, DEFAULT_MAX_SUPPORT};
pub use walk::{spectral_radius, spectral_radius_with, WalkKind, WalkOperator};

use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// One (possibly repeated) edge. `u <= v`; `u == v` is a self-loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub multiplicity: u64,
    pub sign: i8,
}

/// Neighbour entry of the adjacency list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub to: usize,
    pub multiplicity: u64,
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Arc>>,
    deg: Vec<u64>,
    total_degree: u64,
    pi: Vec<f64>,
    pi_star: f64,
}

impl SignedGraph {
    /// Builds a graph on `0..n` from `(u, v, multiplicity, sign)` tuples.
    ///
    /// Repeated `(u, v)` entries are merged by adding multiplicities; they
    /// must agree in sign.
    pub fn new<I>(n: usize, edge_list: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64, i8)>,
    {
        let mut merged: BTreeMap<(usize, usize), (u64, i8)> = BTreeMap::new();
        for (a, b, mult, sign) in edge_list {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if sign != 1 && sign != -1 {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has sign {sign}, expected ±1")));
            }
            if mult == 0 {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has zero multiplicity")));
            }
            let key = (a.min(b), a.max(b));
            match merged.get_mut(&key) {
                Some((m, s)) => {
                    if *s != sign {
                        return Err(Error::SignConflict { u: key.0, v: key.1 });
                    }
                    *m += mult;
                }
                None => {
                    merged.insert(key, (mult, sign));
                }
            }
        }
        if merged.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        let edges: Vec<Edge> = merged
            .into_iter()
            .map(|((u, v), (multiplicity, sign))| Edge { u, v, multiplicity, sign })
            .collect();

        let mut adjacency = vec![Vec::new(); n];
        let mut deg = vec![0u64; n];
        for e in &edges {
            adjacency[e.u].push(Arc { to: e.v, multiplicity: e.multiplicity, sign: e.sign });
            deg[e.u] += e.multiplicity;
            if e.u != e.v {
                adjacency[e.v].push(Arc { to: e.u, multiplicity: e.multiplicity, sign: e.sign });
                deg[e.v] += e.multiplicity;
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|a| a.to);
        }
        if let Some(v) = deg.iter().position(|&d| d == 0) {
            return Err(Error::IsolatedVertex(v));
        }
        let total_degree: u64 = deg.iter().sum();
        let pi: Vec<f64> = deg.iter().map(|&d| d as f64 / total_degree as f64).collect();
        let pi_star = pi.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { n, edges, adjacency, deg, total_degree, pi, pi_star })
    }

    /// Infers `n` as one past the largest endpoint.
    pub fn from_edges<I>(edge_list: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, u64, i8)>,
    {
        let list: Vec<_> = edge_list.into_iter().collect();
        let n = list.iter().map(|&(u, v, _, _)| u.max(v) + 1).max().unwrap_or(0);
        Self::new(n, list)
    }

    /// Simple graph with every edge signed `-1` (the max-cut convention).
    pub fn unsigned<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::new(n, pairs.into_iter().map(|(u, v)| (u, v, 1, -1)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::unsigned(n, (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))))
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::unsigned(n, (0..n).map(|u| (u, (u + 1) % n)))
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::unsigned(n, (0..n.saturating_sub(1)).map(|u| (u, u + 1)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[Arc] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> u64 {
        self.deg[v]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.deg
    }

    /// `Σ_v deg(v)`, i.e. `2|E|` with loops counted as half edges.
    pub fn total_degree(&self) -> u64 {
        self.total_degree
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn pi_star(&self) -> f64 {
        self.pi_star
    }

    pub fn min_degree(&self) -> u64 {
        self.deg.iter().copied().min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> u64 {
        self.deg.iter().copied().max().unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        self.deg.windows(2).all(|w| w[0] == w[1])
    }

    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(|e| e.u == e.v)
    }

    pub fn is_simple(&self) -> bool {
        self.edges.iter().all(|e| e.u != e.v && e.multiplicity == 1)
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> u64 {
        self.arc(u, v).map_or(0, |a| a.multiplicity)
    }

    pub fn sign(&self, u: usize, v: usize) -> Option<i8> {
        self.arc(u, v).map(|a| a.sign)
    }

    fn arc(&self, u: usize, v: usize) -> Option<&Arc> {
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |a| a.to).ok().map(|i| &list[i])
    }

    /// Same multigraph with every sign replaced by `f(edge)`.
    pub fn resigned<F: FnMut(&Edge) -> i8>(&self, mut f: F) -> Result<Self> {
        Self::new(self.n, self.edges.iter().map(|e| (e.u, e.v, e.multiplicity, f(e))))
    }

    /// Flips every sign; the certificate for `-K̄` is built on this graph.
    pub fn negated(&self) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.sign = -e.sign;
        }
        for list in &mut g.adjacency {
            for a in list.iter_mut() {
                a.sign = -a.sign;
            }
        }
        g
    }

    /// `Σ_{(u,v) directed} ξ_uv·mult·x_u x_v` over ordered pairs, with a loop
    /// counted once. Equals `2|E|·⟨x, K̄x⟩_π`.
    pub fn signed_form(&self, x: &[i8]) -> i64 {
        self.edges
            .iter()
            .map(|e| {
                let w = e.multiplicity as i64 * e.sign as i64;
                if e.u == e.v {
                    w
                } else {
                    2 * w * (x[e.u] as i64) * (x[e.v] as i64)
                }
            })
            .sum()
    }

    /// Satisfied numerator over `2|E|`: `(2|E| + signed_form) / 2`.
    pub fn satisfied_numerator(&self, x: &[i8]) -> u64 {
        ((self.total_degree as i64 + self.signed_form(x)) / 2) as u64
    }

    /// Fraction of satisfied constraints `ξ_uv x_u x_v = 1` under the uniform
    /// directed-edge distribution.
    pub fn objective(&self, x: &[i8]) -> f64 {
        0.5 + 0.5 * self.signed_form(x) as f64 / self.total_degree as f64
    }

    /// `y = K̄ x` (or `K x` when `signed` is false) without materialising `K`.
    pub fn apply_walk(&self, x: &[f64], y: &mut [f64], signed: bool) {
        for (v, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a in &self.adjacency[v] {
                let s = if signed { a.sign as f64 } else { 1.0 };
                acc += s * a.multiplicity as f64 * x[a.to];
            }
            *out = acc / self.deg[v] as f64;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_uniform() {
        let g = SignedGraph::complete(3).unwrap();
        for &p in g.pi() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!((g.pi_star() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn path_stationary_distribution() {
        let g = SignedGraph::path(3).unwrap();
        assert_eq!(g.pi(), &[0.25, 0.5, 0.25]);
        assert_eq!(g.total_degree(), 4);
    }

    #[test]
    fn single_loop_is_half_an_edge() {
        let g = SignedGraph::new(1, [(0, 0, 1, 1)]).unwrap();
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.total_degree(), 1);
        assert_eq!(g.pi(), &[1.0]);
    }

    #[test]
    fn rejects_isolated_vertex() {
        assert_eq!(SignedGraph::new(3, [(0, 1, 1, 1)]), Err(Error::IsolatedVertex(2)));
    }

    #[test]
    fn rejects_sign_conflict() {
        let err = SignedGraph::new(2, [(0, 1, 1, 1), (1, 0, 2, -1)]).unwrap_err();
        assert_eq!(err, Error::SignConflict { u: 0, v: 1 });
    }

    #[test]
    fn merges_parallel_edges() {
        let g = SignedGraph::new(2, [(0, 1, 1, -1), (1, 0, 2, -1)]).unwrap();
        assert_eq!(g.multiplicity(0, 1), 3);
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SignedGraph::new(2, std::iter::empty()).is_err());
        assert!(SignedGraph::new(2, [(0, 1, 1, 0)]).is_err());
        assert!(SignedGraph::new(2, [(0, 2, 1, 1)]).is_err());
    }

    #[test]
    fn objective_counts_cut_edges() {
        let g = SignedGraph::complete(3).unwrap();
        // One vertex on its own side cuts two of three edges.
        assert!((g.objective(&[1, 1, -1]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(g.satisfied_numerator(&[1, 1, -1]), 4);
        assert_eq!(g.satisfied_numerator(&[1, 1, 1]), 0);
    }
}
