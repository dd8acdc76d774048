use super::{Arc, SignedGraph};
use crate::error::{Error, Result};
use rand::Rng;
use std::collections::VecDeque;

/// Default cap on `|V|^|T|` for exact enumeration (24 bits).
pub const DEFAULT_MAX_SUPPORT: u64 = 1 << 24;

/// Finite tree on `0..size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    adj: Vec<Vec<usize>>,
}

impl Tree {
    pub fn new(size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("tree must have at least one vertex".into()));
        }
        if edges.len() != size - 1 {
            return Err(Error::InvalidParameter(format!(
                "a tree on {size} vertices has {} edges, got {}",
                size - 1,
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); size];
        for &(a, b) in edges {
            if a >= size || b >= size || a == b {
                return Err(Error::InvalidParameter(format!("bad tree edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        let tree = Self { adj };
        if tree.distances_from(0).contains(&usize::MAX) {
            return Err(Error::InvalidParameter("tree edges do not connect all vertices".into()));
        }
        Ok(tree)
    }

    /// Path with `len` edges.
    pub fn path(len: usize) -> Self {
        let edges: Vec<_> = (0..len).map(|i| (i, i + 1)).collect();
        Self::new(len + 1, &edges).expect("path is a tree")
    }

    pub fn from_adjacency(adj: Vec<Vec<usize>>) -> Result<Self> {
        let mut edges = Vec::new();
        for (a, list) in adj.iter().enumerate() {
            for &b in list {
                if a < b {
                    edges.push((a, b));
                }
            }
        }
        Self::new(adj.len(), &edges)
    }

    pub fn size(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// BFS distances; `usize::MAX` for unreachable vertices.
    pub fn distances_from(&self, v: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.size()];
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(a) = queue.pop_front() {
            for &b in &self.adj[a] {
                if dist[b] == usize::MAX {
                    dist[b] = dist[a] + 1;
                    queue.push_back(b);
                }
            }
        }
        dist
    }

    /// BFS order from `root` and the parent of each visited vertex.
    pub fn bfs(&self, root: usize) -> (Vec<usize>, Vec<Option<usize>>) {
        let mut order = Vec::with_capacity(self.size());
        let mut parent = vec![None; self.size()];
        let mut seen = vec![false; self.size()];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            order.push(a);
            for &b in &self.adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    parent[b] = Some(a);
                    queue.push_back(b);
                }
            }
        }
        (order, parent)
    }
}

/// One homomorphism `φ: T → V` with its induced signing.
#[derive(Debug, Clone)]
pub struct WalkSample<'a> {
    pub tree: &'a Tree,
    pub phi: Vec<usize>,
    pub sigma: Vec<i8>,
    pub log_weight: f64,
}

impl WalkSample<'_> {
    pub fn probability(&self) -> f64 {
        self.log_weight.exp()
    }
}

/// Exact enumeration of the stationary `T`-indexed walk.
///
/// Each homomorphism is yielded once with its probability
/// `π(φ(root)) · Π K(φ(parent), φ(child))`. The root sign is fixed to `+1`;
/// the flipped signing has the same weight and is not listed separately.
pub struct TreeWalks<'a> {
    graph: &'a SignedGraph,
    tree: &'a Tree,
    order: Vec<usize>,
    parent_pos: Vec<usize>,
    idx: Vec<usize>,
    phi: Vec<usize>,
    done: bool,
}

pub fn enumerate_tree_walks<'a>(
    g: &'a SignedGraph,
    tree: &'a Tree,
    root: usize,
    max_support: u64,
) -> Result<TreeWalks<'a>> {
    if root >= tree.size() {
        return Err(Error::InvalidParameter(format!("root {root} is not a tree vertex")));
    }
    let estimate = (g.n() as f64).powi(tree.size() as i32);
    if estimate > max_support as f64 {
        return Err(Error::EnumerationTooLarge { estimate, cap: max_support });
    }
    let (order, parent) = tree.bfs(root);
    let mut position = vec![0; tree.size()];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    let parent_pos = order.iter().map(|&v| parent[v].map_or(0, |p| position[p])).collect();
    let mut walks = TreeWalks {
        graph: g,
        tree,
        order,
        parent_pos,
        idx: vec![0; tree.size()],
        phi: vec![0; tree.size()],
        done: false,
    };
    walks.fill_from(1);
    Ok(walks)
}

impl<'a> TreeWalks<'a> {
    fn arc(&self, p: usize) -> &'a Arc {
        &self.graph.neighbors(self.phi[self.parent_pos[p]])[self.idx[p]]
    }

    /// Recomputes `phi` for positions `from..` after their indices changed.
    fn fill_from(&mut self, from: usize) {
        self.phi[0] = self.idx[0];
        for p in from..self.order.len() {
            self.phi[p] = self.arc(p).to;
        }
    }

    fn current(&self) -> WalkSample<'a> {
        let g = self.graph;
        let size = self.order.len();
        let mut phi = vec![0; size];
        let mut sigma = vec![0i8; size];
        let root = self.order[0];
        phi[root] = self.phi[0];
        sigma[root] = 1;
        let mut log_weight = g.pi()[self.phi[0]].ln();
        for p in 1..size {
            let arc = self.arc(p);
            let v = self.order[p];
            let parent = self.order[self.parent_pos[p]];
            phi[v] = arc.to;
            sigma[v] = arc.sign * sigma[parent];
            log_weight += (arc.multiplicity as f64 / g.degree(self.phi[self.parent_pos[p]]) as f64).ln();
        }
        WalkSample { tree: self.tree, phi, sigma, log_weight }
    }

    fn advance(&mut self) {
        let mut p = self.order.len();
        while p > 0 {
            p -= 1;
            self.idx[p] += 1;
            let limit = if p == 0 {
                self.graph.n()
            } else {
                self.graph.neighbors(self.phi[self.parent_pos[p]]).len()
            };
            if self.idx[p] < limit {
                for later in &mut self.idx[p + 1..] {
                    *later = 0;
                }
                // Positions before `p` are unchanged; `p` itself moved.
                self.fill_from(p.max(1));
                return;
            }
        }
        self.done = true;
    }
}

impl<'a> Iterator for TreeWalks<'a> {
    type Item = WalkSample<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let sample = self.current();
        self.advance();
        Some(sample)
    }
}

/// Monte Carlo draws from the stationary `T`-indexed walk.
#[derive(Debug, Clone)]
pub struct TreeWalkSampler<'a> {
    graph: &'a SignedGraph,
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    cum_deg: Vec<u64>,
    cum_arc: Vec<Vec<u64>>,
}

impl<'a> TreeWalkSampler<'a> {
    pub fn new(g: &'a SignedGraph, tree: &Tree, root: usize) -> Self {
        let (order, parent) = tree.bfs(root);
        let cum_deg = g
            .degrees()
            .iter()
            .scan(0u64, |acc, &d| {
                *acc += d;
                Some(*acc)
            })
            .collect();
        let cum_arc = (0..g.n())
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .scan(0u64, |acc, a| {
                        *acc += a.multiplicity;
                        Some(*acc)
                    })
                    .collect()
            })
            .collect();
        Self { graph: g, order, parent, cum_deg, cum_arc }
    }

    /// Vertex drawn from `π`.
    pub fn stationary<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r = rng.random_range(0..self.graph.total_degree());
        self.cum_deg.partition_point(|&c| c <= r)
    }

    /// One step of the walk from `v`.
    pub fn step<R: Rng + ?Sized>(&self, rng: &mut R, v: usize) -> &'a Arc {
        let r = rng.random_range(0..self.graph.degree(v));
        let i = self.cum_arc[v].partition_point(|&c| c <= r);
        &self.graph.neighbors(v)[i]
    }

    /// Fills `phi` and `sigma` (indexed by tree vertex) with a fresh draw.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, phi: &mut [usize], sigma: &mut [i8]) {
        let root = self.order[0];
        phi[root] = self.stationary(rng);
        sigma[root] = if rng.random::<bool>() { 1 } else { -1 };
        for &v in &self.order[1..] {
            let p = self.parent[v].expect("non-root has a parent");
            let arc = self.step(rng, phi[p]);
            phi[v] = arc.to;
            sigma[v] = arc.sign * sigma[p];
        }
    }
}
