use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::rng::{stream, tag};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};
use std::collections::{BTreeMap, HashSet};

/// Attempts made by [`gen_regular`] when a simple graph is requested.
pub const SIMPLE_RETRY_CAP: u64 = 100_000;

/// `G(n, Δ/(n−1))` with all signs `−1`; isolated vertices are dropped and
/// the rest relabelled in order.
pub fn gen_gnp(n: usize, avg_degree: f64, seed: u64) -> Result<SignedGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("G(n, p) needs n ≥ 2, got {n}")));
    }
    let p = avg_degree / (n as f64 - 1.0);
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("average degree {avg_degree} gives p = {p} outside (0, 1]")));
    }
    let mut rng = stream(seed, tag::GRAPH, 0);
    let pairs = (n * (n - 1) / 2) as u64;
    let mut chosen = Vec::new();
    let mut pos = 0u64;
    let geo = (p < 1.0).then(|| Geometric::new(p).expect("p in (0, 1)"));
    loop {
        if let Some(g) = &geo {
            pos = match pos.checked_add(g.sample(&mut rng)) {
                Some(v) => v,
                None => break,
            };
        }
        if pos >= pairs {
            break;
        }
        chosen.push(pair_of(pos, n));
        pos += 1;
    }
    relabel(n, chosen.into_iter().map(|(u, v)| (u, v, 1, -1)))
}

/// Index of `(u, v)`, `u < v`, in row-major order of the strict upper triangle.
fn pair_of(idx: u64, n: usize) -> (usize, usize) {
    let mut u = 0usize;
    let mut rem = idx;
    loop {
        let row = (n - 1 - u) as u64;
        if rem < row {
            return (u, u + 1 + rem as usize);
        }
        rem -= row;
        u += 1;
    }
}

/// Re-signs every edge with an independent uniform sign.
pub fn with_random_signs(g: &SignedGraph, seed: u64) -> Result<SignedGraph> {
    let mut rng = stream(seed, tag::BENCH, 0);
    g.resigned(|_| if rng.random::<bool>() { 1 } else { -1 })
}

/// Drops vertices with no incident edge.
pub fn relabel<I>(n: usize, edges: I) -> Result<SignedGraph>
where
    I: IntoIterator<Item = (usize, usize, u64, i8)>,
{
    let edges: Vec<_> = edges.into_iter().collect();
    let mut used = vec![false; n];
    for &(u, v, _, _) in &edges {
        used[u] = true;
        used[v] = true;
    }
    let index: Vec<usize> = used.iter().scan(0, |c, &u| {
        let i = *c;
        if u {
            *c += 1;
        }
        Some(i)
    }).collect();
    let kept = used.iter().filter(|&&u| u).count();
    SignedGraph::new(kept, edges.into_iter().map(|(u, v, m, s)| (index[u], index[v], m, s)))
}

#[derive(Debug, Clone)]
pub struct RegularGraph {
    pub graph: SignedGraph,
    pub attempts: u64,
    pub simple: bool,
    pub warning: Option<String>,
}

/// Configuration model: `nΔ` half-edges paired uniformly, signs `−1`. A
/// paired loop `(v, v)` is a loop of multiplicity 2, so every degree is `Δ`.
pub fn gen_regular(n: usize, degree: usize, seed: u64, require_simple: bool) -> Result<RegularGraph> {
    if n < 2 || degree == 0 {
        return Err(Error::InvalidParameter(format!("regular graph needs n ≥ 2 and Δ ≥ 1, got n = {n}, Δ = {degree}")));
    }
    if !(n * degree).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("nΔ = {} must be even", n * degree)));
    }
    let cap = if require_simple { SIMPLE_RETRY_CAP } else { 1 };
    for attempt in 0..cap {
        let mut rng = stream(seed, tag::GRAPH, attempt);
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, degree)).collect();
        stubs.shuffle(&mut rng);
        let pairs = stubs.chunks(2).map(|p| (p[0].min(p[1]), p[0].max(p[1])));
        let last = attempt + 1 == cap;
        if require_simple && !last {
            let mut seen = HashSet::with_capacity(stubs.len() / 2);
            if !pairs.clone().all(|(u, v)| u != v && seen.insert((u, v))) {
                continue;
            }
        }
        let mut mult: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for (u, v) in pairs {
            *mult.entry((u, v)).or_insert(0) += if u == v { 2 } else { 1 };
        }
        let simple = mult.iter().all(|(&(u, v), &m)| u != v && m == 1);
        let graph = SignedGraph::new(n, mult.into_iter().map(|((u, v), m)| (u, v, m, -1)))?;
        let warning = (require_simple && !simple).then(|| format!("no simple pairing in {cap} attempts; returning a multigraph"));
        return Ok(RegularGraph { graph, attempts: attempt + 1, simple, warning });
    }
    unreachable!("the final attempt always returns")
}
