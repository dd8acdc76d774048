//! Closed-form and brute-force oracles computed independently of the library.

use spidercert::bench::{brute_csp, brute_graph, eig_bounds};
use spidercert::certifier::{beta_paper, beta_sharp, certify_maxcut, select_parameters, ParamChoice};
use spidercert::csp::{fourier, gen_csp, flatten_even, lift_odd, weight_dist_stats, KeySpace, Predicate, XorInstance};
use spidercert::feaspoint::{cmm_point, feasible_value, Constraints};
use spidercert::graph::{SignedGraph, WalkKind, WalkOperator};
use spidercert::spider::{build_psi, build_spider, canonical_alpha};
use std::collections::VecDeque;
use std::f64::consts::{E, PI};

/// Spider adjacency written out directly: root 0, leg `j` depth `t` at `1 + jℓ + t − 1`.
fn spider_distances(k: usize, ell: usize) -> Vec<Vec<usize>> {
    let n = k * ell + 1;
    let mut adj = vec![Vec::new(); n];
    for j in 0..k {
        let mut prev = 0;
        for t in 1..=ell {
            let v = 1 + j * ell + t - 1;
            adj[prev].push(v);
            adj[v].push(prev);
            prev = v;
        }
    }
    (0..n)
        .map(|s| {
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &w in &adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        q.push_back(w);
                    }
                }
            }
            dist
        })
        .collect()
}

fn theorem_values(k: usize, ell: usize, a: f64) -> Vec<f64> {
    let kf = k as f64;
    let a2l = a.powi(2 * ell as i32);
    let mut v = vec![0.0; 2 * ell + 1];
    v[0] = 1.0 + a2l / (2.0 * kf) + (a2l - a * a) / ((kf - 1.0) * (a * a - 1.0));
    v[1] = a;
    v[2 * ell] += (1.0 - 1.0 / kf) / 2.0 * a2l;
    v
}

#[test]
fn spider_inner_products_from_bfs_distances() {
    for &(k, ell, a) in &[(3, 1, 3f64.sqrt()), (4, 2, 1.7), (9, 2, 3f64.sqrt()), (5, 3, 0.8), (27, 3, 27f64.powf(1.0 / 6.0))] {
        let sm = build_psi(&build_spider(k, ell).unwrap(), a).unwrap();
        let psi = sm.psi.as_ref().expect("dense Ψ");
        let dist = spider_distances(k, ell);
        let mut by_d = vec![0.0; 2 * ell + 1];
        for (s, row) in dist.iter().enumerate() {
            for (t, &d) in row.iter().enumerate() {
                by_d[d] += psi[(s, t)];
            }
        }
        let want = theorem_values(k, ell, a);
        for d in 0..=2 * ell {
            assert!((by_d[d] - want[d]).abs() <= 1e-9 * want[d].abs().max(1.0), "k={k} ℓ={ell} d={d}: {} vs {}", by_d[d], want[d]);
        }
    }
}

#[test]
fn corollary_range_of_c0() {
    // c₀ ∈ [3/2, 2] whenever k ≥ 3^ℓ and α = k^{1/2ℓ}
    for ell in 1..=3usize {
        for k in [3usize.pow(ell as u32), 3usize.pow(ell as u32) + 5, 1000] {
            let c0 = theorem_values(k, ell, canonical_alpha(k, ell))[0];
            assert!((1.5..=2.0).contains(&c0), "k={k} ℓ={ell} c0={c0}");
        }
    }
}

#[test]
fn complete_graph_anchor() {
    let g = SignedGraph::complete(256).unwrap();
    let op = WalkOperator::new(&g).unwrap();
    assert!((op.radius(WalkKind::Centered).unwrap() - 1.0 / 255.0).abs() < 1e-12);
    let p = select_parameters(0.04, 1.0 / 256.0, 1.0 / 255.0).unwrap();
    // ℓ = ⌈¼ ln(0.04² / 256) / ln(25/255)⌉ = ⌈0.8256…⌉
    assert_eq!((p.k, p.ell), (390_625, 2));
    let alpha = 25.0;
    let a4: f64 = 390_625.0;
    let c0 = 1.0 + a4 / (2.0 * a4) + (a4 - 625.0) / (390_624.0 * 624.0);
    let gamma = 16.0 * (1.0f64 / 255.0).powi(4);
    let bp = a4 * gamma / (2.0 * alpha) + 2.0 / alpha;
    let bs = (c0 + 0.5 * 390_624.0 * gamma) / alpha;
    assert!((beta_paper(p.k, p.ell, 1.0 / 256.0, 1.0 / 255.0) - bp).abs() < 1e-12);
    assert!((beta_sharp(c0, p.k, p.ell, 1.0 / 256.0, 1.0 / 255.0) - bs).abs() < 1e-12);
    let cert = certify_maxcut(&g, ParamChoice::Epsilon(0.04)).unwrap();
    assert!((cert.bound_paper - (0.5 + bp / 2.0)).abs() < 1e-9);
    assert!((cert.bound_obj - (0.5 + bs / 2.0)).abs() < 1e-9);
    assert!((eig_bounds(&g).unwrap().walk - (0.5 + 1.0 / 510.0)).abs() < 1e-9);
}

#[test]
fn w_distribution_exact_moments() {
    // exact E|X| by convolving N independent {−1, 0, +1} atoms
    let exact_abs = |n: usize, p: f64| {
        let mut dist = vec![1.0];
        for _ in 0..n {
            let mut next = vec![0.0; dist.len() + 2];
            for (i, &q) in dist.iter().enumerate() {
                next[i] += q * p / 2.0;
                next[i + 1] += q * (1.0 - p);
                next[i + 2] += q * p / 2.0;
            }
            dist = next;
        }
        let mid = n as f64;
        dist.iter().enumerate().map(|(i, q)| q * (i as f64 - mid).abs()).sum::<f64>()
    };
    for &(n, p) in &[(100usize, 0.5), (100, 0.005), (1000, 0.05)] {
        let s = weight_dist_stats(n as u64, p, 100_000, 17).unwrap();
        let e = exact_abs(n, p);
        assert!((s.abs_mean - e).abs() <= 4.0 * s.abs_mean_se, "N={n} p={p}: {} vs {e}", s.abs_mean);
        let pn = p * n as f64;
        let bound = if pn >= 1.0 { 2.0 / E.powf(1.5) * pn.sqrt() } else { (1.0 / (1.0 - pn)).ln() / (2.0 * E) };
        assert!(e >= bound, "exact E|X| = {e} below {bound}");
    }
}

#[test]
fn fourier_of_and_by_hand() {
    // AND: P(z) = (1 + z₁)(1 + z₂)/4
    let f = fourier(&Predicate::from_bits("1000").unwrap());
    assert_eq!(f.numerators.iter().map(|&c| c as f64 / 4.0).collect::<Vec<_>>(), vec![0.25; 4]);
}

#[test]
fn flattening_example_terms() {
    // x₁x₂x₃x₄ pairs flat variables (1,2) and (3,4)
    let inst = XorInstance::from_terms(4, 4, [(vec![0, 1, 2, 3], 3)]).unwrap();
    let flat = flatten_even(&inst).unwrap().instance;
    let ks = KeySpace { n: 4, k: 2 };
    let (y, z) = (ks.encode(&[0, 1]) as usize, ks.encode(&[2, 3]) as usize);
    assert_eq!(flat.iter().collect::<Vec<_>>(), vec![(vec![y, z], 3)]);
    // the lift puts y_{(1,2)} against z_{(3), i_U}
    let odd = XorInstance::from_terms(3, 3, [(vec![0, 1, 2], 1)]).unwrap();
    let lift = lift_odd(&odd, 9).unwrap();
    let (terms, i) = (lift.instance.iter().collect::<Vec<_>>(), lift.lift_indices.values().next().copied().unwrap());
    assert_eq!(terms, vec![(vec![1, 9 + 2 * 3 + i], 1)]);
}

#[test]
fn classic_brute_force_values() {
    assert!((brute_graph(&SignedGraph::complete(3).unwrap()).unwrap().value - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(brute_graph(&SignedGraph::cycle(4).unwrap()).unwrap().value, 1.0);
    assert!((brute_graph(&SignedGraph::cycle(5).unwrap()).unwrap().value - 0.8).abs() < 1e-15);
    // every 2-parity clause on distinct variables is satisfiable alone
    let inst = gen_csp(6, &Predicate::parity(2, false), 1.0, 2).unwrap();
    assert!(inst.m() <= 3);
}

#[test]
fn feasible_value_closed_form() {
    let pm = cmm_point(&Constraints::new(2, [(0, 1, -1)]).unwrap(), 1).unwrap();
    let want = 0.5 + 0.5 * (1.0 - 2.0 / PI * (0.2f64).acos());
    assert!((feasible_value(&pm) - want).abs() < 1e-12);
    assert!(feasible_value(&pm) >= 0.5 + 1.0 / (5.0 * PI));
}

#[test]
fn and_csp_optimum_by_enumeration() {
    let inst = gen_csp(7, &Predicate::and(2), 15.0, 4).unwrap();
    let naive = (0..128u32)
        .map(|mask| {
            let x: Vec<i8> = (0..7).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            let ks = inst.keys();
            inst.clauses
                .iter()
                .filter(|c| {
                    let v = ks.decode(c.key);
                    (0..2).all(|a| x[v[a]] * if c.zeta >> a & 1 == 1 { -1 } else { 1 } == 1)
                })
                .count()
        })
        .max()
        .unwrap();
    assert_eq!(brute_csp(&inst).unwrap().numerator, naive as i64);
}
