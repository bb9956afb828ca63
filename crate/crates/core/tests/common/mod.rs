//! Test-only helpers: random graph generation and independent oracles.
//!
//! Nothing in here calls into the engine's algorithms; oracles are written
//! from the definitions so they can check the implementation.

#![allow(dead_code, clippy::needless_range_loop)]

use pagecast_core::SiteGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MICRO_SITE: &str = "H -> S M\nS -> a b\nM -> c\na -> c\nb ->\nc ->\n@dominant S M";

/// Dense-matrix solution for the micro site computed outside this crate
/// (direct linear solve of `(I - dG) x = (1-d)/n`, damping 0.85).
pub const MICRO_SCORES: [(&str, f64); 6] = [
    ("H", 0.09400898373350802),
    ("S", 0.13396280182024894),
    ("M", 0.13396280182024894),
    ("a", 0.1509431745071138),
    ("b", 0.1509431745071138),
    ("c", 0.33617906361176636),
];

/// Adjacency-list graph with `n` pages named `p0..`, edges chosen with
/// probability `density`, and `dominants` distinct dominant pages.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, dominants: usize) -> SiteGraph {
    let pages: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let links: Vec<Vec<String>> = (0..n)
        .map(|_| {
            let mut row: Vec<usize> = (0..n).filter(|_| rng.gen_bool(density)).collect();
            row.shuffle(rng);
            row.into_iter().map(|j| pages[j].clone()).collect()
        })
        .collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let doms = idx[..dominants.clamp(1, n)].iter().map(|&i| pages[i].clone()).collect();
    SiteGraph::new(pages, links, doms, None).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Graph from an edge bitmask over `n` nodes (bit `i*n + j` is edge i -> j).
pub fn graph_from_mask(n: usize, mask: u64, dominants: &[usize]) -> SiteGraph {
    let pages: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let links = (0..n)
        .map(|i| (0..n).filter(|j| mask >> (i * n + j) & 1 == 1).map(|j| pages[j].clone()).collect())
        .collect();
    let doms = dominants.iter().map(|&d| pages[d].clone()).collect();
    SiteGraph::new(pages, links, doms, None).unwrap()
}

/// Dense power iteration on the full Google matrix until the L1 step is below
/// 1e-15 (or 100k steps).
pub fn dense_pagerank(g: &SiteGraph, damping: f64) -> Vec<f64> {
    let n = g.len();
    let nf = n as f64;
    // column-stochastic transition matrix, dangling columns uniform
    let mut m = vec![vec![0.0; n]; n];
    for j in 0..n {
        let outs = g.out_links(j);
        for i in 0..n {
            let walk = if outs.is_empty() {
                1.0 / nf
            } else if outs.contains(&i) {
                1.0 / outs.len() as f64
            } else {
                0.0
            };
            m[i][j] = damping * walk + (1.0 - damping) / nf;
        }
    }
    let mut x = vec![1.0 / nf; n];
    for _ in 0..100_000 {
        let y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * x[j]).sum()).collect();
        let step: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        x = y;
        if step < 1e-15 {
            break;
        }
    }
    let total: f64 = x.iter().sum();
    x.iter().map(|v| v / total).collect()
}

/// Class assignment from definitions rather than a queue.
///
/// Distances from the dominant set come from repeated relaxation. A reached
/// page's discoverer is the in-neighbour one step closer whose discovery path
/// (dominant position, then out-link positions) is lexicographically smallest;
/// that is exactly the order a FIFO traversal visits them in. Provisional
/// class is inherited along discoverers. Common pages are non-dominant pages
/// with a reached in-neighbour of a different provisional class. Resolution
/// picks the class with most in-links (class-0 sources ignored), smallest
/// class on ties.
pub struct ClassOracle {
    pub provisional: Vec<u32>,
    pub common: Vec<usize>,
    pub resolved: Vec<u32>,
}

pub fn class_oracle(g: &SiteGraph) -> ClassOracle {
    let n = g.len();
    let dominants = g.derive_dominants().unwrap();
    const INF: usize = usize::MAX;
    let mut dist = vec![INF; n];
    for &d in &dominants {
        dist[d] = 0;
    }
    loop {
        let mut changed = false;
        for u in 0..n {
            if dist[u] == INF {
                continue;
            }
            for &v in g.out_links(u) {
                if dist[u] + 1 < dist[v] {
                    dist[v] = dist[u] + 1;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut path: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut provisional = vec![0u32; n];
    for (i, &d) in dominants.iter().enumerate() {
        path[d] = Some(vec![i]);
        provisional[d] = i as u32 + 1;
    }
    let max_d = dist.iter().copied().filter(|&d| d != INF).max().unwrap_or(0);
    for level in 1..=max_d {
        for v in (0..n).filter(|&v| dist[v] == level) {
            let mut best: Option<(Vec<usize>, usize)> = None;
            for u in (0..n).filter(|&u| dist[u] == level - 1) {
                if let Some(pos) = g.out_links(u).iter().position(|&t| t == v) {
                    let mut p = path[u].clone().unwrap();
                    p.push(pos);
                    if best.as_ref().is_none_or(|(b, _)| p < *b) {
                        best = Some((p, u));
                    }
                }
            }
            let (p, parent) = best.unwrap();
            path[v] = Some(p);
            provisional[v] = provisional[parent];
        }
    }

    let mut common: Vec<usize> = (0..n)
        .filter(|&t| {
            provisional[t] != 0
                && !dominants.contains(&t)
                && (0..n).any(|u| {
                    provisional[u] != 0
                        && provisional[u] != provisional[t]
                        && g.out_links(u).contains(&t)
                })
        })
        .collect();
    common.sort();

    let classes = dominants.len() as u32;
    let mut resolved = provisional.clone();
    for &t in &common {
        let count = |c: u32| {
            (0..n).filter(|&u| provisional[u] == c && g.out_links(u).contains(&t)).count()
        };
        let mut best = (0usize, provisional[t]);
        for c in 1..=classes {
            let k = count(c);
            if k > best.0 {
                best = (k, c);
            }
        }
        resolved[t] = best.1;
    }
    ClassOracle { provisional, common, resolved }
}

/// Smallest `L` with `L * L >= p`.
pub fn ceil_sqrt(p: usize) -> usize {
    (1..).find(|l| l * l >= p).unwrap()
}

/// Every composition of `p` into `parts` non-negative sizes.
pub fn compositions(p: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![p]];
    }
    let mut out = Vec::new();
    for first in 0..=p {
        for mut rest in compositions(p - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Precedence written out case by case from the relation table:
/// returns 1 if `a` precedes `b`, -1 if `b` precedes `a`, 0 if equivalent.
/// Mixed pairs (one higher level, the other higher rank) follow level.
pub fn precedence_table(a: (u32, usize), b: (u32, usize)) -> i32 {
    let ((li, ri), (lj, rj)) = (a, b);
    // (L_i, R_i) < (L_j, R_j): j precedes
    let less = (li < lj && ri < rj) || (li == lj && ri < rj) || (li < lj && ri == rj) || (li < lj && ri > rj);
    // (L_i, R_i) > (L_j, R_j): i precedes
    let greater =
        (li > lj && ri < rj) || (li > lj && ri == rj) || (li > lj && ri > rj) || (li == lj && ri > rj);
    let equiv = li == lj && ri == rj;
    assert_eq!(u8::from(less) + u8::from(greater) + u8::from(equiv), 1, "{a:?} vs {b:?}");
    if greater {
        1
    } else if less {
        -1
    } else {
        0
    }
}
