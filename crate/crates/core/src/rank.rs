//! PageRank seeding and ordinal normalization.
//!
//! Scores come from power iteration with uniform teleport; pages without
//! out-links spread their mass uniformly. Ordinals map scores onto `1..=p`
//! with `p` for the most important page.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::site::SiteGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RankError {
    #[error("damping must lie in (0, 1), got {0}")]
    BadDamping(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("pagerank did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self { damping: 0.85, tolerance: 1e-10, max_iter: 200 }
    }
}

/// Scores indexed by graph page position.
///
/// Iteration runs over pages in URL order with in-neighbours summed in URL
/// order, so the result is bit-identical for any declaration order of the same
/// graph.
pub fn pagerank_scores(g: &SiteGraph, cfg: &PageRankConfig) -> Result<Vec<f64>, RankError> {
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(RankError::BadDamping(cfg.damping));
    }
    if cfg.tolerance.is_nan() || cfg.tolerance <= 0.0 {
        return Err(RankError::BadTolerance(cfg.tolerance));
    }
    let n = g.len();
    // canonical position -> graph index, sorted by url
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| g.url(a).cmp(g.url(b)));
    let mut canon = vec![0usize; n];
    for (c, &i) in order.iter().enumerate() {
        canon[i] = c;
    }
    let out_deg: Vec<usize> = order.iter().map(|&i| g.out_links(i).len()).collect();
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, &i) in order.iter().enumerate() {
        for &t in g.out_links(i) {
            incoming[canon[t]].push(c);
        }
    }
    for row in &mut incoming {
        row.sort_unstable();
    }
    let dangling: Vec<usize> = (0..n).filter(|&c| out_deg[c] == 0).collect();

    let nf = n as f64;
    let d = cfg.damping;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let dangling_mass: f64 = dangling.iter().map(|&c| x[c]).sum();
        let base = (1.0 - d) / nf + d * dangling_mass / nf;
        for (v, slot) in next.iter_mut().enumerate() {
            let inflow: f64 = incoming[v].iter().map(|&u| x[u] / out_deg[u] as f64).sum();
            *slot = base + d * inflow;
        }
        let total: f64 = next.iter().sum();
        for s in &mut next {
            *s /= total;
        }
        residual = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if residual <= cfg.tolerance {
            let mut scores = vec![0.0; n];
            for (c, &i) in order.iter().enumerate() {
                scores[i] = x[c];
            }
            return Ok(scores);
        }
    }
    Err(RankError::NotConverged { iterations: cfg.max_iter, residual })
}

/// PageRank keyed by URL.
pub fn pagerank(g: &SiteGraph, cfg: &PageRankConfig) -> Result<BTreeMap<String, f64>, RankError> {
    let scores = pagerank_scores(g, cfg)?;
    Ok(g.pages().iter().cloned().zip(scores).collect())
}

fn ascending(a: (&str, f64), b: (&str, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0))
}

/// Maps scores to a permutation of `1..=p`; the highest score gets `p`,
/// equal scores are ordered by URL ascending.
pub fn ordinal_ranks(scores: &BTreeMap<String, f64>) -> BTreeMap<String, usize> {
    let mut items: Vec<(&str, f64)> = scores.iter().map(|(u, &s)| (u.as_str(), s)).collect();
    items.sort_by(|a, b| ascending(*a, *b));
    items
        .into_iter()
        .enumerate()
        .map(|(i, (u, _))| (u.to_string(), i + 1))
        .collect()
}

/// Scores and ordinals aligned to the graph's page positions.
#[derive(Debug, Clone, PartialEq)]
pub struct RankAssignment {
    pub scores: Vec<f64>,
    pub ordinals: Vec<usize>,
}

impl RankAssignment {
    pub fn compute(g: &SiteGraph, cfg: &PageRankConfig) -> Result<Self, RankError> {
        let scores = pagerank_scores(g, cfg)?;
        Ok(Self::from_scores(g, scores))
    }

    pub fn from_scores(g: &SiteGraph, scores: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..g.len()).collect();
        order.sort_by(|&a, &b| ascending((g.url(a), scores[a]), (g.url(b), scores[b])));
        let mut ordinals = vec![0; g.len()];
        for (pos, &i) in order.iter().enumerate() {
            ordinals[i] = pos + 1;
        }
        RankAssignment { scores, ordinals }
    }

    /// `url,score,ordinal` rows in page order.
    pub fn to_csv(&self, g: &SiteGraph) -> String {
        let mut s = String::from("url,score,ordinal\n");
        for (i, url) in g.pages().iter().enumerate() {
            s.push_str(&format!("{},{:.12},{}\n", url, self.scores[i], self.ordinals[i]));
        }
        s
    }
}
