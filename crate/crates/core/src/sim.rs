//! Trace-driven replay with a per-session prefetch cache, plus synthetic
//! workloads for desk-scale evaluation.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classify::{assign_classes, resolve_common_pages};
use crate::model::{Model, Tick};
use crate::predict::predict;
use crate::site::{GraphError, Modification, SiteGraph};
use crate::update::{apply_event, Event, UpdateConfig, UpdateError};

pub const TRACE_HEADER: &str = "tick,session_id,url";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}: malformed trace: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: tick {tick} does not increase")]
    NonIncreasing { line: usize, tick: Tick },
    #[error("trace event {index} references unknown page {url}")]
    UnknownUrl { index: usize, url: String },
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SessionEvent {
    pub tick: Tick,
    pub session_id: String,
    pub url: String,
}

pub fn parse_trace(text: &str) -> Result<Vec<SessionEvent>, TraceError> {
    let mut out: Vec<SessionEvent> = Vec::new();
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        Some((n, _)) => {
            return Err(TraceError::Malformed {
                line: n + 1,
                msg: format!("expected header `{TRACE_HEADER}`"),
            })
        }
        None => return Ok(out),
    }
    for (n, raw) in lines {
        let line = n + 1;
        let cols: Vec<&str> = raw.trim().split(',').collect();
        let [tick, session, url] = cols[..] else {
            return Err(TraceError::Malformed { line, msg: format!("expected 3 columns, found {}", cols.len()) });
        };
        let tick: Tick = tick
            .parse()
            .map_err(|_| TraceError::Malformed { line, msg: format!("bad tick {tick:?}") })?;
        if session.is_empty() || url.is_empty() {
            return Err(TraceError::Malformed { line, msg: "empty session or url".into() });
        }
        if out.last().is_some_and(|prev| prev.tick >= tick) {
            return Err(TraceError::NonIncreasing { line, tick });
        }
        out.push(SessionEvent { tick, session_id: session.to_string(), url: url.to_string() });
    }
    Ok(out)
}

pub fn render_trace(trace: &[SessionEvent]) -> String {
    let mut s = String::from(TRACE_HEADER);
    s.push('\n');
    for e in trace {
        let _ = writeln!(s, "{},{},{}", e.tick, e.session_id, e.url);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionStats {
    pub session_id: String,
    pub requests: u64,
    pub hits: u64,
}

impl SessionStats {
    pub fn hit_pct(&self) -> f64 {
        pct(self.hits, self.requests)
    }
}

fn pct(hits: u64, requests: u64) -> f64 {
    if requests == 0 {
        0.0
    } else {
        100.0 * hits as f64 / requests as f64
    }
}

/// Hit counts for one prediction window size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HitReport {
    pub window: usize,
    /// Scored requests: every event except each session's first.
    pub requests: u64,
    pub hits: u64,
    /// Sessions in order of first appearance.
    pub sessions: Vec<SessionStats>,
}

impl HitReport {
    pub fn hit_pct(&self) -> f64 {
        pct(self.hits, self.requests)
    }

    /// `window,requests,hits,hit_pct,session`: the first row is the total
    /// (session `*`), then one row per session.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("window,requests,hits,hit_pct,session\n");
        let _ = writeln!(s, "{},{},{},{:.4},*", self.window, self.requests, self.hits, self.hit_pct());
        for st in &self.sessions {
            let _ = writeln!(
                s,
                "{},{},{},{:.4},{}",
                self.window,
                st.requests,
                st.hits,
                st.hit_pct(),
                st.session_id
            );
        }
        s
    }
}

/// What the client cache keeps between requests of a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CacheMode {
    /// Every prefetched page stays until the session ends.
    #[default]
    Accumulate,
    /// Only the most recent prediction window is kept.
    WindowOnly,
}

/// Source of prefetch sets during replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Prefetcher {
    #[default]
    Model,
    /// `window` out-links drawn uniformly without replacement.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Default)]
pub struct ReplayOptions {
    pub window: usize,
    pub cache: CacheMode,
    pub prefetcher: Prefetcher,
    /// Applied just before the first trace event at or after their tick.
    pub modifications: Vec<Modification>,
}

struct SessionState {
    stats: SessionStats,
    cache: HashSet<String>,
    started: bool,
}

impl SessionState {
    fn new(id: &str) -> Self {
        Self {
            stats: SessionStats { session_id: id.to_string(), requests: 0, hits: 0 },
            cache: HashSet::new(),
            started: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub report: HitReport,
    /// Model state after the last event.
    pub model: Model,
}

/// Replays `trace` with the model's own predictions and an accumulating cache.
pub fn replay(
    model: &Model,
    trace: &[SessionEvent],
    window: usize,
    cfg: &UpdateConfig,
) -> Result<Replay, TraceError> {
    replay_with(model, trace, cfg, &ReplayOptions { window, ..Default::default() })
}

pub fn replay_with(
    model: &Model,
    trace: &[SessionEvent],
    cfg: &UpdateConfig,
    opts: &ReplayOptions,
) -> Result<Replay, TraceError> {
    cfg.validate()?;
    if let Some((index, e)) = trace.iter().enumerate().find(|(_, e)| !model.contains(&e.url)) {
        return Err(TraceError::UnknownUrl { index, url: e.url.clone() });
    }
    let mut model = model.clone();
    let mut mods = opts.modifications.clone();
    mods.sort_by_key(|m| m.tick);
    let mut mods = mods.into_iter().peekable();
    let mut rng = match opts.prefetcher {
        Prefetcher::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Prefetcher::Model => None,
    };

    let mut sessions: Vec<SessionState> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    let mut prev = model.tick();

    for e in trace {
        while let Some(m) = mods.next_if(|m| m.tick <= e.tick) {
            let tick = m.tick.max(model.tick());
            apply_event(&mut model, cfg, &Event::Modification { url: m.url, tick })?;
        }

        let idx = *slot.entry(e.session_id.as_str()).or_insert_with(|| {
            sessions.push(SessionState::new(&e.session_id));
            sessions.len() - 1
        });
        let session = &mut sessions[idx];
        if session.started {
            session.stats.requests += 1;
            if session.cache.contains(&e.url) {
                session.stats.hits += 1;
            }
        }
        session.started = true;

        apply_event(&mut model, cfg, &Event::Access { url: e.url.clone(), tick: e.tick })?;

        let window: Vec<String> = match rng.as_mut() {
            None => predict(&model, &e.url, opts.window).map_err(UpdateError::from)?.window,
            Some(rng) => {
                let links = &model.record(&e.url).map_err(UpdateError::from)?.links;
                links.choose_multiple(rng, opts.window).cloned().collect()
            }
        };
        if opts.cache == CacheMode::WindowOnly {
            session.cache.clear();
        }
        session.cache.extend(window);

        if cfg.sweep_due(prev, e.tick) {
            apply_event(&mut model, cfg, &Event::Sweep { tick: e.tick })?;
        }
        prev = e.tick;
    }

    let order: Vec<SessionStats> = sessions.into_iter().map(|s| s.stats).collect();
    let report = HitReport {
        window: opts.window,
        requests: order.iter().map(|s| s.requests).sum(),
        hits: order.iter().map(|s| s.hits).sum(),
        sessions: order,
    };
    Ok(Replay { report, model })
}

/// Random-surfer sessions biased toward staying inside the current class.
///
/// Every session starts at the home page (or a uniformly chosen page when the
/// graph has none) and emits `length` requests. Each step follows an out-link:
/// with probability `affinity` among the same-class out-links (all out-links
/// if there are none), otherwise among all out-links. A page without
/// out-links sends the surfer back to the session's start page. Sessions are
/// interleaved round-robin and ticks start at 1.
pub fn generate_trace(
    g: &SiteGraph,
    sessions: usize,
    length: usize,
    affinity: f64,
    seed: u64,
) -> Result<Vec<SessionEvent>, TraceError> {
    let provisional = assign_classes(g)?;
    let classes = resolve_common_pages(g, &provisional);
    let affinity = affinity.clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(sessions);
    for _ in 0..sessions {
        let start = g.home().unwrap_or_else(|| rng.gen_range(0..g.len()));
        let mut path = Vec::with_capacity(length);
        let mut here = start;
        for step in 0..length {
            if step > 0 {
                here = next_page(g, &classes, here, affinity, &mut rng).unwrap_or(start);
            }
            path.push(here);
        }
        paths.push(path);
    }

    let mut trace = Vec::with_capacity(sessions * length);
    let mut tick = 0;
    for step in 0..length {
        for (s, path) in paths.iter().enumerate() {
            tick += 1;
            trace.push(SessionEvent {
                tick,
                session_id: format!("s{}", s + 1),
                url: g.url(path[step]).to_string(),
            });
        }
    }
    Ok(trace)
}

fn next_page(
    g: &SiteGraph,
    classes: &[u32],
    here: usize,
    affinity: f64,
    rng: &mut ChaCha8Rng,
) -> Option<usize> {
    let links = g.out_links(here);
    if links.is_empty() {
        return None;
    }
    if rng.gen_bool(affinity) {
        let same: Vec<usize> = links.iter().copied().filter(|&t| classes[t] == classes[here]).collect();
        if let Some(&t) = same.choose(rng) {
            return Some(t);
        }
    }
    links.choose(rng).copied()
}

/// Leaves featured on each section index.
const FEATURED: usize = 4;

/// A sectioned site: a home page, one index page per section, and
/// `pages_per_section` leaf pages under each section.
///
/// Every page carries a navigation bar linking home and all section indexes.
/// Indexes feature their first few leaves. Leaves link to 2-4 siblings chosen
/// with Zipf weights, so low-numbered leaves are the popular ones. Section
/// indexes are the dominant pages.
pub fn synthetic_site(sections: usize, pages_per_section: usize, seed: u64) -> SiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = |s: usize| format!("/s{}/", s + 1);
    let leaf = |s: usize, j: usize| format!("/s{}/p{}.html", s + 1, j + 1);
    let popularity: Vec<f64> = (0..pages_per_section).map(|j| 1.0 / (j + 1) as f64).collect();

    let mut pages = vec!["/".to_string()];
    let mut links = vec![(0..sections).map(index).collect::<Vec<_>>()];
    for s in 0..sections {
        let mut nav = vec!["/".to_string()];
        nav.extend((0..sections).filter(|&o| o != s).map(index));
        pages.push(index(s));
        links.push(nav.iter().cloned().chain((0..pages_per_section.min(FEATURED)).map(|j| leaf(s, j))).collect());
        for j in 0..pages_per_section {
            pages.push(leaf(s, j));
            let mut out = nav.clone();
            out.insert(1, index(s));
            let want = rng.gen_range(2..=4).min(pages_per_section - 1);
            let mut weights = popularity.clone();
            weights[j] = 0.0;
            for _ in 0..want {
                let k = WeightedIndex::new(&weights).expect("positive weights").sample(&mut rng);
                weights[k] = 0.0;
                out.push(leaf(s, k));
            }
            links.push(out);
        }
    }
    SiteGraph::new(pages, links, Vec::new(), Some("/".to_string()))
        .expect("synthetic site is well formed")
}
