//! Category-based next-page prediction for server-side prefetching.
//!
//! A site's link graph is ranked with PageRank and split into popularity
//! levels; pages reached from the same dominant page form a class. For each
//! request the engine orders the page's out-links (same class first, then by
//! level and rank) and names the top few as prefetch candidates. Accesses
//! promote pages, idleness demotes them and recent modifications lift them.
//!
//! ```
//! use pagecast_core::{build_model, parse_graph, predict, ModificationLog, PageRankConfig, RankAssignment};
//!
//! let g = parse_graph("H -> S M\nS -> a b\nM -> c\na -> c\nb ->\nc ->\n@dominant S M").unwrap();
//! let ranks = RankAssignment::compute(&g, &PageRankConfig::default()).unwrap();
//! let model = build_model(&g, &ranks, &ModificationLog::default(), None).unwrap();
//! let p = predict(&model, "S", 2).unwrap();
//! assert_eq!(p.window.len(), 2);
//! ```

pub mod classify;
pub mod config;
pub mod model;
pub mod predict;
pub mod rank;
pub mod service;
pub mod sim;
pub mod site;
pub mod update;

#[cfg(test)]
pub(crate) mod testing;

pub use classify::{
    assign_classes, assign_levels, build_model, default_level_count, resolve_common_pages,
    BuildError, ClassAssignment, UNCLASSED,
};
pub use config::{ConfigError, EngineConfig};
pub use model::{Model, ModelError, PageRecord, Tick};
pub use predict::{compare_pvalue, predict, Candidate, PValue, Precedence, Prediction};
pub use rank::{ordinal_ranks, pagerank, pagerank_scores, PageRankConfig, RankAssignment, RankError};
pub use service::{Engine, ServiceRequest, ServiceResponse};
pub use sim::{
    generate_trace, parse_trace, render_trace, replay, replay_with, synthetic_site, CacheMode,
    HitReport, Prefetcher, Replay, ReplayOptions, SessionEvent, SessionStats, TraceError,
};
pub use site::{parse_graph, GraphError, ModLogError, Modification, ModificationLog, SiteGraph};
pub use update::{
    apply_event, demotion_sweep, modification_sweep, record_access, AccessOutcome, Delta, Event,
    UpdateConfig, UpdateError,
};
