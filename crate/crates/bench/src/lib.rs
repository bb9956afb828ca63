//! Workload fixtures shared by the benchmarks.

use pagecast_core::{
    build_model, generate_trace, synthetic_site, Model, ModificationLog, PageRankConfig, RankAssignment,
    SessionEvent, SiteGraph,
};

/// A synthetic site with its initial model and an affinity-0.9 trace.
pub struct Fixture {
    pub graph: SiteGraph,
    pub ranks: RankAssignment,
    pub model: Model,
    pub trace: Vec<SessionEvent>,
}

impl Fixture {
    pub fn new(sections: usize, pages_per_section: usize, sessions: usize) -> Self {
        let graph = synthetic_site(sections, pages_per_section, 2024);
        let ranks = RankAssignment::compute(&graph, &PageRankConfig::default()).expect("converges");
        let model = build_model(&graph, &ranks, &ModificationLog::default(), None).expect("builds");
        let trace = generate_trace(&graph, sessions, 20, 0.9, 7).expect("generates");
        Self { graph, ranks, model, trace }
    }

    /// Page count.
    pub fn pages(&self) -> usize {
        self.graph.len()
    }
}
