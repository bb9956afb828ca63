use crate::{build_model, parse_graph, Model, ModificationLog, PageRankConfig, RankAssignment};

pub(crate) const MICRO_SITE: &str = "H -> S M\nS -> a b\nM -> c\na -> c\nb ->\nc ->\n@dominant S M";

pub(crate) fn micro_model() -> Model {
    let g = parse_graph(MICRO_SITE).unwrap();
    let ranks = RankAssignment::compute(&g, &PageRankConfig::default()).unwrap();
    build_model(&g, &ranks, &ModificationLog::default(), None).unwrap()
}
