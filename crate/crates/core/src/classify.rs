//! Initial model construction: classes from the dominant-page traversal,
//! levels from the rank partition.

use crate::model::{Model, ModelError, PageRecord};
use crate::rank::RankAssignment;
use crate::site::{GraphError, ModificationLog, SiteGraph};

/// Class number reserved for pages no dominant page reaches.
pub const UNCLASSED: u32 = 0;

/// Provisional classes from the traversal plus the pages reached from more
/// than one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAssignment {
    /// Class per page position.
    pub classes: Vec<u32>,
    /// Common pages in detection order, no duplicates.
    pub common: Vec<usize>,
}

/// Breadth-first traversal seeded with the dominant pages in order.
///
/// Dominant `i` (0-based) gets class `i + 1`. A page takes the class of the
/// first page that reaches it. Reaching an already classed page from another
/// class records it as common; dominant pages keep their own class.
pub fn assign_classes(g: &SiteGraph) -> Result<ClassAssignment, GraphError> {
    let dominants = g.derive_dominants()?;
    let mut classes = vec![UNCLASSED; g.len()];
    let mut is_dominant = vec![false; g.len()];
    let mut frontier = std::collections::VecDeque::with_capacity(g.len());
    for (i, &d) in dominants.iter().enumerate() {
        classes[d] = i as u32 + 1;
        is_dominant[d] = true;
        frontier.push_back(d);
    }
    let mut common = Vec::new();
    let mut flagged = vec![false; g.len()];
    while let Some(page) = frontier.pop_front() {
        let class = classes[page];
        for &next in g.out_links(page) {
            match classes[next] {
                UNCLASSED => {
                    classes[next] = class;
                    frontier.push_back(next);
                }
                c if c == class => {}
                _ => {
                    if !is_dominant[next] && !flagged[next] {
                        flagged[next] = true;
                        common.push(next);
                    }
                }
            }
        }
    }
    Ok(ClassAssignment { classes, common })
}

/// Reassigns each common page to the class with the most in-links into it.
///
/// In-links are counted by the provisional class of their source; class 0
/// sources are ignored. Ties go to the smaller class number and a page with
/// nothing to count keeps its provisional class.
pub fn resolve_common_pages(g: &SiteGraph, provisional: &ClassAssignment) -> Vec<u32> {
    let in_links = g.in_links();
    let mut resolved = provisional.classes.clone();
    for &page in &provisional.common {
        let mut counts: std::collections::BTreeMap<u32, usize> = Default::default();
        for &src in &in_links[page] {
            let c = provisional.classes[src];
            if c != UNCLASSED {
                *counts.entry(c).or_default() += 1;
            }
        }
        // ascending class order + strict `>` keeps the smaller class on ties
        let mut best: Option<(u32, usize)> = None;
        for (&class, &n) in &counts {
            if best.is_none_or(|(_, m)| n > m) {
                best = Some((class, n));
            }
        }
        if let Some((class, _)) = best {
            resolved[page] = class;
        }
    }
    resolved
}

/// Default level count, `ceil(sqrt(p))`.
pub fn default_level_count(p: usize) -> u32 {
    let mut l = (p as f64).sqrt() as usize;
    while l * l < p {
        l += 1;
    }
    while l > 0 && (l - 1) * (l - 1) >= p {
        l -= 1;
    }
    l.max(1) as u32
}

/// Number of pages placed on each level, index 0 being level 1.
///
/// Groups are as equal as possible; when `p` does not divide evenly the extra
/// pages go to the lowest levels.
pub fn level_sizes(p: usize, levels: u32) -> Vec<usize> {
    let l = levels as usize;
    let (base, rem) = (p / l, p % l);
    (0..l).map(|i| base + usize::from(i < rem)).collect()
}

/// Levels per page from ordinals (`1..=p`). Returns `(L, levels)`.
pub fn assign_levels(ordinals: &[usize], levels: Option<u32>) -> (u32, Vec<u32>) {
    let p = ordinals.len();
    let l = levels.unwrap_or_else(|| default_level_count(p)).max(1);
    // level for each ordinal position counted from the bottom
    let mut by_ordinal = Vec::with_capacity(p);
    for (i, size) in level_sizes(p, l).into_iter().enumerate() {
        by_ordinal.extend(std::iter::repeat_n(i as u32 + 1, size));
    }
    (l, ordinals.iter().map(|&o| by_ordinal[o - 1]).collect())
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("rank assignment covers {got} pages, graph has {want}")]
    RankMismatch { got: usize, want: usize },
}

/// Builds the initial prediction model. `levels` overrides `ceil(sqrt(p))`.
pub fn build_model(
    g: &SiteGraph,
    ranks: &RankAssignment,
    dm_log: &ModificationLog,
    levels: Option<u32>,
) -> Result<Model, BuildError> {
    if ranks.ordinals.len() != g.len() {
        return Err(BuildError::RankMismatch { got: ranks.ordinals.len(), want: g.len() });
    }
    let provisional = assign_classes(g)?;
    let classes = resolve_common_pages(g, &provisional);
    let (l, page_levels) = assign_levels(&ranks.ordinals, levels);
    let latest = dm_log.latest();
    let records = g.pages().iter().enumerate().map(|(i, url)| PageRecord {
        url: url.clone(),
        lc: 0,
        level: page_levels[i],
        class_no: classes[i],
        ts: 0,
        dm: latest.get(url.as_str()).copied().unwrap_or(0),
        links: g.out_link_urls(i).map(str::to_string).collect(),
        ordinal: ranks.ordinals[i],
        dm_seen: 0,
    });
    Ok(Model::from_records(l, 0, records)?)
}
