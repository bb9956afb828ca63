//! Next-request prediction over a page's out-links.
//!
//! Candidates are ordered by three keys: same class as the requested page
//! first, then P-value precedence, then URL ascending.

use std::cmp::Ordering;

use serde::Serialize;

use crate::classify::UNCLASSED;
use crate::model::{Model, ModelError};

/// `[Level, Rank]` pair attached to a candidate link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PValue {
    pub level: u32,
    pub rank: usize,
}

impl PValue {
    pub fn new(level: u32, rank: usize) -> Self {
        Self { level, rank }
    }
}

/// Outcome of comparing two P-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precedence {
    FirstPrecedes,
    SecondPrecedes,
    Equivalent,
}

/// Level dominates rank; rank decides within a level.
///
/// Pairs where one side has the higher level and the other the higher rank
/// are ordered by level, the same way mixed pairs with a lower level and a
/// higher rank are.
pub fn compare_pvalue(a: PValue, b: PValue) -> Precedence {
    match a.cmp(&b) {
        Ordering::Greater => Precedence::FirstPrecedes,
        Ordering::Less => Precedence::SecondPrecedes,
        Ordering::Equal => Precedence::Equivalent,
    }
}

/// `Greater` means "precedes".
impl Ord for PValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level.cmp(&other.level).then(self.rank.cmp(&other.rank))
    }
}

impl PartialOrd for PValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Candidate {
    pub url: String,
    #[serde(flatten)]
    pub pvalue: PValue,
    #[serde(rename = "class")]
    pub class_no: u32,
    pub class_match: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub source: String,
    /// The first `min(W, candidates)` URLs in candidate order.
    pub window: Vec<String>,
    pub candidates: Vec<Candidate>,
}

/// Ranks the out-links of `url` and cuts the top `window` of them.
pub fn predict(model: &Model, url: &str, window: usize) -> Result<Prediction, ModelError> {
    let source = model.record(url)?;
    let mut candidates = source
        .links
        .iter()
        .map(|link| {
            let r = model.record(link)?;
            Ok(Candidate {
                url: r.url.clone(),
                pvalue: PValue::new(r.level, r.ordinal),
                class_no: r.class_no,
                class_match: r.class_no != UNCLASSED && r.class_no == source.class_no,
            })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    candidates.sort_by(|a, b| {
        b.class_match
            .cmp(&a.class_match)
            .then_with(|| b.pvalue.cmp(&a.pvalue))
            .then_with(|| a.url.cmp(&b.url))
    });
    let window = candidates.iter().take(window).map(|c| c.url.clone()).collect();
    Ok(Prediction { source: source.url.clone(), window, candidates })
}
