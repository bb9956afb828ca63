//! The prediction model: one record per page, keyed by URL.
//!
//! Dump format is CSV with a one-line metadata comment:
//!
//! ```text
//! # pagecast-model levels=3 tick=0
//! key,url,lc,level,class,ts,dm,links,rank,dm_seen
//! A1,H,0,2,0,0,0,S;M,4,0
//! ```
//!
//! The first eight columns follow the page table layout; `rank` carries the
//! ordinal needed for predictions and `dm_seen` the last modification tick
//! already considered by the modification sweep.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

/// Logical clock value; every trace event advances it by at least one.
pub type Tick = u64;

pub const DUMP_HEADER: &str = "key,url,lc,level,class,ts,dm,links,rank,dm_seen";
const META_PREFIX: &str = "# pagecast-model";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown page {0}")]
    UnknownUrl(String),
    #[error("line {line}: malformed model dump: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("model invariant violated: {0}")]
    Invariant(String),
}

/// One row of the page table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageRecord {
    pub url: String,
    /// Accesses counted at the current level.
    pub lc: u32,
    pub level: u32,
    /// Fixed at build time; 0 marks pages no dominant page reaches.
    pub class_no: u32,
    pub ts: Tick,
    pub dm: Tick,
    pub links: Vec<String>,
    /// PageRank ordinal in `1..=p`.
    pub ordinal: usize,
    pub dm_seen: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    records: BTreeMap<String, PageRecord>,
    levels: u32,
    classes: BTreeMap<u32, BTreeSet<String>>,
    tick: Tick,
}

impl Model {
    /// Assembles a model and checks its structural invariants.
    pub fn from_records(
        levels: u32,
        tick: Tick,
        records: impl IntoIterator<Item = PageRecord>,
    ) -> Result<Self, ModelError> {
        if levels == 0 {
            return Err(ModelError::Invariant("level count must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for r in records {
            if map.contains_key(&r.url) {
                return Err(ModelError::Invariant(format!("duplicate page {}", r.url)));
            }
            map.insert(r.url.clone(), r);
        }
        if map.is_empty() {
            return Err(ModelError::Invariant("model has no pages".into()));
        }
        let p = map.len();
        let mut classes: BTreeMap<u32, BTreeSet<String>> = BTreeMap::new();
        let mut ordinals = vec![false; p + 1];
        for r in map.values() {
            if r.level < 1 || r.level > levels {
                return Err(ModelError::Invariant(format!(
                    "{} has level {} outside 1..={levels}",
                    r.url, r.level
                )));
            }
            if r.ordinal < 1 || r.ordinal > p || std::mem::replace(&mut ordinals[r.ordinal], true)
            {
                return Err(ModelError::Invariant(format!(
                    "ordinals must be a permutation of 1..={p} ({} has {})",
                    r.url, r.ordinal
                )));
            }
            for l in &r.links {
                if !map.contains_key(l) {
                    return Err(ModelError::Invariant(format!("{} links to unknown {l}", r.url)));
                }
            }
            classes.entry(r.class_no).or_default().insert(r.url.clone());
        }
        Ok(Model { records: map, levels, classes, tick })
    }

    /// Level count `L`.
    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Page count `p`.
    pub fn page_count(&self) -> usize {
        self.records.len()
    }

    pub fn tick(&self) -> Tick {
        self.tick
    }

    pub(crate) fn set_tick(&mut self, tick: Tick) {
        self.tick = self.tick.max(tick);
    }

    pub fn classes(&self) -> &BTreeMap<u32, BTreeSet<String>> {
        &self.classes
    }

    pub fn get(&self, url: &str) -> Option<&PageRecord> {
        self.records.get(url)
    }

    pub fn record(&self, url: &str) -> Result<&PageRecord, ModelError> {
        self.records.get(url).ok_or_else(|| ModelError::UnknownUrl(url.to_string()))
    }

    pub(crate) fn record_mut(&mut self, url: &str) -> Result<&mut PageRecord, ModelError> {
        self.records.get_mut(url).ok_or_else(|| ModelError::UnknownUrl(url.to_string()))
    }

    pub(crate) fn records_mut(&mut self) -> impl Iterator<Item = &mut PageRecord> {
        self.records.values_mut()
    }

    /// Records in URL order.
    pub fn records(&self) -> impl Iterator<Item = &PageRecord> {
        self.records.values()
    }

    pub fn contains(&self, url: &str) -> bool {
        self.records.contains_key(url)
    }

    /// Checks the runtime invariants: levels within bounds, counters below the
    /// promotion threshold, classes partitioning the page set.
    pub fn check_invariants(&self) -> Result<(), ModelError> {
        let mut covered = 0usize;
        let mut seen = BTreeSet::new();
        for (class, members) in &self.classes {
            for url in members {
                if !seen.insert(url) {
                    return Err(ModelError::Invariant(format!("{url} is in two classes")));
                }
                match self.records.get(url) {
                    Some(r) if r.class_no == *class => {}
                    _ => {
                        return Err(ModelError::Invariant(format!(
                            "class roster {class} disagrees with record {url}"
                        )))
                    }
                }
                covered += 1;
            }
        }
        if covered != self.records.len() {
            return Err(ModelError::Invariant("classes do not cover every page".into()));
        }
        for r in self.records.values() {
            if r.level < 1 || r.level > self.levels {
                return Err(ModelError::Invariant(format!("{} level {}", r.url, r.level)));
            }
            if r.lc >= self.levels || (r.level == self.levels && r.lc != 0) {
                return Err(ModelError::Invariant(format!("{} counter {}", r.url, r.lc)));
            }
        }
        Ok(())
    }

    /// Serializes to the CSV dump, rows sorted by URL.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{META_PREFIX} levels={} tick={}", self.levels, self.tick);
        s.push_str(DUMP_HEADER);
        s.push('\n');
        for (i, r) in self.records.values().enumerate() {
            let _ = writeln!(
                s,
                "A{},{},{},{},{},{},{},{},{},{}",
                i + 1,
                r.url,
                r.lc,
                r.level,
                r.class_no,
                r.ts,
                r.dm,
                r.links.join(";"),
                r.ordinal,
                r.dm_seen
            );
        }
        s
    }

    /// Parses a dump produced by [`Model::dump`].
    pub fn load(text: &str) -> Result<Self, ModelError> {
        let bad = |line: usize, msg: String| ModelError::Malformed { line, msg };
        let mut lines = text.lines().enumerate();
        let (_, meta) = lines.next().ok_or_else(|| bad(1, "empty dump".into()))?;
        let meta = meta
            .strip_prefix(META_PREFIX)
            .ok_or_else(|| bad(1, format!("expected `{META_PREFIX} ...` metadata line")))?;
        let mut levels = None;
        let mut tick = None;
        for kv in meta.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad(1, format!("bad field {kv}")))?;
            let n: u64 = v.parse().map_err(|_| bad(1, format!("bad number in {kv}")))?;
            match k {
                "levels" => levels = Some(n as u32),
                "tick" => tick = Some(n),
                _ => return Err(bad(1, format!("unknown field {k}"))),
            }
        }
        let levels = levels.ok_or_else(|| bad(1, "missing levels".into()))?;
        let tick = tick.ok_or_else(|| bad(1, "missing tick".into()))?;
        match lines.next() {
            Some((_, h)) if h.trim() == DUMP_HEADER => {}
            _ => return Err(bad(2, format!("expected header `{DUMP_HEADER}`"))),
        }
        let mut records = Vec::new();
        for (n, line) in lines {
            let line_no = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 10 {
                return Err(bad(line_no, format!("expected 10 columns, found {}", cols.len())));
            }
            let num = |i: usize| -> Result<u64, ModelError> {
                cols[i]
                    .parse()
                    .map_err(|_| bad(line_no, format!("bad number {:?}", cols[i])))
            };
            records.push(PageRecord {
                url: cols[1].to_string(),
                lc: num(2)? as u32,
                level: num(3)? as u32,
                class_no: num(4)? as u32,
                ts: num(5)?,
                dm: num(6)?,
                links: if cols[7].is_empty() {
                    Vec::new()
                } else {
                    cols[7].split(';').map(str::to_string).collect()
                },
                ordinal: num(8)? as usize,
                dm_seen: num(9)?,
            });
        }
        Model::from_records(levels, tick, records)
    }

    /// Human-readable table, one row per page.
    pub fn render_table(&self) -> String {
        let mut s = format!(
            "{:<5} {:<24} {:>3} {:>3} {:>3} {:>6} {:>6} {:>5}  {}\n",
            "Key", "URL", "LC", "L#", "C#", "TS", "DM", "Rank", "Links"
        );
        for (i, r) in self.records.values().enumerate() {
            let _ = writeln!(
                s,
                "{:<5} {:<24} {:>3} {:>3} {:>3} {:>6} {:>6} {:>5}  {}",
                format!("A{}", i + 1),
                r.url,
                r.lc,
                r.level,
                r.class_no,
                r.ts,
                r.dm,
                r.ordinal,
                r.links.join(",")
            );
        }
        s
    }
}
