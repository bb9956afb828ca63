//! Site link graph and modification log.
//!
//! The graph file is line oriented:
//!
//! ```text
//! # comment
//! H -> S M
//! S -> a b
//! b ->
//! @dominant S M
//! @home H
//! ```
//!
//! Every page must be declared by its own `<url> -> ...` line; link targets may
//! refer to pages declared further down. Declaration order is preserved and is
//! the only source of ordering used by downstream tie-breaks.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

/// Characters that would break the CSV dump and trace formats.
const RESERVED: [char; 4] = [',', ';', '"', '#'];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate page {url}")]
    DuplicatePage { line: usize, url: String },
    #[error("line {line}: duplicate link {from} -> {to}")]
    DuplicateLink { line: usize, from: String, to: String },
    #[error("line {line}: unknown page {url}")]
    UnknownPage { line: usize, url: String },
    #[error("duplicate dominant page {0}")]
    DuplicateDominant(String),
    #[error("graph declares no pages")]
    Empty,
    #[error("no dominant pages: declare @dominant or an @home page with out-links")]
    NoDominants,
}

/// Validated site graph: pages, out-links and the dominant-page seeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteGraph {
    pages: Vec<String>,
    index: HashMap<String, usize>,
    links: Vec<Vec<usize>>,
    dominants: Vec<usize>,
    home: Option<usize>,
}

impl SiteGraph {
    /// Builds a graph from already-split parts. `links` is keyed by page position.
    pub fn new(
        pages: Vec<String>,
        links: Vec<Vec<String>>,
        dominants: Vec<String>,
        home: Option<String>,
    ) -> Result<Self, GraphError> {
        if pages.is_empty() {
            return Err(GraphError::Empty);
        }
        if links.len() != pages.len() {
            return Err(GraphError::Syntax {
                line: 0,
                msg: format!("{} pages but {} link lists", pages.len(), links.len()),
            });
        }
        let mut index = HashMap::with_capacity(pages.len());
        for (i, url) in pages.iter().enumerate() {
            if url.is_empty() || url.contains(|c: char| RESERVED.contains(&c) || c.is_whitespace()) {
                return Err(GraphError::Syntax {
                    line: 0,
                    msg: format!("url {url:?} is empty or contains a reserved character"),
                });
            }
            if index.insert(url.clone(), i).is_some() {
                return Err(GraphError::DuplicatePage { line: 0, url: url.clone() });
            }
        }
        let lookup = |url: &str| {
            index
                .get(url)
                .copied()
                .ok_or_else(|| GraphError::UnknownPage { line: 0, url: url.to_string() })
        };
        let mut out = Vec::with_capacity(pages.len());
        for (from, targets) in links.iter().enumerate() {
            let mut row: Vec<usize> = Vec::with_capacity(targets.len());
            for t in targets {
                let to = lookup(t)?;
                if row.contains(&to) {
                    return Err(GraphError::DuplicateLink {
                        line: 0,
                        from: pages[from].clone(),
                        to: t.clone(),
                    });
                }
                row.push(to);
            }
            out.push(row);
        }
        let mut dom = Vec::with_capacity(dominants.len());
        for d in &dominants {
            let i = lookup(d)?;
            if dom.contains(&i) {
                return Err(GraphError::DuplicateDominant(d.clone()));
            }
            dom.push(i);
        }
        let home = home.as_deref().map(lookup).transpose()?;
        let g = SiteGraph { pages, index, links: out, dominants: dom, home };
        g.derive_dominants()?;
        Ok(g)
    }

    /// Number of pages (`p`).
    pub fn len(&self) -> usize {
        self.pages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.is_empty()
    }

    pub fn pages(&self) -> &[String] {
        &self.pages
    }

    pub fn url(&self, idx: usize) -> &str {
        &self.pages[idx]
    }

    pub fn index_of(&self, url: &str) -> Option<usize> {
        self.index.get(url).copied()
    }

    /// Out-link indices of page `idx`, in file order.
    pub fn out_links(&self, idx: usize) -> &[usize] {
        &self.links[idx]
    }

    pub fn out_link_urls(&self, idx: usize) -> impl Iterator<Item = &str> + '_ {
        self.links[idx].iter().map(move |&t| self.pages[t].as_str())
    }

    /// Explicitly declared dominant pages (may be empty when a home page is set).
    pub fn explicit_dominants(&self) -> &[usize] {
        &self.dominants
    }

    pub fn home(&self) -> Option<usize> {
        self.home
    }

    /// Dominant pages used to seed classes: the explicit list when present,
    /// otherwise the home page's out-links in file order.
    pub fn derive_dominants(&self) -> Result<Vec<usize>, GraphError> {
        if !self.dominants.is_empty() {
            return Ok(self.dominants.clone());
        }
        match self.home {
            Some(h) if !self.links[h].is_empty() => Ok(self.links[h].clone()),
            _ => Err(GraphError::NoDominants),
        }
    }

    pub fn derive_dominant_urls(&self) -> Result<Vec<String>, GraphError> {
        Ok(self
            .derive_dominants()?
            .into_iter()
            .map(|i| self.pages[i].clone())
            .collect())
    }

    /// Number of dominant pages (`n`).
    pub fn dominant_count(&self) -> usize {
        self.derive_dominants().map(|d| d.len()).unwrap_or(0)
    }

    /// In-link lists, each in ascending source-index order.
    pub fn in_links(&self) -> Vec<Vec<usize>> {
        let mut inl = vec![Vec::new(); self.pages.len()];
        for (from, row) in self.links.iter().enumerate() {
            for &to in row {
                inl[to].push(from);
            }
        }
        inl
    }

    pub fn edge_count(&self) -> usize {
        self.links.iter().map(Vec::len).sum()
    }

    /// Renders the graph back to the text format; `parse_graph(render())` is the identity.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (i, url) in self.pages.iter().enumerate() {
            s.push_str(url);
            s.push_str(" ->");
            for t in self.out_link_urls(i) {
                s.push(' ');
                s.push_str(t);
            }
            s.push('\n');
        }
        if !self.dominants.is_empty() {
            s.push_str("@dominant");
            for &d in &self.dominants {
                let _ = write!(s, " {}", self.pages[d]);
            }
            s.push('\n');
        }
        if let Some(h) = self.home {
            let _ = writeln!(s, "@home {}", self.pages[h]);
        }
        s
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses the line-oriented graph format.
pub fn parse_graph(text: &str) -> Result<SiteGraph, GraphError> {
    struct Decl<'a> {
        url: &'a str,
        targets: Vec<&'a str>,
        line: usize,
    }

    let mut decls: Vec<Decl> = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut dominants: Vec<(&str, usize)> = Vec::new();
    let mut home: Option<(&str, usize)> = None;

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('@') {
            let mut words = rest.split_whitespace();
            let directive = words.next().unwrap_or("");
            let args: Vec<&str> = words.collect();
            match directive {
                "dominant" => {
                    if args.is_empty() {
                        return Err(GraphError::Syntax {
                            line,
                            msg: "@dominant needs at least one page".into(),
                        });
                    }
                    dominants.extend(args.into_iter().map(|a| (a, line)));
                }
                "home" => {
                    if args.len() != 1 {
                        return Err(GraphError::Syntax {
                            line,
                            msg: "@home takes exactly one page".into(),
                        });
                    }
                    if home.is_some() {
                        return Err(GraphError::Syntax { line, msg: "@home declared twice".into() });
                    }
                    home = Some((args[0], line));
                }
                other => {
                    return Err(GraphError::Syntax {
                        line,
                        msg: format!("unknown directive @{other}"),
                    })
                }
            }
            continue;
        }
        let Some((lhs, rhs)) = body.split_once("->") else {
            return Err(GraphError::Syntax { line, msg: "expected `<url> -> <links>`".into() });
        };
        let mut lhs_words = lhs.split_whitespace();
        let url = match (lhs_words.next(), lhs_words.next()) {
            (Some(u), None) => u,
            _ => {
                return Err(GraphError::Syntax {
                    line,
                    msg: "expected exactly one url before `->`".into(),
                })
            }
        };
        if seen.insert(url, line).is_some() {
            return Err(GraphError::DuplicatePage { line, url: url.to_string() });
        }
        decls.push(Decl { url, targets: rhs.split_whitespace().collect(), line });
    }

    if decls.is_empty() {
        return Err(GraphError::Empty);
    }

    // Re-check references here so errors carry the offending line.
    for d in &decls {
        let mut row: Vec<&str> = Vec::with_capacity(d.targets.len());
        for &t in &d.targets {
            if !seen.contains_key(t) {
                return Err(GraphError::UnknownPage { line: d.line, url: t.to_string() });
            }
            if row.contains(&t) {
                return Err(GraphError::DuplicateLink {
                    line: d.line,
                    from: d.url.to_string(),
                    to: t.to_string(),
                });
            }
            row.push(t);
        }
    }
    for &(dom, line) in dominants.iter().chain(home.iter()) {
        if !seen.contains_key(dom) {
            return Err(GraphError::UnknownPage { line, url: dom.to_string() });
        }
    }

    SiteGraph::new(
        decls.iter().map(|d| d.url.to_string()).collect(),
        decls
            .iter()
            .map(|d| d.targets.iter().map(|t| t.to_string()).collect())
            .collect(),
        dominants.iter().map(|(d, _)| d.to_string()).collect(),
        home.map(|(h, _)| h.to_string()),
    )
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModLogError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown page {url}")]
    UnknownPage { line: usize, url: String },
    #[error("line {line}: modification tick for {url} goes backwards")]
    NonMonotonic { line: usize, url: String },
}

/// One page modification at a logical tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Modification {
    pub tick: u64,
    pub url: String,
}

/// Page modification history, lines `<tick> <url>`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModificationLog {
    pub entries: Vec<Modification>,
}

impl ModificationLog {
    pub fn parse(text: &str, graph: &SiteGraph) -> Result<Self, ModLogError> {
        Self::parse_checked(text, |url| graph.index_of(url).is_some())
    }

    /// Parses the log, accepting only URLs for which `known` holds.
    pub fn parse_checked(text: &str, known: impl Fn(&str) -> bool) -> Result<Self, ModLogError> {
        let mut entries = Vec::new();
        let mut last: HashMap<String, u64> = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            let mut words = body.split_whitespace();
            let (Some(tick), Some(url), None) = (words.next(), words.next(), words.next()) else {
                return Err(ModLogError::Syntax { line, msg: "expected `<tick> <url>`".into() });
            };
            let tick: u64 = tick.parse().map_err(|_| ModLogError::Syntax {
                line,
                msg: format!("bad tick {tick:?}"),
            })?;
            if !known(url) {
                return Err(ModLogError::UnknownPage { line, url: url.to_string() });
            }
            if let Some(&prev) = last.get(url) {
                if tick < prev {
                    return Err(ModLogError::NonMonotonic { line, url: url.to_string() });
                }
            }
            last.insert(url.to_string(), tick);
            entries.push(Modification { tick, url: url.to_string() });
        }
        Ok(ModificationLog { entries })
    }

    /// Latest modification tick per page.
    pub fn latest(&self) -> HashMap<&str, u64> {
        let mut out: HashMap<&str, u64> = HashMap::new();
        for m in &self.entries {
            let e = out.entry(m.url.as_str()).or_insert(0);
            *e = (*e).max(m.tick);
        }
        out
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|m| format!("{} {}\n", m.tick, m.url)).collect()
    }
}
