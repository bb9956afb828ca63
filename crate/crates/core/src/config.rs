//! `key=value` engine configuration.

use thiserror::Error;

use crate::rank::PageRankConfig;
use crate::update::{UpdateConfig, UpdateError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key=value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key {key}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {value:?}")]
    BadValue { line: usize, key: String, value: String },
    #[error(transparent)]
    Update(#[from] UpdateError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Overrides the default `ceil(sqrt(p))` level count.
    pub levels: Option<u32>,
    pub pagerank: PageRankConfig,
    pub update: UpdateConfig,
    /// Default prediction window.
    pub window: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            levels: None,
            pagerank: PageRankConfig::default(),
            update: UpdateConfig::default(),
            window: 2,
        }
    }
}

impl EngineConfig {
    /// Parses the config text on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = EngineConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = || ConfigError::BadValue { line, key: key.into(), value: value.into() };
            match key {
                "levels" => {
                    let l: u32 = value.parse().map_err(|_| bad())?;
                    if l == 0 {
                        return Err(bad());
                    }
                    cfg.levels = Some(l);
                }
                "damping" => {
                    let d: f64 = value.parse().map_err(|_| bad())?;
                    if !(d > 0.0 && d < 1.0) {
                        return Err(bad());
                    }
                    cfg.pagerank.damping = d;
                }
                "demote_threshold" => cfg.update.demote_threshold = value.parse().map_err(|_| bad())?,
                "recency_window" => cfg.update.recency_window = value.parse().map_err(|_| bad())?,
                "sweep_period" => cfg.update.sweep_period = value.parse().map_err(|_| bad())?,
                "window" => cfg.window = value.parse().map_err(|_| bad())?,
                _ => return Err(ConfigError::UnknownKey { line, key: key.into() }),
            }
        }
        cfg.update.validate()?;
        Ok(cfg)
    }
}
