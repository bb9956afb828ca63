//! Online model maintenance: access counting with level promotion, and the
//! periodic demotion and modification sweeps.
//!
//! All times are logical ticks. Class numbers are never touched here.

use serde::Serialize;
use thiserror::Error;

use crate::model::{Model, ModelError, Tick};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UpdateError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("event tick {tick} is earlier than the model clock {clock}")]
    TickWentBackwards { tick: Tick, clock: Tick },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UpdateConfig {
    /// Idle ticks after which a page drops one level.
    pub demote_threshold: Tick,
    /// How recent a modification must be to promote its page.
    pub recency_window: Tick,
    /// Ticks between periodic sweeps.
    pub sweep_period: Tick,
}

impl Default for UpdateConfig {
    fn default() -> Self {
        Self { demote_threshold: 200, recency_window: 50, sweep_period: 10 }
    }
}

impl UpdateConfig {
    pub fn validate(&self) -> Result<(), UpdateError> {
        if self.demote_threshold == 0 {
            return Err(UpdateError::NonPositive("demote_threshold"));
        }
        if self.recency_window == 0 {
            return Err(UpdateError::NonPositive("recency_window"));
        }
        if self.sweep_period == 0 {
            return Err(UpdateError::NonPositive("sweep_period"));
        }
        Ok(())
    }

    /// Whether a sweep is due when the clock moves from `prev` to `now`,
    /// i.e. a multiple of the period lies in `(prev, now]`.
    pub fn sweep_due(&self, prev: Tick, now: Tick) -> bool {
        now / self.sweep_period > prev / self.sweep_period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AccessOutcome {
    /// Counter incremented at the current level.
    Counted { level: u32, lc: u32 },
    Promoted { from: u32, to: u32 },
    /// Page already at the top level; only the timestamp moved.
    TopLevel,
}

/// Counts one access to `url` at tick `now`.
///
/// Below the top level the counter rises until it reaches `L - 1`; the next
/// access promotes the page one level and resets counter and timestamp.
pub fn record_access(model: &mut Model, url: &str, now: Tick) -> Result<AccessOutcome, ModelError> {
    let top = model.levels();
    let r = model.record_mut(url)?;
    r.ts = now;
    if r.level >= top {
        return Ok(AccessOutcome::TopLevel);
    }
    if r.lc + 1 < top {
        r.lc += 1;
        return Ok(AccessOutcome::Counted { level: r.level, lc: r.lc });
    }
    let from = r.level;
    r.level = (r.level + 1).min(top);
    r.lc = 0;
    Ok(AccessOutcome::Promoted { from, to: r.level })
}

/// Drops every page idle for at least `demote_threshold` ticks by one level.
/// Returns the demoted URLs in URL order.
pub fn demotion_sweep(model: &mut Model, cfg: &UpdateConfig, now: Tick) -> Vec<String> {
    let mut demoted = Vec::new();
    for r in model.records_mut() {
        if r.level > 1 && now.saturating_sub(r.ts) >= cfg.demote_threshold {
            r.level -= 1;
            r.lc = 0;
            r.ts = now;
            demoted.push(r.url.clone());
        }
    }
    demoted
}

/// Raises pages with a fresh, not yet considered modification by one level.
/// Each modification tick is considered once. Returns promoted URLs in URL order.
pub fn modification_sweep(model: &mut Model, cfg: &UpdateConfig, now: Tick) -> Vec<String> {
    let top = model.levels();
    let mut promoted = Vec::new();
    for r in model.records_mut() {
        if r.dm <= r.dm_seen {
            continue;
        }
        r.dm_seen = r.dm;
        if r.level < top && now.saturating_sub(r.dm) <= cfg.recency_window {
            r.level += 1;
            r.lc = 0;
            r.ts = now;
            promoted.push(r.url.clone());
        }
    }
    promoted
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Access { url: String, tick: Tick },
    Modification { url: String, tick: Tick },
    /// Runs the demotion sweep, then the modification sweep.
    Sweep { tick: Tick },
}

impl Event {
    pub fn tick(&self) -> Tick {
        match self {
            Event::Access { tick, .. } | Event::Modification { tick, .. } | Event::Sweep { tick } => {
                *tick
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Delta {
    Access(AccessOutcome),
    Modified { url: String, dm: Tick },
    Swept { demoted: Vec<String>, promoted: Vec<String> },
}

/// Dispatches one event and advances the model clock.
pub fn apply_event(model: &mut Model, cfg: &UpdateConfig, event: &Event) -> Result<Delta, UpdateError> {
    let tick = event.tick();
    if tick < model.tick() {
        return Err(UpdateError::TickWentBackwards { tick, clock: model.tick() });
    }
    let delta = match event {
        Event::Access { url, tick } => Delta::Access(record_access(model, url, *tick)?),
        Event::Modification { url, tick } => {
            let r = model.record_mut(url)?;
            r.dm = r.dm.max(*tick);
            Delta::Modified { url: url.clone(), dm: r.dm }
        }
        Event::Sweep { tick } => {
            let demoted = demotion_sweep(model, cfg, *tick);
            let promoted = modification_sweep(model, cfg, *tick);
            Delta::Swept { demoted, promoted }
        }
    };
    model.set_tick(tick);
    Ok(delta)
}
