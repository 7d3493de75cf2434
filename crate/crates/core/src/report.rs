//! Run options, statistics and resource accounting shared by the miners.

use std::fmt;
use std::time::{Duration, Instant};

use crate::error::MineError;
use crate::model::MinedPattern;

/// Pruning strategies that can be switched off for ablation runs.
///
/// `ldp`/`lwp`/`arc` apply to the two-phase miner, `gdp`/`gwp` to the
/// one-phase miner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyFlags {
    pub ldp: bool,
    pub lwp: bool,
    pub arc: bool,
    pub gdp: bool,
    pub gwp: bool,
}

impl Default for StrategyFlags {
    fn default() -> Self {
        StrategyFlags::all()
    }
}

impl StrategyFlags {
    pub fn all() -> Self {
        StrategyFlags {
            ldp: true,
            lwp: true,
            arc: true,
            gdp: true,
            gwp: true,
        }
    }

    pub fn none() -> Self {
        StrategyFlags {
            ldp: false,
            lwp: false,
            arc: false,
            gdp: false,
            gwp: false,
        }
    }

    /// Enabled strategy names joined by `+`, restricted to `relevant`.
    pub fn describe(&self, relevant: &[&str]) -> String {
        let on: Vec<&str> = [
            ("ldp", self.ldp),
            ("lwp", self.lwp),
            ("arc", self.arc),
            ("gdp", self.gdp),
            ("gwp", self.gwp),
        ]
        .into_iter()
        .filter(|(name, enabled)| *enabled && relevant.contains(name))
        .map(|(name, _)| name)
        .collect();
        if on.is_empty() {
            "none".to_string()
        } else {
            on.join("+")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MineOptions {
    pub flags: StrategyFlags,
    /// Upper bound on pattern length (number of items).
    pub max_len: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Upper bound on the internal live-byte counter.
    pub memory_limit: Option<usize>,
}

impl MineOptions {
    pub fn with_flags(flags: StrategyFlags) -> Self {
        MineOptions {
            flags,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    Time,
    Memory,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::Time => "time",
            LimitKind::Memory => "memory",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct MiningReport {
    pub patterns: Vec<MinedPattern>,
    /// Patterns formed during the search whose bounds were evaluated.
    pub candidates_generated: u64,
    /// Projected databases actually built.
    pub projections_built: u64,
    /// Search-tree (one-phase) or candidate-tree (two-phase) nodes visited.
    pub nodes_visited: u64,
    /// Periodical utilities computed from scratch in the verification phase.
    pub verifications: u64,
    /// Peak of the internal live-byte counter (chains, matrices, candidate tree).
    pub peak_bytes: usize,
    pub wall_time: Duration,
    pub phases: Vec<(&'static str, Duration)>,
}

impl MiningReport {
    /// Sorts patterns by length, then by item order.
    pub fn sort_patterns(&mut self) {
        self.patterns
            .sort_by(|a, b| (a.pattern.len(), &a.pattern).cmp(&(b.pattern.len(), &b.pattern)));
    }
}

/// Live/peak byte accounting for mining data structures.
#[derive(Debug, Clone, Copy, Default)]
pub struct MemoryMeter {
    live: usize,
    peak: usize,
}

impl MemoryMeter {
    pub fn alloc(&mut self, bytes: usize) {
        self.live += bytes;
        self.peak = self.peak.max(self.live);
    }

    pub fn free(&mut self, bytes: usize) {
        self.live = self.live.saturating_sub(bytes);
    }

    pub fn live(&self) -> usize {
        self.live
    }

    pub fn peak(&self) -> usize {
        self.peak
    }
}

/// Enforces the time and memory limits of a run.
#[derive(Debug)]
pub(crate) struct Budget {
    started: Instant,
    time_limit: Option<Duration>,
    memory_limit: Option<usize>,
    ticks: u32,
}

impl Budget {
    pub(crate) fn new(options: &MineOptions) -> Self {
        Budget {
            started: Instant::now(),
            time_limit: options.time_limit,
            memory_limit: options.memory_limit,
            ticks: 0,
        }
    }

    pub(crate) fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }

    pub(crate) fn check(&mut self, meter: &MemoryMeter) -> Result<(), LimitKind> {
        if self.memory_limit.is_some_and(|m| meter.live() > m) {
            return Err(LimitKind::Memory);
        }
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(64) && self.time_limit.is_some_and(|t| self.started.elapsed() > t) {
            return Err(LimitKind::Time);
        }
        Ok(())
    }

    pub(crate) fn abort(&self, kind: LimitKind, mut partial: MiningReport, meter: &MemoryMeter) -> MineError {
        partial.wall_time = self.elapsed();
        partial.peak_bytes = meter.peak();
        MineError::LimitExceeded {
            kind,
            partial: Box::new(partial),
        }
    }
}

/// Report, meter and budget of one mining run.
#[derive(Debug)]
pub(crate) struct RunState {
    pub(crate) report: MiningReport,
    pub(crate) meter: MemoryMeter,
    budget: Budget,
}

impl RunState {
    pub(crate) fn new(options: &MineOptions) -> Self {
        RunState {
            report: MiningReport::default(),
            meter: MemoryMeter::default(),
            budget: Budget::new(options),
        }
    }

    /// Counts one candidate and enforces the limits.
    pub(crate) fn candidate(&mut self) -> Result<(), MineError> {
        self.report.candidates_generated += 1;
        self.check()
    }

    pub(crate) fn check(&mut self) -> Result<(), MineError> {
        match self.budget.check(&self.meter) {
            Ok(()) => Ok(()),
            Err(kind) => Err(self
                .budget
                .abort(kind, std::mem::take(&mut self.report), &self.meter)),
        }
    }

    pub(crate) fn finish(mut self) -> MiningReport {
        self.report.wall_time = self.budget.elapsed();
        self.report.peak_bytes = self.meter.peak();
        self.report.sort_patterns();
        self.report
    }
}
