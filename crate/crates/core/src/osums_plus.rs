//! One-phase miner.
//!
//! Every pattern is scored over all of its on-shelf periods the moment it is
//! generated, so no candidates are buffered. Pruning uses the bounds summed
//! over the periods covered by the pattern's chain against the total utility
//! of its on-shelf periods.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::error::MineError;
use crate::model::{ItemId, MinedPattern, PeriodId, TemporalDatabase, Threshold, UtilityRatio};
use crate::projection::{extend_and_project, find_extension_items, singleton_chains, ProjectedDatabase, Scope};
use crate::qmatrix::{build_matrices, MatrixStore};
use crate::report::{MineOptions, MiningReport, RunState};

struct Search<'a> {
    db: &'a TemporalDatabase,
    store: &'a MatrixStore,
    threshold: Threshold,
    options: &'a MineOptions,
    run: RunState,
}

impl Search<'_> {
    fn shelf(&self, item: ItemId) -> &BTreeSet<PeriodId> {
        self.db.shelf().periods_of(item).expect("validated database")
    }

    fn emit_if_high(&mut self, chain: &ProjectedDatabase, ot: &BTreeSet<PeriodId>, den: u64) {
        debug_assert!(chain.periods().is_subset(ot));
        let ou = chain.utility_total();
        if self.threshold.admits(ou, den) {
            self.run.report.patterns.push(MinedPattern {
                pattern: chain.pattern().clone(),
                ou,
                our: UtilityRatio::new(ou, den),
                ot: ot.iter().copied().collect(),
            });
        }
    }

    fn deep_enough(&self, chain: &ProjectedDatabase, den: u64) -> bool {
        !self.options.flags.gdp || self.threshold.admits(chain.tpeu_total(), den)
    }

    fn grow(&mut self, chain: &ProjectedDatabase, ot: &BTreeSet<PeriodId>) -> Result<(), MineError> {
        if self.options.max_len.is_some_and(|m| chain.pattern().len() >= m) {
            return Ok(());
        }
        let mut seqlist = Vec::new();
        for (item, kind, trsu) in find_extension_items(chain, self.store).iter() {
            self.run.candidate()?;
            let mut child_ot = ot.clone();
            child_ot.extend(self.shelf(item));
            let den = self.store.aggregates().sum_over(&child_ot);
            if self.options.flags.gwp && !self.threshold.admits(trsu, den) {
                continue;
            }
            let child = extend_and_project(chain, item, kind, self.store);
            self.run.report.projections_built += 1;
            self.run.meter.alloc(child.approx_bytes());
            seqlist.push((child, child_ot, den));
        }
        let mut result = Ok(());
        for (child, child_ot, den) in &seqlist {
            self.run.report.nodes_visited += 1;
            self.emit_if_high(child, child_ot, *den);
            if self.deep_enough(child, *den) {
                result = self.grow(child, child_ot);
                if result.is_err() {
                    break;
                }
            }
        }
        for (child, _, _) in &seqlist {
            self.run.meter.free(child.approx_bytes());
        }
        result
    }
}

/// Mines every pattern whose on-shelf utility ratio reaches `threshold`.
pub fn mine_osums_plus(
    db: &TemporalDatabase,
    threshold: Threshold,
    options: &MineOptions,
) -> Result<MiningReport, MineError> {
    let store = build_matrices(db);
    let mut search = Search {
        db,
        store: &store,
        threshold,
        options,
        run: RunState::new(options),
    };
    search.run.meter.alloc(store.approx_bytes());
    let started = Instant::now();

    let singles = singleton_chains(&store, Scope::AllPeriods);
    let bytes: Vec<usize> = singles.iter().map(ProjectedDatabase::approx_bytes).collect();
    search.run.meter.alloc(bytes.iter().sum());
    search.run.report.projections_built += singles.len() as u64;
    for (k, chain) in singles.iter().enumerate() {
        search.run.candidate()?;
        search.run.report.nodes_visited += 1;
        let item = chain.pattern().last_item().expect("1-sequence");
        let ot = search.shelf(item).clone();
        let den = store.aggregates().sum_over(&ot);
        search.emit_if_high(chain, &ot, den);
        if search.deep_enough(chain, den) {
            search.grow(chain, &ot)?;
        }
        search.run.meter.free(bytes[k]);
    }

    search.run.report.phases.push(("search", started.elapsed()));
    Ok(search.run.finish())
}

/// [`mine_osums_plus`] with default options.
pub fn mine_osums_plus_default(db: &TemporalDatabase, threshold: Threshold) -> Result<MiningReport, MineError> {
    mine_osums_plus(db, threshold, &MineOptions::default())
}
