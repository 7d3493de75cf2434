//! Two-phase miner.
//!
//! Phase 1 searches every period independently with period-local bounds and
//! buffers each pattern's periodical utilities in a [`CTree`]. Phase 2 walks
//! the tree, discards candidates that cannot reach the threshold even with
//! the most optimistic utility in the periods they were never seen in, fills
//! in the missing periodical utilities and emits the survivors.

use std::collections::BTreeMap;
use std::time::Instant;

use fixedbitset::FixedBitSet;

use crate::ctree::{CTree, CTreeNode, NodeId};
use crate::error::MineError;
use crate::model::{ExtensionKind, ItemId, MinedPattern, PeriodId, TemporalDatabase, Threshold, UtilityRatio};
use crate::projection::{
    extend_and_project, find_extension_items, scan_periodical_utility, singleton_chains, ProjectedDatabase, Scope,
};
use crate::qmatrix::{build_matrices, MatrixStore};
use crate::report::{MineOptions, MiningReport, RunState};

/// Shelf periods of every item as bitsets over the store's dense period indices.
pub(crate) fn shelf_bits(db: &TemporalDatabase, store: &MatrixStore) -> BTreeMap<ItemId, FixedBitSet> {
    let n = store.periods().len();
    db.shelf()
        .iter()
        .map(|(item, periods)| {
            let mut bits = FixedBitSet::with_capacity(n);
            for &t in periods {
                if let Some(k) = store.period_index(t) {
                    bits.insert(k);
                }
            }
            (item, bits)
        })
        .collect()
}

/// Whether a candidate can still reach the threshold.
///
/// Periods in `ot` without a recorded utility are credited with the largest
/// value they could hold given the local pruning, `xi * ptsu(t)`. `ptsu` is
/// indexed by dense period index.
pub fn arc_keep(node: &CTreeNode, ptsu: &[u64], threshold: Threshold) -> bool {
    let total: u64 = node.on_shelf.ones().map(|k| ptsu[k]).sum();
    let allowance: u64 = node
        .on_shelf
        .ones()
        .filter(|&k| !node.calculated.contains(k))
        .map(|k| ptsu[k])
        .sum();
    threshold.admits_with_allowance(node.c_utility, allowance, total)
}

struct PhaseOne<'a> {
    store: &'a MatrixStore,
    shelf: &'a BTreeMap<ItemId, FixedBitSet>,
    threshold: Threshold,
    options: &'a MineOptions,
    tree: CTree,
    run: RunState,
}

impl PhaseOne<'_> {
    fn at_max_len(&self, chain: &ProjectedDatabase) -> bool {
        self.options.max_len.is_some_and(|m| chain.pattern().len() >= m)
    }

    fn register(&mut self, parent: NodeId, item: ItemId, kind: ExtensionKind, chain: &ProjectedDatabase, t: PeriodId) -> NodeId {
        let (id, bytes) = self.tree.child(parent, item, kind, &self.shelf[&item]);
        self.run.meter.alloc(bytes);
        let k = self.store.period_index(t).expect("known period");
        let pu = chain.periodical_utility(t);
        let promising = self.threshold.admits(pu, self.store.ptsu(t));
        self.tree.record(id, k, pu, promising);
        id
    }

    fn deep_enough(&self, chain: &ProjectedDatabase, t: PeriodId) -> bool {
        !self.options.flags.ldp || self.threshold.admits(chain.tpeu(t), self.store.ptsu(t))
    }

    fn period(&mut self, t: PeriodId) -> Result<(), MineError> {
        // every singleton chain of the period is live until it is searched
        let singles = singleton_chains(self.store, Scope::Period(t));
        let bytes: Vec<usize> = singles.iter().map(ProjectedDatabase::approx_bytes).collect();
        self.run.meter.alloc(bytes.iter().sum());
        for (chain, bytes) in singles.iter().zip(bytes) {
            self.run.candidate()?;
            self.run.report.projections_built += 1;
            let item = chain.pattern().last_item().expect("1-sequence");
            let node = self.register(CTree::ROOT, item, ExtensionKind::S, chain, t);
            if self.deep_enough(chain, t) {
                self.grow(chain, node, t)?;
            }
            self.run.meter.free(bytes);
        }
        Ok(())
    }

    fn grow(&mut self, chain: &ProjectedDatabase, node: NodeId, t: PeriodId) -> Result<(), MineError> {
        if self.at_max_len(chain) {
            return Ok(());
        }
        let ptsu = self.store.ptsu(t);
        let mut seqlist = Vec::new();
        for (item, kind, trsu) in find_extension_items(chain, self.store).iter() {
            self.run.candidate()?;
            if self.options.flags.lwp && !self.threshold.admits(trsu, ptsu) {
                continue;
            }
            let child = extend_and_project(chain, item, kind, self.store);
            self.run.report.projections_built += 1;
            self.run.meter.alloc(child.approx_bytes());
            seqlist.push((item, kind, child));
        }
        let mut result = Ok(());
        for (item, kind, child) in &seqlist {
            let id = self.register(node, *item, *kind, child, t);
            if self.deep_enough(child, t) {
                result = self.grow(child, id, t);
                if result.is_err() {
                    break;
                }
            }
        }
        for (_, _, child) in &seqlist {
            self.run.meter.free(child.approx_bytes());
        }
        result
    }
}

fn phase_one(
    store: &MatrixStore,
    shelf: &BTreeMap<ItemId, FixedBitSet>,
    threshold: Threshold,
    options: &MineOptions,
) -> Result<(CTree, RunState), MineError> {
    let mut run = RunState::new(options);
    run.meter.alloc(store.approx_bytes());
    let mut p1 = PhaseOne {
        store,
        shelf,
        threshold,
        options,
        tree: CTree::for_store(store),
        run,
    };
    for &t in store.periods() {
        p1.period(t)?;
    }
    Ok((p1.tree, p1.run))
}

/// Runs phase 1 only and returns the filled candidate tree.
pub fn candidate_tree(
    db: &TemporalDatabase,
    threshold: Threshold,
    options: &MineOptions,
) -> Result<(CTree, MiningReport), MineError> {
    let store = build_matrices(db);
    let (tree, run) = phase_one(&store, &shelf_bits(db, &store), threshold, options)?;
    Ok((tree, run.finish()))
}

/// Mines every pattern whose on-shelf utility ratio reaches `threshold`.
pub fn mine_osums(
    db: &TemporalDatabase,
    threshold: Threshold,
    options: &MineOptions,
) -> Result<MiningReport, MineError> {
    let store = build_matrices(db);
    let started = Instant::now();
    let (mut tree, mut run) = phase_one(&store, &shelf_bits(db, &store), threshold, options)?;
    run.report.phases.push(("phase1", started.elapsed()));

    let started = Instant::now();
    let ptsu: Vec<u64> = store.periods().iter().map(|&t| store.ptsu(t)).collect();
    for id in tree.preorder().into_iter().skip(1) {
        run.report.nodes_visited += 1;
        run.check()?;
        let node = tree.node(id);
        if !node.is_promising {
            continue;
        }
        if options.flags.arc && !arc_keep(node, &ptsu, threshold) {
            continue;
        }
        let missing: Vec<usize> = node
            .on_shelf
            .ones()
            .filter(|&k| !node.calculated.contains(k))
            .collect();
        let seq = node.seq.clone();
        for k in missing {
            let pu = scan_periodical_utility(&seq, store.periods()[k], &store);
            run.report.verifications += 1;
            tree.record(id, k, pu, false);
        }
        let node = tree.node(id);
        let total: u64 = node.on_shelf.ones().map(|k| ptsu[k]).sum();
        if threshold.admits(node.c_utility, total) {
            run.report.patterns.push(MinedPattern {
                pattern: seq,
                ou: node.c_utility,
                our: UtilityRatio::new(node.c_utility, total),
                ot: tree.decode(&node.on_shelf),
            });
        }
    }
    run.report.phases.push(("phase2", started.elapsed()));
    Ok(run.finish())
}

/// [`mine_osums`] with default options.
pub fn mine_osums_default(db: &TemporalDatabase, threshold: Threshold) -> Result<MiningReport, MineError> {
    mine_osums(db, threshold, &MineOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::model::Pattern;
    use crate::report::StrategyFlags;

    fn xi(s: &str) -> Threshold {
        s.parse().unwrap()
    }

    #[test]
    fn a_then_c_is_promising_in_t2() {
        let db = running_example();
        let (tree, _) = candidate_tree(&db, xi("0.3"), &MineOptions::default()).unwrap();
        let id = tree.find(&Pattern::from_ids(&[&[1], &[3]])).unwrap();
        let node = tree.node(id);
        assert!(node.is_promising);
        assert_eq!(node.utility[1], 19);
        assert!(node.calculated.contains(1));
    }

    #[test]
    fn off_shelf_items_are_not_enumerated_in_a_period() {
        let db = running_example();
        let (tree, _) = candidate_tree(&db, xi("0.3"), &MineOptions::default()).unwrap();
        // f only occurs in t_3
        let f = tree.node(tree.find(&Pattern::from_ids(&[&[6]])).unwrap());
        assert_eq!(tree.decode(&f.calculated), [PeriodId(3)]);
    }

    #[test]
    fn arc_decisions() {
        let periods = [PeriodId(1), PeriodId(2), PeriodId(3)];
        let ptsu = [34, 49, 27];
        let mut tree = CTree::new(&periods);
        let mut on = FixedBitSet::with_capacity(3);
        on.insert(1);
        on.insert(2);
        let (id, _) = tree.child(CTree::ROOT, ItemId(1), ExtensionKind::S, &on);
        tree.record(id, 1, 19, true);
        tree.record(id, 2, 9, false);
        assert!(arc_keep(tree.node(id), &ptsu, xi("0.3")));
        assert!(!arc_keep(tree.node(id), &ptsu, xi("0.4")));

        let (zero, _) = tree.child(CTree::ROOT, ItemId(2), ExtensionKind::S, &on);
        tree.record(zero, 1, 0, false);
        tree.record(zero, 2, 0, false);
        assert!(!arc_keep(tree.node(zero), &ptsu, xi("0.01")));

        // 10 seen in t_2 alone; t_3 may add at most 0.3 * 27
        let (part, _) = tree.child(CTree::ROOT, ItemId(3), ExtensionKind::S, &on);
        tree.record(part, 1, 10, false);
        assert!(!arc_keep(tree.node(part), &ptsu, xi("0.3")));
        tree.record(part, 1, 15, true);
        assert!(arc_keep(tree.node(part), &ptsu, xi("0.3")));
    }

    #[test]
    fn strict_threshold_yields_nothing() {
        let db = running_example();
        assert!(mine_osums_default(&db, xi("0.999")).unwrap().patterns.is_empty());
    }

    #[test]
    fn strategies_do_not_change_the_result() {
        let db = running_example();
        for t in ["0.05", "0.2", "0.3"] {
            let full = mine_osums_default(&db, xi(t)).unwrap();
            let none = mine_osums(&db, xi(t), &MineOptions::with_flags(StrategyFlags::none())).unwrap();
            assert_eq!(full.patterns, none.patterns);
            assert!(full.candidates_generated <= none.candidates_generated);
        }
    }
}
