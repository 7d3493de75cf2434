//! Periodical q-matrices: per-sequence (utility, rest utility) tables.

use std::collections::{BTreeMap, BTreeSet};
use std::mem::size_of;
use std::ops::Range;

use crate::model::{item_utility, q_sequence_utility, ItemId, PeriodId, TemporalDatabase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatrixEntry {
    pub utility: u64,
    /// Utility of every q-item after this one in (itemset, item) order.
    pub rest: u64,
}

/// One q-item of a matrix in sequence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixCell {
    pub item: ItemId,
    pub utility: u64,
    pub rest: u64,
}

/// A q-sequence as an item x itemset table of (utility, rest utility).
///
/// Rows exist only for items occurring in the sequence; every other row is
/// implicitly all zero. Itemset positions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicalQMatrix {
    pub tid: PeriodId,
    pub sid: u32,
    /// Sequence utility.
    pub su: u64,
    rows: Vec<(ItemId, Vec<MatrixEntry>)>,
    itemsets: Vec<Vec<MatrixCell>>,
}

impl PeriodicalQMatrix {
    /// Number of itemsets.
    pub fn size(&self) -> usize {
        self.itemsets.len()
    }

    pub fn row(&self, item: ItemId) -> Option<&[MatrixEntry]> {
        self.rows
            .binary_search_by_key(&item, |(i, _)| *i)
            .ok()
            .map(|k| self.rows[k].1.as_slice())
    }

    /// Entry at 1-based itemset `pos`; `(0, 0)` where the item is absent.
    pub fn entry(&self, item: ItemId, pos: usize) -> MatrixEntry {
        self.row(item)
            .and_then(|r| pos.checked_sub(1).and_then(|k| r.get(k)))
            .copied()
            .unwrap_or_default()
    }

    /// The q-items of 1-based itemset `pos`, ascending by item.
    pub fn itemset(&self, pos: usize) -> &[MatrixCell] {
        &self.itemsets[pos - 1]
    }

    pub fn rows(&self) -> impl Iterator<Item = (ItemId, &[MatrixEntry])> + '_ {
        self.rows.iter().map(|(i, r)| (*i, r.as_slice()))
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, &MatrixCell)> + '_ {
        self.itemsets
            .iter()
            .enumerate()
            .flat_map(|(k, set)| set.iter().map(move |c| (k + 1, c)))
    }

    pub(crate) fn approx_bytes(&self) -> usize {
        size_of::<Self>()
            + self
                .rows
                .iter()
                .map(|(_, r)| size_of::<(ItemId, Vec<MatrixEntry>)>() + r.len() * size_of::<MatrixEntry>())
                .sum::<usize>()
            + self
                .itemsets
                .iter()
                .map(|s| size_of::<Vec<MatrixCell>>() + s.len() * size_of::<MatrixCell>())
                .sum::<usize>()
    }
}

/// Total sequence utility per time period (`ptsu`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeriodAggregates(BTreeMap<PeriodId, u64>);

impl PeriodAggregates {
    /// Zero for periods without sequences.
    pub fn ptsu(&self, t: PeriodId) -> u64 {
        self.0.get(&t).copied().unwrap_or(0)
    }

    pub fn sum_over<'a>(&self, periods: impl IntoIterator<Item = &'a PeriodId>) -> u64 {
        periods.into_iter().map(|&t| self.ptsu(t)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PeriodId, u64)> + '_ {
        self.0.iter().map(|(&t, &u)| (t, u))
    }
}

pub fn compute_ptsu(db: &TemporalDatabase) -> PeriodAggregates {
    let mut map: BTreeMap<PeriodId, u64> = db.periods().iter().map(|&t| (t, 0)).collect();
    for s in db.sequences() {
        *map.entry(s.tid).or_default() += q_sequence_utility(s, db.utilities()).expect("validated database");
    }
    PeriodAggregates(map)
}

/// All matrices of a database, grouped by period.
#[derive(Debug, Clone)]
pub struct MatrixStore {
    matrices: Vec<PeriodicalQMatrix>,
    ranges: BTreeMap<PeriodId, Range<usize>>,
    periods: Vec<PeriodId>,
    aggregates: PeriodAggregates,
}

impl MatrixStore {
    pub fn matrices(&self) -> &[PeriodicalQMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, index: usize) -> &PeriodicalQMatrix {
        &self.matrices[index]
    }

    /// Indices of the matrices of period `t`.
    pub fn period_range(&self, t: PeriodId) -> Range<usize> {
        self.ranges.get(&t).cloned().unwrap_or(0..0)
    }

    pub fn in_period(&self, t: PeriodId) -> &[PeriodicalQMatrix] {
        &self.matrices[self.period_range(t)]
    }

    /// Every period of the database, ascending (including periods without sequences).
    pub fn periods(&self) -> &[PeriodId] {
        &self.periods
    }

    /// Dense index of `t` within [`Self::periods`].
    pub fn period_index(&self, t: PeriodId) -> Option<usize> {
        self.periods.binary_search(&t).ok()
    }

    pub fn aggregates(&self) -> &PeriodAggregates {
        &self.aggregates
    }

    pub fn ptsu(&self, t: PeriodId) -> u64 {
        self.aggregates.ptsu(t)
    }

    pub fn approx_bytes(&self) -> usize {
        self.matrices.iter().map(PeriodicalQMatrix::approx_bytes).sum()
    }
}

pub fn build_matrices(db: &TemporalDatabase) -> MatrixStore {
    let ut = db.utilities();
    let mut matrices = Vec::with_capacity(db.sequences().len());
    for s in db.sequences() {
        let su = q_sequence_utility(s, ut).expect("validated database");
        let mut remaining = su;
        let mut itemsets = Vec::with_capacity(s.size());
        for set in s.itemsets() {
            let cells = set
                .items()
                .iter()
                .map(|q| {
                    let utility = item_utility(q.item, q.quantity, ut).expect("validated database");
                    remaining -= utility;
                    MatrixCell {
                        item: q.item,
                        utility,
                        rest: remaining,
                    }
                })
                .collect();
            itemsets.push(cells);
        }
        let items: BTreeSet<ItemId> = s.distinct_items();
        let rows = items
            .into_iter()
            .map(|item| {
                let row = itemsets
                    .iter()
                    .map(|set: &Vec<MatrixCell>| {
                        set.iter()
                            .find(|c| c.item == item)
                            .map(|c| MatrixEntry {
                                utility: c.utility,
                                rest: c.rest,
                            })
                            .unwrap_or_default()
                    })
                    .collect();
                (item, row)
            })
            .collect();
        matrices.push(PeriodicalQMatrix {
            tid: s.tid,
            sid: s.sid,
            su,
            rows,
            itemsets,
        });
    }

    let mut ranges: BTreeMap<PeriodId, Range<usize>> = BTreeMap::new();
    for (k, m) in matrices.iter().enumerate() {
        ranges.entry(m.tid).and_modify(|r| r.end = k + 1).or_insert(k..k + 1);
    }
    MatrixStore {
        matrices,
        ranges,
        periods: db.periods().iter().copied().collect(),
        aggregates: compute_ptsu(db),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;

    fn find(store: &MatrixStore, tid: u32, sid: u32) -> &PeriodicalQMatrix {
        store
            .in_period(PeriodId(tid))
            .iter()
            .find(|m| m.sid == sid)
            .unwrap()
    }

    #[test]
    fn matrix_entries_of_qs21() {
        let store = build_matrices(&running_example());
        let m = find(&store, 2, 1);
        let a = ItemId(1);
        assert_eq!(m.entry(a, 2), MatrixEntry { utility: 6, rest: 9 });
        assert_eq!(m.entry(a, 1), MatrixEntry { utility: 0, rest: 0 });
        assert_eq!(m.entry(ItemId(4), 3), MatrixEntry { utility: 1, rest: 0 });
        // f never occurs in t_2
        assert_eq!(m.entry(ItemId(6), 1), MatrixEntry::default());
    }

    #[test]
    fn rest_utilities_are_suffix_sums() {
        let db = running_example();
        let store = build_matrices(&db);
        for m in store.matrices() {
            let mut before = m.su;
            for (_, c) in m.cells() {
                assert_eq!(c.utility + c.rest, before);
                before = c.rest;
            }
            assert_eq!(before, 0);
            let total: u64 = m.rows().flat_map(|(_, r)| r.iter().map(|e| e.utility)).sum();
            assert_eq!(total, m.su);
        }
    }

    #[test]
    fn period_totals() {
        let db = running_example();
        let agg = compute_ptsu(&db);
        assert_eq!(agg.ptsu(PeriodId(1)), 34);
        assert_eq!(agg.ptsu(PeriodId(2)), 49);
        assert_eq!(agg.ptsu(PeriodId(3)), 27);
        assert_eq!(agg.iter().map(|(_, u)| u).sum::<u64>(), 110);
        assert_eq!(agg.ptsu(PeriodId(9)), 0);
    }

    #[test]
    fn matrices_are_grouped_by_period() {
        let store = build_matrices(&running_example());
        assert_eq!(store.period_range(PeriodId(1)), 0..2);
        assert_eq!(store.period_range(PeriodId(2)), 2..4);
        assert_eq!(store.period_range(PeriodId(3)), 4..5);
        assert_eq!(store.period_index(PeriodId(3)), Some(2));
    }
}
