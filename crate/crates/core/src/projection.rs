//! Utility chains (projected databases) and the PEU/RSU upper bounds.
//!
//! A chain holds, for every q-sequence containing a pattern, one utility list
//! with a single element per extension position: the best pattern utility
//! ending there (`acu`) and the utility of everything after the pattern's
//! last item at that position (`ru`). Chains of longer patterns are derived
//! from their parent's chain and the q-matrices only.
//!
//! The empty pattern also has a chain: one element per sequence at the
//! virtual position 0 with `acu = 0` and `ru = su(s)`. S-extending it yields
//! the 1-sequence chains.

use std::collections::{BTreeMap, BTreeSet};
use std::mem::size_of;

use crate::model::{ExtensionKind, ItemId, Pattern, PeriodId, ShelfTable, UtilityRatio};
use crate::qmatrix::{MatrixStore, PeriodAggregates, PeriodicalQMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UtilityElement {
    /// 1-based extension position (0 only for the empty pattern).
    pub pos: u32,
    pub acu: u64,
    pub ru: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityList {
    /// Index of the sequence's matrix in the [`MatrixStore`].
    pub seq: usize,
    pub sid: u32,
    pub time: PeriodId,
    pub peu: u64,
    /// Ascending by `pos`.
    pub elements: Vec<UtilityElement>,
}

impl UtilityList {
    fn new(seq: usize, m: &PeriodicalQMatrix, elements: Vec<UtilityElement>) -> Self {
        UtilityList {
            seq,
            sid: m.sid,
            time: m.tid,
            peu: peu_of(&elements),
            elements,
        }
    }

    /// Pattern utility in this sequence: the best `acu`.
    pub fn utility(&self) -> u64 {
        self.elements.iter().map(|e| e.acu).max().unwrap_or(0)
    }
}

/// Max of `acu + ru` over elements with `ru > 0`, else 0.
fn peu_of(elements: &[UtilityElement]) -> u64 {
    elements
        .iter()
        .filter(|e| e.ru > 0)
        .map(|e| e.acu + e.ru)
        .max()
        .unwrap_or(0)
}

/// Which sequences a chain covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Period(PeriodId),
    AllPeriods,
}

/// The projected database of a pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedDatabase {
    pattern: Pattern,
    /// Ascending by `seq`, hence grouped by period.
    lists: Vec<UtilityList>,
}

impl ProjectedDatabase {
    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn lists(&self) -> &[UtilityList] {
        &self.lists
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn lists_in(&self, t: PeriodId) -> impl Iterator<Item = &UtilityList> + '_ {
        self.lists.iter().filter(move |l| l.time == t)
    }

    /// Periods in which the pattern occurs.
    pub fn periods(&self) -> BTreeSet<PeriodId> {
        self.lists.iter().map(|l| l.time).collect()
    }

    /// `TPEU(r, t)`.
    pub fn tpeu(&self, t: PeriodId) -> u64 {
        self.lists_in(t).map(|l| l.peu).sum()
    }

    /// `TPEU(r)` over every period the chain covers.
    pub fn tpeu_total(&self) -> u64 {
        self.lists.iter().map(|l| l.peu).sum()
    }

    /// `pu(r, t)`.
    pub fn periodical_utility(&self, t: PeriodId) -> u64 {
        self.lists_in(t).map(UtilityList::utility).sum()
    }

    /// Sum of pattern utilities over every covered sequence.
    pub fn utility_total(&self) -> u64 {
        self.lists.iter().map(UtilityList::utility).sum()
    }

    pub fn approx_bytes(&self) -> usize {
        size_of::<Self>()
            + self.pattern.len() * size_of::<ItemId>()
            + self
                .lists
                .iter()
                .map(|l| size_of::<UtilityList>() + l.elements.len() * size_of::<UtilityElement>())
                .sum::<usize>()
    }
}

fn in_scope(scope: Scope, store: &MatrixStore) -> std::ops::Range<usize> {
    match scope {
        Scope::Period(t) => store.period_range(t),
        Scope::AllPeriods => 0..store.matrices().len(),
    }
}

/// Chain of the empty pattern.
pub fn root_chain(store: &MatrixStore, scope: Scope) -> ProjectedDatabase {
    let lists = in_scope(scope, store)
        .map(|k| {
            let m = store.matrix(k);
            UtilityList::new(
                k,
                m,
                vec![UtilityElement {
                    pos: 0,
                    acu: 0,
                    ru: m.su,
                }],
            )
        })
        .collect();
    ProjectedDatabase {
        pattern: Pattern::empty(),
        lists,
    }
}

/// Chains of every 1-sequence, built in a single pass over the matrices.
pub fn singleton_chains(store: &MatrixStore, scope: Scope) -> Vec<ProjectedDatabase> {
    let mut by_item: BTreeMap<ItemId, Vec<UtilityList>> = BTreeMap::new();
    for k in in_scope(scope, store) {
        let m = store.matrix(k);
        for (item, row) in m.rows() {
            let elements = row
                .iter()
                .enumerate()
                .filter(|(_, e)| e.utility > 0)
                .map(|(p, e)| UtilityElement {
                    pos: p as u32 + 1,
                    acu: e.utility,
                    ru: e.rest,
                })
                .collect();
            by_item.entry(item).or_default().push(UtilityList::new(k, m, elements));
        }
    }
    by_item
        .into_iter()
        .map(|(item, lists)| ProjectedDatabase {
            pattern: Pattern::empty().extend(item, ExtensionKind::S).expect("S-extension"),
            lists,
        })
        .collect()
}

/// Candidate extension items with their RSU sums.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtensionItems {
    /// I-extension item -> `TRSU` over the chain's sequences.
    pub i_items: BTreeMap<ItemId, u64>,
    /// S-extension item -> `TRSU` over the chain's sequences.
    pub s_items: BTreeMap<ItemId, u64>,
}

impl ExtensionItems {
    pub fn is_empty(&self) -> bool {
        self.i_items.is_empty() && self.s_items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, ExtensionKind, u64)> + '_ {
        self.i_items
            .iter()
            .map(|(&i, &u)| (i, ExtensionKind::I, u))
            .chain(self.s_items.iter().map(|(&i, &u)| (i, ExtensionKind::S, u)))
    }
}

fn list_extension_items(
    list: &UtilityList,
    m: &PeriodicalQMatrix,
    last: Option<ItemId>,
    i_out: &mut Vec<ItemId>,
    s_out: &mut Vec<ItemId>,
) {
    i_out.clear();
    s_out.clear();
    if let Some(last) = last {
        for e in &list.elements {
            let cells = m.itemset(e.pos as usize);
            let from = cells.partition_point(|c| c.item <= last);
            i_out.extend(cells[from..].iter().map(|c| c.item));
        }
    }
    if let Some(first) = list.elements.first() {
        for pos in first.pos as usize + 1..=m.size() {
            s_out.extend(m.itemset(pos).iter().map(|c| c.item));
        }
    }
    i_out.sort_unstable();
    i_out.dedup();
    s_out.sort_unstable();
    s_out.dedup();
}

/// Items that extend the chain's pattern in at least one covered sequence.
///
/// Each item's value is `TRSU` of the extension: the sum of the parent's PEU
/// over the sequences in which the extension occurs.
pub fn find_extension_items(chain: &ProjectedDatabase, store: &MatrixStore) -> ExtensionItems {
    let last = chain.pattern.last_item();
    let mut out = ExtensionItems::default();
    let (mut i_buf, mut s_buf) = (Vec::new(), Vec::new());
    for list in &chain.lists {
        list_extension_items(list, store.matrix(list.seq), last, &mut i_buf, &mut s_buf);
        for &i in &i_buf {
            *out.i_items.entry(i).or_default() += list.peu;
        }
        for &i in &s_buf {
            *out.s_items.entry(i).or_default() += list.peu;
        }
    }
    out
}

/// `TRSU` of one extension, optionally restricted to a period.
pub fn trsu(
    parent: &ProjectedDatabase,
    item: ItemId,
    kind: ExtensionKind,
    store: &MatrixStore,
    period: Option<PeriodId>,
) -> u64 {
    let last = parent.pattern.last_item();
    let (mut i_buf, mut s_buf) = (Vec::new(), Vec::new());
    parent
        .lists
        .iter()
        .filter(|l| period.is_none_or(|t| l.time == t))
        .filter(|l| {
            list_extension_items(l, store.matrix(l.seq), last, &mut i_buf, &mut s_buf);
            let found = match kind {
                ExtensionKind::I => &i_buf,
                ExtensionKind::S => &s_buf,
            };
            found.binary_search(&item).is_ok()
        })
        .map(|l| l.peu)
        .sum()
}

fn extend_list(list: &UtilityList, m: &PeriodicalQMatrix, item: ItemId, kind: ExtensionKind) -> Vec<UtilityElement> {
    let Some(row) = m.row(item) else {
        return Vec::new();
    };
    match kind {
        ExtensionKind::I => list
            .elements
            .iter()
            .filter(|e| e.pos > 0)
            .filter_map(|e| {
                let entry = row[e.pos as usize - 1];
                (entry.utility > 0).then(|| UtilityElement {
                    pos: e.pos,
                    acu: e.acu + entry.utility,
                    ru: entry.rest,
                })
            })
            .collect(),
        ExtensionKind::S => {
            let Some(first) = list.elements.first() else {
                return Vec::new();
            };
            let mut out = Vec::new();
            let mut best = 0u64;
            let mut next = 0usize;
            for pos in first.pos as usize + 1..=m.size() {
                // fold in parent elements strictly before `pos`
                while next < list.elements.len() && (list.elements[next].pos as usize) < pos {
                    best = best.max(list.elements[next].acu);
                    next += 1;
                }
                let entry = row[pos - 1];
                if entry.utility > 0 {
                    out.push(UtilityElement {
                        pos: pos as u32,
                        acu: best + entry.utility,
                        ru: entry.rest,
                    });
                }
            }
            out
        }
    }
}

/// Chain of `chain.pattern` extended by `item`. Empty when the extension is
/// not a valid pattern or occurs nowhere.
pub fn extend_and_project(
    chain: &ProjectedDatabase,
    item: ItemId,
    kind: ExtensionKind,
    store: &MatrixStore,
) -> ProjectedDatabase {
    let Some(pattern) = chain.pattern.extend(item, kind) else {
        return ProjectedDatabase {
            pattern: chain.pattern.clone(),
            lists: Vec::new(),
        };
    };
    let lists = chain
        .lists
        .iter()
        .filter_map(|l| {
            let m = store.matrix(l.seq);
            let elements = extend_list(l, m, item, kind);
            (!elements.is_empty()).then(|| UtilityList::new(l.seq, m, elements))
        })
        .collect();
    ProjectedDatabase { pattern, lists }
}

/// Chain of an arbitrary pattern, built by successive extensions from the root.
pub fn project(pattern: &Pattern, store: &MatrixStore, scope: Scope) -> ProjectedDatabase {
    let mut chain = root_chain(store, scope);
    for (k, set) in pattern.itemsets().iter().enumerate() {
        for (j, &item) in set.iter().enumerate() {
            let kind = if j == 0 {
                ExtensionKind::S
            } else {
                ExtensionKind::I
            };
            chain = extend_and_project(&chain, item, kind, store);
            if chain.is_empty() {
                return ProjectedDatabase {
                    pattern: pattern.clone(),
                    lists: Vec::new(),
                };
            }
        }
        debug_assert_eq!(chain.pattern.size(), k + 1);
    }
    chain
}

/// On-shelf periods, on-shelf utility and its ratio denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnShelfStats {
    pub ot: BTreeSet<PeriodId>,
    pub ou: u64,
    /// Summed `ptsu` over every period of `ot`.
    pub denominator: u64,
}

impl OnShelfStats {
    pub fn our(&self) -> UtilityRatio {
        UtilityRatio::new(self.ou, self.denominator)
    }
}

/// `ot`, `ou` and `our` of the chain's pattern. The chain must cover every
/// period of `ot` in which the pattern occurs.
pub fn on_shelf_stats(chain: &ProjectedDatabase, shelf: &ShelfTable, aggregates: &PeriodAggregates) -> OnShelfStats {
    let ot = shelf.pattern_periods(&chain.pattern);
    let ou = chain
        .lists
        .iter()
        .filter(|l| ot.contains(&l.time))
        .map(UtilityList::utility)
        .sum();
    let denominator = aggregates.sum_over(&ot);
    OnShelfStats { ot, ou, denominator }
}

/// Best utility of `r` per extension position in one sequence, by dynamic
/// programming over the q-matrix. Positions are 1-based.
pub fn extension_position_utilities(r: &Pattern, m: &PeriodicalQMatrix) -> Vec<(usize, u64)> {
    if r.itemsets().iter().flatten().any(|&i| m.row(i).is_none()) {
        return Vec::new();
    }
    let n = m.size();
    let itemset_utility = |set: &[ItemId], pos: usize| -> Option<u64> {
        set.iter().try_fold(0u64, |acc, &i| {
            let e = m.entry(i, pos);
            (e.utility > 0).then_some(acc + e.utility)
        })
    };
    // best[k]: best utility of the itemsets matched so far with the last at k+1
    let mut best: Vec<Option<u64>> = vec![Some(0); n + 1];
    let mut first = true;
    for set in r.itemsets() {
        let mut next = vec![None; n + 1];
        let mut prefix: Option<u64> = None;
        for pos in 1..=n {
            let before = if first { Some(0) } else { prefix };
            if let (Some(b), Some(u)) = (before, itemset_utility(set, pos)) {
                next[pos] = Some(b + u);
            }
            if !first {
                prefix = prefix.max(best[pos]);
            }
        }
        best = next;
        first = false;
        if best.iter().all(Option::is_none) {
            return Vec::new();
        }
    }
    if r.is_empty() {
        return Vec::new();
    }
    best.iter()
        .enumerate()
        .filter_map(|(p, u)| u.map(|u| (p, u)))
        .collect()
}

/// `u(r, p, s)`, or `None` when no instance ends at `p`.
pub fn utility_at_extension_position(r: &Pattern, pos: usize, m: &PeriodicalQMatrix) -> Option<u64> {
    extension_position_utilities(r, m)
        .into_iter()
        .find(|&(p, _)| p == pos)
        .map(|(_, u)| u)
}

/// `u(r, s)`; 0 when `r` is not contained in `s`.
pub fn pattern_utility_in_sequence(r: &Pattern, m: &PeriodicalQMatrix) -> u64 {
    extension_position_utilities(r, m)
        .into_iter()
        .map(|(_, u)| u)
        .max()
        .unwrap_or(0)
}

/// `ru(r, p, s)`: utility of every q-item after the last item of `r` placed at `p`.
pub fn rest_utility(r: &Pattern, pos: usize, m: &PeriodicalQMatrix) -> u64 {
    r.last_item().map_or(m.su, |i| m.entry(i, pos).rest)
}

/// `PEU(r, s)`.
pub fn peu(r: &Pattern, m: &PeriodicalQMatrix) -> u64 {
    extension_position_utilities(r, m)
        .into_iter()
        .map(|(p, u)| (u, rest_utility(r, p, m)))
        .filter(|&(_, ru)| ru > 0)
        .map(|(u, ru)| u + ru)
        .max()
        .unwrap_or(0)
}

/// `pu(r, t)` by scanning the period's matrices without a chain.
pub fn scan_periodical_utility(r: &Pattern, t: PeriodId, store: &MatrixStore) -> u64 {
    store
        .in_period(t)
        .iter()
        .map(|m| pattern_utility_in_sequence(r, m))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;
    use crate::qmatrix::build_matrices;

    const A: ItemId = ItemId(1);
    const B: ItemId = ItemId(2);
    const C: ItemId = ItemId(3);
    const D: ItemId = ItemId(4);
    const E: ItemId = ItemId(5);

    fn matrix(store: &MatrixStore, tid: u32, sid: u32) -> &PeriodicalQMatrix {
        store.in_period(PeriodId(tid)).iter().find(|m| m.sid == sid).unwrap()
    }

    fn a_then_c() -> Pattern {
        Pattern::from_ids(&[&[1], &[3]])
    }

    #[test]
    fn utility_at_positions() {
        let store = build_matrices(&running_example());
        let qs22 = matrix(&store, 2, 2);
        assert_eq!(utility_at_extension_position(&a_then_c(), 3, qs22), Some(9));
        assert_eq!(utility_at_extension_position(&a_then_c(), 4, qs22), Some(10));
        assert_eq!(utility_at_extension_position(&a_then_c(), 1, qs22), None);
        let qs11 = matrix(&store, 1, 1);
        let b_then_c = Pattern::from_ids(&[&[2], &[3]]);
        assert_eq!(utility_at_extension_position(&b_then_c, 2, qs11), Some(7));
    }

    #[test]
    fn utility_in_sequence() {
        let store = build_matrices(&running_example());
        assert_eq!(pattern_utility_in_sequence(&a_then_c(), matrix(&store, 2, 2)), 10);
        let bd = Pattern::from_ids(&[&[2, 4]]);
        assert_eq!(pattern_utility_in_sequence(&bd, matrix(&store, 1, 1)), 6);
        let f = Pattern::from_ids(&[&[6]]);
        assert_eq!(pattern_utility_in_sequence(&f, matrix(&store, 1, 1)), 0);
    }

    #[test]
    fn rest_utilities() {
        let store = build_matrices(&running_example());
        let qs22 = matrix(&store, 2, 2);
        let a_then_a = Pattern::from_ids(&[&[1], &[1]]);
        assert_eq!(rest_utility(&a_then_a, 2, qs22), 17);
        assert_eq!(rest_utility(&a_then_c(), 3, qs22), 10);
        assert_eq!(rest_utility(&a_then_c(), 4, qs22), 0);
    }

    #[test]
    fn peu_values() {
        let store = build_matrices(&running_example());
        assert_eq!(peu(&a_then_c(), matrix(&store, 2, 1)), 10);
        assert_eq!(peu(&a_then_c(), matrix(&store, 2, 2)), 19);
        // <{c e}> ends at the last q-item of QS_{3,1}
        let ce = Pattern::from_ids(&[&[3, 5]]);
        assert_eq!(peu(&ce, matrix(&store, 3, 1)), 0);
    }

    #[test]
    fn period_bounds_from_chains() {
        let db = running_example();
        let store = build_matrices(&db);
        let all = project(&a_then_c(), &store, Scope::AllPeriods);
        assert_eq!(all.tpeu(PeriodId(2)), 29);
        // QS_{3,1}: a:4 -> 8, c:1 -> 1, then e:3 -> 6 remains
        assert_eq!(all.tpeu(PeriodId(3)), 15);
        assert_eq!(all.tpeu(PeriodId(1)), 0);
        assert_eq!(all.periodical_utility(PeriodId(2)), 19);
        assert_eq!(all.periodical_utility(PeriodId(1)), 0);
        let c = project(&Pattern::from_ids(&[&[3]]), &store, Scope::AllPeriods);
        assert_eq!(c.periodical_utility(PeriodId(1)), 8);
    }

    #[test]
    fn trsu_values() {
        let store = build_matrices(&running_example());
        let t2 = Scope::Period(PeriodId(2));
        let parent = project(&a_then_c(), &store, t2);
        assert_eq!(trsu(&parent, B, ExtensionKind::S, &store, Some(PeriodId(2))), 19);
        assert_eq!(trsu(&parent, C, ExtensionKind::S, &store, Some(PeriodId(2))), 19);
        assert_eq!(trsu(&parent, ItemId(6), ExtensionKind::S, &store, None), 0);
        let ext = find_extension_items(&parent, &store);
        assert_eq!(ext.s_items.get(&B), Some(&19));
        assert_eq!(ext.s_items.get(&C), Some(&19));
    }

    #[test]
    fn on_shelf_stats_of_a_then_c() {
        let db = running_example();
        let store = build_matrices(&db);
        let chain = project(&a_then_c(), &store, Scope::AllPeriods);
        let stats = on_shelf_stats(&chain, db.shelf(), store.aggregates());
        // c is on shelf in every period, so the union covers t_1 too
        assert_eq!(stats.ot, [PeriodId(1), PeriodId(2), PeriodId(3)].into_iter().collect());
        assert_eq!(stats.ou, 28);
        assert_eq!(stats.denominator, 110);
        assert_eq!(stats.our().to_fixed6(), "0.254545");

        let c = project(&Pattern::from_ids(&[&[3]]), &store, Scope::AllPeriods);
        let stats = on_shelf_stats(&c, db.shelf(), store.aggregates());
        assert_eq!(stats.denominator, 110);
        assert_eq!(stats.ou, 16);

        // a and b never share a sequence; both shelf sets count
        let ab = project(&Pattern::from_ids(&[&[1], &[2]]), &store, Scope::AllPeriods);
        let ab_b = project(&Pattern::from_ids(&[&[2], &[1]]), &store, Scope::AllPeriods);
        assert!(ab_b.is_empty());
        let stats = on_shelf_stats(&ab_b, db.shelf(), store.aggregates());
        assert_eq!((stats.ou, stats.denominator), (0, 110));
        assert_eq!(stats.our().to_f64(), 0.0);
        assert!(!ab.is_empty());
    }

    #[test]
    fn extension_items_of_a_in_t2() {
        let store = build_matrices(&running_example());
        let root = root_chain(&store, Scope::Period(PeriodId(2)));
        let a = extend_and_project(&root, A, ExtensionKind::S, &store);
        let ext = find_extension_items(&a, &store);
        let i: BTreeSet<_> = ext.i_items.keys().copied().collect();
        let s: BTreeSet<_> = ext.s_items.keys().copied().collect();
        assert_eq!(i, [C, D, E].into_iter().collect());
        assert_eq!(s, [A, B, C, D, E].into_iter().collect());

        // <{c e}> in t_3 ends each instance at the final q-item
        let ce = project(&Pattern::from_ids(&[&[3, 5]]), &store, Scope::Period(PeriodId(3)));
        assert!(find_extension_items(&ce, &store).is_empty());
    }

    #[test]
    fn extensions_of_a_in_t2() {
        let store = build_matrices(&running_example());
        let root = root_chain(&store, Scope::Period(PeriodId(2)));
        let a = extend_and_project(&root, A, ExtensionKind::S, &store);

        let a_c = extend_and_project(&a, C, ExtensionKind::S, &store);
        let peus: Vec<_> = a_c.lists().iter().map(|l| (l.sid, l.peu)).collect();
        assert_eq!(peus, [(1, 10), (2, 19)]);
        let qs22 = &a_c.lists()[1];
        assert_eq!(
            qs22.elements,
            vec![
                UtilityElement { pos: 3, acu: 9, ru: 10 },
                UtilityElement { pos: 4, acu: 10, ru: 0 },
            ]
        );

        let ac = extend_and_project(&a, C, ExtensionKind::I, &store);
        let sids: Vec<_> = ac.lists().iter().map(|l| l.sid).collect();
        assert_eq!(sids, [1]);
        assert_eq!(ac.pattern().to_string(), "{1 3}");

        assert!(extend_and_project(&a, ItemId(6), ExtensionKind::S, &store).is_empty());
    }

    #[test]
    fn singleton_chains_match_root_extension() {
        let store = build_matrices(&running_example());
        let root = root_chain(&store, Scope::AllPeriods);
        for chain in singleton_chains(&store, Scope::AllPeriods) {
            let item = chain.pattern().last_item().unwrap();
            assert_eq!(chain, extend_and_project(&root, item, ExtensionKind::S, &store));
        }
    }
}
