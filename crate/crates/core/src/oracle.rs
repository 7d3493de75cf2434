//! Exhaustive reference miner.
//!
//! Everything here works on the raw q-sequences: instances are enumerated
//! explicitly and utilities recomputed from the profit table. No matrix or
//! chain code is shared with the miners, so agreement between the two is
//! evidence rather than tautology.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::OracleError;
use crate::model::{
    find_instances, item_utility, q_sequence_utility, ExtensionKind, ItemId, MinedPattern, Pattern, PeriodId,
    QItemset, QSequence, TemporalDatabase, Threshold, UtilityRatio, UtilityTable,
};

/// Default ceiling on `distinct items x max sequence length`.
pub const DEFAULT_BUDGET: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Longest pattern (in items) to enumerate; at least 1.
    pub max_pattern_length: usize,
    pub threshold: Threshold,
    pub budget: usize,
}

impl OracleConfig {
    /// No length cap beyond what the database can contain.
    pub fn unbounded(db: &TemporalDatabase, threshold: Threshold) -> Self {
        OracleConfig {
            max_pattern_length: db.max_sequence_length().max(1),
            threshold,
            budget: DEFAULT_BUDGET,
        }
    }
}

fn utility_of(item: ItemId, w: &QItemset, ut: &UtilityTable) -> u64 {
    let q = w.quantity_of(item).expect("instance covers item");
    item_utility(item, q, ut).expect("validated database")
}

/// Utility of `r` at one instance.
pub fn instance_utility(r: &Pattern, instance: &[usize], s: &QSequence, ut: &UtilityTable) -> u64 {
    r.itemsets()
        .iter()
        .zip(instance)
        .map(|(set, &pos)| {
            let w = &s.itemsets()[pos - 1];
            set.iter().map(|&i| utility_of(i, w, ut)).sum::<u64>()
        })
        .sum()
}

/// Best instance utility per extension position.
pub fn utilities_by_position(r: &Pattern, s: &QSequence, ut: &UtilityTable) -> BTreeMap<usize, u64> {
    let mut out = BTreeMap::new();
    for inst in find_instances(r, s) {
        let u = instance_utility(r, &inst, s, ut);
        let slot = out.entry(*inst.last().unwrap()).or_insert(0);
        *slot = u.max(*slot);
    }
    out
}

/// `u(r, s)`: the best instance utility, 0 if `r` does not occur.
pub fn sequence_utility(r: &Pattern, s: &QSequence, ut: &UtilityTable) -> u64 {
    utilities_by_position(r, s, ut).into_values().max().unwrap_or(0)
}

/// `u(r, s)` by a direct recursive search that never materializes instances.
pub fn sequence_utility_recursive(r: &Pattern, s: &QSequence, ut: &UtilityTable) -> u64 {
    fn best(r: &[Vec<ItemId>], s: &[QItemset], ut: &UtilityTable) -> Option<u64> {
        let Some((head, tail)) = r.split_first() else {
            return Some(0);
        };
        (0..s.len())
            .filter(|&k| head.iter().all(|&i| s[k].contains(i)))
            .filter_map(|k| {
                let here: u64 = head.iter().map(|&i| utility_of(i, &s[k], ut)).sum();
                best(tail, &s[k + 1..], ut).map(|rest| here + rest)
            })
            .max()
    }
    if r.is_empty() {
        return 0;
    }
    best(r.itemsets(), s.itemsets(), ut).unwrap_or(0)
}

/// Utility of every q-item after `item` within itemset `pos` and all later itemsets.
pub fn rest_after(s: &QSequence, pos: usize, item: ItemId, ut: &UtilityTable) -> u64 {
    let mut total = 0;
    for (k, w) in s.itemsets().iter().enumerate().skip(pos - 1) {
        for q in w.items() {
            if k + 1 > pos || q.item > item {
                total += item_utility(q.item, q.quantity, ut).expect("validated database");
            }
        }
    }
    total
}

/// `PEU(r, s)`; for the empty pattern, the sequence utility.
pub fn peu(r: &Pattern, s: &QSequence, ut: &UtilityTable) -> u64 {
    let Some(last) = r.last_item() else {
        return q_sequence_utility(s, ut).expect("validated database");
    };
    utilities_by_position(r, s, ut)
        .into_iter()
        .map(|(p, u)| (u, rest_after(s, p, last, ut)))
        .filter(|&(_, ru)| ru > 0)
        .map(|(u, ru)| u + ru)
        .max()
        .unwrap_or(0)
}

fn contains(r: &Pattern, s: &QSequence) -> bool {
    !find_instances(r, s).is_empty()
}

/// Total utility of every q-sequence in period `t`.
pub fn ptsu(db: &TemporalDatabase, t: PeriodId) -> u64 {
    db.sequences()
        .iter()
        .filter(|s| s.tid == t)
        .map(|s| q_sequence_utility(s, db.utilities()).expect("validated database"))
        .sum()
}

/// `pu(r, t)`.
pub fn periodical_utility(r: &Pattern, t: PeriodId, db: &TemporalDatabase) -> u64 {
    db.sequences()
        .iter()
        .filter(|s| s.tid == t)
        .map(|s| sequence_utility(r, s, db.utilities()))
        .sum()
}

/// `TPEU(r, t)`, or summed over all periods when `t` is `None`.
pub fn tpeu(r: &Pattern, t: Option<PeriodId>, db: &TemporalDatabase) -> u64 {
    db.sequences()
        .iter()
        .filter(|s| t.is_none_or(|t| s.tid == t))
        .filter(|s| contains(r, s))
        .map(|s| peu(r, s, db.utilities()))
        .sum()
}

/// `TRSU(r, t)` of a non-empty pattern: its parent's PEU summed over the
/// sequences (of period `t`, or all) that contain `r`.
pub fn trsu(r: &Pattern, t: Option<PeriodId>, db: &TemporalDatabase) -> u64 {
    let (parent, _, _) = r.parent().expect("non-empty pattern");
    db.sequences()
        .iter()
        .filter(|s| t.is_none_or(|t| s.tid == t))
        .filter(|s| contains(r, s))
        .map(|s| peu(&parent, s, db.utilities()))
        .sum()
}

/// Scores `r` against the whole database: `ot`, `ou` and `our`.
pub fn score(r: &Pattern, db: &TemporalDatabase) -> MinedPattern {
    let ot: BTreeSet<PeriodId> = r
        .items()
        .flat_map(|i| db.shelf().periods_of(i).into_iter().flatten().copied())
        .collect();
    let ou = ot.iter().map(|&t| periodical_utility(r, t, db)).sum();
    let den = ot.iter().map(|&t| ptsu(db, t)).sum();
    MinedPattern {
        pattern: r.clone(),
        ou,
        our: UtilityRatio::new(ou, den),
        ot: ot.into_iter().collect(),
    }
}

fn check_budget(db: &TemporalDatabase, budget: usize) -> Result<(), OracleError> {
    let items = db.items().len();
    let length = db.max_sequence_length();
    if items.saturating_mul(length) > budget {
        return Err(OracleError::BudgetExceeded { items, length, budget });
    }
    Ok(())
}

/// Every pattern of at most `cap` items contained in some q-sequence.
pub fn enumerate_all_patterns(
    db: &TemporalDatabase,
    cap: usize,
    budget: usize,
) -> Result<BTreeSet<Pattern>, OracleError> {
    check_budget(db, budget)?;
    let items: Vec<ItemId> = db.items().into_iter().collect();
    let mut out = BTreeSet::new();
    let mut stack: Vec<(Pattern, Vec<&QSequence>)> = vec![(Pattern::empty(), db.sequences().iter().collect())];
    while let Some((r, hosts)) = stack.pop() {
        if r.len() >= cap {
            continue;
        }
        for kind in [ExtensionKind::I, ExtensionKind::S] {
            for &i in &items {
                let Some(ext) = r.extend(i, kind) else {
                    continue;
                };
                let next: Vec<&QSequence> = hosts.iter().copied().filter(|s| contains(&ext, s)).collect();
                if !next.is_empty() {
                    out.insert(ext.clone());
                    stack.push((ext, next));
                }
            }
        }
    }
    Ok(out)
}

/// Scores of every pattern up to `cap` items, sorted by (length, pattern).
pub fn score_all(db: &TemporalDatabase, cap: usize, budget: usize) -> Result<Vec<MinedPattern>, OracleError> {
    let mut all: Vec<MinedPattern> = enumerate_all_patterns(db, cap, budget)?
        .iter()
        .map(|r| score(r, db))
        .collect();
    all.sort_by(|a, b| (a.pattern.len(), &a.pattern).cmp(&(b.pattern.len(), &b.pattern)));
    Ok(all)
}

/// Keeps the scored patterns whose ratio reaches `threshold`.
pub fn filter_by_threshold(scored: &[MinedPattern], threshold: Threshold) -> Vec<MinedPattern> {
    scored
        .iter()
        .filter(|m| threshold.admits(m.ou, m.our.den))
        .cloned()
        .collect()
}

/// Every pattern with `our >= xi` and at most `max_pattern_length` items.
pub fn oracle_mine(db: &TemporalDatabase, config: &OracleConfig) -> Result<Vec<MinedPattern>, OracleError> {
    let scored = score_all(db, config.max_pattern_length, config.budget)?;
    Ok(filter_by_threshold(&scored, config.threshold))
}
