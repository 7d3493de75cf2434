//! Domain types for temporal quantitative sequence databases.
//!
//! Items and time periods are positive integer identifiers. Item order is the
//! numeric order of [`ItemId`]; every itemset is kept in that order so that
//! "items after `i` in a sequence" has one meaning everywhere in the crate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u32);

impl ItemId {
    pub fn new(id: u32) -> Result<Self, ModelError> {
        if id == 0 {
            return Err(ModelError::ZeroId("item"));
        }
        Ok(ItemId(id))
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PeriodId(pub u32);

impl PeriodId {
    pub fn new(id: u32) -> Result<Self, ModelError> {
        if id == 0 {
            return Err(ModelError::ZeroId("time period"));
        }
        Ok(PeriodId(id))
    }
}

impl fmt::Display for PeriodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An item with its purchase quantity (internal utility).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QItem {
    pub item: ItemId,
    pub quantity: u32,
}

impl QItem {
    pub fn new(item: ItemId, quantity: u32) -> Result<Self, ModelError> {
        if quantity == 0 {
            return Err(ModelError::ZeroQuantity(item));
        }
        Ok(QItem { item, quantity })
    }
}

/// A non-empty set of q-items stored in ascending item order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QItemset(Vec<QItem>);

impl QItemset {
    /// Sorts the items and rejects empty sets and repeated items.
    pub fn new(mut items: Vec<QItem>) -> Result<Self, ModelError> {
        if items.is_empty() {
            return Err(ModelError::EmptyItemset);
        }
        items.sort_by_key(|q| q.item);
        if let Some(w) = items.windows(2).find(|w| w[0].item == w[1].item) {
            return Err(ModelError::DuplicateItem(w[0].item));
        }
        Ok(QItemset(items))
    }

    pub fn items(&self) -> &[QItem] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn quantity_of(&self, item: ItemId) -> Option<u32> {
        self.0
            .binary_search_by_key(&item, |q| q.item)
            .ok()
            .map(|i| self.0[i].quantity)
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.quantity_of(item).is_some()
    }
}

/// A q-sequence stamped with its time period and per-period identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QSequence {
    pub tid: PeriodId,
    pub sid: u32,
    itemsets: Vec<QItemset>,
}

impl QSequence {
    pub fn new(tid: PeriodId, sid: u32, itemsets: Vec<QItemset>) -> Result<Self, ModelError> {
        if sid == 0 {
            return Err(ModelError::ZeroId("sequence"));
        }
        if itemsets.is_empty() {
            return Err(ModelError::EmptySequence { tid, sid });
        }
        Ok(QSequence { tid, sid, itemsets })
    }

    pub fn itemsets(&self) -> &[QItemset] {
        &self.itemsets
    }

    /// Number of itemsets.
    pub fn size(&self) -> usize {
        self.itemsets.len()
    }

    /// Total number of q-items.
    pub fn length(&self) -> usize {
        self.itemsets.iter().map(QItemset::len).sum()
    }

    pub fn distinct_items(&self) -> BTreeSet<ItemId> {
        self.itemsets
            .iter()
            .flat_map(|w| w.items().iter().map(|q| q.item))
            .collect()
    }
}

/// External utility (unit profit) per item.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UtilityTable(BTreeMap<ItemId, u64>);

impl UtilityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: ItemId, profit: u64) -> Result<(), ModelError> {
        if profit == 0 {
            return Err(ModelError::ZeroProfit(item));
        }
        self.0.insert(item, profit);
        Ok(())
    }

    pub fn get(&self, item: ItemId) -> Option<u64> {
        self.0.get(&item).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, u64)> + '_ {
        self.0.iter().map(|(&i, &p)| (i, p))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(ItemId, u64)> for UtilityTable {
    fn from_iter<T: IntoIterator<Item = (ItemId, u64)>>(iter: T) -> Self {
        UtilityTable(iter.into_iter().collect())
    }
}

/// On-shelf time periods per item.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShelfTable(BTreeMap<ItemId, BTreeSet<PeriodId>>);

impl ShelfTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: ItemId, periods: BTreeSet<PeriodId>) {
        self.0.insert(item, periods);
    }

    pub fn add_period(&mut self, item: ItemId, period: PeriodId) {
        self.0.entry(item).or_default().insert(period);
    }

    pub fn periods_of(&self, item: ItemId) -> Option<&BTreeSet<PeriodId>> {
        self.0.get(&item)
    }

    pub fn is_on_shelf(&self, item: ItemId, period: PeriodId) -> bool {
        self.0.get(&item).is_some_and(|p| p.contains(&period))
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, &BTreeSet<PeriodId>)> + '_ {
        self.0.iter().map(|(&i, p)| (i, p))
    }

    /// Union of the shelf periods of every item of `pattern`.
    pub fn pattern_periods(&self, pattern: &Pattern) -> BTreeSet<PeriodId> {
        pattern
            .items()
            .filter_map(|i| self.0.get(&i))
            .flat_map(|p| p.iter().copied())
            .collect()
    }
}

/// A validated temporal q-sequence database.
///
/// Sequences are stored sorted by `(tid, sid)`, so each period's sequences
/// form one contiguous block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalDatabase {
    periods: BTreeSet<PeriodId>,
    sequences: Vec<QSequence>,
    utilities: UtilityTable,
    shelf: ShelfTable,
}

impl TemporalDatabase {
    pub fn new(
        mut sequences: Vec<QSequence>,
        utilities: UtilityTable,
        shelf: ShelfTable,
    ) -> Result<Self, ModelError> {
        sequences.sort_by_key(|s| (s.tid, s.sid));
        if let Some(w) = sequences
            .windows(2)
            .find(|w| (w[0].tid, w[0].sid) == (w[1].tid, w[1].sid))
        {
            return Err(ModelError::DuplicateSequence {
                tid: w[0].tid,
                sid: w[0].sid,
            });
        }
        for s in &sequences {
            for q in s.itemsets.iter().flat_map(|w| w.items()) {
                if utilities.get(q.item).is_none() {
                    return Err(ModelError::UnknownItem(q.item));
                }
                match shelf.periods_of(q.item) {
                    None => return Err(ModelError::MissingShelf(q.item)),
                    Some(p) if !p.contains(&s.tid) => {
                        return Err(ModelError::OffShelf {
                            item: q.item,
                            tid: s.tid,
                            sid: s.sid,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        for (item, periods) in shelf.iter() {
            if periods.is_empty() {
                return Err(ModelError::MissingShelf(item));
            }
        }
        let mut periods: BTreeSet<PeriodId> = sequences.iter().map(|s| s.tid).collect();
        periods.extend(shelf.iter().flat_map(|(_, p)| p.iter().copied()));
        Ok(TemporalDatabase {
            periods,
            sequences,
            utilities,
            shelf,
        })
    }

    pub fn empty() -> Self {
        TemporalDatabase {
            periods: BTreeSet::new(),
            sequences: Vec::new(),
            utilities: UtilityTable::new(),
            shelf: ShelfTable::new(),
        }
    }

    pub fn periods(&self) -> &BTreeSet<PeriodId> {
        &self.periods
    }

    pub fn sequences(&self) -> &[QSequence] {
        &self.sequences
    }

    pub fn utilities(&self) -> &UtilityTable {
        &self.utilities
    }

    pub fn shelf(&self) -> &ShelfTable {
        &self.shelf
    }

    /// The q-sequences of one period (`TD_t`).
    pub fn period_sequences(&self, tid: PeriodId) -> &[QSequence] {
        let start = self.sequences.partition_point(|s| s.tid < tid);
        let end = self.sequences.partition_point(|s| s.tid <= tid);
        &self.sequences[start..end]
    }

    /// Distinct items occurring in some sequence.
    pub fn items(&self) -> BTreeSet<ItemId> {
        self.sequences.iter().flat_map(QSequence::distinct_items).collect()
    }

    pub fn total_utility(&self) -> u64 {
        self.sequences
            .iter()
            .map(|s| q_sequence_utility(s, &self.utilities).expect("validated database"))
            .sum()
    }

    pub fn max_sequence_length(&self) -> usize {
        self.sequences.iter().map(QSequence::length).max().unwrap_or(0)
    }
}

/// A sequence of itemsets without quantities.
///
/// The empty pattern is the root of every search and is never reported.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pattern {
    itemsets: Vec<Vec<ItemId>>,
}

/// How an item is appended to a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtensionKind {
    /// Append to the last itemset.
    I,
    /// Open a new trailing itemset.
    S,
}

impl Pattern {
    pub fn empty() -> Self {
        Pattern::default()
    }

    /// Builds a pattern, sorting each itemset; rejects empty or repeated itemsets.
    pub fn new(itemsets: Vec<Vec<ItemId>>) -> Result<Self, ModelError> {
        let mut out = Vec::with_capacity(itemsets.len());
        for mut set in itemsets {
            if set.is_empty() {
                return Err(ModelError::EmptyItemset);
            }
            set.sort();
            if let Some(w) = set.windows(2).find(|w| w[0] == w[1]) {
                return Err(ModelError::DuplicateItem(w[0]));
            }
            out.push(set);
        }
        Ok(Pattern { itemsets: out })
    }

    /// Convenience constructor from raw ids, panicking on invalid input.
    pub fn from_ids(itemsets: &[&[u32]]) -> Self {
        Pattern::new(
            itemsets
                .iter()
                .map(|s| s.iter().map(|&i| ItemId(i)).collect())
                .collect(),
        )
        .expect("valid pattern literal")
    }

    pub fn itemsets(&self) -> &[Vec<ItemId>] {
        &self.itemsets
    }

    pub fn is_empty(&self) -> bool {
        self.itemsets.is_empty()
    }

    /// Number of items (the pattern's length).
    pub fn len(&self) -> usize {
        self.itemsets.iter().map(Vec::len).sum()
    }

    /// Number of itemsets.
    pub fn size(&self) -> usize {
        self.itemsets.len()
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.itemsets.iter().flatten().copied()
    }

    pub fn last_item(&self) -> Option<ItemId> {
        self.itemsets.last().and_then(|s| s.last()).copied()
    }

    /// `None` when `item` cannot be appended in that way (I-extension of the
    /// empty pattern, or an item not greater than the last one).
    pub fn extend(&self, item: ItemId, kind: ExtensionKind) -> Option<Pattern> {
        let mut itemsets = self.itemsets.clone();
        match kind {
            ExtensionKind::I => {
                let last = itemsets.last_mut()?;
                if *last.last()? >= item {
                    return None;
                }
                last.push(item);
            }
            ExtensionKind::S => itemsets.push(vec![item]),
        }
        Some(Pattern { itemsets })
    }

    /// The pattern with its last item removed, plus how that item was attached.
    pub fn parent(&self) -> Option<(Pattern, ItemId, ExtensionKind)> {
        let mut itemsets = self.itemsets.clone();
        let last = itemsets.last_mut()?;
        let item = last.pop()?;
        let kind = if last.is_empty() {
            itemsets.pop();
            ExtensionKind::S
        } else {
            ExtensionKind::I
        };
        Some((Pattern { itemsets }, item, kind))
    }

    /// All proper non-empty prefixes, shortest first.
    pub fn ancestors(&self) -> Vec<Pattern> {
        let mut out = Vec::new();
        let mut cur = self.parent();
        while let Some((p, _, _)) = cur {
            if p.is_empty() {
                break;
            }
            cur = p.parent();
            out.push(p);
        }
        out.reverse();
        out
    }
}

impl fmt::Display for Pattern {
    /// `{1 3}{2}` style.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for set in &self.itemsets {
            f.write_str("{")?;
            for (k, item) in set.iter().enumerate() {
                if k > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{item}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

impl FromStr for Pattern {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::BadPattern(s.to_string());
        let mut itemsets = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('{').ok_or_else(bad)?;
            let close = body.find('}').ok_or_else(bad)?;
            let set = body[..close]
                .split_whitespace()
                .map(|t| t.parse::<u32>().map_err(|_| bad()).and_then(ItemId::new))
                .collect::<Result<Vec<_>, _>>()?;
            itemsets.push(set);
            rest = body[close + 1..].trim_start();
        }
        Pattern::new(itemsets)
    }
}

/// A non-negative rational `num / den`, compared exactly.
#[derive(Debug, Clone, Copy)]
pub struct UtilityRatio {
    pub num: u64,
    pub den: u64,
}

impl UtilityRatio {
    pub fn new(num: u64, den: u64) -> Self {
        UtilityRatio { num, den }
    }

    pub fn to_f64(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }

    /// Decimal rendering with six fractional digits, rounded half up.
    pub fn to_fixed6(self) -> String {
        if self.den == 0 {
            return "0.000000".to_string();
        }
        let scaled = (self.num as u128 * 2_000_000 + self.den as u128) / (2 * self.den as u128);
        format!("{}.{:06}", scaled / 1_000_000, scaled % 1_000_000)
    }
}

impl PartialEq for UtilityRatio {
    fn eq(&self, other: &Self) -> bool {
        self.num as u128 * other.den as u128 == other.num as u128 * self.den as u128
    }
}

impl Eq for UtilityRatio {}

/// Minimum on-shelf utility threshold `xi`, a rational in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    num: u64,
    den: u64,
}

impl Threshold {
    pub fn new(num: u64, den: u64) -> Result<Self, ModelError> {
        if den == 0 || num == 0 || num > den {
            return Err(ModelError::InvalidThreshold(format!("{num}/{den}")));
        }
        Ok(Threshold { num, den })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `value / total >= xi`, by cross-multiplication.
    pub fn admits(&self, value: u64, total: u64) -> bool {
        value as u128 * self.den as u128 >= self.num as u128 * total as u128
    }

    /// `(value + xi * allowance) / total >= xi`, the optimistic ratio used when
    /// some periods are only known to fall below `xi`.
    pub fn admits_with_allowance(&self, value: u64, allowance: u64, total: u64) -> bool {
        value as u128 * self.den as u128 + self.num as u128 * allowance as u128
            >= self.num as u128 * total as u128
    }
}

impl FromStr for Threshold {
    type Err = ModelError;

    /// Parses a decimal such as `0.3` or `1` exactly, or a fraction `3/10`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::InvalidThreshold(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return Threshold::new(n, d).map_err(|_| bad());
        }
        let (int, frac) = s.split_once('.').unwrap_or((s, ""));
        if int.is_empty() && frac.is_empty()
            || !int.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || frac.len() > 18
        {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let int_part: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let frac_part: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let num = int_part
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_part))
            .ok_or_else(bad)?;
        let g = gcd(num, den);
        let (num, den) = num.checked_div(g).zip(den.checked_div(g)).unwrap_or((num, den));
        Threshold::new(num, den).map_err(|_| bad())
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// A reported on-shelf high-utility sequential pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinedPattern {
    pub pattern: Pattern,
    pub ou: u64,
    /// `ou` over the summed period utilities of `ot`.
    pub our: UtilityRatio,
    pub ot: Vec<PeriodId>,
}

/// `q * p(item)`.
pub fn item_utility(item: ItemId, quantity: u32, utilities: &UtilityTable) -> Result<u64, ModelError> {
    utilities
        .get(item)
        .map(|p| p * quantity as u64)
        .ok_or(ModelError::UnknownItem(item))
}

pub fn q_sequence_utility(s: &QSequence, utilities: &UtilityTable) -> Result<u64, ModelError> {
    s.itemsets()
        .iter()
        .flat_map(|w| w.items())
        .map(|q| item_utility(q.item, q.quantity, utilities))
        .sum()
}

/// Every position at which `r` occurs in `s`.
///
/// A position is a strictly increasing list of 1-based itemset indices, one
/// per itemset of `r`; its last entry is the instance's extension position.
/// Positions come back in lexicographic order.
pub fn find_instances(r: &Pattern, s: &QSequence) -> Vec<Vec<usize>> {
    fn walk(
        r: &[Vec<ItemId>],
        s: &[QItemset],
        from: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let Some((head, tail)) = r.split_first() else {
            out.push(prefix.clone());
            return;
        };
        for k in from..s.len() {
            if head.iter().all(|&i| s[k].contains(i)) {
                prefix.push(k + 1);
                walk(tail, s, k + 1, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    if r.is_empty() {
        return out;
    }
    walk(r.itemsets(), s.itemsets(), 0, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::running_example;

    fn qs(db: &TemporalDatabase, tid: u32, sid: u32) -> &QSequence {
        db.sequences()
            .iter()
            .find(|s| s.tid == PeriodId(tid) && s.sid == sid)
            .unwrap()
    }

    #[test]
    fn item_utilities_from_the_profit_table() {
        let db = running_example();
        let ut = db.utilities();
        // f:2 in the first itemset of QS_{3,1}
        assert_eq!(item_utility(ItemId(6), 2, ut).unwrap(), 8);
        assert_eq!(item_utility(ItemId(3), 1, ut).unwrap(), 1);
        assert_eq!(item_utility(ItemId(2), 2, ut).unwrap(), 6);
        assert!(matches!(
            item_utility(ItemId(99), 1, ut),
            Err(ModelError::UnknownItem(ItemId(99)))
        ));
    }

    #[test]
    fn sequence_and_database_utilities() {
        let db = running_example();
        assert_eq!(q_sequence_utility(qs(&db, 3, 1), db.utilities()).unwrap(), 27);
        assert_eq!(q_sequence_utility(qs(&db, 1, 1), db.utilities()).unwrap(), 12);
        assert_eq!(db.total_utility(), 110);
    }

    #[test]
    fn instances_of_a_then_c() {
        let db = running_example();
        let r = Pattern::from_ids(&[&[1], &[3]]);
        let got: BTreeSet<_> = find_instances(&r, qs(&db, 2, 2)).into_iter().collect();
        let want: BTreeSet<_> = [vec![1, 3], vec![2, 3], vec![1, 4], vec![2, 4]]
            .into_iter()
            .collect();
        assert_eq!(got, want);

        let bc = Pattern::from_ids(&[&[2], &[3]]);
        assert_eq!(find_instances(&bc, qs(&db, 1, 1)), vec![vec![1, 2]]);
        assert!(find_instances(&Pattern::from_ids(&[&[6]]), qs(&db, 1, 1)).is_empty());
    }

    #[test]
    fn itemsets_are_canonicalized() {
        let set = QItemset::new(vec![
            QItem::new(ItemId(5), 1).unwrap(),
            QItem::new(ItemId(2), 3).unwrap(),
        ])
        .unwrap();
        let ids: Vec<_> = set.items().iter().map(|q| q.item.0).collect();
        assert_eq!(ids, [2, 5]);
        assert!(QItemset::new(vec![]).is_err());
        let dup = vec![QItem::new(ItemId(1), 1).unwrap(), QItem::new(ItemId(1), 2).unwrap()];
        assert!(matches!(QItemset::new(dup), Err(ModelError::DuplicateItem(_))));
        assert!(QItem::new(ItemId(1), 0).is_err());
    }

    #[test]
    fn off_shelf_occurrence_is_rejected() {
        let db = running_example();
        let mut seqs = db.sequences().to_vec();
        // d (item 4) is off shelf in t_3
        let extra = QItemset::new(vec![QItem::new(ItemId(4), 1).unwrap()]).unwrap();
        seqs.push(QSequence::new(PeriodId(3), 2, vec![extra]).unwrap());
        let err = TemporalDatabase::new(seqs, db.utilities().clone(), db.shelf().clone()).unwrap_err();
        assert!(matches!(err, ModelError::OffShelf { item: ItemId(4), .. }));
    }

    #[test]
    fn duplicate_sequence_ids_are_rejected() {
        let db = running_example();
        let mut seqs = db.sequences().to_vec();
        seqs.push(seqs[0].clone());
        let err = TemporalDatabase::new(seqs, db.utilities().clone(), db.shelf().clone()).unwrap_err();
        assert!(matches!(err, ModelError::DuplicateSequence { .. }));
    }

    #[test]
    fn pattern_extension_and_parents() {
        let a = Pattern::from_ids(&[&[1]]);
        let ac = a.extend(ItemId(3), ExtensionKind::I).unwrap();
        let a_c = a.extend(ItemId(3), ExtensionKind::S).unwrap();
        assert_eq!(ac.to_string(), "{1 3}");
        assert_eq!(a_c.to_string(), "{1}{3}");
        assert!(ac.extend(ItemId(2), ExtensionKind::I).is_none());
        assert!(Pattern::empty().extend(ItemId(1), ExtensionKind::I).is_none());
        assert_eq!(ac.parent().unwrap(), (a.clone(), ItemId(3), ExtensionKind::I));
        assert_eq!(a_c.parent().unwrap(), (a.clone(), ItemId(3), ExtensionKind::S));
        let long = Pattern::from_ids(&[&[1, 2], &[3]]);
        assert_eq!(
            long.ancestors(),
            vec![Pattern::from_ids(&[&[1]]), Pattern::from_ids(&[&[1, 2]])]
        );
        assert_eq!("{1 2}{3}".parse::<Pattern>().unwrap(), long);
        assert!("{1}{".parse::<Pattern>().is_err());
    }

    #[test]
    fn threshold_parsing_is_exact() {
        let t: Threshold = "0.3".parse().unwrap();
        assert_eq!((t.num(), t.den()), (3, 10));
        assert_eq!("1".parse::<Threshold>().unwrap(), Threshold::new(1, 1).unwrap());
        assert_eq!("3/10".parse::<Threshold>().unwrap(), t);
        for bad in ["1.5", "0", "-0.1", "abc", "", "0.0"] {
            assert!(bad.parse::<Threshold>().is_err(), "{bad}");
        }
        assert!(t.admits(3, 10));
        assert!(!t.admits(29, 100));
        // 28/76 = 0.368...
        assert!("0.36".parse::<Threshold>().unwrap().admits(28, 76));
        assert!(!"0.37".parse::<Threshold>().unwrap().admits(28, 76));
    }

    #[test]
    fn ratio_rendering() {
        assert_eq!(UtilityRatio::new(28, 76).to_fixed6(), "0.368421");
        assert_eq!(UtilityRatio::new(1, 1).to_fixed6(), "1.000000");
        assert_eq!(UtilityRatio::new(1, 3).to_fixed6(), "0.333333");
        assert_eq!(UtilityRatio::new(2, 3).to_fixed6(), "0.666667");
    }
}
