//! Candidate tree buffering the per-period results of the two-phase miner.

use std::collections::BTreeMap;
use std::mem::size_of;

use fixedbitset::FixedBitSet;

use crate::model::{ExtensionKind, ItemId, Pattern, PeriodId};
use crate::qmatrix::MatrixStore;

pub type NodeId = usize;

/// Child key: I-children (`false`) sort before S-children (`true`).
type EdgeKey = (bool, ItemId);

fn edge(item: ItemId, kind: ExtensionKind) -> EdgeKey {
    (kind == ExtensionKind::S, item)
}

#[derive(Debug, Clone)]
pub struct CTreeNode {
    /// Edge from the parent; `None` for the root.
    pub edge: Option<(ExtensionKind, ItemId)>,
    pub seq: Pattern,
    /// Dense period indices (see [`MatrixStore::periods`]) of `ot(seq)`.
    pub on_shelf: FixedBitSet,
    /// Periods whose `utility` entry holds `pu(seq, t)`.
    pub calculated: FixedBitSet,
    pub utility: Vec<u64>,
    pub c_utility: u64,
    pub is_promising: bool,
    children: BTreeMap<EdgeKey, NodeId>,
}

impl CTreeNode {
    pub fn children(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children.values().copied()
    }

    fn approx_bytes(&self) -> usize {
        size_of::<Self>()
            + self.seq.len() * size_of::<ItemId>()
            + self.utility.len() * size_of::<u64>()
            + (self.on_shelf.len() / 8 + 8) * 2
    }
}

/// Arena-backed prefix tree over patterns.
#[derive(Debug, Clone)]
pub struct CTree {
    nodes: Vec<CTreeNode>,
    periods: Vec<PeriodId>,
}

impl CTree {
    pub const ROOT: NodeId = 0;

    pub fn new(periods: &[PeriodId]) -> Self {
        let n = periods.len();
        CTree {
            nodes: vec![CTreeNode {
                edge: None,
                seq: Pattern::empty(),
                on_shelf: FixedBitSet::with_capacity(n),
                calculated: FixedBitSet::with_capacity(n),
                utility: vec![0; n],
                c_utility: 0,
                is_promising: false,
                children: BTreeMap::new(),
            }],
            periods: periods.to_vec(),
        }
    }

    pub fn for_store(store: &MatrixStore) -> Self {
        Self::new(store.periods())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn node(&self, id: NodeId) -> &CTreeNode {
        &self.nodes[id]
    }

    pub fn periods(&self) -> &[PeriodId] {
        &self.periods
    }

    /// Period ids of the set bits of `bits`.
    pub fn decode(&self, bits: &FixedBitSet) -> Vec<PeriodId> {
        bits.ones().map(|k| self.periods[k]).collect()
    }

    /// Child of `parent` along `(item, kind)`, created if absent. `shelf`
    /// gives the dense shelf-period indices of `item`. Returns the child and
    /// the bytes newly allocated (0 when it already existed).
    pub fn child(
        &mut self,
        parent: NodeId,
        item: ItemId,
        kind: ExtensionKind,
        shelf: &FixedBitSet,
    ) -> (NodeId, usize) {
        if let Some(&id) = self.nodes[parent].children.get(&edge(item, kind)) {
            return (id, 0);
        }
        let p = &self.nodes[parent];
        let seq = p.seq.extend(item, kind).expect("valid extension");
        let mut on_shelf = p.on_shelf.clone();
        on_shelf.union_with(shelf);
        let n = self.periods.len();
        let node = CTreeNode {
            edge: Some((kind, item)),
            seq,
            on_shelf,
            calculated: FixedBitSet::with_capacity(n),
            utility: vec![0; n],
            c_utility: 0,
            is_promising: false,
            children: BTreeMap::new(),
        };
        let bytes = node.approx_bytes() + size_of::<(EdgeKey, NodeId)>();
        let id = self.nodes.len();
        self.nodes.push(node);
        self.nodes[parent].children.insert(edge(item, kind), id);
        (id, bytes)
    }

    /// Records `pu(seq, t)` for dense period index `t`. Idempotent.
    pub fn record(&mut self, id: NodeId, t: usize, pu: u64, promising: bool) {
        let node = &mut self.nodes[id];
        if node.calculated.contains(t) {
            node.c_utility -= node.utility[t];
        }
        node.calculated.insert(t);
        node.utility[t] = pu;
        node.c_utility += pu;
        node.is_promising |= promising;
    }

    /// Node of `pattern`, if registered.
    pub fn find(&self, pattern: &Pattern) -> Option<NodeId> {
        let mut id = Self::ROOT;
        for set in pattern.itemsets() {
            for (j, &item) in set.iter().enumerate() {
                let kind = if j == 0 {
                    ExtensionKind::S
                } else {
                    ExtensionKind::I
                };
                id = *self.nodes[id].children.get(&edge(item, kind))?;
            }
        }
        Some(id)
    }

    /// Pre-order walk, I-children before S-children, items ascending.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![Self::ROOT];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.values().rev());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(n: usize, on: &[usize]) -> FixedBitSet {
        let mut b = FixedBitSet::with_capacity(n);
        on.iter().for_each(|&k| b.insert(k));
        b
    }

    #[test]
    fn registration_creates_then_updates() {
        let periods = [PeriodId(1), PeriodId(2), PeriodId(3)];
        let mut tree = CTree::new(&periods);
        let (a, _) = tree.child(CTree::ROOT, ItemId(1), ExtensionKind::S, &bits(3, &[1, 2]));
        let (ac, fresh) = tree.child(a, ItemId(3), ExtensionKind::S, &bits(3, &[0, 1, 2]));
        assert!(fresh > 0);
        assert_eq!(tree.node(ac).seq.to_string(), "{1}{3}");
        tree.record(ac, 1, 19, true);
        let (again, fresh) = tree.child(a, ItemId(3), ExtensionKind::S, &bits(3, &[0, 1, 2]));
        assert_eq!((again, fresh), (ac, 0));
        tree.record(ac, 2, 9, false);
        tree.record(ac, 2, 9, false);
        let node = tree.node(ac);
        assert_eq!(node.c_utility, 28);
        assert!(node.is_promising);
        assert_eq!(tree.decode(&node.calculated), [PeriodId(2), PeriodId(3)]);
        assert_eq!(tree.decode(&node.on_shelf), periods);
    }

    #[test]
    fn zero_registration_is_not_promising() {
        let mut tree = CTree::new(&[PeriodId(1)]);
        let (b, _) = tree.child(CTree::ROOT, ItemId(2), ExtensionKind::S, &bits(1, &[0]));
        tree.record(b, 0, 0, false);
        assert!(!tree.node(b).is_promising);
        assert_eq!(tree.find(&Pattern::from_ids(&[&[2]])), Some(b));
    }

    #[test]
    fn boundary_flag_separates_i_and_s_children() {
        let mut tree = CTree::new(&[PeriodId(1)]);
        let all = bits(1, &[0]);
        let (a, _) = tree.child(CTree::ROOT, ItemId(1), ExtensionKind::S, &all);
        let (s, _) = tree.child(a, ItemId(3), ExtensionKind::S, &all);
        let (i, _) = tree.child(a, ItemId(3), ExtensionKind::I, &all);
        assert_ne!(s, i);
        assert_eq!(tree.node(i).seq.to_string(), "{1 3}");
        // I-children come first
        assert_eq!(tree.node(a).children().collect::<Vec<_>>(), [i, s]);
        assert_eq!(tree.preorder(), [CTree::ROOT, a, i, s]);
        assert_eq!(tree.find(&Pattern::from_ids(&[&[1], &[3]])), Some(s));
        assert_eq!(tree.find(&Pattern::from_ids(&[&[3]])), None);
    }
}
