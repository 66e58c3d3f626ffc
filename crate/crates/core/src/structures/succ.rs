use std::collections::{BTreeMap, BTreeSet};

use super::{NodeId, Violation};
use crate::error::{Error, Result};

/// A binary tree presented by left/right successor maps into the node set,
/// with a distinguished empty node standing for a missing child.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessorTree {
    empty: NodeId,
    root: NodeId,
    succ: BTreeMap<NodeId, (NodeId, NodeId)>,
}

impl SuccessorTree {
    /// The tree with only the empty node and the root.
    pub fn new(empty: NodeId, root: NodeId) -> Self {
        let mut succ = BTreeMap::new();
        succ.insert(empty, (empty, empty));
        succ.insert(root, (empty, empty));
        SuccessorTree { empty, root, succ }
    }

    pub fn from_maps(
        nodes: impl IntoIterator<Item = NodeId>,
        empty: NodeId,
        root: NodeId,
        s1: &[(NodeId, NodeId)],
        s2: &[(NodeId, NodeId)],
    ) -> Result<Self, Violation> {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        if !nodes.contains(&empty) || !nodes.contains(&root) || empty == root {
            return Err(Violation::new("constants", [empty as u64, root as u64]));
        }
        let total = |pairs: &[(NodeId, NodeId)]| -> Result<BTreeMap<NodeId, NodeId>, Violation> {
            let mut m = BTreeMap::new();
            for &(x, y) in pairs {
                if !nodes.contains(&x) || !nodes.contains(&y) {
                    return Err(Violation::new("domain", [x as u64, y as u64]));
                }
                if m.insert(x, y).is_some_and(|old| old != y) {
                    return Err(Violation::new("function", [x as u64]));
                }
            }
            if let Some(&x) = nodes.iter().find(|x| !m.contains_key(x)) {
                return Err(Violation::new("function", [x as u64]));
            }
            Ok(m)
        };
        let m1 = total(s1)?;
        let m2 = total(s2)?;
        let succ: BTreeMap<NodeId, (NodeId, NodeId)> = nodes.iter().map(|&x| (x, (m1[&x], m2[&x]))).collect();
        let t = SuccessorTree { empty, root, succ };
        t.check().map(|()| t)
    }

    /// Checks the four defining clauses in order.
    fn check(&self) -> Result<(), Violation> {
        let e = self.empty;
        // clause 4 first: the remaining checks ignore the empty node's successors
        if self.succ[&e] != (e, e) {
            return Err(Violation::new("clause 4", [e as u64]));
        }
        // clause 1: injective off the empty preimage, and the child graph
        // has no cycle through non-empty nodes
        let mut owner: BTreeMap<NodeId, (NodeId, u8)> = BTreeMap::new();
        for (&x, &(a, b)) in &self.succ {
            if x == e {
                continue;
            }
            for (y, side) in [(a, 1u8), (b, 2u8)] {
                if y == e {
                    continue;
                }
                if let Some(&(z, zs)) = owner.get(&y) {
                    if zs == side {
                        return Err(Violation::new("clause 1", [z as u64, x as u64, y as u64]));
                    }
                    return Err(Violation::new("clause 2", [z as u64, x as u64, y as u64]));
                }
                owner.insert(y, (x, side));
            }
        }
        // every non-empty node has at most one parent now; walk up to detect cycles
        for &x in self.succ.keys() {
            if x == e {
                continue;
            }
            let mut cur = x;
            let mut steps = 0usize;
            while let Some(&(p, _)) = owner.get(&cur) {
                cur = p;
                steps += 1;
                if cur == x || steps > self.succ.len() {
                    return Err(Violation::new("clause 1", [x as u64]));
                }
            }
        }
        // clause 3: the ranges cover exactly everything except the root
        if let Some(&(p, _)) = owner.get(&self.root) {
            return Err(Violation::new("clause 3", [p as u64, self.root as u64]));
        }
        if let Some(&x) = self.succ.keys().find(|&&x| x != e && x != self.root && !owner.contains_key(&x)) {
            return Err(Violation::new("clause 3", [x as u64]));
        }
        Ok(())
    }

    pub fn empty(&self) -> NodeId {
        self.empty
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Number of nodes, the empty node included.
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn contains(&self, x: NodeId) -> bool {
        self.succ.contains_key(&x)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.succ.keys().copied()
    }

    pub fn s1(&self, x: NodeId) -> NodeId {
        self.succ[&x].0
    }

    pub fn s2(&self, x: NodeId) -> NodeId {
        self.succ[&x].1
    }

    /// Non-empty nodes of each depth, in left-to-right order.
    pub fn layers(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![vec![self.root]];
        loop {
            let next: Vec<NodeId> = out
                .last()
                .unwrap()
                .iter()
                .flat_map(|&x| [self.s1(x), self.s2(x)])
                .filter(|&y| y != self.empty)
                .collect();
            if next.is_empty() {
                return out;
            }
            out.push(next);
        }
    }

    pub fn layer(&self, depth: usize) -> Vec<NodeId> {
        self.layers().into_iter().nth(depth).unwrap_or_default()
    }

    /// Every node of depth `n - 1` has two non-empty successors.
    pub fn is_full(&self, n: usize) -> bool {
        if n == 0 {
            return true;
        }
        let layers = self.layers();
        match layers.get(n - 1) {
            Some(layer) => layer
                .iter()
                .all(|&x| self.s1(x) != self.empty && self.s2(x) != self.empty),
            None => false,
        }
    }

    pub(crate) fn set_children(&mut self, x: NodeId, left: NodeId, right: NodeId) -> Result<()> {
        for y in [left, right] {
            if y != self.empty {
                if self.succ.contains_key(&y) {
                    return Err(Error::IdCollision(y));
                }
                self.succ.insert(y, (self.empty, self.empty));
            }
        }
        match self.succ.get_mut(&x) {
            Some(slot) if x != self.empty => {
                *slot = (left, right);
                Ok(())
            }
            _ => Err(Error::MissingNode(x)),
        }
    }

    /// `T^{<=n}`: nodes of depth at most `n`, deeper successors cut to empty.
    pub fn truncate(&self, n: usize) -> Self {
        let mut out = SuccessorTree::new(self.empty, self.root);
        for (d, layer) in self.layers().into_iter().enumerate() {
            if d >= n {
                break;
            }
            for x in layer {
                out.set_children(x, self.s1(x), self.s2(x)).expect("tree layers are disjoint");
            }
        }
        out
    }

    pub fn s1_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.succ.iter().map(|(&x, &(a, _))| (x, a)).collect()
    }

    pub fn s2_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.succ.iter().map(|(&x, &(_, b))| (x, b)).collect()
    }
}
