use std::collections::{BTreeMap, BTreeSet};

use super::{NodeId, Violation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
struct RpoNode {
    parent: Option<NodeId>,
    /// Children in sibling order.
    children: Vec<NodeId>,
    depth: u32,
}

/// A rooted tree given by its parent relation, with a linear order on each
/// set of siblings and no comparabilities across different parents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RpoTree {
    root: NodeId,
    nodes: BTreeMap<NodeId, RpoNode>,
}

impl RpoTree {
    pub fn singleton(root: NodeId) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(
            root,
            RpoNode {
                parent: None,
                children: Vec::new(),
                depth: 0,
            },
        );
        RpoTree { root, nodes }
    }

    /// Validates raw tables: `parent` holds `(child, parent)` pairs and `less`
    /// holds strict `(x, y)` pairs with `x < y`.
    pub fn from_relations(
        nodes: impl IntoIterator<Item = NodeId>,
        root: NodeId,
        parent: &[(NodeId, NodeId)],
        less: &[(NodeId, NodeId)],
    ) -> Result<Self, Violation> {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        if !nodes.contains(&root) {
            return Err(Violation::new("clause 1", [root as u64]));
        }
        for &(x, y) in parent.iter().chain(less) {
            if !nodes.contains(&x) || !nodes.contains(&y) {
                return Err(Violation::new("domain", [x as u64, y as u64]));
            }
        }
        // Clause 1: every edge leaves a non-root node, one per node, and the
        // parent chain of every node reaches the root.
        let mut par: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for &(c, p) in parent {
            if c == root {
                return Err(Violation::new("clause 1", [c as u64, p as u64]));
            }
            if let Some(old) = par.insert(c, p) {
                if old != p {
                    return Err(Violation::new("clause 1", [c as u64, old as u64, p as u64]));
                }
            }
        }
        for &x in &nodes {
            if x != root && !par.contains_key(&x) {
                return Err(Violation::new("clause 1", [x as u64]));
            }
        }
        for &x in &nodes {
            let mut cur = x;
            let mut steps = 0usize;
            while cur != root {
                cur = par[&cur];
                steps += 1;
                if steps > nodes.len() {
                    return Err(Violation::new("clause 1", [x as u64]));
                }
            }
        }
        // Partial order axioms for the strict relation.
        let lt: BTreeSet<(NodeId, NodeId)> = less.iter().copied().collect();
        for &(x, y) in &lt {
            if x == y {
                return Err(Violation::new("partial order", [x as u64, y as u64]));
            }
            if lt.contains(&(y, x)) {
                return Err(Violation::new("partial order", [x as u64, y as u64]));
            }
            for &(_, z) in lt.range((y, 0)..=(y, NodeId::MAX)) {
                if !lt.contains(&(x, z)) {
                    return Err(Violation::new("partial order", [x as u64, y as u64, z as u64]));
                }
            }
        }
        // Clause 2: distinct nodes are comparable iff they share a parent.
        let par_of = |x: NodeId| par.get(&x).copied();
        for &(x, y) in &lt {
            if par_of(x) != par_of(y) {
                return Err(Violation::new("clause 2", [x as u64, y as u64]));
            }
        }
        let mut siblings: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (&c, &p) in &par {
            siblings.entry(p).or_default().push(c);
        }
        for group in siblings.values() {
            for (i, &x) in group.iter().enumerate() {
                for &y in &group[i + 1..] {
                    if !lt.contains(&(x, y)) && !lt.contains(&(y, x)) {
                        return Err(Violation::new("clause 2", [x as u64, y as u64]));
                    }
                }
            }
        }
        let mut tree = RpoTree::singleton(root);
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            if let Some(group) = siblings.get(&x) {
                let mut ordered = group.clone();
                // a linear order: position = number of smaller siblings
                ordered.sort_by_key(|&c| group.iter().filter(|&&d| lt.contains(&(d, c))).count());
                for c in ordered {
                    tree.push_child(x, c).expect("fresh node");
                    stack.push(c);
                }
            }
        }
        Ok(tree)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, x: NodeId) -> bool {
        self.nodes.contains_key(&x)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn parent(&self, x: NodeId) -> Option<NodeId> {
        self.nodes.get(&x).and_then(|n| n.parent)
    }

    pub fn children(&self, x: NodeId) -> &[NodeId] {
        self.nodes.get(&x).map(|n| n.children.as_slice()).unwrap_or(&[])
    }

    pub fn depth(&self, x: NodeId) -> u32 {
        self.nodes[&x].depth
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes.values().map(|n| n.depth).max().unwrap_or(0)
    }

    /// `P(x, y)`: `y` is the parent of `x`.
    pub fn is_parent(&self, x: NodeId, y: NodeId) -> bool {
        self.parent(x) == Some(y)
    }

    /// Strict sibling order.
    pub fn less(&self, x: NodeId, y: NodeId) -> bool {
        match (self.parent(x), self.parent(y)) {
            (Some(p), Some(q)) if p == q && x != y => {
                let cs = self.children(p);
                let i = cs.iter().position(|&c| c == x);
                let j = cs.iter().position(|&c| c == y);
                i < j
            }
            _ => false,
        }
    }

    /// Appends `id` as the greatest child of `parent`.
    pub(crate) fn push_child(&mut self, parent: NodeId, id: NodeId) -> Result<()> {
        let n = self.children(parent).len();
        self.insert_child(parent, id, n)
    }

    /// Inserts `id` as a child of `parent` with exactly `index` smaller siblings.
    pub(crate) fn insert_child(&mut self, parent: NodeId, id: NodeId, index: usize) -> Result<()> {
        if self.nodes.contains_key(&id) {
            return Err(Error::IdCollision(id));
        }
        let depth = match self.nodes.get_mut(&parent) {
            Some(p) => {
                if index > p.children.len() {
                    return Err(Error::Precondition(format!("sibling position {index} out of range")));
                }
                p.children.insert(index, id);
                p.depth + 1
            }
            None => return Err(Error::MissingNode(parent)),
        };
        self.nodes.insert(
            id,
            RpoNode {
                parent: Some(parent),
                children: Vec::new(),
                depth,
            },
        );
        Ok(())
    }

    /// `T^{<=n}`: the nodes of depth at most `n`.
    pub fn truncate(&self, n: u32) -> Self {
        let mut out = RpoTree::singleton(self.root);
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            if self.depth(x) >= n {
                continue;
            }
            for &c in self.children(x) {
                out.push_child(x, c).expect("fresh node");
                stack.push(c);
            }
        }
        out
    }

    /// Restriction to a set containing the root and closed under parents.
    pub fn restrict(&self, keep: impl Fn(NodeId) -> bool) -> Self {
        let mut out = RpoTree::singleton(self.root);
        let mut stack = vec![self.root];
        while let Some(x) = stack.pop() {
            for &c in self.children(x) {
                if keep(c) {
                    out.push_child(x, c).expect("fresh node");
                    stack.push(c);
                }
            }
        }
        out
    }

    /// `(child, parent)` pairs in ascending child order.
    pub fn parent_pairs(&self) -> Vec<(NodeId, NodeId)> {
        self.nodes
            .iter()
            .filter_map(|(&c, n)| n.parent.map(|p| (c, p)))
            .collect()
    }

    /// All strict sibling pairs `x < y`, sorted.
    pub fn less_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for n in self.nodes.values() {
            for (i, &x) in n.children.iter().enumerate() {
                for &y in &n.children[i + 1..] {
                    out.push((x, y));
                }
            }
        }
        out.sort_unstable();
        out
    }
}
