use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{NodeId, Violation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
struct PosetNode {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    /// Cardinality of the up-set `T_{>=x}`.
    height: u32,
}

/// A finite partial order with a greatest element whose up-sets are chains.
///
/// Stored through the covering relation (`Adj`); `leq` is derived by walking
/// towards the root, so the order axioms hold by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePosetTree {
    root: NodeId,
    nodes: BTreeMap<NodeId, PosetNode>,
}

impl FinitePosetTree {
    pub fn singleton(root: NodeId) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(
            root,
            PosetNode {
                parent: None,
                children: Vec::new(),
                height: 1,
            },
        );
        FinitePosetTree { root, nodes }
    }

    /// Builds a tree from `(child, parent)` covering pairs.
    pub fn from_parents(
        root: NodeId,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, Violation> {
        let mut parent_of: BTreeMap<NodeId, NodeId> = BTreeMap::new();
        for (c, p) in edges {
            if c == root {
                return Err(Violation::new("greatest element", [c as u64, p as u64]));
            }
            if let Some(old) = parent_of.insert(c, p) {
                if old != p {
                    return Err(Violation::new("up-set chain", [c as u64, old as u64, p as u64]));
                }
            }
        }
        let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for (&c, &p) in &parent_of {
            if p != root && !parent_of.contains_key(&p) {
                return Err(Violation::new("greatest element", [p as u64, root as u64]));
            }
            children.entry(p).or_default().push(c);
        }
        let mut tree = FinitePosetTree::singleton(root);
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            if let Some(cs) = children.get(&x) {
                for &c in cs {
                    tree.insert_leaf(x, c).expect("fresh child");
                    stack.push(c);
                }
            }
        }
        if tree.len() != parent_of.len() + 1 {
            // Some chain of parents never reaches the root: it is a cycle.
            let stray = parent_of.keys().find(|c| !tree.contains(**c)).copied().unwrap_or(root);
            return Err(Violation::new("antisymmetry", [stray as u64, parent_of[&stray] as u64]));
        }
        Ok(tree)
    }

    /// Validates an arbitrary `leq` table given as a set of pairs.
    pub fn from_leq(
        nodes: impl IntoIterator<Item = NodeId>,
        pairs: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self, Violation> {
        let nodes: Vec<NodeId> = nodes.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut rel: HashSet<(usize, usize)> = HashSet::new();
        for (x, y) in pairs {
            match (index.get(&x), index.get(&y)) {
                (Some(&i), Some(&j)) => {
                    rel.insert((i, j));
                }
                _ => return Err(Violation::new("domain", [x as u64, y as u64])),
            }
        }
        Self::from_table(&nodes, |i, j| rel.contains(&(i, j)))
    }

    /// Validates a table indexed by positions in `nodes`.
    pub fn from_table(nodes: &[NodeId], leq: impl Fn(usize, usize) -> bool) -> Result<Self, Violation> {
        let n = nodes.len();
        if n == 0 {
            return Err(Violation::new("greatest element", []));
        }
        let up: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| leq(i, j)).collect()).collect();
        Self::from_upsets(nodes, up)
    }

    /// Validates an order given by its up-sets: `up[i]` lists, as positions
    /// in `nodes`, every `j` with `nodes[i] <= nodes[j]`.
    pub fn from_upsets(nodes: &[NodeId], mut up: Vec<Vec<usize>>) -> Result<Self, Violation> {
        let n = nodes.len();
        if n == 0 {
            return Err(Violation::new("greatest element", []));
        }
        assert_eq!(up.len(), n, "one up-set per node");
        for (i, u) in up.iter_mut().enumerate() {
            u.sort_unstable();
            u.dedup();
            if let Some(&j) = u.last().filter(|&&j| j >= n) {
                return Err(Violation::new("domain", [nodes[i] as u64, j as u64]));
            }
            if u.binary_search(&i).is_err() {
                return Err(Violation::new("reflexivity", [nodes[i] as u64]));
            }
        }
        for i in 0..n {
            for &j in &up[i] {
                if j > i && up[j].binary_search(&i).is_ok() {
                    return Err(Violation::new("antisymmetry", [nodes[i] as u64, nodes[j] as u64]));
                }
            }
        }
        // Fast path: the candidate parent of x is the member of up(x) \ {x}
        // with the largest up-set; the order is a tree order iff every
        // up(x) equals {x} together with up(parent).
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut consistent = true;
        for i in 0..n {
            let cand = up[i].iter().copied().filter(|&j| j != i).max_by_key(|&j| (up[j].len(), usize::MAX - j));
            parent[i] = cand;
            let ok = match cand {
                None => up[i].len() == 1,
                Some(p) => {
                    up[p].len() + 1 == up[i].len()
                        && up[p].iter().all(|k| up[i].binary_search(k).is_ok())
                }
            };
            if !ok {
                consistent = false;
                break;
            }
        }
        if !consistent {
            return Err(slow_violation(nodes, &up));
        }
        let maxima: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        if maxima.len() != 1 {
            return Err(Violation::new(
                "greatest element",
                maxima.iter().take(2).map(|&i| nodes[i] as u64),
            ));
        }
        let root = maxima[0];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (up[i].len(), i));
        let mut tree = FinitePosetTree::singleton(nodes[root]);
        for i in order {
            if let Some(p) = parent[i] {
                tree.insert_leaf(nodes[p], nodes[i]).expect("parents precede children");
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

    pub fn max_id(&self) -> NodeId {
        *self.nodes.keys().next_back().expect("non-empty tree")
    }

    pub fn parent(&self, x: NodeId) -> Option<NodeId> {
        self.nodes.get(&x).and_then(|n| n.parent)
    }

    pub fn children(&self, x: NodeId) -> &[NodeId] {
        self.nodes.get(&x).map(|n| n.children.as_slice()).unwrap_or(&[])
    }

    /// `|T_{>=x}|`, the length of the chain from `x` up to the root.
    pub fn height(&self, x: NodeId) -> u32 {
        self.nodes[&x].height
    }

    pub fn is_leaf(&self, x: NodeId) -> bool {
        self.children(x).is_empty()
    }

    pub fn is_branching(&self, x: NodeId) -> bool {
        self.children(x).len() >= 2
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(|(_, n)| n.children.is_empty()).map(|(&k, _)| k)
    }

    /// Strict ancestors of `x`, nearest first.
    pub fn ancestors(&self, x: NodeId) -> Ancestors<'_> {
        Ancestors {
            tree: self,
            next: self.parent(x),
        }
    }

    pub fn leq(&self, x: NodeId, y: NodeId) -> bool {
        if !self.contains(x) || !self.contains(y) {
            return false;
        }
        if x == y {
            return true;
        }
        let hy = self.height(y);
        if self.height(x) <= hy {
            return false;
        }
        self.ancestors(x).find(|&a| self.height(a) == hy) == Some(y)
    }

    /// `Adj(x, y)`: `y` covers `x`.
    pub fn adj(&self, x: NodeId, y: NodeId) -> bool {
        self.parent(x) == Some(y)
    }

    /// Least upper bound (the nearest common ancestor-or-self).
    pub fn lub(&self, x: NodeId, y: NodeId) -> Option<NodeId> {
        if !self.contains(x) || !self.contains(y) {
            return None;
        }
        let (mut a, mut b) = (x, y);
        while self.height(a) > self.height(b) {
            a = self.parent(a)?;
        }
        while self.height(b) > self.height(a) {
            b = self.parent(b)?;
        }
        while a != b {
            a = self.parent(a)?;
            b = self.parent(b)?;
        }
        Some(a)
    }

    /// Every node `z <= x`, including `x`, in ascending id order.
    pub fn subtree(&self, x: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![x];
        while let Some(z) = stack.pop() {
            out.push(z);
            stack.extend(self.children(z).iter().copied());
        }
        out.sort_unstable();
        out
    }

    pub fn subtree_size(&self, x: NodeId) -> usize {
        let mut count = 0;
        let mut stack = vec![x];
        while let Some(z) = stack.pop() {
            count += 1;
            stack.extend(self.children(z).iter().copied());
        }
        count
    }

    /// Number of branching nodes strictly above every node, computed top-down.
    pub fn branching_above(&self) -> BTreeMap<NodeId, u32> {
        let mut out = BTreeMap::new();
        let mut stack = vec![(self.root, 0u32)];
        while let Some((x, above)) = stack.pop() {
            out.insert(x, above);
            let below = above + u32::from(self.is_branching(x));
            for &c in self.children(x) {
                stack.push((c, below));
            }
        }
        out
    }

    /// Branching nodes grouped by level.
    pub fn levels(&self) -> BTreeMap<u32, Vec<NodeId>> {
        let mut out: BTreeMap<u32, Vec<NodeId>> = BTreeMap::new();
        for (x, above) in self.branching_above() {
            if self.is_branching(x) {
                out.entry(above).or_default().push(x);
            }
        }
        out
    }

    pub fn level_nodes(&self, level: u32) -> Vec<NodeId> {
        self.levels().remove(&level).unwrap_or_default()
    }

    pub(crate) fn insert_leaf(&mut self, parent: NodeId, id: NodeId) -> Result<()> {
        if self.nodes.contains_key(&id) {
            return Err(Error::IdCollision(id));
        }
        let h = match self.nodes.get_mut(&parent) {
            Some(p) => {
                let pos = p.children.binary_search(&id).unwrap_err();
                p.children.insert(pos, id);
                p.height + 1
            }
            None => return Err(Error::MissingNode(parent)),
        };
        self.nodes.insert(
            id,
            PosetNode {
                parent: Some(parent),
                children: Vec::new(),
                height: h,
            },
        );
        Ok(())
    }

    /// Restriction to the nodes satisfying `keep`, which must be up-closed.
    pub fn restrict(&self, keep: impl Fn(NodeId) -> bool) -> Result<Self> {
        if !keep(self.root) {
            return Err(Error::Precondition("restriction drops the root".into()));
        }
        let mut out = FinitePosetTree::singleton(self.root);
        let mut stack = vec![self.root];
        let mut kept = 1usize;
        while let Some(x) = stack.pop() {
            for &c in self.children(x) {
                if keep(c) {
                    out.insert_leaf(x, c)?;
                    kept += 1;
                    stack.push(c);
                }
            }
        }
        let wanted = self.nodes().filter(|&x| keep(x)).count();
        if wanted != kept {
            return Err(Error::Precondition("restriction set is not up-closed".into()));
        }
        Ok(out)
    }

    /// The covering pairs `(child, parent)` in ascending child order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        self.nodes
            .iter()
            .filter_map(|(&c, n)| n.parent.map(|p| (c, p)))
            .collect()
    }

    /// Every pair `(x, y)` with `x <= y`, sorted.
    pub fn leq_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for x in self.nodes() {
            out.push((x, x));
            out.extend(self.ancestors(x).map(|a| (x, a)));
        }
        out.sort_unstable();
        out
    }
}

pub struct Ancestors<'a> {
    tree: &'a FinitePosetTree,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let cur = self.next?;
        self.next = self.tree.parent(cur);
        Some(cur)
    }
}

fn slow_violation(nodes: &[NodeId], up: &[Vec<usize>]) -> Violation {
    let has = |i: usize, j: usize| up[i].binary_search(&j).is_ok();
    for i in 0..nodes.len() {
        for &j in &up[i] {
            for &k in &up[j] {
                if !has(i, k) {
                    return Violation::new("transitivity", [nodes[i] as u64, nodes[j] as u64, nodes[k] as u64]);
                }
            }
        }
    }
    for i in 0..nodes.len() {
        for (a, &j) in up[i].iter().enumerate() {
            for &k in &up[i][a + 1..] {
                if !has(j, k) && !has(k, j) {
                    return Violation::new("up-set chain", [nodes[i] as u64, nodes[j] as u64, nodes[k] as u64]);
                }
            }
        }
    }
    Violation::new("greatest element", [])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingEntry {
    pub node: NodeId,
    pub level: u32,
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingReport {
    pub entries: Vec<BranchingEntry>,
    pub uniquely_branching: bool,
}

impl BranchingReport {
    pub fn entry(&self, node: NodeId) -> Option<&BranchingEntry> {
        self.entries.iter().find(|e| e.node == node)
    }
}

pub fn branching_report(tree: &FinitePosetTree) -> BranchingReport {
    let mut entries = Vec::new();
    for (x, above) in tree.branching_above() {
        if tree.is_branching(x) {
            entries.push(BranchingEntry {
                node: x,
                level: above,
                length: tree.height(x),
            });
        }
    }
    let mut lengths: Vec<u32> = entries.iter().map(|e| e.length).collect();
    lengths.sort_unstable();
    let uniquely_branching = lengths.windows(2).all(|w| w[0] != w[1]);
    BranchingReport {
        entries,
        uniquely_branching,
    }
}

/// `T_{[<=i]}`: the union of the branchings of all nodes at levels `<= i`.
/// `None` when level `i` is empty.
pub fn level_subtree(tree: &FinitePosetTree, i: u32) -> Option<FinitePosetTree> {
    let above = tree.branching_above();
    let picked: Vec<NodeId> = above
        .iter()
        .filter(|(&x, &lvl)| lvl <= i && tree.is_branching(x))
        .map(|(&x, _)| x)
        .collect();
    if !picked.iter().any(|x| above[x] == i) {
        return None;
    }
    let mut keep: BTreeSet<NodeId> = BTreeSet::new();
    for &x in &picked {
        keep.extend(tree.children(x).iter().copied());
        if keep.insert(x) {
            for a in tree.ancestors(x) {
                if !keep.insert(a) {
                    break;
                }
            }
        }
    }
    Some(tree.restrict(|x| keep.contains(&x)).expect("branchings are up-closed"))
}

/// The order of `tree` induced on the nodes satisfying `keep`, with node `x`
/// renamed to `name(x)`. The kept set need not be up-closed: each kept node
/// hangs below its nearest kept ancestor, so the only clause that can fail
/// is the greatest element.
pub fn induced_order(
    tree: &FinitePosetTree,
    keep: impl Fn(NodeId) -> bool,
    name: impl Fn(NodeId) -> NodeId,
) -> Result<FinitePosetTree, Violation> {
    let mut roots = Vec::new();
    let mut edges = Vec::new();
    let mut stack: Vec<(NodeId, Option<NodeId>)> = vec![(tree.root(), None)];
    while let Some((x, kept_above)) = stack.pop() {
        let below = if keep(x) {
            match kept_above {
                Some(a) => edges.push((name(x), a)),
                None => roots.push(name(x)),
            }
            Some(name(x))
        } else {
            kept_above
        };
        stack.extend(tree.children(x).iter().map(|&c| (c, below)));
    }
    match roots.as_slice() {
        [r] => FinitePosetTree::from_parents(*r, edges),
        _ => {
            roots.sort_unstable();
            Err(Violation::new("greatest element", roots.iter().take(2).map(|&r| r as u64)))
        }
    }
}

/// Attaches `addend` at the leaf `leaf` of `host`, identifying the addend's
/// root with the leaf.
pub fn attach(host: &FinitePosetTree, leaf: NodeId, addend: &FinitePosetTree) -> Result<FinitePosetTree> {
    if !host.contains(leaf) {
        return Err(Error::MissingNode(leaf));
    }
    if !host.is_leaf(leaf) {
        return Err(Error::NotALeaf(leaf));
    }
    let ar = addend.root();
    if let Some(x) = addend.nodes().find(|&x| x != ar && host.contains(x)) {
        return Err(Error::IdCollision(x));
    }
    let mut out = host.clone();
    let mut stack = vec![ar];
    while let Some(x) = stack.pop() {
        let target = if x == ar { leaf } else { x };
        for &c in addend.children(x) {
            out.insert_leaf(target, c)?;
            stack.push(c);
        }
    }
    Ok(out)
}

/// Least-id leaf with no blocked node above it.
///
/// Blocked nodes are charged to the number of branching nodes strictly above
/// them, which is the depth they get once chains between branching nodes are
/// collapsed; at most one blocked node per such depth beyond the first, and
/// none at depth zero, is required.
pub fn find_open_leaf(tree: &FinitePosetTree, blocked: &BTreeSet<NodeId>) -> Result<NodeId> {
    let above = tree.branching_above();
    let mut per_depth: BTreeMap<u32, NodeId> = BTreeMap::new();
    for &b in blocked {
        let Some(&d) = above.get(&b) else {
            return Err(Error::MissingNode(b));
        };
        if d == 0 {
            return Err(Error::Precondition(format!("node {b} blocked at the first level")));
        }
        if let Some(prev) = per_depth.insert(d, b) {
            return Err(Error::Precondition(format!(
                "nodes {prev} and {b} both blocked at level {d}"
            )));
        }
    }
    tree.leaves()
        .find(|&l| !blocked.contains(&l) && tree.ancestors(l).all(|a| !blocked.contains(&a)))
        .ok_or_else(|| Error::Precondition("no open leaf although blocking is sparse".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cherry() -> FinitePosetTree {
        FinitePosetTree::from_parents(0, [(1, 0), (2, 0)]).unwrap()
    }

    fn chain(n: u32) -> FinitePosetTree {
        FinitePosetTree::from_parents(0, (1..n).map(|i| (i, i - 1))).unwrap()
    }

    #[test]
    fn minimal_branching_validates() {
        let t = FinitePosetTree::from_leq([0, 1, 2], [(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)]).unwrap();
        assert_eq!(t, cherry());
    }

    #[test]
    fn antisymmetry_violation_names_pair() {
        let err = FinitePosetTree::from_leq([1, 2], [(1, 1), (2, 2), (1, 2), (2, 1)]).unwrap_err();
        assert_eq!(err.clause, "antisymmetry");
        assert_eq!(err.witnesses, vec![1, 2]);
    }

    #[test]
    fn reflexivity_and_chain_violations() {
        let err = FinitePosetTree::from_leq([0, 1], [(0, 0), (1, 0)]).unwrap_err();
        assert_eq!(err.clause, "reflexivity");
        // 0 below two incomparable elements: transitive, but the up-set is no chain
        let pairs = [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (0, 2), (0, 3), (1, 3), (2, 3)];
        let err = FinitePosetTree::from_leq([0, 1, 2, 3], pairs).unwrap_err();
        assert_eq!(err.clause, "up-set chain");
        let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2)];
        assert_eq!(FinitePosetTree::from_leq([0, 1, 2], pairs).unwrap_err().clause, "transitivity");
        let pairs = [(0, 0), (1, 1)];
        assert_eq!(FinitePosetTree::from_leq([0, 1], pairs).unwrap_err().clause, "greatest element");
    }

    #[test]
    fn chain_has_empty_report() {
        let r = branching_report(&chain(3));
        assert!(r.entries.is_empty());
        assert!(r.uniquely_branching);
        assert!(level_subtree(&chain(3), 0).is_none());
    }

    #[test]
    fn cherry_report_and_level_subtree() {
        let t = cherry();
        let r = branching_report(&t);
        assert_eq!(r.entries, vec![BranchingEntry { node: 0, level: 0, length: 1 }]);
        assert_eq!(level_subtree(&t, 0).unwrap(), t);
        assert!(level_subtree(&t, 1).is_none());
    }

    #[test]
    fn sibling_branchings_of_equal_length_are_not_unique() {
        let t = FinitePosetTree::from_parents(0, [(1, 0), (2, 0), (3, 1), (4, 1), (5, 2), (6, 2)]).unwrap();
        assert!(!branching_report(&t).uniquely_branching);
    }

    #[test]
    fn three_level_binary_tree_level_zero() {
        // 0 -> {1, 2}; 1 -> {3, 4}; 2 -> {5, 6}; 3 -> {7, 8}
        let t = FinitePosetTree::from_parents(
            0,
            [(1, 0), (2, 0), (3, 1), (4, 1), (5, 2), (6, 2), (7, 3), (8, 3)],
        )
        .unwrap();
        let l0 = level_subtree(&t, 0).unwrap();
        assert_eq!(l0.nodes().collect::<Vec<_>>(), vec![0, 1, 2]);
        let l1 = level_subtree(&t, 1).unwrap();
        assert_eq!(l1.nodes().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5, 6]);
        let l2 = level_subtree(&t, 2).unwrap();
        assert_eq!(l2, t);
    }

    #[test]
    fn level_subtree_keeps_connecting_chain() {
        // root chain 0 > 1 > 2, 2 branches into 3, 4
        let t = FinitePosetTree::from_parents(0, [(1, 0), (2, 1), (3, 2), (4, 2)]).unwrap();
        assert_eq!(level_subtree(&t, 0).unwrap(), t);
    }

    #[test]
    fn attach_edge_and_branching() {
        let host = cherry();
        let edge = FinitePosetTree::from_parents(10, [(3, 10)]).unwrap();
        let t = attach(&host, 2, &edge).unwrap();
        assert_eq!(t.len(), host.len() + 1);
        assert!(t.adj(3, 2));

        let branch = FinitePosetTree::from_parents(10, [(3, 10), (4, 3), (5, 4), (6, 4)]).unwrap();
        let t = attach(&host, 2, &branch).unwrap();
        let r = branching_report(&t);
        // host chain to leaf 2 has length 2; the new branching node sits two below
        assert_eq!(r.entry(4).unwrap().length, 2 + 2);
    }

    #[test]
    fn attach_errors() {
        let host = cherry();
        let edge = FinitePosetTree::from_parents(10, [(3, 10)]).unwrap();
        assert_eq!(attach(&host, 0, &edge), Err(Error::NotALeaf(0)));
        let clash = FinitePosetTree::from_parents(10, [(1, 10)]).unwrap();
        assert_eq!(attach(&host, 2, &clash), Err(Error::IdCollision(1)));
    }

    #[test]
    fn attach_then_restrict_round_trips() {
        let host = cherry();
        let branch = FinitePosetTree::from_parents(10, [(3, 10), (4, 3), (5, 4), (6, 4)]).unwrap();
        let t = attach(&host, 1, &branch).unwrap();
        let back = t.restrict(|x| host.contains(x)).unwrap();
        assert_eq!(back, host);
    }

    #[test]
    fn open_leaf_cases() {
        let t = cherry();
        assert_eq!(find_open_leaf(&t, &BTreeSet::new()).unwrap(), 1);
        let blocked: BTreeSet<_> = [1, 2].into_iter().collect();
        assert!(matches!(find_open_leaf(&t, &blocked), Err(Error::Precondition(_))));
    }

    #[test]
    fn open_leaf_in_depth_three_binary_tree_with_one_block_per_level() {
        // proper binary tree of depth 3 in heap numbering 0..15
        let t = FinitePosetTree::from_parents(0, (1..15).map(|i| (i, (i - 1) / 2))).unwrap();
        let above = t.branching_above();
        let by_depth = |d: u32| -> Vec<NodeId> { t.nodes().filter(|x| above[x] == d).collect() };
        // exhaustively try every choice of at most one blocked node per depth 1..=3
        let mut choices: Vec<Vec<Option<NodeId>>> = vec![vec![None]];
        for d in 1..=3 {
            let mut next = Vec::new();
            for prefix in &choices {
                for pick in std::iter::once(None).chain(by_depth(d).into_iter().map(Some)) {
                    let mut p = prefix.clone();
                    p.push(pick);
                    next.push(p);
                }
            }
            choices = next;
        }
        assert_eq!(choices.len(), 3 * 5 * 9);
        for choice in choices {
            let blocked: BTreeSet<NodeId> = choice.into_iter().flatten().collect();
            let y = find_open_leaf(&t, &blocked).unwrap();
            assert!(t.is_leaf(y));
            assert!(!blocked.contains(&y) && t.ancestors(y).all(|a| !blocked.contains(&a)));
        }
    }

    #[test]
    fn lub_and_leq() {
        let t = FinitePosetTree::from_parents(0, [(1, 0), (2, 0), (3, 1), (4, 1)]).unwrap();
        assert!(t.leq(3, 0) && t.leq(3, 1) && !t.leq(3, 2) && !t.leq(0, 3));
        assert_eq!(t.lub(3, 4), Some(1));
        assert_eq!(t.lub(3, 2), Some(0));
        assert_eq!(t.lub(3, 1), Some(1));
    }

    #[test]
    fn length_counts_nodes_not_edges() {
        // Both readings differ by exactly one on every branching node.
        let t = FinitePosetTree::from_parents(0, [(1, 0), (2, 1), (3, 1), (4, 0)]).unwrap();
        for e in branching_report(&t).entries {
            let edges = t.ancestors(e.node).count() as u32;
            assert_eq!(e.length, edges + 1);
        }
    }
}
