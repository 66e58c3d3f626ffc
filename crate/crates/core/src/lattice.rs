//! Order-theoretic views of the constructed tree: an upper semilattice (and,
//! reversed, a lower one), and a complemented lattice obtained by adding a
//! bottom element.

use crate::error::{Error, Result};
use crate::structures::{FinitePosetTree, NodeId};

/// `join(x, y)` in `T`. Up-sets are chains, so comparable nodes join to the
/// larger one and incomparable ones to their nearest common ancestor.
/// Reading `T` upside down, the same node is `meet(x, y)` there.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JoinMeet {
    pub join: NodeId,
    pub meet_reversed: NodeId,
    /// How many ancestor steps were taken from `x` and `y`.
    pub steps: u32,
}

pub fn join_meet(tree: &FinitePosetTree, x: NodeId, y: NodeId) -> Result<JoinMeet> {
    for z in [x, y] {
        if !tree.contains(z) {
            return Err(Error::MissingNode(z));
        }
    }
    if tree.leq(x, y) || tree.leq(y, x) {
        let top = if tree.leq(x, y) { y } else { x };
        return Ok(JoinMeet {
            join: top,
            meet_reversed: top,
            steps: 0,
        });
    }
    let (hx, hy) = (tree.height(x), tree.height(y));
    let j = tree.lub(x, y).expect("both nodes are present");
    let steps = (hx - tree.height(j)) + (hy - tree.height(j));
    Ok(JoinMeet {
        join: j,
        meet_reversed: j,
        steps,
    })
}

/// `T` shifted up by one with a new bottom `0`; `1` is the old root.
#[derive(Debug, Clone)]
pub struct LatticeExtension {
    tree: FinitePosetTree,
    left: NodeId,
    right: NodeId,
}

pub const BOTTOM: NodeId = 0;

impl LatticeExtension {
    /// Requires the root to branch, into exactly two children as the
    /// construction guarantees.
    pub fn new(tree: &FinitePosetTree) -> Result<Self> {
        let r = tree.root();
        match *tree.children(r) {
            [l, rr] => Ok(LatticeExtension {
                tree: tree.clone(),
                left: l,
                right: rr,
            }),
            _ => Err(Error::Precondition(format!(
                "root has {} children, the extension needs exactly two",
                tree.children(r).len()
            ))),
        }
    }

    pub fn top(&self) -> NodeId {
        self.tree.root() + 1
    }

    pub fn bottom(&self) -> NodeId {
        BOTTOM
    }

    /// `0, 1, ...`: the bottom followed by every node of `T` shifted by one.
    pub fn elements(&self) -> Vec<NodeId> {
        std::iter::once(BOTTOM).chain(self.tree.nodes().map(|x| x + 1)).collect()
    }

    pub fn len(&self) -> usize {
        self.tree.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, a: NodeId) -> bool {
        a == BOTTOM || self.tree.contains(a - 1)
    }

    fn check(&self, a: NodeId) -> Result<()> {
        if self.contains(a) {
            Ok(())
        } else {
            Err(Error::MissingNode(a))
        }
    }

    pub fn leq(&self, a: NodeId, b: NodeId) -> bool {
        a == BOTTOM || (b != BOTTOM && self.tree.leq(a - 1, b - 1))
    }

    pub fn join(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.check(a)?;
        self.check(b)?;
        match (a, b) {
            (BOTTOM, z) | (z, BOTTOM) => Ok(z),
            _ => Ok(join_meet(&self.tree, a - 1, b - 1)?.join + 1),
        }
    }

    /// Incomparable nodes of `T` have no common lower bound there, so their
    /// meet is the new bottom.
    pub fn meet(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.check(a)?;
        self.check(b)?;
        if self.leq(a, b) {
            Ok(a)
        } else if self.leq(b, a) {
            Ok(b)
        } else {
            Ok(BOTTOM)
        }
    }

    /// Below the left child of the root goes to the right child and vice
    /// versa; `0` and `1` swap.
    pub fn complement(&self, a: NodeId) -> Result<NodeId> {
        self.check(a)?;
        if a == BOTTOM {
            return Ok(self.top());
        }
        if a == self.top() {
            return Ok(BOTTOM);
        }
        if self.tree.leq(a - 1, self.left) {
            Ok(self.right + 1)
        } else {
            Ok(self.left + 1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FinitePosetTree {
        // 0 -> {1, 2}; 1 -> 3 -> {4, 5}; 2 -> {6, 7}
        FinitePosetTree::from_parents(0, [(1, 0), (2, 0), (3, 1), (4, 3), (5, 3), (6, 2), (7, 2)]).unwrap()
    }

    #[test]
    fn joins() {
        let t = sample();
        assert_eq!(join_meet(&t, 4, 4).unwrap().join, 4);
        assert_eq!(join_meet(&t, 4, 1).unwrap().join, 1);
        assert_eq!(join_meet(&t, 4, 5).unwrap().join, 3);
        assert_eq!(join_meet(&t, 4, 6).unwrap().join, 0);
        assert_eq!(join_meet(&t, 4, 6).unwrap().meet_reversed, 0);
        assert_eq!(join_meet(&t, 4, 9), Err(Error::MissingNode(9)));
    }

    #[test]
    fn extension() {
        let l = LatticeExtension::new(&sample()).unwrap();
        assert_eq!(l.complement(0).unwrap(), 1);
        assert_eq!(l.complement(1).unwrap(), 0);
        // node 4 of T is 5 in L and lies below the left child (2 in L)
        let a = 5;
        let b = l.complement(a).unwrap();
        assert_eq!(b, 3);
        assert_eq!(l.join(a, b).unwrap(), l.top());
        assert_eq!(l.meet(a, b).unwrap(), BOTTOM);
        assert_eq!(l.meet(5, 6).unwrap(), BOTTOM);
        assert_eq!(l.meet(5, 2).unwrap(), 5);
        assert_eq!(l.len(), 9);
    }

    #[test]
    fn unbranched_root_is_rejected() {
        let t = FinitePosetTree::from_parents(0, [(1, 0)]).unwrap();
        assert!(LatticeExtension::new(&t).is_err());
    }
}
