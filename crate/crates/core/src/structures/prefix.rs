use std::collections::{BTreeMap, BTreeSet};

use super::{NodeId, Violation};

/// A prefix-closed set of root paths; `R_n` is the set of listed paths of
/// length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixTree {
    root: NodeId,
    paths: BTreeSet<Vec<NodeId>>,
}

impl PrefixTree {
    pub fn singleton(root: NodeId) -> Self {
        PrefixTree {
            root,
            paths: [vec![root]].into_iter().collect(),
        }
    }

    pub fn from_paths(paths: impl IntoIterator<Item = Vec<NodeId>>) -> Result<Self, Violation> {
        let paths: BTreeSet<Vec<NodeId>> = paths.into_iter().collect();
        if paths.contains(&Vec::new()) {
            return Err(Violation::new("clause 1", []));
        }
        let roots: Vec<NodeId> = paths.iter().filter(|p| p.len() == 1).map(|p| p[0]).collect();
        if roots.len() != 1 {
            return Err(Violation::new("clause 1", roots.iter().map(|&r| r as u64)));
        }
        for p in &paths {
            for i in 1..p.len() {
                if !paths.contains(&p[..i]) {
                    return Err(Violation::new("clause 2", p[..i].iter().map(|&x| x as u64)));
                }
            }
        }
        Ok(PrefixTree { root: roots[0], paths })
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn paths(&self) -> impl Iterator<Item = &Vec<NodeId>> {
        self.paths.iter()
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn contains(&self, path: &[NodeId]) -> bool {
        self.paths.contains(path)
    }

    /// The domain: every element occurring on some path.
    pub fn elements(&self) -> BTreeSet<NodeId> {
        self.paths.iter().flatten().copied().collect()
    }

    /// No element ends two different paths.
    pub fn is_injective(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.paths.iter().all(|p| seen.insert(*p.last().unwrap()))
    }

    /// The two witnessing paths of an injectivity failure, if any.
    pub fn injectivity_witness(&self) -> Option<(Vec<NodeId>, Vec<NodeId>)> {
        let mut seen: BTreeMap<NodeId, &Vec<NodeId>> = BTreeMap::new();
        for p in &self.paths {
            if let Some(q) = seen.insert(*p.last().unwrap(), p) {
                return Some((q.clone(), p.clone()));
            }
        }
        None
    }

    pub fn max_len(&self) -> usize {
        self.paths.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Inserts a path together with all its prefixes; returns the number of
    /// new paths.
    pub(crate) fn insert_path(&mut self, path: &[NodeId]) -> usize {
        debug_assert_eq!(path.first(), Some(&self.root));
        (1..=path.len()).filter(|&i| self.paths.insert(path[..i].to_vec())).count()
    }

    /// The longest listed path that `path` extends or equals.
    pub fn longest_listed_prefix<'a>(&self, path: &'a [NodeId]) -> &'a [NodeId] {
        let mut k = 0;
        while k < path.len() && self.paths.contains(&path[..=k]) {
            k += 1;
        }
        &path[..k]
    }
}
