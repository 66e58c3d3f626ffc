use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use super::{FinitePosetTree, NodeId, PrefixTree, RpoTree, Structure, SuccessorTree};
use crate::error::{Error, Result};

/// A relation-preserving bijection, keyed by the nodes of the first structure.
pub type Witness = BTreeMap<NodeId, NodeId>;

/// Largest non-injective prefix-tree domain handled by exhaustive search.
const BRUTE_FORCE_LIMIT: usize = 9;

pub fn isomorphic(a: &Structure, b: &Structure) -> Result<Option<Witness>> {
    match (a, b) {
        (Structure::Poset(x), Structure::Poset(y)) => Ok(poset_iso_canonical(x, y)),
        (Structure::Rpo(x), Structure::Rpo(y)) => Ok(rpo_iso(x, y)),
        (Structure::Succ(x), Structure::Succ(y)) => Ok(succ_iso(x, y)),
        (Structure::Prefix(x), Structure::Prefix(y)) => prefix_iso(x, y),
        _ => Err(Error::KindMismatch(a.kind().name(), b.kind().name())),
    }
}

/// Canonical child-multiset codes, computed bottom-up and interned.
fn canonical_codes(t: &FinitePosetTree, table: &mut HashMap<Vec<u32>, u32>) -> HashMap<NodeId, u32> {
    let mut order = Vec::with_capacity(t.len());
    let mut stack = vec![t.root()];
    while let Some(x) = stack.pop() {
        order.push(x);
        stack.extend(t.children(x).iter().copied());
    }
    let mut codes: HashMap<NodeId, u32> = HashMap::with_capacity(t.len());
    for &x in order.iter().rev() {
        let mut key: Vec<u32> = t.children(x).iter().map(|c| codes[c]).collect();
        key.sort_unstable();
        let next = table.len() as u32;
        let code = *table.entry(key).or_insert(next);
        codes.insert(x, code);
    }
    codes
}

pub fn poset_iso_canonical(a: &FinitePosetTree, b: &FinitePosetTree) -> Option<Witness> {
    if a.len() != b.len() {
        return None;
    }
    let mut table = HashMap::new();
    let ca = canonical_codes(a, &mut table);
    let cb = canonical_codes(b, &mut table);
    if ca[&a.root()] != cb[&b.root()] {
        return None;
    }
    let mut w = Witness::new();
    let mut stack = vec![(a.root(), b.root())];
    while let Some((x, y)) = stack.pop() {
        w.insert(x, y);
        let mut xs: Vec<NodeId> = a.children(x).to_vec();
        let mut ys: Vec<NodeId> = b.children(y).to_vec();
        xs.sort_by_key(|c| (ca[c], *c));
        ys.sort_by_key(|c| (cb[c], *c));
        stack.extend(xs.into_iter().zip(ys));
    }
    Some(w)
}

/// Independent search oracle: assigns nodes top-down, pruning only on child
/// count and subtree size. Returns up to `limit` witnesses in lexicographic
/// order of the candidate choices.
pub fn poset_iso_search(a: &FinitePosetTree, b: &FinitePosetTree, limit: usize) -> Vec<Witness> {
    let mut found = Vec::new();
    if a.len() != b.len() || limit == 0 {
        return found;
    }
    let mut order = Vec::with_capacity(a.len());
    let mut queue = VecDeque::from([a.root()]);
    while let Some(x) = queue.pop_front() {
        order.push(x);
        queue.extend(a.children(x).iter().copied());
    }
    let size_a: HashMap<NodeId, usize> = a.nodes().map(|x| (x, a.subtree_size(x))).collect();
    let size_b: HashMap<NodeId, usize> = b.nodes().map(|x| (x, b.subtree_size(x))).collect();
    let fits = |x: NodeId, y: NodeId| a.children(x).len() == b.children(y).len() && size_a[&x] == size_b[&y];

    let mut f: HashMap<NodeId, NodeId> = HashMap::new();
    let mut used: HashSet<NodeId> = HashSet::new();
    // frames[k] = (candidates for order[k], next index to try)
    let mut frames: Vec<(Vec<NodeId>, usize)> = Vec::new();
    let candidates = |k: usize, f: &HashMap<NodeId, NodeId>, used: &HashSet<NodeId>| -> Vec<NodeId> {
        let x = order[k];
        let pool: Vec<NodeId> = match a.parent(x) {
            None => vec![b.root()],
            Some(p) => b.children(f[&p]).to_vec(),
        };
        pool.into_iter().filter(|y| !used.contains(y) && fits(x, *y)).collect()
    };
    frames.push((candidates(0, &f, &used), 0));
    while !frames.is_empty() {
        let k = frames.len() - 1;
        let top = &mut frames[k];
        let x = order[k];
        if let Some(prev) = f.remove(&x) {
            used.remove(&prev);
        }
        if top.1 >= top.0.len() {
            frames.pop();
            continue;
        }
        let y = top.0[top.1];
        top.1 += 1;
        f.insert(x, y);
        used.insert(y);
        if k + 1 == order.len() {
            found.push(f.iter().map(|(&p, &q)| (p, q)).collect());
            if found.len() >= limit {
                break;
            }
            continue;
        }
        let next = candidates(k + 1, &f, &used);
        frames.push((next, 0));
    }
    found
}

pub fn poset_iso_backtracking(a: &FinitePosetTree, b: &FinitePosetTree) -> Option<Witness> {
    poset_iso_search(a, b, 1).pop()
}

/// Checks that `w` is a bijection carrying the order of `a` onto that of `b`.
pub fn is_poset_iso(a: &FinitePosetTree, b: &FinitePosetTree, w: &Witness) -> bool {
    if w.len() != a.len() || a.len() != b.len() {
        return false;
    }
    let image: BTreeSet<NodeId> = w.values().copied().collect();
    if image.len() != b.len() || !image.iter().all(|&y| b.contains(y)) {
        return false;
    }
    a.nodes().all(|x| match a.parent(x) {
        None => w[&x] == b.root(),
        Some(p) => b.parent(w[&x]) == Some(w[&p]),
    })
}

fn rpo_iso(a: &RpoTree, b: &RpoTree) -> Option<Witness> {
    if a.len() != b.len() {
        return None;
    }
    let mut w = Witness::new();
    let mut stack = vec![(a.root(), b.root())];
    while let Some((x, y)) = stack.pop() {
        let (xs, ys) = (a.children(x), b.children(y));
        if xs.len() != ys.len() {
            return None;
        }
        w.insert(x, y);
        stack.extend(xs.iter().copied().zip(ys.iter().copied()));
    }
    Some(w)
}

fn succ_iso(a: &SuccessorTree, b: &SuccessorTree) -> Option<Witness> {
    if a.len() != b.len() {
        return None;
    }
    let mut w = Witness::new();
    w.insert(a.empty(), b.empty());
    let mut stack = vec![(a.root(), b.root())];
    while let Some((x, y)) = stack.pop() {
        w.insert(x, y);
        for (cx, cy) in [(a.s1(x), b.s1(y)), (a.s2(x), b.s2(y))] {
            match (cx == a.empty(), cy == b.empty()) {
                (true, true) => {}
                (false, false) => stack.push((cx, cy)),
                _ => return None,
            }
        }
    }
    (w.len() == a.len()).then_some(w)
}

/// The injective case reduces to rooted unordered trees on elements.
fn element_tree(t: &PrefixTree) -> FinitePosetTree {
    let edges = t.paths().filter(|p| p.len() >= 2).map(|p| (p[p.len() - 1], p[p.len() - 2]));
    FinitePosetTree::from_parents(t.root(), edges).expect("injective prefix trees are trees")
}

fn prefix_iso(a: &PrefixTree, b: &PrefixTree) -> Result<Option<Witness>> {
    if a.num_paths() != b.num_paths() {
        return Ok(None);
    }
    let (ea, eb) = (a.elements(), b.elements());
    if ea.len() != eb.len() || a.is_injective() != b.is_injective() {
        return Ok(None);
    }
    if a.is_injective() {
        return Ok(poset_iso_canonical(&element_tree(a), &element_tree(b)));
    }
    if ea.len() > BRUTE_FORCE_LIMIT {
        return Err(Error::Unsupported(format!(
            "isomorphism of non-injective prefix trees with {} elements",
            ea.len()
        )));
    }
    let xs: Vec<NodeId> = ea.into_iter().collect();
    let ys: Vec<NodeId> = eb.into_iter().collect();
    let mut perm: Vec<usize> = Vec::new();
    let mut used = vec![false; ys.len()];
    Ok(permute(&xs, &ys, &mut perm, &mut used, &|w: &Witness| {
        a.paths().all(|p| b.contains(&p.iter().map(|x| w[x]).collect::<Vec<_>>()))
    }))
}

fn permute(
    xs: &[NodeId],
    ys: &[NodeId],
    perm: &mut Vec<usize>,
    used: &mut [bool],
    ok: &dyn Fn(&Witness) -> bool,
) -> Option<Witness> {
    if perm.len() == xs.len() {
        let w: Witness = perm.iter().enumerate().map(|(i, &j)| (xs[i], ys[j])).collect();
        return ok(&w).then_some(w);
    }
    for j in 0..ys.len() {
        if !used[j] {
            used[j] = true;
            perm.push(j);
            if let Some(w) = permute(xs, ys, perm, used, ok) {
                return Some(w);
            }
            perm.pop();
            used[j] = false;
        }
    }
    None
}
