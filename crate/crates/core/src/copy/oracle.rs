//! Computable trees as the copiers see them: programs answering finitely
//! many questions per stage, normalized so that each stage reveals at most
//! one new node, always attached to what is already known.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::OnceLock;

use crate::adversary::{Outcome, Program};
use crate::error::{Error, Result};
use crate::structures::{NodeId, PrefixTree, RpoTree, Violation};

/// Every oracle tree is rooted at node 0.
pub const ROOT: NodeId = 0;

/// Per-call step budget for program oracles.
pub const DEFAULT_ORACLE_FUEL: u64 = 100_000;

/// Oracle steps granted per stage.
pub const DEFAULT_STEPS_PER_STAGE: u64 = 4;

// ---------------------------------------------------------------- r.p.o. trees

/// Scripted r.p.o. trees. Node `x >= 1` is the `x`-th node computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFixture {
    /// `0 - 1 - 2 - ...`
    Chain,
    /// Spine `0, 2, 4, ...`; tooth `2k+1` hangs off `2k` below the next spine node.
    Comb,
    /// The full binary tree, revealed in pairs: the next open child slot in
    /// breadth-first order, immediately followed by that child's left child.
    BinaryGrowth,
    /// Case A shape: `2k+1` is the `k`-th child of the root and `2k+2` its only child.
    StarOfPaths,
    /// Case B shape: root children `1 < [leaves 7, 8, ...] < 2 < 5`, with
    /// `3, 4, 6` the children of `1, 2, 5`; the interval is ordered like ω.
    IntervalOmega,
    /// As `IntervalOmega`, but odd-numbered leaves enter at the left end of
    /// the interval, making it ω* + ω.
    IntervalZigzag,
}

fn pair_table() -> &'static (Vec<(u32, u64)>, BTreeMap<(u32, u64), NodeId>) {
    static TABLE: OnceLock<(Vec<(u32, u64)>, BTreeMap<(u32, u64), NodeId>)> = OnceLock::new();
    TABLE.get_or_init(|| {
        const SIZE: usize = 1 << 15;
        let mut order = vec![(0u32, 0u64)];
        let mut index: BTreeMap<(u32, u64), NodeId> = [((0, 0), 0)].into_iter().collect();
        // open child slots `(depth, position, side)` in breadth-first order
        let mut slots: VecDeque<(u32, u64, u64)> = [(0, 0, 0), (0, 0, 1)].into_iter().collect();
        while order.len() < SIZE {
            let (d, r, side) = slots.pop_front().expect("the tree is infinite");
            let child = (d + 1, 2 * r + side);
            if index.contains_key(&child) {
                continue;
            }
            let grandchild = (d + 2, 2 * child.1);
            for node in [child, grandchild] {
                index.insert(node, order.len() as NodeId);
                order.push(node);
            }
            slots.extend([(child.0, child.1, 1), (grandchild.0, grandchild.1, 0), (grandchild.0, grandchild.1, 1)]);
        }
        (order, index)
    })
}

impl TreeFixture {
    pub fn parse(spec: &str) -> Result<Self> {
        Ok(match spec.trim() {
            "chain" => TreeFixture::Chain,
            "comb" => TreeFixture::Comb,
            "binary-growth" => TreeFixture::BinaryGrowth,
            "star-of-paths" => TreeFixture::StarOfPaths,
            "interval-omega" => TreeFixture::IntervalOmega,
            "interval-zigzag" => TreeFixture::IntervalZigzag,
            other => return Err(Error::Config(format!("unknown tree fixture {other:?}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            TreeFixture::Chain => "chain",
            TreeFixture::Comb => "comb",
            TreeFixture::BinaryGrowth => "binary-growth",
            TreeFixture::StarOfPaths => "star-of-paths",
            TreeFixture::IntervalOmega => "interval-omega",
            TreeFixture::IntervalZigzag => "interval-zigzag",
        }
    }

    /// Parent of `x >= 1`.
    pub fn parent(self, x: NodeId) -> Option<NodeId> {
        match self {
            TreeFixture::Chain => Some(x - 1),
            TreeFixture::Comb => Some(if x % 2 == 1 { x - 1 } else { x - 2 }),
            TreeFixture::BinaryGrowth => {
                let (order, index) = pair_table();
                let &(d, r) = order.get(x as usize)?;
                index.get(&(d - 1, r / 2)).copied()
            }
            TreeFixture::StarOfPaths => Some(if x % 2 == 1 { 0 } else { x - 1 }),
            TreeFixture::IntervalOmega | TreeFixture::IntervalZigzag => Some(match x {
                1 | 2 | 5 => 0,
                3 => 1,
                4 => 2,
                6 => 5,
                _ => 0,
            }),
        }
    }

    /// Sibling order.
    pub fn less(self, x: NodeId, y: NodeId) -> bool {
        match self {
            TreeFixture::Comb => x % 2 == 1 && y % 2 == 0,
            TreeFixture::BinaryGrowth => {
                let (order, _) = pair_table();
                order[x as usize].1 < order[y as usize].1
            }
            TreeFixture::IntervalOmega | TreeFixture::IntervalZigzag => {
                let key = |z: NodeId| -> (u8, i64) {
                    match z {
                        1 => (0, 0),
                        2 => (2, 0),
                        5 => (3, 0),
                        _ => {
                            let k = (z - 7) as i64;
                            let zig = self == TreeFixture::IntervalZigzag && k % 2 == 1;
                            (1, if zig { -k } else { k })
                        }
                    }
                };
                key(x) < key(y)
            }
            _ => x < y,
        }
    }
}

/// Where a computable r.p.o. tree comes from: `parent(x)` for `x >= 1` and
/// the sibling order `less(x, y)`.
#[derive(Debug, Clone)]
pub enum TreeSource {
    Native(TreeFixture),
    Dsl { name: String, program: Program },
}

impl TreeSource {
    pub fn from_program(name: impl Into<String>, program: Program) -> Result<Self> {
        program.require(&[("parent", 1), ("less", 2)])?;
        Ok(TreeSource::Dsl {
            name: name.into(),
            program,
        })
    }

    pub fn name(&self) -> String {
        match self {
            TreeSource::Native(f) => f.name().to_string(),
            TreeSource::Dsl { name, .. } => name.clone(),
        }
    }

    /// `(answer, steps)`; natives charge one step per call.
    fn call(&self, f: &str, args: &[u64], fuel: u64) -> Result<(u64, u64)> {
        match self {
            TreeSource::Native(fx) => Ok((
                match f {
                    "parent" => fx.parent(args[0] as NodeId).map_or(u64::MAX, u64::from),
                    _ => fx.less(args[0] as NodeId, args[1] as NodeId) as u64,
                },
                1,
            )),
            TreeSource::Dsl { name, program } => {
                let ev = program.eval(f, args, fuel)?;
                match ev.outcome {
                    Outcome::Value(v) => Ok((v, ev.steps)),
                    Outcome::OutOfFuel => Err(Error::OutOfFuel {
                        what: format!("oracle {name}: {f}{args:?}"),
                        budget: fuel,
                    }),
                }
            }
        }
    }
}

/// A node entering the known tree: `index` is its number of smaller siblings
/// at that moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reveal {
    pub node: NodeId,
    pub parent: NodeId,
    pub index: usize,
}

/// The normalization layer over a [`TreeSource`]. Each stage grants `l`
/// steps; computing node `x` costs the steps of `parent(x)` plus one
/// comparison with each already computed sibling. Computed nodes are
/// buffered and released one per stage, parents first.
#[derive(Debug, Clone)]
pub struct RpoOracle {
    source: TreeSource,
    l: u64,
    fuel: u64,
    credit: u64,
    next: NodeId,
    /// The node being computed and the steps it still needs.
    pending: Option<(NodeId, NodeId, u64)>,
    computed: BTreeMap<NodeId, NodeId>,
    siblings: BTreeMap<NodeId, Vec<NodeId>>,
    less: BTreeSet<(NodeId, NodeId)>,
    buffer: VecDeque<NodeId>,
    tree: RpoTree,
    steps: u64,
}

impl RpoOracle {
    pub fn new(source: TreeSource, l: u64, fuel: u64) -> Self {
        RpoOracle {
            source,
            l,
            fuel,
            credit: 0,
            next: 1,
            pending: None,
            computed: BTreeMap::new(),
            siblings: BTreeMap::new(),
            less: BTreeSet::new(),
            buffer: VecDeque::new(),
            tree: RpoTree::singleton(ROOT),
            steps: 0,
        }
    }

    pub fn name(&self) -> String {
        self.source.name()
    }

    pub fn source(&self) -> &TreeSource {
        &self.source
    }

    pub fn steps_per_stage(&self) -> u64 {
        self.l
    }

    /// `T_s`: everything revealed so far.
    pub fn tree(&self) -> &RpoTree {
        &self.tree
    }

    /// Oracle steps consumed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Computes `x` in full; the cost is charged against credit by the caller.
    fn compute(&mut self, x: NodeId) -> Result<(NodeId, u64)> {
        let (p, mut cost) = self.source.call("parent", &[x as u64], self.fuel)?;
        if p == x as u64 {
            return Err(Violation::new("normal form", [x as u64, p]).into());
        }
        let p = NodeId::try_from(p).map_err(|_| Error::from(Violation::new("normal form", [x as u64, p])))?;
        let sibs = self.siblings.get(&p).cloned().unwrap_or_default();
        for y in sibs {
            let (lt, c) = self.source.call("less", &[y as u64, x as u64], self.fuel)?;
            cost += c;
            if lt != 0 {
                self.less.insert((y, x));
            } else {
                self.less.insert((x, y));
            }
        }
        Ok((p, cost.max(1)))
    }

    /// Runs one stage: spend `l` steps computing, then release at most one
    /// buffered node whose parent is already known.
    pub fn stage(&mut self) -> Result<Option<Reveal>> {
        self.credit += self.l;
        loop {
            let (x, p, need) = match self.pending.take() {
                Some(t) => t,
                None => {
                    let x = self.next;
                    let (p, cost) = self.compute(x)?;
                    self.next += 1;
                    (x, p, cost)
                }
            };
            if need > self.credit {
                self.steps += self.credit;
                self.pending = Some((x, p, need - self.credit));
                self.credit = 0;
                break;
            }
            self.credit -= need;
            self.steps += need;
            self.computed.insert(x, p);
            self.siblings.entry(p).or_default().push(x);
            self.buffer.push_back(x);
        }
        self.release()
    }

    fn release(&mut self) -> Result<Option<Reveal>> {
        let pos = self.buffer.iter().position(|x| self.tree.contains(self.computed[x]));
        let Some(pos) = pos else {
            self.check_rooted()?;
            return Ok(None);
        };
        let x = self.buffer.remove(pos).unwrap();
        let p = self.computed[&x];
        let index = self.tree.children(p).iter().filter(|&&y| self.less.contains(&(y, x))).count();
        self.tree.insert_child(p, x, index)?;
        Ok(Some(Reveal { node: x, parent: p, index }))
    }

    /// A buffered node whose ancestry loops back on itself can never be
    /// released.
    fn check_rooted(&self) -> Result<()> {
        for &x in &self.buffer {
            let mut seen = BTreeSet::new();
            let mut y = x;
            while let Some(&p) = self.computed.get(&y) {
                if !seen.insert(y) {
                    return Err(Violation::new("normal form", seen.iter().map(|&z| z as u64)).into());
                }
                y = p;
            }
        }
        Ok(())
    }

    /// Runs stages until every listed node is known, for constructions that
    /// assume their distinguished nodes are present from the start.
    pub fn preload(&mut self, nodes: &[NodeId], max_stages: u64) -> Result<Vec<Reveal>> {
        let mut out = Vec::new();
        for _ in 0..max_stages {
            if nodes.iter().all(|&x| self.tree.contains(x)) {
                return Ok(out);
            }
            out.extend(self.stage()?);
        }
        if nodes.iter().all(|&x| self.tree.contains(x)) {
            return Ok(out);
        }
        Err(Error::Precondition(format!(
            "case data names nodes {nodes:?} that the oracle has not produced within {max_stages} stages"
        )))
    }
}

// ---------------------------------------------------------------- prefix trees

/// Scripted prefix trees, element `x` ending the path `path(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathFixture {
    /// An infinite branch with side leaves, built in blocks of ten: six
    /// one-step extensions, a side leaf, then an element whose path skips an
    /// element not yet seen (a jump of two), the skipped element, and the
    /// continuation.
    BranchJump,
    /// Element 5 ends both `(0, 1, 5)` and `(0, 5)`.
    Clash,
}

impl PathFixture {
    pub fn parse(spec: &str) -> Result<Self> {
        match spec.trim() {
            "branch-jump" => Ok(PathFixture::BranchJump),
            "clash" => Ok(PathFixture::Clash),
            other => Err(Error::Config(format!("unknown prefix fixture {other:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PathFixture::BranchJump => "branch-jump",
            PathFixture::Clash => "clash",
        }
    }

    fn parent(self, x: NodeId) -> NodeId {
        match self {
            PathFixture::BranchJump => {
                let (j, i) = ((x - 1) / 10, (x - 1) % 10 + 1);
                let base = 10 * j;
                match i {
                    1 => base,
                    2..=6 => x - 1,
                    7 => base + 3,
                    8 => base + 9,
                    9 => base + 6,
                    _ => base + 8,
                }
            }
            PathFixture::Clash => match x {
                5 => 1,
                _ => x - 1,
            },
        }
    }

    pub fn path(self, x: NodeId) -> Vec<NodeId> {
        if self == PathFixture::Clash && x == 6 {
            return vec![0, 5, 6];
        }
        let mut path = vec![x];
        let mut y = x;
        while y != ROOT {
            y = self.parent(y);
            path.push(y);
        }
        path.reverse();
        path
    }
}

/// Where an injective prefix tree comes from: the path ending in each element
/// `x >= 1`, as `len(x)` and `entry(x, i)` for `i < len(x)`.
#[derive(Debug, Clone)]
pub enum PathSource {
    Native(PathFixture),
    Dsl { name: String, program: Program },
}

impl PathSource {
    pub fn from_program(name: impl Into<String>, program: Program) -> Result<Self> {
        program.require(&[("len", 1), ("entry", 2)])?;
        Ok(PathSource::Dsl {
            name: name.into(),
            program,
        })
    }

    pub fn name(&self) -> String {
        match self {
            PathSource::Native(f) => f.name().to_string(),
            PathSource::Dsl { name, .. } => name.clone(),
        }
    }

    /// `(path, steps)`.
    fn path(&self, x: NodeId, fuel: u64) -> Result<(Vec<NodeId>, u64)> {
        match self {
            PathSource::Native(f) => Ok((f.path(x), 1)),
            PathSource::Dsl { name, program } => {
                let mut steps = 0;
                let mut call = |f: &str, args: &[u64]| -> Result<u64> {
                    let ev = program.eval(f, args, fuel)?;
                    steps += ev.steps;
                    ev.outcome.value().ok_or_else(|| Error::OutOfFuel {
                        what: format!("oracle {name}: {f}{args:?}"),
                        budget: fuel,
                    })
                };
                let n = call("len", &[x as u64])?;
                if n == 0 || n > 1 << 16 {
                    return Err(Violation::new("path length", [x as u64, n]).into());
                }
                let mut path = Vec::with_capacity(n as usize);
                for i in 0..n {
                    let e = call("entry", &[x as u64, i])?;
                    path.push(NodeId::try_from(e).map_err(|_| Error::from(Violation::new("domain", [e])))?);
                }
                Ok((path, steps.max(1)))
            }
        }
    }
}

/// The normalization layer over a [`PathSource`]: elements are computed in
/// order under a budget of `l` steps per stage, and at most one path that is
/// not already known is released per stage.
#[derive(Debug, Clone)]
pub struct PrefixOracle {
    source: PathSource,
    l: u64,
    fuel: u64,
    credit: u64,
    next: NodeId,
    pending: Option<(Vec<NodeId>, u64)>,
    buffer: VecDeque<Vec<NodeId>>,
    tree: PrefixTree,
    steps: u64,
}

impl PrefixOracle {
    pub fn new(source: PathSource, l: u64, fuel: u64) -> Self {
        PrefixOracle {
            source,
            l,
            fuel,
            credit: 0,
            next: 1,
            pending: None,
            buffer: VecDeque::new(),
            tree: PrefixTree::singleton(ROOT),
            steps: 0,
        }
    }

    pub fn name(&self) -> String {
        self.source.name()
    }

    pub fn tree(&self) -> &PrefixTree {
        &self.tree
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// One stage. The released path is reported together with all of its
    /// prefixes entering the known tree; an injectivity failure is an error.
    pub fn stage(&mut self) -> Result<Option<Vec<NodeId>>> {
        self.credit += self.l;
        loop {
            let (path, need) = match self.pending.take() {
                Some(t) => t,
                None => {
                    let x = self.next;
                    let (path, cost) = self.source.path(x, self.fuel)?;
                    if path.first() != Some(&ROOT) || path.last() != Some(&x) {
                        return Err(Violation::new("rooted path", path.iter().map(|&y| y as u64)).into());
                    }
                    self.next += 1;
                    (path, cost)
                }
            };
            if need > self.credit {
                self.steps += self.credit;
                self.pending = Some((path, need - self.credit));
                self.credit = 0;
                break;
            }
            self.credit -= need;
            self.steps += need;
            self.buffer.push_back(path);
        }
        while let Some(path) = self.buffer.pop_front() {
            if self.tree.contains(&path) {
                continue;
            }
            self.tree.insert_path(&path);
            if let Some((p, q)) = self.tree.injectivity_witness() {
                return Err(Violation::new("injectivity", p.iter().chain(&q).map(|&y| y as u64)).into());
            }
            return Ok(Some(path));
        }
        Ok(None)
    }
}
