//! Builds a computable poset tree `T` that no adversary in a list presents.
//!
//! Odd stages grow every open leaf by a binary branching whose branching
//! length is new; even stages let strategy `i` freeze the part of `T` below
//! one level-`(i+1)` node once `P_i` has visibly overtaken it there.

mod verify;

use std::collections::BTreeSet;
use std::fmt;

use crate::adversary::{poset_approximation, ApproxOutcome, FuelPolicy, Meter, PosetAdversary};
use crate::error::{Error, Result};
use crate::structures::{
    find_open_leaf, induced_order, level_subtree, poset_iso_canonical, FinitePosetTree, NodeId, Violation, Witness,
};
use crate::trace::{list, Record, Trace};

pub use verify::{verify_trace, PosetReport};

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

/// One binary branching added at an expansionary stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    pub leaf: NodeId,
    /// Fresh nodes strictly between `leaf` and `branch`, top-down.
    pub chain: Vec<NodeId>,
    pub branch: NodeId,
    pub children: [NodeId; 2],
    pub length: u32,
}

impl Attachment {
    pub fn record(&self, stage: u64) -> Record {
        Record::new()
            .with("stage", stage)
            .with("kind", "exp")
            .with("leaf", self.leaf)
            .with("chain", self.chain.len())
            .with("branch", self.branch)
            .with("children", list(self.children))
            .with("length", self.length)
    }
}

/// `1 +` the largest branching length, or 1 for a tree without branching.
pub fn h_value(tree: &FinitePosetTree) -> u32 {
    1 + tree.nodes().filter(|&x| tree.is_branching(x)).map(|x| tree.height(x)).max().unwrap_or(0)
}

/// Leaves with no blocked node at or above them, in id order.
pub fn open_leaves(tree: &FinitePosetTree, blocked: &BTreeSet<NodeId>) -> Vec<NodeId> {
    tree.leaves()
        .filter(|&l| !blocked.contains(&l) && tree.ancestors(l).all(|a| !blocked.contains(&a)))
        .collect()
}

/// The expansionary step: the `j`-th open leaf (from 1) receives a branching
/// of length `H + j - 1`. New ids continue the interval `0..len`.
pub fn expand(tree: &mut FinitePosetTree, blocked: &BTreeSet<NodeId>) -> Result<Vec<Attachment>> {
    find_open_leaf(tree, blocked).map_err(|e| Error::InvariantBreach(format!("no open leaf: {e}")))?;
    let h = h_value(tree);
    let mut next = tree.len() as NodeId;
    let mut out = Vec::new();
    for (j, leaf) in open_leaves(tree, blocked).into_iter().enumerate() {
        let length = h + j as u32;
        let below = length - tree.height(leaf);
        let mut at = leaf;
        let mut chain = Vec::new();
        for _ in 0..below {
            tree.insert_leaf(at, next)?;
            chain.push(next);
            at = next;
            next += 1;
        }
        // the last chain node is the branching node itself
        let branch = chain.pop().unwrap_or(leaf);
        let children = [next, next + 1];
        tree.insert_leaf(branch, next)?;
        tree.insert_leaf(branch, next + 1)?;
        next += 2;
        out.push(Attachment {
            leaf,
            chain,
            branch,
            children,
            length,
        });
    }
    Ok(out)
}

/// Why a strategy is or is not ready, in the order the conditions are tested.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Readiness {
    Ready,
    /// `i > s - 2`.
    Stale,
    Fuel { x: u64, y: u64 },
    NotTree(Violation),
    TreeLevelAbsent,
    AdversaryLevelAbsent,
    /// Either fragment changed since the previous even stage.
    Unstable,
    Mismatch,
}

impl Readiness {
    pub fn tag(&self) -> &'static str {
        match self {
            Readiness::Ready => "ready",
            Readiness::Stale => "stale",
            Readiness::Fuel { .. } => "fuel",
            Readiness::NotTree(_) => "not-tree",
            Readiness::TreeLevelAbsent => "t-level-absent",
            Readiness::AdversaryLevelAbsent => "p-level-absent",
            Readiness::Unstable => "unstable",
            Readiness::Mismatch => "mismatch",
        }
    }
}

/// A violation that survives every larger approximation. A missing common
/// upper bound can still be supplied by a later element.
pub fn is_definitive(v: &Violation) -> bool {
    v.clause != "greatest element"
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockRecord {
    pub node: NodeId,
    pub since: u64,
    pub t_size: usize,
    pub image: NodeId,
    pub p_size: usize,
}

#[derive(Debug, Clone)]
pub struct Requirement {
    pub index: usize,
    pub name: String,
    pub last: Option<(u64, Readiness)>,
    pub first_definitive: Option<(u64, Violation)>,
    pub blocked: Option<BlockRecord>,
    pub meter: Meter,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    NotPosetTree { stage: u64, clause: String },
    Disqualified { stage: u64, reason: String },
    LevelAbsent { level: u32 },
    FragmentMismatch { level: u32 },
    BlockedDeficit(BlockRecord),
    Undecided { reason: String },
}

impl Certificate {
    pub fn tag(&self) -> &'static str {
        match self {
            Certificate::NotPosetTree { .. } => "not-poset-tree",
            Certificate::Disqualified { .. } => "disqualified",
            Certificate::LevelAbsent { .. } => "level-absent",
            Certificate::FragmentMismatch { .. } => "fragment-mismatch",
            Certificate::BlockedDeficit(_) => "blocked-deficit",
            Certificate::Undecided { .. } => "undecided",
        }
    }

    /// Certificates that rule the adversary out as a poset tree at all.
    pub fn is_disqualification(&self) -> bool {
        matches!(self, Certificate::NotPosetTree { .. } | Certificate::Disqualified { .. })
    }

    pub fn is_non_iso(&self) -> bool {
        matches!(
            self,
            Certificate::LevelAbsent { .. } | Certificate::FragmentMismatch { .. } | Certificate::BlockedDeficit(_)
        )
    }

    fn push_fields(&self, r: &mut Record) {
        r.push("cert", self.tag());
        match self {
            Certificate::NotPosetTree { stage, clause } => {
                r.push("at", stage);
                r.push("clause", clause.replace(' ', "-"));
            }
            Certificate::Disqualified { stage, reason } => {
                r.push("at", stage);
                r.push("reason", reason);
            }
            Certificate::LevelAbsent { level } | Certificate::FragmentMismatch { level } => r.push("level", level),
            Certificate::BlockedDeficit(b) => {
                r.push("node", b.node);
                r.push("since", b.since);
                r.push("t", b.t_size);
                r.push("image", b.image);
                r.push("p", b.p_size);
            }
            Certificate::Undecided { reason } => r.push("reason", reason),
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut r = Record::new();
        self.push_fields(&mut r);
        write!(f, "{r}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PosetRunConfig {
    pub horizon: u64,
    pub fuel: FuelPolicy,
    pub node_budget: usize,
}

impl Default for PosetRunConfig {
    fn default() -> Self {
        PosetRunConfig {
            horizon: 12,
            fuel: FuelPolicy::default(),
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

pub struct PosetConstruction {
    pub tree: FinitePosetTree,
    pub blocked: BTreeSet<NodeId>,
    pub stage: u64,
    pub requirements: Vec<Requirement>,
    pub trace: Trace,
    adversaries: Vec<PosetAdversary>,
    prev_even: FinitePosetTree,
    config: PosetRunConfig,
}

impl PosetConstruction {
    pub fn new(adversaries: Vec<PosetAdversary>, config: PosetRunConfig) -> Self {
        let mut trace = Trace::new(
            Record::new()
                .with("engine", "poset-diag")
                .with("horizon", config.horizon)
                .with("adversaries", adversaries.len())
                .with("fuel", config.fuel)
                .with("budget", config.node_budget),
        );
        let requirements = adversaries
            .iter()
            .enumerate()
            .map(|(index, a)| {
                trace.push(
                    Record::new()
                        .with("stage", 0)
                        .with("kind", "adversary")
                        .with("adv", index)
                        .with("name", a.name()),
                );
                Requirement {
                    index,
                    name: a.name(),
                    last: None,
                    first_definitive: None,
                    blocked: None,
                    meter: Meter::default(),
                }
            })
            .collect();
        let tree = FinitePosetTree::singleton(0);
        trace.push(state_record(0, &tree, &BTreeSet::new()));
        PosetConstruction {
            prev_even: tree.clone(),
            tree,
            blocked: BTreeSet::new(),
            stage: 0,
            requirements,
            trace,
            adversaries,
            config,
        }
    }

    /// Runs the next stage.
    pub fn step(&mut self) -> Result<()> {
        let s = self.stage + 1;
        if s % 2 == 1 {
            self.expansionary(s)?;
        } else {
            for i in 0..self.adversaries.len().min(s as usize + 1) {
                self.strategy(s, i)?;
            }
            self.prev_even = self.tree.clone();
        }
        self.stage = s;
        self.trace.push(state_record(s, &self.tree, &self.blocked));
        Ok(())
    }

    fn expansionary(&mut self, s: u64) -> Result<()> {
        let mut grown = self.tree.clone();
        let added = expand(&mut grown, &self.blocked)?;
        if grown.len() > self.config.node_budget {
            return Err(Error::BudgetExceeded {
                budget: self.config.node_budget,
            });
        }
        self.tree = grown;
        for a in &added {
            self.trace.push(a.record(s));
        }
        Ok(())
    }

    /// Strategy `i` at the even stage `s`.
    pub fn strategy(&mut self, s: u64, i: usize) -> Result<()> {
        let level = i as u32 + 1;
        let size = s.max(self.tree.len() as u64 + 1) as usize;
        let prev = s.saturating_sub(2).max(self.prev_even.len() as u64 + 1) as usize;
        let budget = self.config.fuel.budget(s);
        let mut meter = Meter::default();
        let approx = poset_approximation(&self.adversaries[i], size, budget, &mut meter)?;
        self.requirements[i].meter.absorb(&meter);

        let mut rec = Record::new()
            .with("stage", s)
            .with("kind", "strat")
            .with("adv", i)
            .with("size", size)
            .with("prev", prev);
        let Assessment {
            verdict,
            violation,
            found,
        } = self.readiness(s, i, level, &approx, prev);
        if let Some(v) = violation.filter(is_definitive) {
            self.requirements[i].first_definitive.get_or_insert((s, v));
        }
        rec.push("verdict", verdict.tag());
        match &verdict {
            Readiness::NotTree(v) => rec.push("clause", v.clause.replace(' ', "-")),
            Readiness::Fuel { x, y } => rec.push("cell", format_args!("{x},{y}")),
            _ => {}
        }

        let level_nodes = self.tree.level_nodes(level);
        if verdict != Readiness::Ready {
            let drop: Vec<NodeId> = level_nodes.iter().copied().filter(|x| self.blocked.contains(x)).collect();
            for x in &drop {
                self.blocked.remove(x);
            }
            if !drop.is_empty() {
                self.requirements[i].blocked = None;
            }
            rec.push("move", if drop.is_empty() { "none" } else { "withdraw" });
            rec.push("nodes", list(&drop));
        } else if let Some(&x) = level_nodes.iter().find(|x| self.blocked.contains(x)) {
            let (p_tree, f) = found.expect("ready verdicts carry the isomorphism");
            let image = f[&x];
            let p_size = p_tree.subtree_size(image);
            if let Some(b) = self.requirements[i].blocked.as_mut() {
                b.p_size = p_size;
            }
            rec.push("move", "hold");
            rec.push("node", x);
            rec.push("image", image);
            rec.push("t", self.tree.subtree_size(x));
            rec.push("p", p_size);
        } else {
            let (p_tree, f) = found.expect("ready verdicts carry the isomorphism");
            let pick = level_nodes.iter().find_map(|&x| {
                let image = f[&x];
                let (t, p) = (self.tree.subtree_size(x), p_tree.subtree_size(image));
                (p > t).then_some((x, image, t, p))
            });
            let Some((x, image, t_size, p_size)) = pick else {
                return Err(Error::InvariantBreach(format!(
                    "stage {s}, adversary {i}: ready with {} > {} elements but no level-{level} surplus",
                    size,
                    self.tree.len()
                )));
            };
            self.blocked.insert(x);
            self.requirements[i].blocked = Some(BlockRecord {
                node: x,
                since: s,
                t_size,
                image,
                p_size,
            });
            rec.push("move", "block");
            rec.push("node", x);
            rec.push("image", image);
            rec.push("t", t_size);
            rec.push("p", p_size);
        }
        self.requirements[i].last = Some((s, verdict));
        self.trace.push(rec);
        Ok(())
    }


    /// Conditions (1)-(5), tested in order. The approximation is checked for
    /// tree-ness even when condition (1) already fails, so that a definitive
    /// violation is noticed at the first stage it is visible.
    fn readiness(&self, s: u64, i: usize, level: u32, approx: &ApproxOutcome, prev: usize) -> Assessment {
        let stale = (i as u64) + 2 > s;
        let p = match approx {
            ApproxOutcome::NotTotal { x, y } => return Assessment::not(Readiness::Fuel { x: *x, y: *y }),
            ApproxOutcome::Tree(p) => p,
            ApproxOutcome::NotTree(v) => {
                let verdict = if stale { Readiness::Stale } else { Readiness::NotTree(v.clone()) };
                return Assessment {
                    verdict,
                    violation: Some(v.clone()),
                    found: None,
                };
            }
        };
        if stale {
            return Assessment::not(Readiness::Stale);
        }
        let Some(t_frag) = level_subtree(&self.tree, level) else {
            return Assessment::not(Readiness::TreeLevelAbsent);
        };
        let Some(p_frag) = level_subtree(&p, level) else {
            return Assessment::not(Readiness::AdversaryLevelAbsent);
        };
        let p_prev = induced_order(p, |x| (x as usize) < prev, |x| x).ok();
        let p_prev_frag = p_prev.as_ref().and_then(|t| level_subtree(t, level));
        let t_prev_frag = level_subtree(&self.prev_even, level);
        if p_prev_frag.as_ref() != Some(&p_frag) || t_prev_frag.as_ref() != Some(&t_frag) {
            return Assessment::not(Readiness::Unstable);
        }
        match poset_iso_canonical(&t_frag, &p_frag) {
            Some(f) => Assessment {
                verdict: Readiness::Ready,
                violation: None,
                found: Some((p.clone(), f)),
            },
            None => Assessment::not(Readiness::Mismatch),
        }
    }

    /// Runs stages `1..=horizon`.
    pub fn run(&mut self) -> Result<()> {
        while self.stage < self.config.horizon {
            self.step()?;
        }
        Ok(())
    }

    pub fn config(&self) -> &PosetRunConfig {
        &self.config
    }

    /// What the finished run shows about adversary `i`.
    pub fn certificate(&self, i: usize) -> Certificate {
        let req = &self.requirements[i];
        let level = i as u32 + 1;
        if let Some((stage, v)) = &req.first_definitive {
            return Certificate::NotPosetTree {
                stage: *stage,
                clause: v.clause.to_string(),
            };
        }
        let Some((stage, last)) = &req.last else {
            return Certificate::Undecided {
                reason: "never-considered".into(),
            };
        };
        match last {
            Readiness::Fuel { .. } => Certificate::Disqualified {
                stage: *stage,
                reason: "fuel".into(),
            },
            Readiness::AdversaryLevelAbsent => Certificate::LevelAbsent { level },
            Readiness::Mismatch => Certificate::FragmentMismatch { level },
            Readiness::Ready => match &req.blocked {
                Some(b) if self.blocked.contains(&b.node) && b.p_size > self.tree.subtree_size(b.node) => {
                    Certificate::BlockedDeficit(b.clone())
                }
                _ => Certificate::Undecided {
                    reason: "no-deficit".into(),
                },
            },
            other => Certificate::Undecided {
                reason: other.tag().into(),
            },
        }
    }

    pub fn certificates(&self) -> Vec<Certificate> {
        (0..self.requirements.len()).map(|i| self.certificate(i)).collect()
    }

    /// The trace with one certificate record per adversary appended.
    pub fn finish(mut self) -> (Trace, PosetOutcome) {
        let certificates = self.certificates();
        for (i, c) in certificates.iter().enumerate() {
            let mut r = Record::new().with("stage", self.stage).with("kind", "cert").with("adv", i);
            c.push_fields(&mut r);
            self.trace.push(r);
        }
        let outcome = PosetOutcome {
            tree: self.tree,
            blocked: self.blocked,
            stage: self.stage,
            certificates,
            meters: self.requirements.iter().map(|r| r.meter).collect(),
        };
        (self.trace, outcome)
    }
}

struct Assessment {
    verdict: Readiness,
    violation: Option<Violation>,
    found: Option<(FinitePosetTree, Witness)>,
}

impl Assessment {
    fn not(verdict: Readiness) -> Self {
        Assessment {
            verdict,
            violation: None,
            found: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PosetOutcome {
    pub tree: FinitePosetTree,
    pub blocked: BTreeSet<NodeId>,
    pub stage: u64,
    pub certificates: Vec<Certificate>,
    pub meters: Vec<Meter>,
}

pub fn state_record(stage: u64, tree: &FinitePosetTree, blocked: &BTreeSet<NodeId>) -> Record {
    Record::new()
        .with("stage", stage)
        .with("kind", "state")
        .with("nodes", tree.len())
        .with("blocked", list(blocked))
}

/// Runs the whole construction against `adversaries`.
pub fn run_construction(adversaries: Vec<PosetAdversary>, config: PosetRunConfig) -> Result<(Trace, PosetOutcome)> {
    if config.horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let mut c = PosetConstruction::new(adversaries, config);
    c.run()?;
    Ok(c.finish())
}
