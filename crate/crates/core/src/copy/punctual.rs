//! Punctual copies of r.p.o. trees of finite depth, on the natural numbers.
//!
//! Both cases emit one fresh element `d_s` at the end of every stage so that
//! the copy grows punctually whatever the oracle does:
//!
//! * Case A (`a` has infinitely many children with children of their own):
//!   `d_s` starts isolated, as an intended grandchild of `a`, and is hung
//!   below a fresh child `e_i` once the oracle shows an uncopied child and
//!   grandchild of `a`; the rest of `T` is then copied in one go.
//! * Case B (only finitely many children of `a` have children, and the
//!   interval `(u0; u1)` of leaves below `a` is infinite): `d_s` is a leaf of
//!   `a` inside that interval, placed by a punctual copy `L` of the interval's
//!   order; every other node is copied as soon as it appears.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::oracle::{Reveal, RpoOracle, TreeSource};
use crate::error::{Error, Result};
use crate::structures::{isomorphic, NodeId, RpoTree, Structure};
use crate::trace::{Record, Trace};

/// Stages granted to the oracle to produce the distinguished nodes.
pub const PRELOAD_STAGES: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseData {
    A { a: NodeId },
    B { a: NodeId, u0: NodeId, u1: NodeId },
}

impl CaseData {
    pub fn tag(self) -> &'static str {
        match self {
            CaseData::A { .. } => "A",
            CaseData::B { .. } => "B",
        }
    }

    pub fn a(self) -> NodeId {
        match self {
            CaseData::A { a } | CaseData::B { a, .. } => a,
        }
    }

    fn nodes(self) -> Vec<NodeId> {
        match self {
            CaseData::A { a } => vec![a],
            CaseData::B { a, u0, u1 } => vec![a, u0, u1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PunctualConfig {
    pub horizon: u64,
    pub l: u64,
    pub fuel: u64,
    pub case: CaseData,
}

/// The punctual linear order copying `(u0; u1)`: element `s` is `d_s`.
/// Matched elements copy a revealed leaf and form an initial segment;
/// unmatched ones wait at the right end, in creation order, for leaves that
/// exceed every leaf seen so far.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntervalOrder {
    /// Elements in `L`-order.
    order: Vec<usize>,
    leaf: BTreeMap<usize, NodeId>,
}

impl IntervalOrder {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn leaf(&self, e: usize) -> Option<NodeId> {
        self.leaf.get(&e).copied()
    }

    pub fn matched(&self) -> usize {
        self.leaf.len()
    }

    /// `i <_L j`.
    pub fn less(&self, i: usize, j: usize) -> bool {
        let pos = |e| self.order.iter().position(|&x| x == e);
        matches!((pos(i), pos(j)), (Some(a), Some(b)) if a < b)
    }

    /// The least waiting element, if any.
    fn first_waiting(&self) -> Option<usize> {
        self.order.get(self.leaf.len()).copied()
    }
}

pub struct PunctualCopier {
    oracle: RpoOracle,
    config: PunctualConfig,
    pub stage: u64,
    /// `R_s`, except the Case A elements not yet connected.
    r: RpoTree,
    next: NodeId,
    /// Copied nodes of `T` and their images.
    theta: BTreeMap<NodeId, NodeId>,
    psi: BTreeMap<NodeId, NodeId>,
    ds: Vec<NodeId>,
    isolated: BTreeSet<NodeId>,
    lin: IntervalOrder,
    leaves: VecDeque<NodeId>,
    max_leaf: Option<NodeId>,
    pub full_stages: Vec<u64>,
    trace: Trace,
}

fn inconsistent(msg: impl fmt::Display) -> Error {
    Error::Config(format!("case data inconsistent with the oracle: {msg}"))
}

impl PunctualCopier {
    pub fn new(source: TreeSource, config: PunctualConfig) -> Result<Self> {
        let mut oracle = RpoOracle::new(source, config.l, config.fuel);
        let mut header = Record::new()
            .with("engine", "rpo-punctual")
            .with("oracle", oracle.name())
            .with("case", config.case.tag())
            .with("a", config.case.a());
        if let CaseData::B { u0, u1, .. } = config.case {
            header = header.with("u0", u0).with("u1", u1);
        }
        let mut trace = Trace::new(header.with("l", config.l).with("horizon", config.horizon));
        let pre = oracle.preload(&config.case.nodes(), PRELOAD_STAGES).map_err(|e| inconsistent(e))?;
        for Reveal { node, parent, index } in pre {
            trace.push(fact(0, node, parent, index));
        }
        let root = oracle.tree().root();
        let mut c = PunctualCopier {
            oracle,
            config,
            stage: 0,
            r: RpoTree::singleton(0),
            next: 1,
            theta: [(root, 0)].into_iter().collect(),
            psi: [(0, root)].into_iter().collect(),
            ds: Vec::new(),
            isolated: BTreeSet::new(),
            lin: IntervalOrder::default(),
            leaves: VecDeque::new(),
            max_leaf: None,
            full_stages: Vec::new(),
            trace,
        };
        c.trace.push(copy_record(0, root, 0, None, 0));
        if let CaseData::B { a, u0, u1 } = config.case {
            let t = c.oracle.tree();
            if t.parent(u0) != Some(a) || t.parent(u1) != Some(a) || !t.less(u0, u1) {
                return Err(inconsistent(format!("need {u0} < {u1}, both children of {a}")));
            }
        }
        // R_0 copies T_0, leaving interval leaves to L
        let t = c.oracle.tree();
        let mut todo: Vec<NodeId> = t.nodes().filter(|&x| x != root).collect();
        todo.sort_by_key(|&x| (t.depth(x), x));
        for x in todo {
            if c.in_interval(x) {
                c.note_leaf(x);
            } else {
                c.copy_node(x)?;
            }
        }
        c.end_stage()?;
        Ok(c)
    }

    pub fn target(&self) -> &RpoTree {
        self.oracle.tree()
    }

    /// The connected part of `R_s`.
    pub fn image(&self) -> &RpoTree {
        &self.r
    }

    pub fn d(&self, s: usize) -> Option<NodeId> {
        self.ds.get(s).copied()
    }

    pub fn is_connected(&self, d: NodeId) -> bool {
        self.r.contains(d)
    }

    pub fn interval_order(&self) -> &IntervalOrder {
        &self.lin
    }

    pub fn psi(&self, y: NodeId) -> Option<NodeId> {
        self.psi.get(&y).copied()
    }

    /// Least number not yet in `R`: the domain is always an initial segment.
    pub fn size(&self) -> NodeId {
        self.next
    }

    fn in_interval(&self, x: NodeId) -> bool {
        match self.config.case {
            CaseData::B { a, u0, u1 } => {
                let t = self.oracle.tree();
                t.parent(x) == Some(a) && t.less(u0, x) && t.less(x, u1)
            }
            CaseData::A { .. } => false,
        }
    }

    fn fresh(&mut self) -> NodeId {
        let x = self.next;
        self.next += 1;
        x
    }

    /// `y <_T v` for an R-sibling `y` of the image of `v`; elements of the
    /// interval copy lie exactly between the images of `u0` and `u1`.
    fn before(&self, y: NodeId, v: NodeId) -> bool {
        let t = self.oracle.tree();
        match self.psi.get(&y) {
            Some(&ty) if !self.lin_element(y) => t.less(ty, v),
            _ => match self.config.case {
                CaseData::B { u0, .. } => t.less(u0, v),
                CaseData::A { .. } => unreachable!("Case A images are all copied nodes"),
            },
        }
    }

    fn lin_element(&self, y: NodeId) -> bool {
        matches!(self.config.case, CaseData::B { .. }) && self.ds.binary_search(&y).is_ok()
    }

    /// Copies `x` (whose parent is copied) to the least unused number.
    fn copy_node(&mut self, x: NodeId) -> Result<NodeId> {
        let p = self.oracle.tree().parent(x).expect("non-root");
        if let CaseData::B { a, .. } = self.config.case {
            let interval_parent =
                self.psi.iter().any(|(&y, &v)| v == p && self.lin_element(y)) || self.leaves.contains(&p);
            if interval_parent {
                return Err(inconsistent(format!("interval leaf {p} of {a} has a child {x}")));
            }
        }
        let rp = *self.theta.get(&p).ok_or_else(|| Error::MissingNode(p))?;
        let index = self.r.children(rp).iter().filter(|&&y| self.before(y, x)).count();
        let y = self.fresh();
        self.r.insert_child(rp, y, index)?;
        self.theta.insert(x, y);
        self.psi.insert(y, x);
        self.trace.push(copy_record(self.stage, x, y, Some(rp), index));
        Ok(y)
    }

    fn note_leaf(&mut self, v: NodeId) {
        let t = self.oracle.tree();
        let new_max = self.max_leaf.is_none_or(|m| t.less(m, v));
        if new_max {
            self.max_leaf = Some(v);
        }
        match self.lin.first_waiting() {
            Some(e) if new_max => {
                self.lin.leaf.insert(e, v);
                self.psi.insert(self.ds[e], v);
                let stage = self.stage;
                self.trace.push(
                    Record::new()
                        .with("stage", stage)
                        .with("event", "match")
                        .with("d", self.ds[e])
                        .with("leaf", v),
                );
            }
            _ => self.leaves.push_back(v),
        }
    }

    pub fn step(&mut self) -> Result<()> {
        self.stage += 1;
        let s = self.stage;
        let reveal = self.oracle.stage()?;
        if let Some(Reveal { node, parent, index }) = reveal {
            self.trace.push(fact(s, node, parent, index));
            if let CaseData::B { .. } = self.config.case {
                if self.in_interval(node) {
                    self.note_leaf(node);
                } else {
                    self.copy_node(node)?;
                }
            }
        }
        if let CaseData::A { a } = self.config.case {
            self.connect(a)?;
        }
        self.end_stage()
    }

    /// Case A: hang the least unconnected `d_i` below a fresh `e_i` when an
    /// uncopied child `y` and grandchild `z` of `a` are visible, then copy
    /// the rest of `T_{s+1}`.
    fn connect(&mut self, a: NodeId) -> Result<()> {
        let t = self.oracle.tree();
        let Some(&di) = self.isolated.first() else {
            return Ok(());
        };
        let pair = t
            .children(a)
            .iter()
            .filter(|y| !self.theta.contains_key(y))
            .find_map(|&y| t.children(y).iter().find(|z| !self.theta.contains_key(z)).map(|&z| (y, z)));
        let Some((y, z)) = pair else {
            return Ok(());
        };
        let ra = self.theta[&a];
        let index = self.r.children(ra).iter().filter(|&&w| self.before(w, y)).count();
        let e = self.fresh();
        self.r.insert_child(ra, e, index)?;
        self.r.insert_child(e, di, 0)?;
        self.isolated.remove(&di);
        for (rx, tx) in [(e, y), (di, z)] {
            self.theta.insert(tx, rx);
            self.psi.insert(rx, tx);
        }
        let stage = self.stage;
        self.trace.push(
            Record::new()
                .with("stage", stage)
                .with("event", "connect")
                .with("d", di)
                .with("e", e)
                .with("y", y)
                .with("z", z)
                .with("index", index),
        );
        let t = self.oracle.tree();
        let mut todo: Vec<NodeId> = t.nodes().filter(|x| !self.theta.contains_key(x)).collect();
        todo.sort_by_key(|&x| (t.depth(x), x));
        for x in todo {
            self.copy_node(x)?;
        }
        Ok(())
    }

    fn end_stage(&mut self) -> Result<()> {
        let d = self.fresh();
        let s = self.ds.len();
        self.ds.push(d);
        let stage = self.stage;
        let mut rec = Record::new().with("stage", stage).with("event", "emit").with("d", d);
        match self.config.case {
            CaseData::A { .. } => {
                self.isolated.insert(d);
            }
            CaseData::B { a, u0, .. } => {
                let leaf = self.leaves.pop_front();
                let t = self.oracle.tree();
                let pos = match leaf {
                    Some(v) => self.lin.order[..self.lin.matched()]
                        .iter()
                        .filter(|&&e| t.less(self.lin.leaf[&e], v))
                        .count(),
                    None => self.lin.len(),
                };
                self.lin.order.insert(pos, s);
                if let Some(v) = leaf {
                    self.lin.leaf.insert(s, v);
                    self.psi.insert(d, v);
                }
                let (ra, ru0) = (self.theta[&a], self.theta[&u0]);
                let base = self.r.children(ra).iter().position(|&y| y == ru0).expect("u0 is copied") + 1;
                self.r.insert_child(ra, d, base + pos)?;
                rec = rec
                    .with("order", pos)
                    .with("index", base + pos)
                    .with("leaf", leaf.map_or("-".to_string(), |v| v.to_string()));
            }
        }
        self.trace.push(rec);
        self.check()
    }

    /// The copied part of `R_s` against `T_s` restricted to what it copies,
    /// and a full comparison when nothing is left uncopied.
    fn check(&mut self) -> Result<()> {
        let (dom, img) = self.fragments();
        if isomorphic(&Structure::Rpo(dom.clone()), &Structure::Rpo(img))?.is_none() {
            return Err(Error::InvariantBreach(format!("stage {}: the copy is not an embedding", self.stage)));
        }
        let full = dom.len() == self.oracle.tree().len();
        if full {
            self.full_stages.push(self.stage);
        }
        let stage = self.stage;
        let (tn, rn) = (self.oracle.tree().len(), self.next);
        self.trace.push(
            Record::new()
                .with("stage", stage)
                .with("event", "check")
                .with("tnodes", tn)
                .with("rnodes", rn)
                .with("full", if full { "yes" } else { "no" }),
        );
        Ok(())
    }

    /// `(T_s restricted to range(psi), R_s restricted to dom(psi))`.
    pub fn fragments(&self) -> (RpoTree, RpoTree) {
        let covered: BTreeSet<NodeId> = self.psi.values().copied().collect();
        let dom = self.oracle.tree().restrict(|x| covered.contains(&x));
        let img = self.r.restrict(|y| self.psi.contains_key(&y));
        (dom, img)
    }

    pub fn run_to(&mut self, stage: u64) -> Result<()> {
        while self.stage < stage {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }
}

fn fact(stage: u64, node: NodeId, parent: NodeId, index: usize) -> Record {
    Record::new()
        .with("stage", stage)
        .with("event", "fact")
        .with("node", node)
        .with("parent", parent)
        .with("index", index)
}

fn copy_record(stage: u64, node: NodeId, number: NodeId, parent: Option<NodeId>, index: usize) -> Record {
    Record::new()
        .with("stage", stage)
        .with("event", "copy")
        .with("node", node)
        .with("number", number)
        .with("parent", parent.map_or("-".to_string(), |p| p.to_string()))
        .with("index", index)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunctualOutcome {
    pub stages: u64,
    pub target_nodes: usize,
    pub image_nodes: usize,
    /// `d`s copying a node of `T`: connected in Case A, matched in Case B.
    pub connected: usize,
    pub emitted: usize,
    pub full_stages: Vec<u64>,
    /// Whether the copied fragment at the horizon has an isomorphism witness
    /// onto `T_s` in full.
    pub horizon_iso: bool,
}

pub fn run_punctual(source: TreeSource, config: PunctualConfig) -> Result<(Trace, PunctualOutcome)> {
    if config.horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let mut c = PunctualCopier::new(source, config)?;
    c.run_to(config.horizon)?;
    let (dom, img) = c.fragments();
    let horizon_iso = dom.len() == c.target().len()
        && isomorphic(&Structure::Rpo(c.target().clone()), &Structure::Rpo(img))?.is_some();
    let out = PunctualOutcome {
        stages: c.stage,
        target_nodes: c.target().len(),
        image_nodes: c.size() as usize,
        connected: c.ds.iter().filter(|&&d| c.psi.contains_key(&d)).count(),
        emitted: c.ds.len(),
        full_stages: c.full_stages.clone(),
        horizon_iso,
    };
    Ok((c.into_trace(), out))
}

// ---------------------------------------------------------------- verification

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PunctualReport {
    pub stages: u64,
    pub case: &'static str,
    pub emitted: usize,
    /// As in [`PunctualOutcome::connected`].
    pub connected: usize,
    pub full_stages: usize,
}

fn breach(line: usize, msg: impl fmt::Display) -> Error {
    Error::InvariantBreach(format!("line {line}: {msg}"))
}

/// Replays an `rpo-punctual` trace: every new element is the least unused
/// number, Case A copies only at connection stages, Case B keeps every `d_s`
/// a leaf of `a` strictly between the images of `u0` and `u1` in `L`-order,
/// and at every stage the copied part of `R` is isomorphic to the part of
/// `T` it copies.
pub fn verify_punctual(trace: &Trace) -> Result<PunctualReport> {
    let h = trace.header().expect("parsed traces have a header");
    if trace.engine() != Some("rpo-punctual") {
        return Err(Error::Precondition("not an rpo-punctual trace".into()));
    }
    let horizon: u64 = h.num("horizon", 1)?;
    let a: NodeId = h.num("a", 1)?;
    let case = match h.req("case", 1)? {
        "A" => CaseData::A { a },
        "B" => CaseData::B {
            a,
            u0: h.num("u0", 1)?,
            u1: h.num("u1", 1)?,
        },
        other => return Err(Error::Parse { line: 1, msg: format!("unknown case {other:?}") }),
    };
    let mut t: Option<RpoTree> = None;
    let mut r: Option<RpoTree> = None;
    let mut theta: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut psi: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut isolated: BTreeSet<NodeId> = BTreeSet::new();
    // Case B: L as a list of d's, and the d's still waiting for a leaf
    let mut lin: Vec<NodeId> = Vec::new();
    let mut waiting: BTreeSet<NodeId> = BTreeSet::new();
    let mut next: NodeId = 0;
    let mut stage = 0u64;
    let mut connected_now = false;
    let mut ds: Vec<NodeId> = Vec::new();
    let mut full_stages = 0;

    for (line, rec) in trace.numbered() {
        let s: u64 = rec.num("stage", line)?;
        if s < stage || s > stage + 1 {
            return Err(breach(line, format!("stage {s} out of order")));
        }
        if s > stage {
            stage = s;
            connected_now = false;
        }
        let mut take = |n: NodeId, line: usize| -> Result<()> {
            if n != next {
                return Err(breach(line, format!("{n} is not the least unused number {next}")));
            }
            next += 1;
            Ok(())
        };
        match rec.req("event", line)? {
            "fact" => {
                let (x, p, i): (NodeId, NodeId, usize) = (rec.num("node", line)?, rec.num("parent", line)?, rec.num("index", line)?);
                let tree = t.get_or_insert_with(|| RpoTree::singleton(p));
                tree.insert_child(p, x, i).map_err(|e| breach(line, e))?;
            }
            "copy" => {
                let (x, y): (NodeId, NodeId) = (rec.num("node", line)?, rec.num("number", line)?);
                take(y, line)?;
                if rec.is("parent", "-") {
                    if r.is_some() {
                        return Err(breach(line, "only the root is copied without a parent"));
                    }
                    r = Some(RpoTree::singleton(y));
                    t.get_or_insert_with(|| RpoTree::singleton(x));
                } else {
                    if matches!(case, CaseData::A { .. }) && stage > 0 && !connected_now {
                        return Err(breach(line, "Case A copies nodes only at connection stages"));
                    }
                    let tree = t.as_ref().ok_or_else(|| breach(line, "copy before any fact"))?;
                    let p = tree.parent(x).ok_or_else(|| breach(line, format!("node {x} unknown")))?;
                    let rp: NodeId = rec.num("parent", line)?;
                    if theta.get(&p) != Some(&rp) || theta.contains_key(&x) {
                        return Err(breach(line, "copy does not follow the parent's image"));
                    }
                    let rt = r.as_mut().ok_or_else(|| breach(line, "copy before the root"))?;
                    rt.insert_child(rp, y, rec.num("index", line)?).map_err(|e| breach(line, e))?;
                }
                theta.insert(x, y);
                psi.insert(y, x);
            }
            "connect" => {
                let (d, e, y, z): (NodeId, NodeId, NodeId, NodeId) =
                    (rec.num("d", line)?, rec.num("e", line)?, rec.num("y", line)?, rec.num("z", line)?);
                take(e, line)?;
                let tree = t.as_ref().ok_or_else(|| breach(line, "connect before any fact"))?;
                if isolated.first() != Some(&d) {
                    return Err(breach(line, "not the least unconnected d"));
                }
                if tree.parent(y) != Some(case.a()) || tree.parent(z) != Some(y) || theta.contains_key(&y) || theta.contains_key(&z) {
                    return Err(breach(line, "y, z are not an uncopied child and grandchild of a"));
                }
                let rt = r.as_mut().ok_or_else(|| breach(line, "connect before the root"))?;
                rt.insert_child(theta[&case.a()], e, rec.num("index", line)?).map_err(|er| breach(line, er))?;
                rt.insert_child(e, d, 0).map_err(|er| breach(line, er))?;
                isolated.remove(&d);
                for (rx, tx) in [(e, y), (d, z)] {
                    theta.insert(tx, rx);
                    psi.insert(rx, tx);
                }
                connected_now = true;
            }
            "emit" => {
                let d: NodeId = rec.num("d", line)?;
                take(d, line)?;
                ds.push(d);
                match case {
                    CaseData::A { .. } => {
                        isolated.insert(d);
                    }
                    CaseData::B { a, u0, u1 } => {
                        let pos: usize = rec.num("order", line)?;
                        let index: usize = rec.num("index", line)?;
                        let rt = r.as_mut().ok_or_else(|| breach(line, "emit before the root"))?;
                        let ra = theta[&a];
                        rt.insert_child(ra, d, index).map_err(|e| breach(line, e))?;
                        let kids = rt.children(ra);
                        let at = |n: NodeId| kids.iter().position(|&k| k == n);
                        if !(at(theta[&u0]) < Some(index) && Some(index) < at(theta[&u1])) {
                            return Err(breach(line, "d must lie between the images of u0 and u1"));
                        }
                        if pos > lin.len() {
                            return Err(breach(line, "position outside L"));
                        }
                        lin.insert(pos, d);
                        let between: Vec<NodeId> =
                            kids.iter().copied().filter(|k| lin.contains(k)).collect();
                        if between != lin {
                            return Err(breach(line, "the order of the d's differs from L"));
                        }
                        match rec.req("leaf", line)? {
                            "-" => {
                                waiting.insert(d);
                            }
                            v => {
                                let v: NodeId = v.parse().map_err(|_| breach(line, "bad leaf"))?;
                                psi.insert(d, v);
                            }
                        }
                    }
                }
            }
            "match" => {
                let (d, v): (NodeId, NodeId) = (rec.num("d", line)?, rec.num("leaf", line)?);
                if waiting.first() != Some(&d) {
                    return Err(breach(line, "only the least waiting element is matched"));
                }
                waiting.remove(&d);
                psi.insert(d, v);
            }
            "check" => {
                let tree = t.as_ref().ok_or_else(|| breach(line, "check before any fact"))?;
                let rt = r.as_ref().ok_or_else(|| breach(line, "check before the root"))?;
                let covered: BTreeSet<NodeId> = psi.values().copied().collect();
                if covered.len() != psi.len() {
                    return Err(breach(line, "two elements copy the same node"));
                }
                let dom = tree.restrict(|x| covered.contains(&x));
                let img = rt.restrict(|y| psi.contains_key(&y));
                if img.len() != psi.len() || dom.len() != covered.len() {
                    return Err(breach(line, "the copied parts are not closed under parents"));
                }
                if isomorphic(&Structure::Rpo(dom), &Structure::Rpo(img))?.is_none() {
                    return Err(breach(line, "the copy is not an embedding"));
                }
                let full = covered.len() == tree.len();
                if rec.is("full", "yes") != full {
                    return Err(breach(line, "full-copy claim does not hold"));
                }
                full_stages += full as usize;
            }
            other => return Err(breach(line, format!("unknown event {other:?}"))),
        }
    }
    if stage != horizon {
        return Err(Error::InvariantBreach(format!("trace ends at stage {stage}, horizon is {horizon}")));
    }
    Ok(PunctualReport {
        stages: stage,
        case: case.tag(),
        emitted: ds.len(),
        connected: ds.iter().filter(|d| psi.contains_key(d)).count(),
        full_stages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copy::oracle::{TreeFixture, DEFAULT_ORACLE_FUEL};

    fn config(case: CaseData, horizon: u64) -> PunctualConfig {
        PunctualConfig {
            horizon,
            l: 4,
            fuel: DEFAULT_ORACLE_FUEL,
            case,
        }
    }

    fn copier(f: TreeFixture, case: CaseData, horizon: u64) -> PunctualCopier {
        let mut c = PunctualCopier::new(TreeSource::Native(f), config(case, horizon)).unwrap();
        c.run_to(horizon).unwrap();
        c
    }

    #[test]
    fn case_a_connects_every_d_in_turn() {
        let c = copier(TreeFixture::StarOfPaths, CaseData::A { a: 0 }, 80);
        let connected: Vec<usize> = (0..c.ds.len()).filter(|&i| c.is_connected(c.d(i).unwrap())).collect();
        // connections happen in index order and keep pace with the oracle
        assert_eq!(connected, (0..connected.len()).collect::<Vec<_>>());
        assert!(connected.len() >= 20, "{}", connected.len());
        assert_eq!(c.size() as usize, c.image().len() + c.isolated.len());
        let (dom, img) = c.fragments();
        assert!(isomorphic(&Structure::Rpo(dom), &Structure::Rpo(img)).unwrap().is_some());
        assert!(c.full_stages.len() >= 10);
    }

    #[test]
    fn case_a_idle_stage_adds_only_an_isolated_d() {
        let mut c = PunctualCopier::new(TreeSource::Native(TreeFixture::StarOfPaths), config(CaseData::A { a: 0 }, 5)).unwrap();
        c.step().unwrap();
        // node 1 (a child of a) has no child yet
        assert_eq!(c.target().len(), 2);
        assert_eq!(c.image().len(), 1);
        assert_eq!(c.isolated.iter().copied().collect::<Vec<_>>(), vec![1, 2]);
        c.step().unwrap();
        // node 2 below 1: d_0 = 1 now hangs below a fresh e_0 = 3
        assert_eq!(c.image().children(0), &[3]);
        assert_eq!(c.image().children(3), &[1]);
        assert_eq!(c.psi(1), Some(2));
    }

    #[test]
    fn case_b_follows_the_interval_order() {
        let case = CaseData::B { a: 0, u0: 1, u1: 2 };
        for f in [TreeFixture::IntervalOmega, TreeFixture::IntervalZigzag] {
            let c = copier(f, case, 80);
            let lin = c.interval_order();
            let ds: Vec<usize> = lin.order().to_vec();
            // d_i < d_j in R iff i <_L j
            for &i in &ds {
                for &j in &ds {
                    assert_eq!(c.image().less(c.d(i).unwrap(), c.d(j).unwrap()), lin.less(i, j));
                }
            }
            // L restricted to matched elements is the oracle's order on leaves
            let t = c.target();
            for &i in &ds[..lin.matched()] {
                for &j in &ds[..lin.matched()] {
                    assert_eq!(lin.less(i, j), t.less(lin.leaf(i).unwrap(), lin.leaf(j).unwrap()));
                }
            }
            assert!(lin.matched() >= 5);
            let (dom, img) = c.fragments();
            assert_eq!(dom.len(), t.len());
            assert!(isomorphic(&Structure::Rpo(t.clone()), &Structure::Rpo(img)).unwrap().is_some());
        }
    }

    #[test]
    fn inconsistent_case_data_is_reported() {
        let bad = PunctualCopier::new(TreeSource::Native(TreeFixture::IntervalOmega), config(CaseData::B { a: 0, u0: 3, u1: 2 }, 5));
        assert!(matches!(bad.err(), Some(Error::Config(_))));
        // in the star, the "interval" between 1 and 5 holds 3, which gets a child
        let mut c = PunctualCopier::new(TreeSource::Native(TreeFixture::StarOfPaths), config(CaseData::B { a: 0, u0: 1, u1: 5 }, 40));
        let res = match &mut c {
            Ok(c) => c.run_to(40),
            Err(_) => c.map(|_| ()),
        };
        assert!(matches!(res, Err(Error::Config(_))), "{res:?}");
    }

    #[test]
    fn runs_verify() {
        for (f, case) in [
            (TreeFixture::StarOfPaths, CaseData::A { a: 0 }),
            (TreeFixture::IntervalOmega, CaseData::B { a: 0, u0: 1, u1: 2 }),
            (TreeFixture::IntervalZigzag, CaseData::B { a: 0, u0: 1, u1: 2 }),
        ] {
            let (trace, out) = run_punctual(TreeSource::Native(f), config(case, 60)).unwrap();
            let rep = verify_punctual(&trace).unwrap();
            assert_eq!((rep.emitted, rep.connected), (out.emitted, out.connected));
            assert_eq!(rep.full_stages, out.full_stages.len());
            let text = trace.to_text();
            let bad = text.replacen("event=emit d=", "event=emit d=9", 1);
            assert!(verify_punctual(&Trace::parse(&bad).unwrap()).is_err());
        }
    }
}
