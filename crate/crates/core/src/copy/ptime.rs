//! A copy of an r.p.o. tree of unbounded depth on `{0,1}^{<ω}`, built so
//! that relations between strings are decided by running the construction
//! for as many stages as the longer string is long.
//!
//! Every stage ends by reserving the shortlex-least unused string as *short*.
//! Nodes of `T` are only copied when `T` shows a grandchild `c` of a copied
//! node `a` through an uncopied child `b`: then `c` takes the least reserved
//! string and everything else still uncopied takes fresh *long* strings, of
//! length at least the stage number. Every relation ever declared therefore
//! involves a string that was long when it was declared.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::binstring::BinString;
use super::oracle::{Reveal, RpoOracle, TreeSource, ROOT};
use super::profile::StepProfile;
use crate::error::{Error, Result};
use crate::structures::{isomorphic, NodeId, RpoTree, Structure};
use crate::trace::{Record, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Short,
    Long,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Short => "short",
            Label::Long => "long",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "short" => Some(Label::Short),
            "long" => Some(Label::Long),
            _ => None,
        }
    }
}

/// Where one string sits relative to another in `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// The first is a child of the second.
    Child,
    Parent,
    /// Siblings, first below second.
    Less,
    Greater,
    None,
}

impl Relation {
    pub fn name(self) -> &'static str {
        match self {
            Relation::Child => "child",
            Relation::Parent => "parent",
            Relation::Less => "less",
            Relation::Greater => "greater",
            Relation::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "child" => Relation::Child,
            "parent" => Relation::Parent,
            "less" => Relation::Less,
            "greater" => Relation::Greater,
            "none" => Relation::None,
            _ => return None,
        })
    }

    pub fn related(self) -> bool {
        self != Relation::None
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The relation between two strings in an r.p.o. tree over interned ids.
pub(crate) fn relation_in(r: &RpoTree, x: Option<NodeId>, y: Option<NodeId>) -> Relation {
    let (Some(x), Some(y)) = (x, y) else {
        return Relation::None;
    };
    if r.is_parent(x, y) {
        Relation::Child
    } else if r.is_parent(y, x) {
        Relation::Parent
    } else if r.less(x, y) {
        Relation::Less
    } else if r.less(y, x) {
        Relation::Greater
    } else {
        Relation::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PtimeConfig {
    pub horizon: u64,
    pub l: u64,
    pub fuel: u64,
    /// Run the isomorphism checks and emit trace records; replays for
    /// relation queries switch this off.
    pub checked: bool,
}

pub struct PtimeCopier {
    oracle: RpoOracle,
    config: PtimeConfig,
    pub stage: u64,
    phi: BTreeMap<NodeId, NodeId>,
    /// `R_s` over interned string ids.
    r: RpoTree,
    strings: Vec<BinString>,
    ids: HashMap<BinString, NodeId>,
    node_of: HashMap<NodeId, NodeId>,
    labels: HashMap<BinString, Label>,
    reservoir: BTreeSet<BinString>,
    /// Every string below the cursor has been placed or reserved.
    cursor: BinString,
    max_len: usize,
    /// Engine steps: oracle steps plus one per node scanned and one per bit
    /// written or examined.
    steps: u64,
    pub checkpoints: Vec<u64>,
    trace: Option<Trace>,
}

impl PtimeCopier {
    pub fn new(source: TreeSource, config: PtimeConfig) -> Self {
        let oracle = RpoOracle::new(source, config.l, config.fuel);
        let root = BinString::empty();
        let trace = config.checked.then(|| {
            Trace::new(
                Record::new()
                    .with("engine", "rpo-ptime")
                    .with("oracle", oracle.name())
                    .with("l", config.l)
                    .with("horizon", config.horizon),
            )
        });
        let mut c = PtimeCopier {
            oracle,
            config,
            stage: 0,
            phi: BTreeMap::new(),
            r: RpoTree::singleton(0),
            strings: vec![root.clone()],
            ids: [(root.clone(), 0)].into_iter().collect(),
            node_of: [(0, ROOT)].into_iter().collect(),
            labels: [(root.clone(), Label::Long)].into_iter().collect(),
            reservoir: BTreeSet::new(),
            cursor: root.clone(),
            max_len: 0,
            steps: 0,
            checkpoints: Vec::new(),
            trace,
        };
        c.phi.insert(ROOT, 0);
        c.emit(|| {
            Record::new()
                .with("stage", 0)
                .with("event", "place")
                .with("node", ROOT)
                .with("string", &root)
                .with("parent", "-")
                .with("index", 0)
                .with("label", "long")
        });
        c.reserve();
        c
    }

    fn emit(&mut self, r: impl FnOnce() -> Record) {
        if let Some(t) = self.trace.as_mut() {
            t.push(r());
        }
    }

    pub fn oracle(&self) -> &RpoOracle {
        &self.oracle
    }

    pub fn target(&self) -> &RpoTree {
        self.oracle.tree()
    }

    /// `R_s` with nodes numbered by [`Self::string`].
    pub fn image(&self) -> &RpoTree {
        &self.r
    }

    pub fn string(&self, id: NodeId) -> &BinString {
        &self.strings[id as usize]
    }

    pub fn phi(&self, x: NodeId) -> Option<&BinString> {
        self.phi.get(&x).map(|&i| self.string(i))
    }

    pub fn reservoir(&self) -> &BTreeSet<BinString> {
        &self.reservoir
    }

    pub fn label(&self, s: &BinString) -> Option<Label> {
        self.labels.get(s).copied()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn relation(&self, a: &BinString, b: &BinString) -> Relation {
        relation_in(&self.r, self.ids.get(a).copied(), self.ids.get(b).copied())
    }

    /// Strings placed in `R` or reserved in `A`.
    pub fn is_used(&self, s: &BinString) -> bool {
        self.labels.contains_key(s)
    }

    pub fn used(&self) -> impl Iterator<Item = &BinString> {
        self.labels.keys()
    }

    /// The least uncopied node whose parent is uncopied and whose grandparent
    /// is copied.
    fn trigger(&mut self) -> Option<(NodeId, NodeId, NodeId)> {
        let t = self.oracle.tree();
        let mut scanned = 0;
        let mut found = None;
        for x in t.nodes() {
            scanned += 1;
            if self.phi.contains_key(&x) {
                continue;
            }
            let b = t.parent(x).expect("only the root lacks a parent");
            if self.phi.contains_key(&b) {
                continue;
            }
            let a = t.parent(b).expect("b is not the root");
            if self.phi.contains_key(&a) {
                found = Some((a, b, x));
                break;
            }
        }
        self.steps += scanned;
        found
    }

    fn place(&mut self, x: NodeId, s: BinString, label: Label) -> Result<()> {
        let t = self.oracle.tree();
        let p = t.parent(x).expect("copied nodes below the root have parents");
        let pid = self.phi[&p];
        let index = self
            .r
            .children(pid)
            .iter()
            .filter(|&&y| {
                let ty = self.id_to_node(y);
                t.less(ty, x)
            })
            .count();
        let id = self.strings.len() as NodeId;
        self.r.insert_child(pid, id, index)?;
        self.steps += s.len() as u64 + 1;
        self.max_len = self.max_len.max(s.len());
        self.strings.push(s.clone());
        self.ids.insert(s.clone(), id);
        self.labels.insert(s.clone(), label);
        self.phi.insert(x, id);
        self.node_of.insert(id, x);
        let parent = self.strings[pid as usize].clone();
        let stage = self.stage;
        self.emit(|| {
            Record::new()
                .with("stage", stage)
                .with("event", "place")
                .with("node", x)
                .with("string", &s)
                .with("parent", &parent)
                .with("index", index)
                .with("label", label.name())
        });
        Ok(())
    }

    fn id_to_node(&self, id: NodeId) -> NodeId {
        self.node_of[&id]
    }

    pub fn step(&mut self) -> Result<()> {
        self.stage += 1;
        let s = self.stage;
        self.steps += 1;
        let before = self.oracle.steps();
        let reveal = self.oracle.stage()?;
        self.steps += self.oracle.steps() - before;
        if let Some(Reveal { node, parent, index }) = reveal {
            self.emit(|| {
                Record::new()
                    .with("stage", s)
                    .with("event", "fact")
                    .with("node", node)
                    .with("parent", parent)
                    .with("index", index)
            });
        }
        if let Some((a, b, c)) = self.trigger() {
            self.emit(|| {
                Record::new()
                    .with("stage", s)
                    .with("event", "trigger")
                    .with("a", a)
                    .with("b", b)
                    .with("c", c)
            });
            let beta = self
                .reservoir
                .pop_first()
                .ok_or_else(|| Error::InvariantBreach("reservoir empty at a trigger".into()))?;
            // parents before children, so every placement has its parent in R
            let t = self.oracle.tree();
            let mut todo: Vec<NodeId> = t.nodes().filter(|x| !self.phi.contains_key(x)).collect();
            todo.sort_by_key(|&x| (t.depth(x), x));
            let len = (s as usize).max(self.max_len + 1);
            let mut fresh = BinString::zeros(len);
            for x in todo {
                if x == c {
                    self.place(x, beta.clone(), Label::Short)?;
                } else {
                    while self.is_used(&fresh) {
                        self.steps += fresh.len() as u64;
                        fresh = fresh.next();
                    }
                    let f = fresh.clone();
                    fresh = fresh.next();
                    self.place(x, f, Label::Long)?;
                }
            }
        }
        self.reserve();
        if self.config.checked {
            self.check()?;
        }
        Ok(())
    }

    /// Ends a stage: the least unused string becomes short and joins `A`.
    fn reserve(&mut self) {
        while self.is_used(&self.cursor) {
            self.steps += self.cursor.len() as u64;
            self.cursor = self.cursor.next();
        }
        let alpha = self.cursor.clone();
        self.steps += alpha.len() as u64;
        self.labels.insert(alpha.clone(), Label::Short);
        self.reservoir.insert(alpha.clone());
        let s = self.stage;
        self.emit(|| Record::new().with("stage", s).with("event", "reserve").with("string", &alpha));
    }

    /// Copy soundness and, when every node is copied, a checkpoint.
    fn check(&mut self) -> Result<()> {
        let t = self.oracle.tree();
        let dom = t.restrict(|x| self.phi.contains_key(&x));
        if isomorphic(&Structure::Rpo(dom), &Structure::Rpo(self.r.clone()))?.is_none() {
            return Err(Error::InvariantBreach(format!("stage {}: the copy is not an embedding", self.stage)));
        }
        if self.reservoir.iter().any(|a| self.ids.contains_key(a)) {
            return Err(Error::InvariantBreach(format!("stage {}: a reserved string is in R", self.stage)));
        }
        let full = self.phi.len() == t.len();
        let iso = full && isomorphic(&Structure::Rpo(t.clone()), &Structure::Rpo(self.r.clone()))?.is_some();
        if iso {
            self.checkpoints.push(self.stage);
        }
        let (stage, tn, rn, an) = (self.stage, t.len(), self.r.len(), self.reservoir.len());
        self.emit(|| {
            Record::new()
                .with("stage", stage)
                .with("event", "check")
                .with("tnodes", tn)
                .with("rnodes", rn)
                .with("reservoir", an)
                .with("iso", if iso { "yes" } else { "no" })
        });
        Ok(())
    }

    pub fn run_to(&mut self, stage: u64) -> Result<()> {
        while self.stage < stage {
            self.step()?;
        }
        Ok(())
    }

    pub fn take_trace(&mut self) -> Option<Trace> {
        self.trace.take()
    }

    pub(crate) fn push_record(&mut self, r: Record) {
        self.emit(|| r);
    }
}

/// The answer to a relation query and what it cost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryOutcome {
    pub a: BinString,
    pub b: BinString,
    pub n: usize,
    pub relation: Relation,
    pub steps: u64,
}

/// Decides `a ? b` by running the construction for `max(|a|, |b|)` stages.
pub fn relation_query(source: &TreeSource, l: u64, fuel: u64, a: &BinString, b: &BinString) -> Result<QueryOutcome> {
    let n = a.len().max(b.len());
    let mut c = PtimeCopier::new(
        source.clone(),
        PtimeConfig {
            horizon: n as u64,
            l,
            fuel,
            checked: false,
        },
    );
    c.run_to(n as u64)?;
    let relation = c.relation(a, b);
    Ok(QueryOutcome {
        a: a.clone(),
        b: b.clone(),
        n,
        relation,
        steps: c.steps() + (a.len() + b.len()) as u64,
    })
}

/// What a finished run reports beyond its trace.
#[derive(Debug, Clone)]
pub struct PtimeOutcome {
    pub stages: u64,
    pub checkpoints: Vec<u64>,
    pub target_nodes: usize,
    pub image_nodes: usize,
    pub reservoir: usize,
    pub max_len: usize,
    pub queries: Vec<QueryOutcome>,
    pub profile: StepProfile,
}

impl PtimeOutcome {
    pub fn degree(&self) -> Option<u32> {
        self.profile.degree()
    }
}

/// Query pairs for the step profile: for each length `n` up to the longest
/// placed string, the first parent edge and the first sibling pair whose
/// longer member has length `n`, and `0^n` against the first reserved string.
pub fn sample_queries(c: &PtimeCopier) -> Vec<(BinString, BinString)> {
    let r = c.image();
    let mut edge: BTreeMap<usize, (BinString, BinString)> = BTreeMap::new();
    let mut sib: BTreeMap<usize, (BinString, BinString)> = BTreeMap::new();
    for (x, p) in r.parent_pairs() {
        let (a, b) = (c.string(x).clone(), c.string(p).clone());
        edge.entry(a.len().max(b.len())).or_insert((a, b));
    }
    for (x, y) in r.less_pairs() {
        let (a, b) = (c.string(x).clone(), c.string(y).clone());
        sib.entry(a.len().max(b.len())).or_insert((a, b));
    }
    let first_short: BinString = "0".parse().expect("literal");
    let mut out = Vec::new();
    for n in 1..=c.max_len {
        out.extend(edge.remove(&n));
        out.extend(sib.remove(&n));
        out.push((BinString::zeros(n), first_short.clone()));
    }
    out
}

/// Runs the copier to the horizon with all checks on, then profiles
/// relation queries by replay.
pub fn run_ptime(source: TreeSource, config: PtimeConfig) -> Result<(Trace, PtimeOutcome)> {
    if config.horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let mut c = PtimeCopier::new(source.clone(), PtimeConfig { checked: true, ..config });
    c.run_to(config.horizon)?;
    let mut queries = Vec::new();
    let mut profile = StepProfile::default();
    for (a, b) in sample_queries(&c) {
        let q = relation_query(&source, config.l, config.fuel, &a, &b)?;
        if q.n as u64 <= config.horizon && q.relation != c.relation(&a, &b) {
            return Err(Error::InvariantBreach(format!("replayed query {a} ? {b} disagrees with the run")));
        }
        if q.relation.related() && c.label(&a) != Some(Label::Long) && c.label(&b) != Some(Label::Long) {
            return Err(Error::InvariantBreach(format!("related pair {a}, {b} has no long member")));
        }
        profile.push(q.n as u64, q.steps);
        c.push_record(
            Record::new()
                .with("event", "query")
                .with("a", &q.a)
                .with("b", &q.b)
                .with("n", q.n)
                .with("relation", q.relation)
                .with("steps", q.steps),
        );
        queries.push(q);
    }
    let degree = profile.degree().map_or("-".to_string(), |k| k.to_string());
    let slope = profile.slope().map_or("-".to_string(), |s| format!("{s:.3}"));
    c.push_record(
        Record::new()
            .with("event", "profile")
            .with("queries", queries.len())
            .with("degree", degree)
            .with("slope", slope),
    );
    let outcome = PtimeOutcome {
        stages: c.stage,
        checkpoints: c.checkpoints.clone(),
        target_nodes: c.target().len(),
        image_nodes: c.image().len(),
        reservoir: c.reservoir().len(),
        max_len: c.max_len,
        queries,
        profile,
    };
    Ok((c.take_trace().expect("checked runs keep a trace"), outcome))
}

// ---------------------------------------------------------------- verification

#[derive(Debug, Clone)]
pub struct PtimeReport {
    pub stages: u64,
    pub checkpoints: usize,
    pub placements: usize,
    pub queries: usize,
    pub profile: StepProfile,
}

impl PtimeReport {
    pub fn degree(&self) -> Option<u32> {
        self.profile.degree()
    }
}

fn breach(line: usize, msg: impl fmt::Display) -> Error {
    Error::InvariantBreach(format!("line {line}: {msg}"))
}

/// Replays an `rpo-ptime` trace from its records alone: rebuilds `T_s` from
/// the oracle facts and `R_s` from the placements, and checks the trigger
/// rule, the reservoir discipline, domain coverage, copy soundness at every
/// stage, the claimed checkpoints, and every query answer.
pub fn verify_ptime(trace: &Trace) -> Result<PtimeReport> {
    let header = trace.header().expect("parsed traces have a header");
    if trace.engine() != Some("rpo-ptime") {
        return Err(Error::Precondition("not an rpo-ptime trace".into()));
    }
    let horizon: u64 = header.num("horizon", 1)?;
    let mut t = RpoTree::singleton(ROOT);
    let mut r = RpoTree::singleton(0);
    let mut strings: Vec<BinString> = Vec::new();
    let mut ids: HashMap<BinString, NodeId> = HashMap::new();
    let mut node_of: HashMap<NodeId, NodeId> = HashMap::new();
    let mut phi: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut labels: HashMap<BinString, Label> = HashMap::new();
    let mut reservoir: BTreeSet<BinString> = BTreeSet::new();
    let mut cursor = BinString::empty();
    let mut stage = 0u64;
    let mut max_len_at_start = 0usize;
    let mut max_len = 0usize;
    // the trigger of the current stage, and whether its short was placed
    let mut trigger: Option<(NodeId, bool)> = None;
    let mut checkpoints = 0usize;
    let mut placements = 0usize;
    let mut profile = StepProfile::default();
    let mut queries = 0usize;
    let mut profile_degree: Option<String> = None;

    let expected_trigger = |t: &RpoTree, phi: &BTreeMap<NodeId, NodeId>| -> Option<(NodeId, NodeId, NodeId)> {
        t.nodes().filter(|x| !phi.contains_key(x)).find_map(|x| {
            let b = t.parent(x)?;
            let a = t.parent(b)?;
            (!phi.contains_key(&b) && phi.contains_key(&a)).then_some((a, b, x))
        })
    };

    for (line, rec) in trace.numbered() {
        let event = rec.req("event", line)?;
        if let Some(s) = rec.get("stage") {
            let s: u64 = s.parse().map_err(|_| breach(line, "bad stage"))?;
            if s < stage || s > stage + 1 {
                return Err(breach(line, format!("stage {s} out of order")));
            }
            if s == stage + 1 {
                stage = s;
                max_len_at_start = max_len;
                trigger = None;
            }
        }
        match event {
            "fact" => {
                let (x, p, i): (NodeId, NodeId, usize) = (rec.num("node", line)?, rec.num("parent", line)?, rec.num("index", line)?);
                t.insert_child(p, x, i).map_err(|e| breach(line, e))?;
            }
            "trigger" => {
                let got = (rec.num("a", line)?, rec.num("b", line)?, rec.num("c", line)?);
                if expected_trigger(&t, &phi) != Some(got) || trigger.is_some() {
                    return Err(breach(line, "trigger does not match the tree"));
                }
                trigger = Some((got.2, false));
            }
            "place" => {
                let x: NodeId = rec.num("node", line)?;
                let s: BinString = rec.req("string", line)?.parse()?;
                let label = Label::parse(rec.req("label", line)?).ok_or_else(|| breach(line, "bad label"))?;
                let index: usize = rec.num("index", line)?;
                if x == ROOT {
                    if stage != 0 || !strings.is_empty() || label != Label::Long {
                        return Err(breach(line, "the root is placed once, at stage 0"));
                    }
                    strings.push(s.clone());
                    ids.insert(s.clone(), 0);
                    node_of.insert(0, ROOT);
                    phi.insert(ROOT, 0);
                    labels.insert(s, label);
                    continue;
                }
                let Some((c, short_done)) = trigger.as_mut() else {
                    return Err(breach(line, "placement without a trigger"));
                };
                if phi.contains_key(&x) || !t.contains(x) {
                    return Err(breach(line, format!("node {x} is not an uncopied node of T")));
                }
                let p = t.parent(x).expect("non-root");
                let pid = *phi.get(&p).ok_or_else(|| breach(line, "parent not yet copied"))?;
                if rec.req("parent", line)? != strings[pid as usize].to_string() {
                    return Err(breach(line, "parent string does not match"));
                }
                if x == *c {
                    if label != Label::Short || reservoir.first() != Some(&s) {
                        return Err(breach(line, "the trigger node must take the least reserved string"));
                    }
                    reservoir.remove(&s);
                    *short_done = true;
                } else {
                    if label != Label::Long || labels.contains_key(&s) {
                        return Err(breach(line, "other nodes take unused long strings"));
                    }
                    if (s.len() as u64) < stage || s.len() <= max_len_at_start {
                        return Err(breach(line, format!("long string {s} too short at stage {stage}")));
                    }
                    labels.insert(s.clone(), Label::Long);
                }
                let want = r
                    .children(pid)
                    .iter()
                    .filter(|&&y| t.less(node_of[&y], x))
                    .count();
                if want != index {
                    return Err(breach(line, "sibling position does not mirror T"));
                }
                let id = strings.len() as NodeId;
                r.insert_child(pid, id, index).map_err(|e| breach(line, e))?;
                max_len = max_len.max(s.len());
                strings.push(s.clone());
                ids.insert(s, id);
                node_of.insert(id, x);
                phi.insert(x, id);
                placements += 1;
            }
            "reserve" => {
                let s: BinString = rec.req("string", line)?.parse()?;
                if let Some((_, done)) = trigger {
                    if !done || phi.len() != t.len() {
                        return Err(breach(line, "a trigger stage must end with every node copied"));
                    }
                }
                while labels.contains_key(&cursor) {
                    cursor = cursor.next();
                }
                if s != cursor {
                    return Err(breach(line, format!("reserved {s} but the least unused string is {cursor}")));
                }
                labels.insert(s.clone(), Label::Short);
                reservoir.insert(s);
                if reservoir.iter().any(|a| ids.contains_key(a)) {
                    return Err(breach(line, "reservoir meets R"));
                }
                if expected_trigger(&t, &phi).is_some() {
                    return Err(breach(line, "a trigger was missed"));
                }
            }
            "check" => {
                let dom = t.restrict(|x| phi.contains_key(&x));
                if isomorphic(&Structure::Rpo(dom), &Structure::Rpo(r.clone()))?.is_none() {
                    return Err(breach(line, "the copy is not an embedding"));
                }
                let iso = phi.len() == t.len()
                    && isomorphic(&Structure::Rpo(t.clone()), &Structure::Rpo(r.clone()))?.is_some();
                if rec.is("iso", "yes") != iso {
                    return Err(breach(line, "checkpoint claim does not hold"));
                }
                checkpoints += iso as usize;
            }
            "query" => {
                let a: BinString = rec.req("a", line)?.parse()?;
                let b: BinString = rec.req("b", line)?.parse()?;
                let n: usize = rec.num("n", line)?;
                let rel = Relation::parse(rec.req("relation", line)?).ok_or_else(|| breach(line, "bad relation"))?;
                if n != a.len().max(b.len()) {
                    return Err(breach(line, "query length is not the longer input"));
                }
                if n as u64 <= horizon && rel != relation_in(&r, ids.get(&a).copied(), ids.get(&b).copied()) {
                    return Err(breach(line, "query answer disagrees with R"));
                }
                if rel.related() && labels.get(&a) != Some(&Label::Long) && labels.get(&b) != Some(&Label::Long) {
                    return Err(breach(line, "related pair without a long member"));
                }
                profile.push(n as u64, rec.num("steps", line)?);
                queries += 1;
            }
            "profile" => profile_degree = Some(rec.req("degree", line)?.to_string()),
            other => return Err(breach(line, format!("unknown event {other:?}"))),
        }
    }
    if stage != horizon {
        return Err(Error::InvariantBreach(format!("trace ends at stage {stage}, horizon is {horizon}")));
    }
    let degree = profile.degree().map_or("-".to_string(), |k| k.to_string());
    if profile_degree.is_some_and(|d| d != degree) {
        return Err(Error::InvariantBreach("reported degree does not match the queries".into()));
    }
    Ok(PtimeReport {
        stages: stage,
        checkpoints,
        placements,
        queries,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copy::oracle::{TreeFixture, DEFAULT_ORACLE_FUEL};

    fn config(horizon: u64) -> PtimeConfig {
        PtimeConfig {
            horizon,
            l: 4,
            fuel: DEFAULT_ORACLE_FUEL,
            checked: true,
        }
    }

    fn copier(f: TreeFixture, horizon: u64) -> PtimeCopier {
        let mut c = PtimeCopier::new(TreeSource::Native(f), config(horizon));
        c.run_to(horizon).unwrap();
        c
    }

    #[test]
    fn chain_copy_reaches_checkpoints() {
        let c = copier(TreeFixture::Chain, 50);
        assert!(c.checkpoints.len() >= 10, "{:?}", c.checkpoints);
        // every string of length below 5 is placed or reserved
        let mut s = BinString::empty();
        while s.len() < 5 {
            assert!(c.is_used(&s), "{s}");
            s = s.next();
        }
        // reservoir strings are unrelated to everything
        for a in c.reservoir() {
            assert!(c.image().nodes().all(|y| c.string(y) != a));
        }
    }

    #[test]
    fn idle_stage_only_reserves() {
        // the root alone: stage 1 cannot reveal anything, the oracle needs
        // more than four steps for nothing here, so look at a trigger-free stage
        let mut c = PtimeCopier::new(TreeSource::Native(TreeFixture::Chain), config(3));
        c.step().unwrap();
        // node 1 arrived; it has no child yet, so nothing was copied
        assert_eq!(c.image().len(), 1);
        assert_eq!(c.reservoir().len(), 2);
        c.step().unwrap();
        // node 2 is a grandchild of the root through 1: both copied now
        assert_eq!(c.image().len(), 3);
        assert_eq!(c.phi(2).unwrap().to_string(), "0");
        assert_eq!(c.label(c.phi(1).unwrap()), Some(Label::Long));
        assert_eq!(c.phi(1).unwrap().len(), 2);
        assert_eq!(c.checkpoints, vec![2]);
    }

    #[test]
    fn queries_replay_to_the_longer_input() {
        let source = TreeSource::Native(TreeFixture::Comb);
        let c = copier(TreeFixture::Comb, 40);
        let (x, p) = c.image().parent_pairs()[3];
        let (a, b) = (c.string(x).clone(), c.string(p).clone());
        let q = relation_query(&source, 4, DEFAULT_ORACLE_FUEL, &a, &b).unwrap();
        assert_eq!(q.relation, Relation::Child);
        assert_eq!(q.n, a.len().max(b.len()));
        let back = relation_query(&source, 4, DEFAULT_ORACLE_FUEL, &b, &a).unwrap();
        assert_eq!(back.relation, Relation::Parent);
        // two reserved strings are never related
        let mut res = c.reservoir().iter();
        let (s1, s2) = (res.next().unwrap(), res.next().unwrap());
        assert_eq!(c.relation(s1, s2), Relation::None);
    }

    #[test]
    fn runs_verify_and_tampering_fails() {
        for f in [TreeFixture::Chain, TreeFixture::Comb, TreeFixture::BinaryGrowth] {
            let (trace, out) = run_ptime(TreeSource::Native(f), config(40)).unwrap();
            let report = verify_ptime(&trace).unwrap();
            assert_eq!(report.checkpoints, out.checkpoints.len());
            assert_eq!(report.queries, out.queries.len());
            assert!(out.degree().unwrap() <= 3, "{:?}", out.profile);
        }
        let (trace, _) = run_ptime(TreeSource::Native(TreeFixture::Chain), config(20)).unwrap();
        let text = trace.to_text();
        let bad = text.replacen("event=reserve string=1 ", "event=reserve string=00 ", 1);
        let bad = if bad == text { text.replacen("event=reserve string=1\n", "event=reserve string=00\n", 1) } else { bad };
        assert_ne!(bad, text);
        assert!(verify_ptime(&Trace::parse(&bad).unwrap()).is_err());
        let bad = text.replacen("label=long", "label=short", 2);
        assert!(verify_ptime(&Trace::parse(&bad).unwrap()).is_err());
    }
}
