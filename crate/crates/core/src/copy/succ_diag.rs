//! A binary successor tree with no punctual copy among a list of adversaries.
//!
//! Stage `s >= 1` looks at adversary `s - 1` down to depth `s`. Unless that
//! fragment already fails to be a successor tree, or already differs from
//! ours above depth `s`, the new layer is chosen so that exactly one of the
//! two trees is `s`-full.

use std::collections::HashMap;

use crate::adversary::{FuelPolicy, Outcome, SuccAdversary, SuccOp};
use crate::error::{Error, Result};
use crate::structures::{isomorphic, NodeId, Structure, SuccessorTree, DEFAULT_NODE_BUDGET};
use crate::trace::{list, Record, Trace};

pub const EMPTY: NodeId = 0;
pub const ROOT: NodeId = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuccConfig {
    pub horizon: u64,
    pub fuel: FuelPolicy,
    pub node_budget: usize,
}

impl Default for SuccConfig {
    fn default() -> Self {
        SuccConfig {
            horizon: 10,
            fuel: FuelPolicy::default(),
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

/// What one look at an adversary down to depth `s` showed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Probe {
    /// A defining clause fails inside the fragment.
    NotSucc { clause: &'static str },
    /// Layer `depth < s` has a different size from ours, or the fragments
    /// above depth `s` are not isomorphic (`depth = s - 1`).
    Differs { depth: usize },
    OutOfFuel,
    Tree { full: bool, fragment: SuccessorTree },
}

impl Probe {
    pub fn tag(&self) -> &'static str {
        match self {
            Probe::NotSucc { .. } => "not-succ",
            Probe::Differs { .. } => "differs",
            Probe::OutOfFuel => "fuel",
            Probe::Tree { .. } => "tree",
        }
    }
}

/// Why adversary `i` is not isomorphic to the constructed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccCertificate {
    NotSucc { stage: u64, clause: &'static str },
    Differs { stage: u64, depth: usize },
    /// At `stage`, exactly one of the two trees is `stage`-full.
    FullnessFlip { stage: u64, theirs_full: bool },
    /// Out of fuel: not punctual at this budget.
    Fuel { stage: u64 },
    /// Its stage lies beyond the horizon.
    Pending,
}

impl SuccCertificate {
    pub fn tag(&self) -> &'static str {
        match self {
            SuccCertificate::NotSucc { .. } => "not-succ",
            SuccCertificate::Differs { .. } => "differs",
            SuccCertificate::FullnessFlip { .. } => "fullness-flip",
            SuccCertificate::Fuel { .. } => "fuel",
            SuccCertificate::Pending => "pending",
        }
    }
}

/// Adversary steps and calls spent on one probe.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProbeCost {
    pub calls: u64,
    pub steps: u64,
}

/// Reads `adv` down to depth `s`, relabelling its nodes `0` (empty), `1`
/// (root), `2, 3, ...` in breadth-first order. `ours[d]` is the size of our
/// layer `d`; the read stops at the first layer above `s` that differs.
pub fn probe(adv: &SuccAdversary, s: usize, ours: &[usize], budget: u64) -> Result<(Probe, ProbeCost)> {
    let mut cost = ProbeCost::default();
    let mut call = |op: SuccOp, x: u64| -> Result<Option<u64>> {
        let ev = adv.call(op, x, budget)?;
        cost.calls += 1;
        cost.steps += ev.steps;
        Ok(match ev.outcome {
            Outcome::Value(v) => Some(v),
            Outcome::OutOfFuel => None,
        })
    };
    macro_rules! get {
        ($op:expr, $x:expr) => {
            match call($op, $x)? {
                Some(v) => v,
                None => return Ok((Probe::OutOfFuel, cost)),
            }
        };
    }
    let e = get!(SuccOp::Empty, 0);
    let r = get!(SuccOp::Root, 0);
    if e == r {
        return Ok((Probe::NotSucc { clause: "constants" }, cost));
    }
    if get!(SuccOp::S1, e) != e || get!(SuccOp::S2, e) != e {
        return Ok((Probe::NotSucc { clause: "clause 4" }, cost));
    }
    // original id -> (local id, side it was reached by; 0 for the root)
    let mut seen: HashMap<u64, (NodeId, u8)> = HashMap::from([(r, (ROOT, 0))]);
    let mut frag = SuccessorTree::new(EMPTY, ROOT);
    let mut layer = vec![r];
    let mut next: NodeId = 2;
    for d in 0..s {
        let mut below = Vec::new();
        for &x in &layer {
            let (c1, c2) = (get!(SuccOp::S1, x), get!(SuccOp::S2, x));
            if c1 == c2 && c1 != e {
                return Ok((Probe::NotSucc { clause: "clause 2" }, cost));
            }
            let mut kids = [EMPTY; 2];
            for (k, (c, side)) in [(c1, 1u8), (c2, 2u8)].into_iter().enumerate() {
                if c == e {
                    continue;
                }
                if c == r {
                    return Ok((Probe::NotSucc { clause: "clause 3" }, cost));
                }
                if let Some(&(_, was)) = seen.get(&c) {
                    let clause = if was == side { "clause 1" } else { "clause 2" };
                    return Ok((Probe::NotSucc { clause }, cost));
                }
                seen.insert(c, (next, side));
                kids[k] = next;
                next += 1;
                below.push(c);
            }
            frag.set_children(seen[&x].0, kids[0], kids[1])?;
        }
        if d + 1 < s && ours.get(d + 1).copied().unwrap_or(0) != below.len() {
            return Ok((Probe::Differs { depth: d + 1 }, cost));
        }
        layer = below;
    }
    let full = frag.is_full(s);
    Ok((Probe::Tree { full, fragment: frag }, cost))
}

pub struct SuccDiagonalizer {
    adversaries: Vec<SuccAdversary>,
    config: SuccConfig,
    pub stage: u64,
    tree: SuccessorTree,
    next: NodeId,
    certs: Vec<SuccCertificate>,
    trace: Trace,
}

impl SuccDiagonalizer {
    pub fn new(adversaries: Vec<SuccAdversary>, config: SuccConfig) -> Self {
        let mut trace = Trace::new(
            Record::new()
                .with("engine", "succ-diag")
                .with("horizon", config.horizon)
                .with("adversaries", adversaries.len())
                .with("fuel", config.fuel),
        );
        for (i, a) in adversaries.iter().enumerate() {
            trace.push(
                Record::new()
                    .with("stage", 0)
                    .with("event", "adversary")
                    .with("adv", i)
                    .with("name", a.name()),
            );
        }
        let certs = vec![SuccCertificate::Pending; adversaries.len()];
        SuccDiagonalizer {
            adversaries,
            config,
            stage: 0,
            tree: SuccessorTree::new(EMPTY, ROOT),
            next: 2,
            certs,
            trace,
        }
    }

    pub fn tree(&self) -> &SuccessorTree {
        &self.tree
    }

    pub fn certificates(&self) -> &[SuccCertificate] {
        &self.certs
    }

    pub fn step(&mut self) -> Result<()> {
        self.stage += 1;
        let s = self.stage;
        let layers = self.tree.layers();
        let parents = layers.last().expect("the root is always there").clone();
        let sizes: Vec<usize> = layers.iter().map(Vec::len).collect();
        let mut drop_last = false;
        let i = (s - 1) as usize;
        if let Some(adv) = self.adversaries.get(i) {
            let (mut outcome, cost) = probe(adv, s as usize, &sizes, self.config.fuel.budget(s))?;
            if let Probe::Tree { fragment, .. } = &outcome {
                let theirs = Structure::Succ(fragment.truncate(s as usize - 1));
                if isomorphic(&Structure::Succ(self.tree.clone()), &theirs)?.is_none() {
                    outcome = Probe::Differs { depth: s as usize - 1 };
                }
            }
            let mut rec = Record::new()
                .with("stage", s)
                .with("event", "probe")
                .with("adv", i)
                .with("result", outcome.tag());
            let cert = match &outcome {
                Probe::NotSucc { clause } => {
                    rec.push("clause", clause.replace(' ', "-"));
                    SuccCertificate::NotSucc { stage: s, clause }
                }
                Probe::Differs { depth } => {
                    rec.push("depth", depth);
                    SuccCertificate::Differs { stage: s, depth: *depth }
                }
                Probe::OutOfFuel => SuccCertificate::Fuel { stage: s },
                Probe::Tree { full, .. } => {
                    rec.push("full", yes(*full));
                    drop_last = *full;
                    SuccCertificate::FullnessFlip { stage: s, theirs_full: *full }
                }
            };
            self.trace.push(rec.with("calls", cost.calls).with("steps", cost.steps));
            self.certs[i] = cert;
        }
        // S1(a_i) = b_i, S2(a_i) = b_{n+i}; S2(a_n) stays empty after an s-full probe
        let n = parents.len() as NodeId;
        let added = 2 * n - drop_last as NodeId;
        if self.tree.len() + added as usize > self.config.node_budget {
            return Err(Error::BudgetExceeded {
                budget: self.config.node_budget,
            });
        }
        let first = self.next;
        for (k, &a) in parents.iter().enumerate() {
            let k = k as NodeId;
            let right = if k + 1 == n && drop_last { EMPTY } else { first + n + k };
            self.tree.set_children(a, first + k, right)?;
        }
        self.next += added;
        self.trace.push(
            Record::new()
                .with("stage", s)
                .with("event", "grow")
                .with("parents", n)
                .with("added", added)
                .with("first", first),
        );
        if let Some(SuccCertificate::FullnessFlip { theirs_full, .. }) = self.certs.get(i) {
            if self.tree.is_full(s as usize) == *theirs_full {
                return Err(Error::InvariantBreach(format!("stage {s}: fullness did not flip")));
            }
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<()> {
        while self.stage < self.config.horizon {
            self.step()?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> (Trace, SuccOutcome) {
        for (i, c) in self.certs.iter().enumerate() {
            let mut r = Record::new()
                .with("stage", self.stage)
                .with("event", "cert")
                .with("adv", i)
                .with("tag", c.tag());
            match *c {
                SuccCertificate::NotSucc { stage, .. } | SuccCertificate::Differs { stage, .. } | SuccCertificate::Fuel { stage } => {
                    r.push("at", stage)
                }
                SuccCertificate::FullnessFlip { stage, theirs_full } => {
                    r.push("at", stage);
                    r.push("full", yes(theirs_full));
                }
                SuccCertificate::Pending => {}
            }
            self.trace.push(r);
        }
        let layers: Vec<usize> = self.tree.layers().iter().map(Vec::len).collect();
        self.trace.push(
            Record::new()
                .with("stage", self.stage)
                .with("event", "state")
                .with("nodes", self.tree.len())
                .with("layers", list(&layers)),
        );
        (
            self.trace,
            SuccOutcome {
                tree: self.tree,
                certificates: self.certs,
                layers,
            },
        )
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Debug, Clone)]
pub struct SuccOutcome {
    pub tree: SuccessorTree,
    pub certificates: Vec<SuccCertificate>,
    /// Layer sizes, root first.
    pub layers: Vec<usize>,
}

pub fn run_succ_diag(adversaries: Vec<SuccAdversary>, config: SuccConfig) -> Result<(Trace, SuccOutcome)> {
    if config.horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let mut d = SuccDiagonalizer::new(adversaries, config);
    d.run()?;
    Ok(d.finish())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccReport {
    pub stages: u64,
    pub layers: Vec<usize>,
    pub flips: usize,
    pub skips: usize,
}

fn breach(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvariantBreach(format!("line {line}: {msg}"))
}

/// Rebuilds the tree from a `succ-diag` trace and checks the growth rule:
/// `2n - 1` new nodes, the last right child left empty, exactly after an
/// `s`-full probe and `2n` otherwise, fresh ids taken in order, and every
/// certificate backed by its probe.
pub fn verify_succ_diag(trace: &Trace) -> Result<SuccReport> {
    if trace.engine() != Some("succ-diag") {
        return Err(Error::Precondition("not a succ-diag trace".into()));
    }
    let h = trace.header().expect("parsed traces have a header");
    let horizon: u64 = h.num("horizon", 1)?;
    let count: usize = h.num("adversaries", 1)?;
    let mut tree = SuccessorTree::new(EMPTY, ROOT);
    let mut next: NodeId = 2;
    let mut stage = 0u64;
    // tag and detail of each adversary's probe
    let mut probes: Vec<Option<(u64, String, Option<String>)>> = vec![None; count];
    let mut full_probe: Option<bool> = None;
    let (mut flips, mut skips) = (0, 0);
    let mut certs = 0;
    let mut state_seen = false;
    for (line, rec) in trace.numbered() {
        let s: u64 = rec.num("stage", line)?;
        let event = rec.req("event", line)?;
        match event {
            "adversary" => {}
            "probe" => {
                if s != stage + 1 {
                    return Err(breach(line, "probe outside its stage"));
                }
                let i: usize = rec.num("adv", line)?;
                if i as u64 + 1 != s || i >= count {
                    return Err(breach(line, format!("stage {s} probes adversary {i}")));
                }
                let tag = rec.req("result", line)?.to_string();
                full_probe = match tag.as_str() {
                    "tree" => Some(rec.is("full", "yes")),
                    _ => {
                        skips += 1;
                        None
                    }
                };
                let detail = rec.get("full").or(rec.get("depth")).or(rec.get("clause")).map(str::to_string);
                probes[i] = Some((s, tag, detail));
            }
            "grow" => {
                if s != stage + 1 {
                    return Err(breach(line, "stages out of order"));
                }
                stage = s;
                let parents = tree.layers().pop().unwrap();
                let n = parents.len() as NodeId;
                let (pn, added, first): (NodeId, NodeId, NodeId) =
                    (rec.num("parents", line)?, rec.num("added", line)?, rec.num("first", line)?);
                let had_probe = probes.get((s - 1) as usize).is_some_and(|p| p.as_ref().is_some_and(|p| p.0 == s));
                let drop_last = had_probe && full_probe == Some(true);
                if pn != n || first != next {
                    return Err(breach(line, "growth does not start from our last layer and the least unused id"));
                }
                if added != 2 * n - drop_last as NodeId {
                    return Err(breach(line, format!("{added} new nodes below {n}")));
                }
                for (k, &a) in parents.iter().enumerate() {
                    let k = k as NodeId;
                    let right = if k + 1 == n && drop_last { EMPTY } else { first + n + k };
                    tree.set_children(a, first + k, right).map_err(|e| breach(line, e))?;
                }
                next += added;
                if had_probe {
                    if let Some(theirs) = full_probe {
                        if tree.is_full(s as usize) == theirs {
                            return Err(breach(line, "fullness did not flip"));
                        }
                        flips += 1;
                    }
                }
                full_probe = None;
            }
            "cert" => {
                let i: usize = rec.num("adv", line)?;
                let tag = rec.req("tag", line)?;
                let expected = match probes.get(i).cloned().flatten() {
                    None => "pending".to_string(),
                    Some((_, t, _)) if t == "tree" => "fullness-flip".to_string(),
                    Some((_, t, _)) => t,
                };
                if tag != expected {
                    return Err(breach(line, format!("certificate {tag} for a {expected} probe")));
                }
                certs += 1;
            }
            "state" => {
                let layers: Vec<usize> = crate::trace::parse_list(rec.req("layers", line)?, line)?;
                let ours: Vec<usize> = tree.layers().iter().map(Vec::len).collect();
                if layers != ours || rec.num::<usize>("nodes", line)? != tree.len() {
                    return Err(breach(line, "final state differs from the replay"));
                }
                state_seen = true;
            }
            other => return Err(breach(line, format!("unknown event {other:?}"))),
        }
    }
    if stage != horizon || certs != count || !state_seen {
        return Err(Error::InvariantBreach("trace is incomplete".into()));
    }
    Ok(SuccReport {
        stages: stage,
        layers: tree.layers().iter().map(Vec::len).collect(),
        flips,
        skips,
    })
}
