//! Punctual copies of injective prefix trees with an infinite branch.
//!
//! Newly discovered paths wait in `W` until some path extends a known branch
//! by at least two; then every waiting path is copied, each new element but
//! the last getting the least unused number and the last one the least
//! unused number `>= s`. Stages without news declare every `s`-bounded tuple
//! outside `R` negative, which the tips can never hit.
//!
//! Two points the construction leaves open are handled explicitly:
//!
//! * an intermediate "least unused" number can complete a tuple that an idle
//!   stage already declared negative; that number is replaced by the least
//!   unused one above the declared bound, and a `conflict` record keeps the
//!   literal choice;
//! * numbers skipped by the tips stay off every path (`holes`).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use super::oracle::{PathSource, PrefixOracle, ROOT};
use crate::error::{Error, Result};
use crate::structures::{isomorphic, NodeId, PrefixTree, Structure};
use crate::trace::{list, parse_list, Record, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixConfig {
    pub horizon: u64,
    pub l: u64,
    pub fuel: u64,
}

pub struct PrefixCopier {
    oracle: PrefixOracle,
    config: PrefixConfig,
    pub stage: u64,
    r: PrefixTree,
    phi: BTreeMap<NodeId, NodeId>,
    used: BTreeSet<NodeId>,
    waiting: VecDeque<Vec<NodeId>>,
    /// Every tuple outside `R` with all entries `<= bound` is negative.
    bound: Option<NodeId>,
    pub flushes: usize,
    pub conflicts: usize,
    trace: Trace,
}

/// The least number not in `used` that is `>= from`.
fn least_unused(used: &BTreeSet<NodeId>, from: NodeId) -> NodeId {
    let mut c = from;
    for &u in used.range(from..) {
        if u != c {
            break;
        }
        c += 1;
    }
    c
}

fn banned(bound: Option<NodeId>, max: NodeId) -> bool {
    bound.is_some_and(|b| max <= b)
}

impl PrefixCopier {
    pub fn new(source: PathSource, config: PrefixConfig) -> Self {
        let oracle = PrefixOracle::new(source, config.l, config.fuel);
        let mut trace = Trace::new(
            Record::new()
                .with("engine", "prefix-copy")
                .with("oracle", oracle.name())
                .with("l", config.l)
                .with("horizon", config.horizon),
        );
        trace.push(place(0, ROOT, 0, true));
        let mut c = PrefixCopier {
            oracle,
            config,
            stage: 0,
            r: PrefixTree::singleton(0),
            phi: [(ROOT, 0)].into_iter().collect(),
            used: [0].into_iter().collect(),
            waiting: VecDeque::new(),
            bound: None,
            flushes: 0,
            conflicts: 0,
            trace,
        };
        c.push_check();
        c
    }

    pub fn target(&self) -> &PrefixTree {
        self.oracle.tree()
    }

    pub fn image(&self) -> &PrefixTree {
        &self.r
    }

    pub fn phi(&self, x: NodeId) -> Option<NodeId> {
        self.phi.get(&x).copied()
    }

    pub fn waiting(&self) -> usize {
        self.waiting.len()
    }

    pub fn bound(&self) -> Option<NodeId> {
        self.bound
    }

    /// Numbers below the largest used one that lie on no path of `R`.
    pub fn holes(&self) -> usize {
        let top = *self.used.last().expect("the root is used");
        top as usize + 1 - self.used.len()
    }

    pub fn step(&mut self) -> Result<()> {
        self.stage += 1;
        let s = self.stage;
        let known_before = self.oracle.tree().clone();
        match self.oracle.stage()? {
            None => {
                let b = NodeId::try_from(s).map_err(|_| Error::Precondition("stage out of range".into()))?;
                self.bound = Some(b);
                self.trace.push(Record::new().with("stage", s).with("event", "idle").with("bound", b));
            }
            Some(path) => {
                let m = known_before.longest_listed_prefix(&path).len();
                self.trace.push(
                    Record::new()
                        .with("stage", s)
                        .with("event", "fact")
                        .with("path", list(&path))
                        .with("known", m),
                );
                self.waiting.push_back(path.clone());
                if path.len() >= m + 2 {
                    self.flush()?;
                } else {
                    self.trace.push(
                        Record::new()
                            .with("stage", s)
                            .with("event", "queue")
                            .with("size", self.waiting.len()),
                    );
                }
            }
        }
        self.push_check();
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        let s = self.stage;
        self.trace.push(
            Record::new()
                .with("stage", s)
                .with("event", "flush")
                .with("size", self.waiting.len()),
        );
        self.flushes += 1;
        let tip_from = NodeId::try_from(s).map_err(|_| Error::Precondition("stage out of range".into()))?;
        while let Some(path) = self.waiting.pop_front() {
            let k = path.iter().take_while(|x| self.phi.contains_key(x)).count();
            self.trace.push(
                Record::new()
                    .with("stage", s)
                    .with("event", "realize")
                    .with("path", list(&path))
                    .with("copied", k),
            );
            if k == path.len() {
                continue;
            }
            let mut image: Vec<NodeId> = path[..k].iter().map(|x| self.phi[x]).collect();
            let mut top = image.iter().copied().max().unwrap_or(0);
            for (j, &x) in path.iter().enumerate().skip(k) {
                let tip = j + 1 == path.len();
                let c = if tip {
                    least_unused(&self.used, tip_from)
                } else {
                    let literal = least_unused(&self.used, 0);
                    if banned(self.bound, top.max(literal)) {
                        let chosen = least_unused(&self.used, self.bound.unwrap() + 1);
                        self.conflicts += 1;
                        self.trace.push(
                            Record::new()
                                .with("stage", s)
                                .with("event", "conflict")
                                .with("elem", x)
                                .with("literal", literal)
                                .with("chosen", chosen),
                        );
                        chosen
                    } else {
                        literal
                    }
                };
                if banned(self.bound, top.max(c)) {
                    return Err(Error::InvariantBreach(format!("stage {s}: tip {c} lies in a declared-negative tuple")));
                }
                self.used.insert(c);
                self.phi.insert(x, c);
                image.push(c);
                top = top.max(c);
                self.trace.push(place(s, x, c, tip));
            }
            self.r.insert_path(&image);
        }
        Ok(())
    }

    /// `T` restricted to copied elements, which is closed under prefixes.
    pub fn copied_part(&self) -> PrefixTree {
        let paths = self
            .oracle
            .tree()
            .paths()
            .filter(|p| p.iter().all(|x| self.phi.contains_key(x)))
            .cloned();
        PrefixTree::from_paths(paths).expect("copied paths are prefix-closed")
    }

    /// `phi` maps the copied part of `T` onto `R`, path by path.
    pub fn check(&self) -> bool {
        let dom = self.copied_part();
        let mapped: BTreeSet<Vec<NodeId>> = dom.paths().map(|p| p.iter().map(|x| self.phi[x]).collect()).collect();
        mapped.len() == self.r.num_paths() && self.r.paths().all(|p| mapped.contains(p))
    }

    fn push_check(&mut self) {
        let ok = self.check();
        let rec = Record::new()
            .with("stage", self.stage)
            .with("event", "check")
            .with("paths", self.r.num_paths())
            .with("known", self.oracle.tree().num_paths())
            .with("waiting", self.waiting.len())
            .with("holes", self.holes())
            .with("embedding", if ok { "yes" } else { "no" });
        self.trace.push(rec);
    }

    pub fn run_to(&mut self, horizon: u64) -> Result<()> {
        while self.stage < horizon {
            self.step()?;
            if !self.check() {
                return Err(Error::InvariantBreach(format!("stage {}: phi is not an embedding", self.stage)));
            }
        }
        Ok(())
    }

    pub fn run(&mut self) -> Result<()> {
        self.run_to(self.config.horizon)
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }
}

fn place(stage: u64, elem: NodeId, number: NodeId, tip: bool) -> Record {
    Record::new()
        .with("stage", stage)
        .with("event", "place")
        .with("elem", elem)
        .with("number", number)
        .with("tip", if tip { "yes" } else { "no" })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixOutcome {
    pub stages: u64,
    pub known_paths: usize,
    pub copied_paths: usize,
    pub waiting: usize,
    pub flushes: usize,
    pub conflicts: usize,
    pub holes: usize,
}

pub fn run_prefix_copy(source: PathSource, config: PrefixConfig) -> Result<(Trace, PrefixOutcome)> {
    if config.horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let mut c = PrefixCopier::new(source, config);
    c.run()?;
    let out = PrefixOutcome {
        stages: c.stage,
        known_paths: c.target().num_paths(),
        copied_paths: c.image().num_paths(),
        waiting: c.waiting(),
        flushes: c.flushes,
        conflicts: c.conflicts,
        holes: c.holes(),
    };
    Ok((c.into_trace(), out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixReport {
    pub stages: u64,
    pub flushes: usize,
    pub conflicts: usize,
    pub idle: usize,
}

fn breach(line: usize, msg: impl fmt::Display) -> Error {
    Error::InvariantBreach(format!("line {line}: {msg}"))
}

/// Replays a `prefix-copy` trace: the queue/flush rule, the choice of
/// numbers (least unused, tips least unused `>= s`, conflicts resolved above
/// the declared bound), `W` empty after each flush, no tuple entering `R`
/// after it was declared negative, and the embedding at every check.
pub fn verify_prefix_copy(trace: &Trace) -> Result<PrefixReport> {
    if trace.engine() != Some("prefix-copy") {
        return Err(Error::Precondition("not a prefix-copy trace".into()));
    }
    let horizon: u64 = trace.header().expect("header").num("horizon", 1)?;
    let mut t = PrefixTree::singleton(ROOT);
    let mut r: Option<PrefixTree> = None;
    let mut phi: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    let mut used: BTreeSet<NodeId> = BTreeSet::new();
    let mut waiting: VecDeque<Vec<NodeId>> = VecDeque::new();
    let mut bound: Option<NodeId> = None;
    let mut stage = 0u64;
    // the path being realized: its image so far and the elements still to place
    let mut current: Option<(Vec<NodeId>, VecDeque<NodeId>)> = None;
    let mut pending_conflict: Option<(NodeId, NodeId)> = None;
    let mut expect_decision: Option<bool> = None;
    let (mut flushes, mut conflicts, mut idle) = (0, 0, 0);
    let mut flushing = false;

    let finish_path = |current: &mut Option<(Vec<NodeId>, VecDeque<NodeId>)>, r: &mut Option<PrefixTree>, line| -> Result<()> {
        if let Some((image, rest)) = current.take() {
            if !rest.is_empty() {
                return Err(breach(line, "path left half-copied"));
            }
            r.as_mut().ok_or_else(|| breach(line, "no root"))?.insert_path(&image);
        }
        Ok(())
    };

    for (line, rec) in trace.numbered() {
        let s: u64 = rec.num("stage", line)?;
        if s < stage || s > stage + 1 {
            return Err(breach(line, "stages out of order"));
        }
        stage = s;
        let event = rec.req("event", line)?;
        if !matches!(event, "place" | "conflict" | "realize") {
            finish_path(&mut current, &mut r, line)?;
            if flushing && event != "realize" {
                flushing = false;
                if !waiting.is_empty() {
                    return Err(breach(line, "W not empty after a flush"));
                }
            }
        }
        if let Some(flush) = expect_decision.take() {
            let got = match event {
                "flush" => true,
                "queue" => false,
                _ => return Err(breach(line, "a fact is queued or flushes")),
            };
            if got != flush {
                return Err(breach(line, "queue/flush rule broken"));
            }
        }
        match event {
            "place" => {
                let (x, c): (NodeId, NodeId) = (rec.num("elem", line)?, rec.num("number", line)?);
                let tip = rec.is("tip", "yes");
                if stage == 0 {
                    if r.is_some() || x != ROOT || c != 0 {
                        return Err(breach(line, "the root goes first, to 0"));
                    }
                    r = Some(PrefixTree::singleton(0));
                    phi.insert(x, c);
                    used.insert(c);
                    continue;
                }
                let (image, rest) = current.as_mut().ok_or_else(|| breach(line, "place outside a path"))?;
                if rest.pop_front() != Some(x) {
                    return Err(breach(line, "elements placed out of path order"));
                }
                if tip != rest.is_empty() {
                    return Err(breach(line, "only the last element is the tip"));
                }
                let top = image.iter().copied().max().unwrap_or(0);
                let expected = if tip {
                    least_unused(&used, s as NodeId)
                } else {
                    let literal = least_unused(&used, 0);
                    match pending_conflict.take() {
                        Some((lit, chosen)) => {
                            if lit != literal || !banned(bound, top.max(literal)) {
                                return Err(breach(line, "spurious conflict"));
                            }
                            if chosen != least_unused(&used, bound.unwrap() + 1) {
                                return Err(breach(line, "conflict not resolved by the least number above the bound"));
                            }
                            chosen
                        }
                        None => {
                            if banned(bound, top.max(literal)) {
                                return Err(breach(line, "undeclared conflict"));
                            }
                            literal
                        }
                    }
                };
                if c != expected {
                    return Err(breach(line, format!("element {x} got {c}, expected {expected}")));
                }
                if banned(bound, top.max(c)) {
                    return Err(breach(line, "tuple was declared negative"));
                }
                used.insert(c);
                phi.insert(x, c);
                image.push(c);
            }
            "conflict" => {
                pending_conflict = Some((rec.num("literal", line)?, rec.num("chosen", line)?));
                conflicts += 1;
            }
            "fact" => {
                let path: Vec<NodeId> = parse_list(rec.req("path", line)?, line)?;
                if path.first() != Some(&ROOT) || t.contains(&path) {
                    return Err(breach(line, "not a new rooted path"));
                }
                let m = t.longest_listed_prefix(&path).len();
                if rec.num::<usize>("known", line)? != m {
                    return Err(breach(line, "wrong known prefix"));
                }
                t.insert_path(&path);
                if !t.is_injective() {
                    return Err(breach(line, "injectivity"));
                }
                expect_decision = Some(path.len() >= m + 2);
                waiting.push_back(path);
            }
            "queue" => {
                if rec.num::<usize>("size", line)? != waiting.len() {
                    return Err(breach(line, "queue size"));
                }
            }
            "flush" => {
                if rec.num::<usize>("size", line)? != waiting.len() {
                    return Err(breach(line, "flush size"));
                }
                flushes += 1;
                flushing = true;
            }
            "realize" => {
                finish_path(&mut current, &mut r, line)?;
                let path: Vec<NodeId> = parse_list(rec.req("path", line)?, line)?;
                if waiting.pop_front().as_ref() != Some(&path) {
                    return Err(breach(line, "paths leave W out of order"));
                }
                let k = path.iter().take_while(|x| phi.contains_key(x)).count();
                if rec.num::<usize>("copied", line)? != k {
                    return Err(breach(line, "wrong copied prefix"));
                }
                current = Some((path[..k].iter().map(|x| phi[x]).collect(), path[k..].iter().copied().collect()));
            }
            "idle" => {
                let b: NodeId = rec.num("bound", line)?;
                if b as u64 != s {
                    return Err(breach(line, "idle stages declare exactly the s-bounded tuples"));
                }
                bound = Some(b);
                idle += 1;
            }
            "check" => {
                let rt = r.as_ref().ok_or_else(|| breach(line, "check before the root"))?;
                let dom_paths = t.paths().filter(|p| p.iter().all(|x| phi.contains_key(x))).cloned();
                let dom = PrefixTree::from_paths(dom_paths).map_err(|v| breach(line, v))?;
                let mapped: BTreeSet<Vec<NodeId>> = dom.paths().map(|p| p.iter().map(|x| phi[x]).collect()).collect();
                let ok = mapped.len() == rt.num_paths() && rt.paths().all(|p| mapped.contains(p));
                let iso = isomorphic(&Structure::Prefix(dom), &Structure::Prefix(rt.clone()))?.is_some();
                if !ok || !iso || !rec.is("embedding", "yes") {
                    return Err(breach(line, "phi is not an embedding onto R"));
                }
                if rec.num::<usize>("waiting", line)? != waiting.len() || rec.num::<usize>("paths", line)? != rt.num_paths() {
                    return Err(breach(line, "check totals differ from the replay"));
                }
            }
            other => return Err(breach(line, format!("unknown event {other:?}"))),
        }
    }
    if stage != horizon {
        return Err(Error::InvariantBreach(format!("trace ends at stage {stage}, horizon is {horizon}")));
    }
    Ok(PrefixReport {
        stages: stage,
        flushes,
        conflicts,
        idle,
    })
}
