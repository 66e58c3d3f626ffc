use std::collections::{BTreeMap, BTreeSet};

use super::{expand, open_leaves};
use crate::error::{Error, Result};
use crate::structures::{branching_report, FinitePosetTree, NodeId};
use crate::trace::{parse_list, Record, Trace};

/// Summary of a replayed poset-diagonalizer trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetReport {
    pub stages: u64,
    pub nodes: usize,
    pub max_blocked: usize,
    pub attachments: usize,
    pub certificates: Vec<String>,
}

fn breach(line: usize, msg: impl Into<String>) -> Error {
    Error::InvariantBreach(format!("trace line {line}: {}", msg.into()))
}

/// Rebuilds `T_s` from the attachment records and checks, at every stage,
/// unique branching, the blocking discipline, the existence of an open leaf
/// and that blocked subtrees stay frozen; attachments must coincide with a
/// fresh expansionary step.
pub fn verify_trace(trace: &Trace) -> Result<PosetReport> {
    if trace.engine() != Some("poset-diag") {
        return Err(Error::Precondition("not a poset-diag trace".into()));
    }
    let header = trace.header().expect("parsed traces have a header");
    let n_adv: usize = header.num("adversaries", 1)?;

    let mut tree = FinitePosetTree::singleton(0);
    let mut blocked: BTreeSet<NodeId> = BTreeSet::new();
    let mut frozen: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut pending: Vec<(usize, &Record)> = Vec::new();
    let mut report = PosetReport {
        stages: 0,
        nodes: 1,
        max_blocked: 0,
        attachments: 0,
        certificates: Vec::new(),
    };
    let mut last_stage = 0u64;

    for (line, r) in trace.numbered() {
        let stage: u64 = r.num("stage", line)?;
        if stage < last_stage {
            return Err(breach(line, "stages out of order"));
        }
        last_stage = stage;
        match r.req("kind", line)? {
            "adversary" => {}
            "exp" => {
                if stage % 2 == 0 {
                    return Err(breach(line, "attachment at an even stage"));
                }
                pending.push((line, r));
            }
            "strat" => {
                if stage % 2 == 1 {
                    return Err(breach(line, "strategy at an odd stage"));
                }
                apply_move(line, r, &tree, &mut blocked, &mut frozen)?;
            }
            "state" => {
                if stage % 2 == 1 {
                    replay_expansion(&mut tree, &blocked, &pending)?;
                    report.attachments += pending.len();
                } else if !pending.is_empty() {
                    return Err(breach(line, "attachments outside an expansionary stage"));
                }
                pending.clear();
                check_state(line, r, &tree, &blocked, &frozen)?;
                report.stages = stage;
                report.max_blocked = report.max_blocked.max(blocked.len());
            }
            "cert" => {
                let cert = r.req("cert", line)?;
                if cert == "blocked-deficit" {
                    let x: NodeId = r.num("node", line)?;
                    let (t, p): (usize, usize) = (r.num("t", line)?, r.num("p", line)?);
                    if !blocked.contains(&x) || tree.subtree_size(x) != t || p <= t {
                        return Err(breach(line, format!("blocked-deficit at {x} is not borne out")));
                    }
                }
                report.certificates.push(cert.to_string());
            }
            other => return Err(breach(line, format!("unknown record kind {other:?}"))),
        }
    }
    if !pending.is_empty() {
        return Err(breach(pending[0].0, "attachments without a closing state record"));
    }
    if report.certificates.len() != n_adv {
        return Err(Error::InvariantBreach(format!(
            "{} certificates for {n_adv} adversaries",
            report.certificates.len()
        )));
    }
    report.nodes = tree.len();
    Ok(report)
}

fn replay_expansion(tree: &mut FinitePosetTree, blocked: &BTreeSet<NodeId>, recs: &[(usize, &Record)]) -> Result<()> {
    let line = recs.first().map(|p| p.0).unwrap_or(0);
    let mut grown = tree.clone();
    let want = expand(&mut grown, blocked).map_err(|e| breach(line, e.to_string()))?;
    if want.len() != recs.len() {
        return Err(breach(line, format!("{} attachments recorded, {} expected", recs.len(), want.len())));
    }
    for (a, &(line, r)) in want.iter().zip(recs) {
        let children: Vec<NodeId> = parse_list(r.req("children", line)?, line)?;
        let same = r.num::<NodeId>("leaf", line)? == a.leaf
            && r.num::<usize>("chain", line)? == a.chain.len()
            && r.num::<NodeId>("branch", line)? == a.branch
            && r.num::<u32>("length", line)? == a.length
            && children == a.children;
        if !same {
            return Err(breach(line, format!("attachment differs from the expansionary step at leaf {}", a.leaf)));
        }
    }
    *tree = grown;
    Ok(())
}

fn apply_move(
    line: usize,
    r: &Record,
    tree: &FinitePosetTree,
    blocked: &mut BTreeSet<NodeId>,
    frozen: &mut BTreeMap<NodeId, usize>,
) -> Result<()> {
    let i: u32 = r.num("adv", line)?;
    let level_nodes = tree.level_nodes(i + 1);
    match r.req("move", line)? {
        "none" => {
            if r.get("verdict") != Some("ready") && level_nodes.iter().any(|x| blocked.contains(x)) {
                return Err(breach(line, "not-ready strategy kept its block"));
            }
        }
        "withdraw" => {
            for x in parse_list::<NodeId>(r.req("nodes", line)?, line)? {
                if !level_nodes.contains(&x) || !blocked.remove(&x) {
                    return Err(breach(line, format!("withdrawal of {x} is not a level-{} block", i + 1)));
                }
                frozen.remove(&x);
            }
        }
        "hold" => {
            let x: NodeId = r.num("node", line)?;
            if !blocked.contains(&x) || !level_nodes.contains(&x) {
                return Err(breach(line, format!("hold on {x} which is not blocked at level {}", i + 1)));
            }
        }
        "block" => {
            let x: NodeId = r.num("node", line)?;
            if !r.is("verdict", "ready") {
                return Err(breach(line, "block without readiness"));
            }
            if !level_nodes.contains(&x) || level_nodes.iter().any(|y| blocked.contains(y)) {
                return Err(breach(line, format!("block of {x} breaks the one-per-level rule")));
            }
            let (t, p): (usize, usize) = (r.num("t", line)?, r.num("p", line)?);
            if tree.subtree_size(x) != t || p <= t {
                return Err(breach(line, format!("block of {x} without a surplus")));
            }
            blocked.insert(x);
            frozen.insert(x, t);
        }
        other => return Err(breach(line, format!("unknown move {other:?}"))),
    }
    Ok(())
}

fn check_state(
    line: usize,
    r: &Record,
    tree: &FinitePosetTree,
    blocked: &BTreeSet<NodeId>,
    frozen: &BTreeMap<NodeId, usize>,
) -> Result<()> {
    if r.num::<usize>("nodes", line)? != tree.len() {
        return Err(breach(line, "node count differs from the replayed tree"));
    }
    let listed: BTreeSet<NodeId> = parse_list(r.req("blocked", line)?, line)?.into_iter().collect();
    if &listed != blocked {
        return Err(breach(line, "blocked set differs from the replayed moves"));
    }
    if tree.nodes().ne(0..tree.len() as NodeId) {
        return Err(breach(line, "domain is not an initial segment"));
    }
    if !branching_report(tree).uniquely_branching {
        return Err(breach(line, "two branching nodes share a length"));
    }
    let above = tree.branching_above();
    let mut per_level = BTreeSet::new();
    for &x in blocked {
        let lvl = above[&x];
        if !tree.is_branching(x) || lvl == 0 || !per_level.insert(lvl) {
            return Err(breach(line, format!("blocked node {x} breaks the blocking discipline")));
        }
    }
    if open_leaves(tree, blocked).is_empty() {
        return Err(breach(line, "no open leaf"));
    }
    for (&x, &t) in frozen {
        if tree.subtree_size(x) != t {
            return Err(breach(line, format!("blocked subtree at {x} changed size")));
        }
    }
    Ok(())
}
