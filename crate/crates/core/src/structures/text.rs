//! Line-oriented text format: a `kind=<k> n=<count>` header followed by one
//! relation tuple per line.

use std::fmt::Write as _;

use super::{validate_structure, NodeId, RawStructure, Structure, StructureKind};
use crate::error::{Error, Result};

pub fn write_structure(s: &Structure) -> String {
    let mut out = String::new();
    match s {
        Structure::Poset(t) => {
            let _ = writeln!(out, "kind=poset n={}", t.len());
            for (x, y) in t.leq_pairs() {
                let _ = writeln!(out, "leq {x} {y}");
            }
        }
        Structure::Rpo(t) => {
            let _ = writeln!(out, "kind=rpo n={}", t.len());
            let _ = writeln!(out, "root {}", t.root());
            for (c, p) in t.parent_pairs() {
                let _ = writeln!(out, "p {c} {p}");
            }
            for (x, y) in t.less_pairs() {
                let _ = writeln!(out, "lt {x} {y}");
            }
        }
        Structure::Succ(t) => {
            let _ = writeln!(out, "kind=succ n={}", t.len());
            let _ = writeln!(out, "empty {}", t.empty());
            let _ = writeln!(out, "root {}", t.root());
            for (x, y) in t.s1_pairs() {
                let _ = writeln!(out, "s1 {x} {y}");
            }
            for (x, y) in t.s2_pairs() {
                let _ = writeln!(out, "s2 {x} {y}");
            }
        }
        Structure::Prefix(t) => {
            let _ = writeln!(out, "kind=prefix n={}", t.elements().len());
            for p in t.paths() {
                out.push_str("path");
                for x in p {
                    let _ = write!(out, " {x}");
                }
                out.push('\n');
            }
        }
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_ids(line: usize, toks: &[&str], want: Option<usize>) -> Result<Vec<NodeId>> {
    if let Some(w) = want {
        if toks.len() != w {
            return Err(parse_err(line, format!("expected {w} ids, found {}", toks.len())));
        }
    }
    toks.iter()
        .map(|t| t.parse::<NodeId>().map_err(|_| parse_err(line, format!("bad node id {t:?}"))))
        .collect()
}

/// Parses and validates; definitional failures surface as `Error::Violation`.
pub fn parse_structure(text: &str) -> Result<Structure> {
    let raw = parse_raw(text)?;
    Ok(validate_structure(&raw)?)
}

pub fn parse_raw(text: &str) -> Result<RawStructure> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let mut kind = None;
    let mut count = None;
    for tok in header.split_whitespace() {
        match tok.split_once('=') {
            Some(("kind", k)) => kind = StructureKind::parse(k),
            Some(("n", n)) => count = n.parse::<usize>().ok(),
            _ => return Err(parse_err(hl, format!("unexpected header token {tok:?}"))),
        }
    }
    let kind = kind.ok_or_else(|| parse_err(hl, "header lacks a valid kind"))?;
    let count = count.ok_or_else(|| parse_err(hl, "header lacks a valid n"))?;

    let mut nodes = std::collections::BTreeSet::new();
    let mut pairs_a = Vec::new();
    let mut pairs_b = Vec::new();
    let mut paths = Vec::new();
    let mut c1: Option<NodeId> = None;
    let mut c2: Option<NodeId> = None;
    for (ln, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let (tag, rest) = (toks[0], &toks[1..]);
        match (kind, tag) {
            (StructureKind::Poset, "leq") => {
                let v = parse_ids(ln, rest, Some(2))?;
                nodes.extend(v.iter().copied());
                pairs_a.push((v[0], v[1]));
            }
            (StructureKind::Rpo, "root") | (StructureKind::Succ, "root") => {
                let v = parse_ids(ln, rest, Some(1))?;
                nodes.insert(v[0]);
                c1 = Some(v[0]);
            }
            (StructureKind::Succ, "empty") => {
                let v = parse_ids(ln, rest, Some(1))?;
                nodes.insert(v[0]);
                c2 = Some(v[0]);
            }
            (StructureKind::Rpo, "p") | (StructureKind::Succ, "s1") => {
                let v = parse_ids(ln, rest, Some(2))?;
                nodes.extend(v.iter().copied());
                pairs_a.push((v[0], v[1]));
            }
            (StructureKind::Rpo, "lt") | (StructureKind::Succ, "s2") => {
                let v = parse_ids(ln, rest, Some(2))?;
                nodes.extend(v.iter().copied());
                pairs_b.push((v[0], v[1]));
            }
            (StructureKind::Prefix, "path") => {
                let v = parse_ids(ln, rest, None)?;
                nodes.extend(v.iter().copied());
                paths.push(v);
            }
            _ => return Err(parse_err(ln, format!("unexpected record {tag:?} for kind {}", kind.name()))),
        }
    }
    if nodes.len() != count {
        return Err(parse_err(hl, format!("header says n={count} but {} nodes occur", nodes.len())));
    }
    let nodes: Vec<NodeId> = nodes.into_iter().collect();
    Ok(match kind {
        StructureKind::Poset => RawStructure::Poset { nodes, leq: pairs_a },
        StructureKind::Rpo => RawStructure::Rpo {
            nodes,
            root: c1.ok_or_else(|| parse_err(hl, "missing root record"))?,
            parent: pairs_a,
            less: pairs_b,
        },
        StructureKind::Succ => RawStructure::Succ {
            nodes,
            empty: c2.ok_or_else(|| parse_err(hl, "missing empty record"))?,
            root: c1.ok_or_else(|| parse_err(hl, "missing root record"))?,
            s1: pairs_a,
            s2: pairs_b,
        },
        StructureKind::Prefix => RawStructure::Prefix { paths },
    })
}
