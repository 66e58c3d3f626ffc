//! Finite fragments of the tree representations used by the engines.

mod iso;
mod poset;
mod prefix;
mod rpo;
mod succ;
mod text;

use std::fmt;

pub use iso::{is_poset_iso, isomorphic, poset_iso_backtracking, poset_iso_canonical, poset_iso_search, Witness};
pub use poset::{
    attach, branching_report, find_open_leaf, induced_order, level_subtree, BranchingEntry, BranchingReport,
    FinitePosetTree,
};
pub use prefix::PrefixTree;
pub use rpo::RpoTree;
pub use succ::SuccessorTree;
pub use text::{parse_raw, parse_structure, write_structure};

pub type NodeId = u32;

/// Default cap on the number of nodes any engine-built structure may hold.
pub const DEFAULT_NODE_BUDGET: usize = 100_000;

/// The first definitional clause a raw relation table fails, with the nodes
/// that witness the failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub clause: &'static str,
    pub witnesses: Vec<u64>,
}

impl Violation {
    pub fn new(clause: &'static str, witnesses: impl IntoIterator<Item = u64>) -> Self {
        Violation {
            clause,
            witnesses: witnesses.into_iter().collect(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "violation \"{}\" witnessed by {:?}", self.clause, self.witnesses)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    Poset,
    Rpo,
    Succ,
    Prefix,
}

impl StructureKind {
    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Poset => "poset",
            StructureKind::Rpo => "rpo",
            StructureKind::Succ => "succ",
            StructureKind::Prefix => "prefix",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "poset" => Some(StructureKind::Poset),
            "rpo" => Some(StructureKind::Rpo),
            "succ" => Some(StructureKind::Succ),
            "prefix" => Some(StructureKind::Prefix),
            _ => None,
        }
    }
}

/// Raw relation tables, before any definitional check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawStructure {
    Poset {
        nodes: Vec<NodeId>,
        leq: Vec<(NodeId, NodeId)>,
    },
    Rpo {
        nodes: Vec<NodeId>,
        root: NodeId,
        parent: Vec<(NodeId, NodeId)>,
        less: Vec<(NodeId, NodeId)>,
    },
    Succ {
        nodes: Vec<NodeId>,
        empty: NodeId,
        root: NodeId,
        s1: Vec<(NodeId, NodeId)>,
        s2: Vec<(NodeId, NodeId)>,
    },
    Prefix {
        paths: Vec<Vec<NodeId>>,
    },
}

/// A validated finite structure of one of the four kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Structure {
    Poset(FinitePosetTree),
    Rpo(RpoTree),
    Succ(SuccessorTree),
    Prefix(PrefixTree),
}

impl Structure {
    pub fn kind(&self) -> StructureKind {
        match self {
            Structure::Poset(_) => StructureKind::Poset,
            Structure::Rpo(_) => StructureKind::Rpo,
            Structure::Succ(_) => StructureKind::Succ,
            Structure::Prefix(_) => StructureKind::Prefix,
        }
    }
}

/// Checks a raw table against its kind's definition, returning the typed
/// structure or the first violated clause.
pub fn validate_structure(raw: &RawStructure) -> Result<Structure, Violation> {
    match raw {
        RawStructure::Poset { nodes, leq } => {
            FinitePosetTree::from_leq(nodes.iter().copied(), leq.iter().copied()).map(Structure::Poset)
        }
        RawStructure::Rpo {
            nodes,
            root,
            parent,
            less,
        } => RpoTree::from_relations(nodes.iter().copied(), *root, parent, less).map(Structure::Rpo),
        RawStructure::Succ {
            nodes,
            empty,
            root,
            s1,
            s2,
        } => SuccessorTree::from_maps(nodes.iter().copied(), *empty, *root, s1, s2).map(Structure::Succ),
        RawStructure::Prefix { paths } => PrefixTree::from_paths(paths.iter().cloned()).map(Structure::Prefix),
    }
}
