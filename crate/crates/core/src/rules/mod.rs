//! Graph transformation rules with nested application conditions.
//!
//! Pattern variables are plain indices. A rule's left-hand side binds
//! variables `0..L`; created nodes are numbered `L..L+C`. A [`Condition`]
//! evaluated in a context of `c` bound variables numbers its own nodes
//! from `c` upwards, and its nested conditions see the outer context plus
//! those own nodes.

mod apply;
mod dump;
mod matcher;

pub use apply::{applicable, apply, find_matches, for_each_match, count_matches, ApplyError};
pub use dump::{dump_rules, RuleDoc};
pub use matcher::Match;

use std::fmt;

use serde::Serialize;

use crate::graph::{EdgeTypeId, NodeTypeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EditKind {
    CreateNode,
    DeleteNode,
    AddEdge,
    RemoveEdge,
    ChangeEdge,
    SwapEdge,
}

impl EditKind {
    pub fn verb(self) -> &'static str {
        match self {
            EditKind::CreateNode => "create",
            EditKind::DeleteNode => "delete",
            EditKind::AddEdge => "add",
            EditKind::RemoveEdge => "remove",
            EditKind::ChangeEdge => "change",
            EditKind::SwapEdge => "swap",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RepairKind {
    None,
    Nac,
    Pac,
    LbSingle,
    LbMulti,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Phase {
    Problem,
    Solution,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Problem => "problem",
            Phase::Solution => "solution",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Taxonomy {
    pub edit: EditKind,
    pub repair: RepairKind,
    pub phase: Phase,
    /// Per-incidence repairs that were combined; a single entry for
    /// non-combined rules.
    pub components: Vec<RepairKind>,
    /// Generator variant tags, e.g. `attach_nac`, `lb_single`, `pac_a`.
    pub tags: Vec<String>,
}

/// A pattern edge between two variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PEdge {
    pub ty: EdgeTypeId,
    pub src: usize,
    pub tgt: usize,
}

impl PEdge {
    pub fn new(ty: EdgeTypeId, src: usize, tgt: usize) -> Self {
        PEdge { ty, src, tgt }
    }

    pub(crate) fn remap(self, f: impl Fn(usize) -> usize) -> Self {
        PEdge {
            ty: self.ty,
            src: f(self.src),
            tgt: f(self.tgt),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub nodes: Vec<NodeTypeId>,
    pub edges: Vec<PEdge>,
}

/// An existential extension of a context binding.
///
/// Satisfied iff the own nodes can be bound (pairwise distinct, and
/// distinct from every context variable listed in `distinct_from`) so that
/// all `edges` exist, no `forbid` condition holds and every `require`
/// condition holds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Condition {
    pub nodes: Vec<NodeTypeId>,
    pub edges: Vec<PEdge>,
    pub distinct_from: Vec<usize>,
    pub forbid: Vec<Condition>,
    pub require: Vec<Condition>,
}

impl Condition {
    /// Shifts context references by `map` and own variables by `shift`,
    /// given the original context size `ctx`.
    pub(crate) fn remap(&self, ctx: usize, map: &dyn Fn(usize) -> usize, shift: isize) -> Self {
        let f = |v: usize| {
            if v < ctx {
                map(v)
            } else {
                (v as isize + shift) as usize
            }
        };
        let own = self.nodes.len();
        Condition {
            nodes: self.nodes.clone(),
            edges: self.edges.iter().map(|e| e.remap(f)).collect(),
            distinct_from: self.distinct_from.iter().map(|&v| map(v)).collect(),
            forbid: self
                .forbid
                .iter()
                .map(|c| c.remap(ctx + own, &f, shift))
                .collect(),
            require: self
                .require
                .iter()
                .map(|c| c.remap(ctx + own, &f, shift))
                .collect(),
        }
    }

    fn depth_ok(&self, ctx: usize) -> bool {
        let total = ctx + self.nodes.len();
        self.edges.iter().all(|e| e.src < total && e.tgt < total)
            && self.distinct_from.iter().all(|&v| v < ctx)
            && self
                .forbid
                .iter()
                .chain(&self.require)
                .all(|c| c.depth_ok(total))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub name: String,
    pub lhs: Pattern,
    pub delete_nodes: Vec<usize>,
    /// Indices into `lhs.edges`.
    pub delete_edges: Vec<usize>,
    pub create_nodes: Vec<NodeTypeId>,
    pub create_edges: Vec<PEdge>,
    pub nacs: Vec<Condition>,
    pub pacs: Vec<Condition>,
    pub taxonomy: Taxonomy,
}

impl Rule {
    pub fn new(name: impl Into<String>, taxonomy: Taxonomy) -> Self {
        Rule {
            name: name.into(),
            lhs: Pattern::default(),
            delete_nodes: Vec::new(),
            delete_edges: Vec::new(),
            create_nodes: Vec::new(),
            create_edges: Vec::new(),
            nacs: Vec::new(),
            pacs: Vec::new(),
            taxonomy,
        }
    }

    /// Equality of everything but the name and taxonomy.
    pub fn same_structure(&self, other: &Rule) -> bool {
        self.lhs == other.lhs
            && self.delete_nodes == other.delete_nodes
            && self.delete_edges == other.delete_edges
            && self.create_nodes == other.create_nodes
            && self.create_edges == other.create_edges
            && self.nacs == other.nacs
            && self.pacs == other.pacs
    }

    /// Checks the structural well-formedness of the rule's variable usage.
    pub fn validate(&self) -> Result<(), String> {
        let l = self.lhs.nodes.len();
        let total = l + self.create_nodes.len();
        if let Some(e) = self.lhs.edges.iter().find(|e| e.src >= l || e.tgt >= l) {
            return Err(format!("lhs edge {e:?} references a non-lhs variable"));
        }
        if let Some(v) = self.delete_nodes.iter().find(|&&v| v >= l) {
            return Err(format!("deleted node {v} is not in the lhs"));
        }
        if let Some(i) = self.delete_edges.iter().find(|&&i| i >= self.lhs.edges.len()) {
            return Err(format!("deleted edge {i} is not in the lhs"));
        }
        for e in &self.create_edges {
            if e.src >= total || e.tgt >= total {
                return Err(format!("created edge {e:?} references an unknown variable"));
            }
            if self.delete_nodes.contains(&e.src) || self.delete_nodes.contains(&e.tgt) {
                return Err(format!("created edge {e:?} touches a deleted node"));
            }
        }
        for c in self.nacs.iter().chain(&self.pacs) {
            if !c.depth_ok(l) {
                return Err(format!("condition references an unknown variable: {c:?}"));
            }
        }
        Ok(())
    }
}
