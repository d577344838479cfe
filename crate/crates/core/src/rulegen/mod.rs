//! Synthesis of atomic consistency-preserving search operators from the
//! multiplicity pattern of every edge type incident to the mutable types.

mod edge;
mod iterative;
mod node;

pub use edge::generate_edge_rules;
pub use iterative::{generate_iterative_repairs, Fragment};
pub use node::{create_fragments, delete_fragments, generate_create_node_rules, generate_delete_node_rules};

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ConstraintSet, EdgeTypeId, End, Metamodel, NodeTypeId};
use crate::rules::{Condition, EditKind, PEdge, Phase, RepairKind, Rule};

pub const DEFAULT_COMBINATION_CAP: usize = 64;

#[derive(Debug, Error)]
pub enum RulegenError {
    #[error("node type `{0}` is abstract and cannot be created or deleted")]
    AbstractNodeType(String),
    #[error("{count} repair combinations for `{node_type}` exceed the cap of {cap}")]
    CombinationCap {
        node_type: String,
        count: usize,
        cap: usize,
    },
    #[error("no generation case for {0}")]
    UnsupportedCell(String),
    #[error("type `{0}` in the generation scope is not declared by the metamodel")]
    ScopeType(String),
}

/// The mutable part of a metamodel.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenerationScope {
    pub node_types: BTreeSet<NodeTypeId>,
    pub edge_types: BTreeSet<EdgeTypeId>,
}

impl GenerationScope {
    pub fn by_name(mm: &Metamodel, nodes: &[&str], edges: &[&str]) -> Result<Self, crate::graph::GraphError> {
        Ok(GenerationScope {
            node_types: nodes.iter().map(|n| mm.node_type_id(n)).collect::<Result<_, _>>()?,
            edge_types: edges.iter().map(|e| mm.edge_type_id(e)).collect::<Result<_, _>>()?,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.node_types.is_empty() && self.edge_types.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenOptions {
    pub combination_cap: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            combination_cap: DEFAULT_COMBINATION_CAP,
        }
    }
}

/// Which pattern cell (and phase) produced a rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub phase: Phase,
    pub cells: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    /// Parallel to `rules`: every generation pass that yielded the rule.
    pub provenance: Vec<Vec<Provenance>>,
}

impl RuleSet {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Whether some pass of `phase` produced rule `i`.
    pub fn produced_in(&self, i: usize, phase: Phase) -> bool {
        self.provenance[i].iter().any(|p| p.phase == phase)
    }

    /// Adds a rule unless a structurally equal one exists, in which case
    /// only the provenance is recorded. Name clashes get a phase suffix.
    pub fn insert(&mut self, mut rule: Rule, prov: Provenance) {
        if let Some(i) = self.rules.iter().position(|r| r.same_structure(&rule)) {
            self.provenance[i].push(prov);
            return;
        }
        if self.rules.iter().any(|r| r.name == rule.name) {
            let suffix = match rule.taxonomy.phase {
                Phase::Problem => "_p1",
                Phase::Solution => "_p2",
            };
            let base = format!("{}{suffix}", rule.name);
            let mut name = base.clone();
            let mut i = 2;
            while self.rules.iter().any(|r| r.name == name) {
                name = format!("{base}_{i}");
                i += 1;
            }
            rule.name = name;
        }
        self.rules.push(rule);
        self.provenance.push(vec![prov]);
    }
}

/// Coarse identity of a rule used to compare against hand-written operator
/// lists: edit kind, the type it mutates (the B type for edge edits) and
/// whether it performs a lower-bound repair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RuleLabel {
    pub edit: EditKind,
    pub subject: String,
    pub lb_repair: bool,
}

pub fn rule_label(mm: &Metamodel, rule: &Rule) -> RuleLabel {
    let subject = match rule.taxonomy.edit {
        EditKind::CreateNode => mm.node_type_name(rule.create_nodes[0]).to_owned(),
        EditKind::DeleteNode => mm.node_type_name(rule.lhs.nodes[0]).to_owned(),
        _ => {
            let e = rule
                .lhs
                .edges
                .first()
                .or(rule.create_edges.first())
                .expect("edge rules touch an edge");
            mm.node_type_name(mm.edge_type(e.ty).target).to_owned()
        }
    };
    RuleLabel {
        edit: rule.taxonomy.edit,
        subject,
        lb_repair: rule
            .taxonomy
            .components
            .iter()
            .any(|c| matches!(c, RepairKind::LbSingle | RepairKind::LbMulti)),
    }
}

/// Runs every generator for one phase over the scope.
pub fn generate_phase(
    mm: &Metamodel,
    cs: &ConstraintSet,
    scope: &GenerationScope,
    phase: Phase,
    opts: GenOptions,
) -> Result<Vec<(Rule, Vec<String>)>, RulegenError> {
    let mut out = Vec::new();
    for &a in &scope.node_types {
        if a.index() >= mm.node_types().len() {
            return Err(RulegenError::ScopeType(format!("#{}", a.0)));
        }
        out.extend(node::create_rules_with_cells(mm, cs, a, phase, opts)?);
        out.extend(node::delete_rules_with_cells(mm, cs, a, phase, opts)?);
    }
    for &et in &scope.edge_types {
        if et.index() >= mm.edge_types().len() {
            return Err(RulegenError::ScopeType(format!("#{}", et.0)));
        }
        out.extend(edge::edge_rules_with_cells(mm, cs, et, phase));
    }
    Ok(out)
}

/// Generates against the base multiplicities, then against the refined
/// ones, and returns the structurally deduplicated union.
pub fn generate_acpsos(
    mm: &Metamodel,
    cs: &ConstraintSet,
    scope: &GenerationScope,
    opts: GenOptions,
) -> Result<RuleSet, RulegenError> {
    let mut set = RuleSet::default();
    for (phase, constraints) in [(Phase::Problem, &ConstraintSet::empty()), (Phase::Solution, cs)] {
        for (rule, cells) in generate_phase(mm, constraints, scope, phase, opts)? {
            set.insert(rule, Provenance { phase, cells });
        }
    }
    Ok(set)
}

/// Generates for a single phase only (no union).
pub fn generate_single_phase(
    mm: &Metamodel,
    cs: &ConstraintSet,
    scope: &GenerationScope,
    phase: Phase,
    opts: GenOptions,
) -> Result<RuleSet, RulegenError> {
    let mut set = RuleSet::default();
    for (rule, cells) in generate_phase(mm, cs, scope, phase, opts)? {
        set.insert(rule, Provenance { phase, cells });
    }
    Ok(set)
}

// ---- shared construction helpers ----

/// Edge of type `et` between the node in the A role (sitting at `a_side`)
/// and the node in the B role.
pub(crate) fn oriented(et: EdgeTypeId, a_side: End, a: usize, b: usize) -> PEdge {
    match a_side {
        End::Source => PEdge::new(et, a, b),
        End::Target => PEdge::new(et, b, a),
    }
}

/// "`anchor` has at least `count` `et`-neighbours of type `other`", where
/// `anchor` sits at `anchor_side`, in a context of `ctx` variables.
pub(crate) fn has_neighbours(
    ctx: usize,
    anchor: usize,
    anchor_side: End,
    et: EdgeTypeId,
    other: NodeTypeId,
    count: u32,
    distinct_from: Vec<usize>,
) -> Condition {
    let count = count as usize;
    Condition {
        nodes: vec![other; count],
        edges: (0..count)
            .map(|i| oriented(et, anchor_side, anchor, ctx + i))
            .collect(),
        distinct_from,
        forbid: Vec::new(),
        require: Vec::new(),
    }
}

pub(crate) fn describe(n: u32, m: crate::graph::Upper, k: u32, l: crate::graph::Upper) -> String {
    format!("n={n},m={m},k={k},l={l}")
}
