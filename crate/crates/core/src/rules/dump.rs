use serde::Serialize;

use super::{Condition, PEdge, Rule, Taxonomy};
use crate::graph::{Metamodel, NodeTypeId};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarDoc {
    pub var: usize,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeDoc {
    #[serde(rename = "type")]
    pub ty: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphDoc {
    pub nodes: Vec<VarDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeleteDoc {
    pub nodes: Vec<usize>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionDoc {
    pub nodes: Vec<VarDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub distinct_from: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub forbid: Vec<ConditionDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub require: Vec<ConditionDoc>,
}

/// Serializable view of a rule with type names resolved.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleDoc {
    pub name: String,
    pub taxonomy: Taxonomy,
    pub lhs: GraphDoc,
    pub create: GraphDoc,
    pub delete: DeleteDoc,
    pub nacs: Vec<ConditionDoc>,
    pub pacs: Vec<ConditionDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Vec<String>>,
}

fn vars(mm: &Metamodel, first: usize, types: &[NodeTypeId]) -> Vec<VarDoc> {
    types
        .iter()
        .enumerate()
        .map(|(i, &t)| VarDoc {
            var: first + i,
            ty: mm.node_type_name(t).to_owned(),
        })
        .collect()
}

fn edges<'a>(mm: &Metamodel, es: impl IntoIterator<Item = &'a PEdge>) -> Vec<EdgeDoc> {
    es.into_iter()
        .map(|e| EdgeDoc {
            ty: mm.edge_type_name(e.ty).to_owned(),
            source: e.src,
            target: e.tgt,
        })
        .collect()
}

fn condition(mm: &Metamodel, ctx: usize, c: &Condition) -> ConditionDoc {
    let inner = ctx + c.nodes.len();
    ConditionDoc {
        nodes: vars(mm, ctx, &c.nodes),
        edges: edges(mm, &c.edges),
        distinct_from: c.distinct_from.clone(),
        forbid: c.forbid.iter().map(|f| condition(mm, inner, f)).collect(),
        require: c.require.iter().map(|f| condition(mm, inner, f)).collect(),
    }
}

impl RuleDoc {
    pub fn new(mm: &Metamodel, rule: &Rule) -> Self {
        let l = rule.lhs.nodes.len();
        RuleDoc {
            name: rule.name.clone(),
            taxonomy: rule.taxonomy.clone(),
            lhs: GraphDoc {
                nodes: vars(mm, 0, &rule.lhs.nodes),
                edges: edges(mm, &rule.lhs.edges),
            },
            create: GraphDoc {
                nodes: vars(mm, l, &rule.create_nodes),
                edges: edges(mm, &rule.create_edges),
            },
            delete: DeleteDoc {
                nodes: rule.delete_nodes.clone(),
                edges: edges(mm, rule.delete_edges.iter().map(|&i| &rule.lhs.edges[i])),
            },
            nacs: rule.nacs.iter().map(|c| condition(mm, l, c)).collect(),
            pacs: rule.pacs.iter().map(|c| condition(mm, l, c)).collect(),
            provenance: None,
        }
    }
}

pub fn dump_rules(mm: &Metamodel, rules: &[Rule]) -> Vec<RuleDoc> {
    rules.iter().map(|r| RuleDoc::new(mm, r)).collect()
}
