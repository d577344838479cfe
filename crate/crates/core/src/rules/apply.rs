use thiserror::Error;

use super::matcher::{Match, Matcher};
use super::Rule;
use crate::graph::{Attributes, GraphError, Metamodel, Model, NodeId};

#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("stale match for rule `{rule}`: {reason}")]
    Stale { rule: String, reason: String },
    #[error("rule `{rule}` produced an ill-typed model: {source}")]
    Graph {
        rule: String,
        #[source]
        source: GraphError,
    },
}

/// All matches of `rule` in `model`, in lexicographic binding order.
pub fn find_matches(rule: &Rule, mm: &Metamodel, model: &Model) -> Vec<Match> {
    let mut out = Vec::new();
    Matcher::new(mm, model).matches(rule, &mut |b| {
        out.push(Match { binding: b.to_vec() });
        false
    });
    out
}

/// Visits matches in order until `visit` returns true.
pub fn for_each_match(
    rule: &Rule,
    mm: &Metamodel,
    model: &Model,
    visit: &mut dyn FnMut(&[NodeId]) -> bool,
) -> bool {
    Matcher::new(mm, model).matches(rule, visit)
}

pub fn count_matches(rule: &Rule, mm: &Metamodel, model: &Model) -> usize {
    let mut n = 0;
    Matcher::new(mm, model).matches(rule, &mut |_| {
        n += 1;
        false
    });
    n
}

/// Whether `rule` has at least one match; stops at the first one.
pub fn applicable(rule: &Rule, mm: &Metamodel, model: &Model) -> bool {
    Matcher::new(mm, model).matches(rule, &mut |_| true)
}

/// Applies `rule` at `m`, returning the rewritten copy of `model`.
///
/// Deleting a node removes its incident edges. Created nodes receive fresh
/// ids and no attribute values.
pub fn apply(rule: &Rule, mm: &Metamodel, model: &Model, m: &Match) -> Result<Model, ApplyError> {
    let stale = |reason: String| ApplyError::Stale {
        rule: rule.name.clone(),
        reason,
    };
    let b = &m.binding;
    if b.len() != rule.lhs.nodes.len() {
        return Err(stale(format!(
            "binding has {} nodes, lhs has {}",
            b.len(),
            rule.lhs.nodes.len()
        )));
    }
    for (i, (&id, &ty)) in b.iter().zip(&rule.lhs.nodes).enumerate() {
        match model.node_type(id) {
            None => return Err(stale(format!("node {id} is gone"))),
            Some(actual) if !mm.conforms(actual, ty) => {
                return Err(stale(format!("node {id} does not have type {}", mm.node_type_name(ty))))
            }
            Some(_) => {}
        }
        if b[..i].contains(&id) {
            return Err(stale(format!("node {id} bound twice")));
        }
    }
    for e in &rule.lhs.edges {
        if !model.has_edge(e.ty, b[e.src], b[e.tgt]) {
            return Err(stale(format!(
                "edge {} {} -> {} is gone",
                mm.edge_type_name(e.ty),
                b[e.src],
                b[e.tgt]
            )));
        }
    }

    let graph_err = |source: GraphError| ApplyError::Graph {
        rule: rule.name.clone(),
        source,
    };
    let mut out = model.clone();
    for &i in &rule.delete_edges {
        let e = rule.lhs.edges[i];
        out.remove_edge(e.ty, b[e.src], b[e.tgt]);
    }
    for &v in &rule.delete_nodes {
        out.remove_node(b[v]).map_err(graph_err)?;
    }
    let mut ids: Vec<NodeId> = b.clone();
    for &ty in &rule.create_nodes {
        ids.push(out.add_node(mm, ty, Attributes::new()).map_err(graph_err)?);
    }
    for e in &rule.create_edges {
        out.add_edge(mm, e.ty, ids[e.src], ids[e.tgt])
            .map_err(graph_err)?;
    }
    Ok(out)
}
