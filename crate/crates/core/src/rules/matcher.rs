use serde::Serialize;

use super::{Condition, PEdge, Rule};
use crate::graph::{End, Metamodel, Model, NodeId, NodeTypeId};

/// An injective binding of a rule's lhs variables, indexed by variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Match {
    pub binding: Vec<NodeId>,
}

/// Backtracking subgraph matcher over one model.
pub(crate) struct Matcher<'a> {
    pub mm: &'a Metamodel,
    pub model: &'a Model,
}

impl<'a> Matcher<'a> {
    pub fn new(mm: &'a Metamodel, model: &'a Model) -> Self {
        Matcher { mm, model }
    }

    fn edge_holds(&self, e: &PEdge, b: &[NodeId]) -> bool {
        self.model.has_edge(e.ty, b[e.src], b[e.tgt])
    }

    /// Extends `binding` (whose first `base` entries are the context) with
    /// nodes of the given types, calling `visit` on each complete binding
    /// until it returns true. Returns whether a visit returned true.
    /// `binding` is restored to length `base` before returning.
    fn search(
        &self,
        binding: &mut Vec<NodeId>,
        nodes: &[NodeTypeId],
        edges: &[PEdge],
        distinct_from: &[usize],
        all_distinct: bool,
        on_bind: &dyn Fn(&mut Vec<NodeId>) -> bool,
        visit: &mut dyn FnMut(&mut Vec<NodeId>) -> bool,
    ) -> bool {
        let base = binding.len();
        // edges among context variables only
        if !edges
            .iter()
            .filter(|e| e.src < base && e.tgt < base)
            .all(|e| self.edge_holds(e, binding))
        {
            return false;
        }
        let found = self.bind(binding, base, nodes, edges, distinct_from, all_distinct, on_bind, visit);
        binding.truncate(base);
        found
    }

    #[allow(clippy::too_many_arguments)]
    fn bind(
        &self,
        binding: &mut Vec<NodeId>,
        base: usize,
        nodes: &[NodeTypeId],
        edges: &[PEdge],
        distinct_from: &[usize],
        all_distinct: bool,
        on_bind: &dyn Fn(&mut Vec<NodeId>) -> bool,
        visit: &mut dyn FnMut(&mut Vec<NodeId>) -> bool,
    ) -> bool {
        let var = binding.len();
        if var == base + nodes.len() {
            return visit(binding);
        }
        let ty = nodes[var - base];
        // an edge to an already bound variable narrows the candidates
        let anchor = edges.iter().find_map(|e| {
            if e.tgt == var && e.src < var {
                Some((e.ty, e.src, End::Source))
            } else if e.src == var && e.tgt < var {
                Some((e.ty, e.tgt, End::Target))
            } else {
                None
            }
        });
        let mut try_candidate = |binding: &mut Vec<NodeId>, cand: NodeId| -> bool {
            let Some(actual) = self.model.node_type(cand) else {
                return false;
            };
            if !self.mm.conforms(actual, ty) {
                return false;
            }
            let clash_ctx = if all_distinct {
                binding[..base].contains(&cand)
            } else {
                distinct_from.iter().any(|&v| binding[v] == cand)
            };
            if clash_ctx || binding[base..].contains(&cand) {
                return false;
            }
            binding.push(cand);
            let ok = edges
                .iter()
                .filter(|e| e.src.max(e.tgt) == var)
                .all(|e| self.edge_holds(e, binding))
                && on_bind(binding);
            let found = ok && self.bind(binding, base, nodes, edges, distinct_from, all_distinct, on_bind, visit);
            binding.pop();
            found
        };
        match anchor {
            Some((et, other, other_end)) => {
                let from = binding[other];
                for cand in self.model.neighbours(from, et, other_end) {
                    if try_candidate(binding, cand) {
                        return true;
                    }
                }
                false
            }
            None => {
                for cand in self.model.nodes_of_type(self.mm, ty) {
                    if try_candidate(binding, cand) {
                        return true;
                    }
                }
                false
            }
        }
    }

    /// Whether `cond` holds as an extension of `binding`.
    pub fn holds(&self, cond: &Condition, binding: &mut Vec<NodeId>) -> bool {
        self.search(
            binding,
            &cond.nodes,
            &cond.edges,
            &cond.distinct_from,
            false,
            &|_| true,
            &mut |b| {
                cond.forbid.iter().all(|c| !self.holds(c, b))
                    && cond.require.iter().all(|c| self.holds(c, b))
            },
        )
    }

    /// Application conditions and the implicit no-parallel-edge check.
    pub fn admissible(&self, rule: &Rule, binding: &mut Vec<NodeId>) -> bool {
        self.no_parallel_edge(rule, binding)
            && rule.nacs.iter().all(|c| !self.holds(c, binding))
            && rule.pacs.iter().all(|c| self.holds(c, binding))
    }

    fn no_parallel_edge(&self, rule: &Rule, binding: &[NodeId]) -> bool {
        let l = rule.lhs.nodes.len();
        for e in &rule.create_edges {
            if e.src < l && e.tgt < l && self.edge_holds(e, binding) {
                let recreated = rule
                    .delete_edges
                    .iter()
                    .any(|&i| rule.lhs.edges[i] == *e);
                if !recreated {
                    return false;
                }
            }
        }
        true
    }

    /// Visits matches of `rule` in lexicographic binding order until `visit`
    /// returns true.
    ///
    /// Each application condition is checked as soon as the last lhs
    /// variable it refers to is bound.
    pub fn matches(&self, rule: &Rule, visit: &mut dyn FnMut(&[NodeId]) -> bool) -> bool {
        let l = rule.lhs.nodes.len();
        let nac_at: Vec<usize> = rule.nacs.iter().map(|c| last_context_var(c, l)).collect();
        let pac_at: Vec<usize> = rule.pacs.iter().map(|c| last_context_var(c, l)).collect();
        let conditions_at = |b: &mut Vec<NodeId>, var: usize| {
            if !nac_at.contains(&var) && !pac_at.contains(&var) {
                return true;
            }
            // condition variables are numbered after the whole lhs; the
            // unbound lhs slots are never referenced
            b.resize(l, UNBOUND);
            let ok = rule.nacs.iter().zip(&nac_at).all(|(c, &at)| at != var || !self.holds(c, b))
                && rule.pacs.iter().zip(&pac_at).all(|(c, &at)| at != var || self.holds(c, b));
            b.truncate(var + 1);
            ok
        };
        let mut binding = Vec::with_capacity(l);
        if l == 0 {
            return self.admissible(rule, &mut binding) && visit(&binding);
        }
        self.search(
            &mut binding,
            &rule.lhs.nodes,
            &rule.lhs.edges,
            &[],
            true,
            &|b| conditions_at(b, b.len() - 1),
            &mut |b| self.no_parallel_edge(rule, b) && visit(b),
        )
    }
}

const UNBOUND: NodeId = NodeId(u64::MAX);

/// Highest context variable (below `ctx`) that `cond` or its nested
/// conditions refer to; 0 if none.
fn last_context_var(cond: &Condition, ctx: usize) -> usize {
    let own = cond
        .edges
        .iter()
        .flat_map(|e| [e.src, e.tgt])
        .chain(cond.distinct_from.iter().copied())
        .filter(|&v| v < ctx);
    let nested = cond
        .forbid
        .iter()
        .chain(&cond.require)
        .map(|c| last_context_var(c, ctx));
    own.chain(nested).max().unwrap_or(0)
}
