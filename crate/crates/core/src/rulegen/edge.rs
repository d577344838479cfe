use super::{describe, has_neighbours};
use crate::graph::{ConstraintSet, EdgeTypeId, End, Metamodel, PatternClass, Upper};
use crate::rules::{EditKind, PEdge, Phase, RepairKind, Rule, Taxonomy};

fn edge_rule(
    mm: &Metamodel,
    et: EdgeTypeId,
    edit: EditKind,
    phase: Phase,
    tags: Vec<(&str, RepairKind)>,
) -> Rule {
    let components: Vec<RepairKind> = if tags.is_empty() {
        vec![RepairKind::None]
    } else {
        tags.iter().map(|t| t.1).collect()
    };
    let repair = if components.contains(&RepairKind::Pac) {
        RepairKind::Pac
    } else if components.contains(&RepairKind::Nac) {
        RepairKind::Nac
    } else {
        RepairKind::None
    };
    let tags: Vec<String> = tags.iter().map(|t| t.0.to_owned()).collect();
    let mut name = format!("{}_{}", edit.verb(), mm.edge_type_name(et));
    if !tags.is_empty() {
        name.push('_');
        name.push_str(&tags.join("+"));
    }
    Rule::new(
        name,
        Taxonomy {
            edit,
            repair,
            phase,
            components,
            tags,
        },
    )
}

/// Edge operators for `et`, with its source in the A role.
pub fn generate_edge_rules(
    mm: &Metamodel,
    cs: &ConstraintSet,
    et: EdgeTypeId,
    phase: Phase,
) -> Vec<Rule> {
    edge_rules_with_cells(mm, cs, et, phase)
        .into_iter()
        .map(|(r, _)| r)
        .collect()
}

pub(crate) fn edge_rules_with_cells(
    mm: &Metamodel,
    cs: &ConstraintSet,
    et: EdgeTypeId,
    phase: Phase,
) -> Vec<(Rule, Vec<String>)> {
    let p = PatternClass::oriented(mm, cs, et, End::Source);
    let decl = mm.edge_type(et);
    let (a, b) = (decl.source, decl.target);
    let (n, m, k, l) = (p.n(), p.m(), p.k(), p.l());
    let cell = |what: &str| vec![format!("{what} {} {}", decl.name, describe(n, m, k, l))];
    let mut out = Vec::new();

    if !p.a_fixed && !p.b_fixed {
        // add: A has fewer than m B's, B fewer than l A's
        let mut tags = Vec::new();
        let mut nacs = Vec::new();
        if let Upper::Bounded(m) = m {
            nacs.push(has_neighbours(2, 0, End::Source, et, b, m, Vec::new()));
            tags.push(("nac_a", RepairKind::Nac));
        }
        if let Upper::Bounded(l) = l {
            nacs.push(has_neighbours(2, 1, End::Target, et, a, l, Vec::new()));
            tags.push(("nac_b", RepairKind::Nac));
        }
        let mut r = edge_rule(mm, et, EditKind::AddEdge, phase, tags);
        r.lhs.nodes = vec![a, b];
        r.create_edges = vec![PEdge::new(et, 0, 1)];
        r.nacs = nacs;
        out.push((r, cell("add")));

        // remove: both ends keep their lower bounds
        let mut tags = Vec::new();
        let mut pacs = Vec::new();
        if n > 0 {
            pacs.push(has_neighbours(2, 0, End::Source, et, b, n, vec![1]));
            tags.push(("pac_a", RepairKind::Pac));
        }
        if k > 0 {
            pacs.push(has_neighbours(2, 1, End::Target, et, a, k, vec![0]));
            tags.push(("pac_b", RepairKind::Pac));
        }
        let mut r = edge_rule(mm, et, EditKind::RemoveEdge, phase, tags);
        r.lhs.nodes = vec![a, b];
        r.lhs.edges = vec![PEdge::new(et, 0, 1)];
        r.delete_edges = vec![0];
        r.pacs = pacs;
        out.push((r, cell("remove")));
    }

    if p.b_fixed && !p.a_fixed {
        // change: move B from A (var 0) to A' (var 2)
        let mut tags = Vec::new();
        let mut r_pacs = Vec::new();
        let mut r_nacs = Vec::new();
        if n > 0 {
            r_pacs.push(has_neighbours(3, 0, End::Source, et, b, n, vec![1]));
            tags.push(("pac_a", RepairKind::Pac));
        }
        if let Upper::Bounded(m) = m {
            r_nacs.push(has_neighbours(3, 2, End::Source, et, b, m, Vec::new()));
            tags.push(("nac_a", RepairKind::Nac));
        }
        let mut r = edge_rule(mm, et, EditKind::ChangeEdge, phase, tags);
        r.lhs.nodes = vec![a, b, a];
        r.lhs.edges = vec![PEdge::new(et, 0, 1)];
        r.delete_edges = vec![0];
        r.create_edges = vec![PEdge::new(et, 2, 1)];
        r.pacs = r_pacs;
        r.nacs = r_nacs;
        out.push((r, cell("change")));
    }

    if p.a_fixed {
        // swap: A-B, A'-B' become A-B', A'-B
        let mut r = edge_rule(mm, et, EditKind::SwapEdge, phase, Vec::new());
        r.lhs.nodes = vec![a, b, a, b];
        r.lhs.edges = vec![PEdge::new(et, 0, 1), PEdge::new(et, 2, 3)];
        r.delete_edges = vec![0, 1];
        r.create_edges = vec![PEdge::new(et, 0, 3), PEdge::new(et, 2, 1)];
        out.push((r, cell("swap")));
    }
    out
}
