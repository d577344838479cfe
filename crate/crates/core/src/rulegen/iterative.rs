use super::RulegenError;
use crate::graph::{Metamodel, NodeTypeId};
use crate::rules::{EditKind, Phase, RepairKind, Rule, Taxonomy};

/// One incidence's contribution to a node rule.
///
/// For create rules the created node is the fragment's only created node;
/// for delete rules it is lhs variable 0. Either way that node is shared
/// when fragments are combined.
#[derive(Clone, Debug)]
pub struct Fragment {
    pub rule: Rule,
    pub repair: RepairKind,
    /// Empty for the trivial fragment (no edge handling needed).
    pub tag: String,
    pub cell: String,
}

/// Merges fragments that share their first `shared` lhs variables and all
/// created nodes.
fn merge(parts: &[&Fragment], shared: usize) -> Rule {
    let mut rule = parts[0].rule.clone();
    rule.lhs.nodes.truncate(shared);
    rule.lhs.edges.clear();
    rule.delete_edges.clear();
    rule.create_edges.clear();
    rule.nacs.clear();
    rule.pacs.clear();
    let total_lhs = shared
        + parts
            .iter()
            .map(|p| p.rule.lhs.nodes.len() - shared)
            .sum::<usize>();
    let mut offset = shared;
    for p in parts {
        let f = &p.rule;
        let lf = f.lhs.nodes.len();
        let map = |v: usize| {
            if v < shared {
                v
            } else if v < lf {
                offset + (v - shared)
            } else {
                total_lhs + (v - lf)
            }
        };
        let shift = total_lhs as isize - lf as isize;
        rule.lhs.nodes.extend_from_slice(&f.lhs.nodes[shared..]);
        let edge_base = rule.lhs.edges.len();
        rule.lhs.edges.extend(f.lhs.edges.iter().map(|e| e.remap(map)));
        rule.delete_edges.extend(f.delete_edges.iter().map(|i| edge_base + i));
        rule.create_edges.extend(f.create_edges.iter().map(|e| e.remap(map)));
        rule.nacs.extend(f.nacs.iter().map(|c| c.remap(lf, &map, shift)));
        rule.pacs.extend(f.pacs.iter().map(|c| c.remap(lf, &map, shift)));
        offset += lf - shared;
    }
    rule
}

/// Cartesian product of per-incidence alternatives for node type `a`,
/// each element merged into one rule carrying the union of conditions.
pub(crate) fn combine(
    mm: &Metamodel,
    a: NodeTypeId,
    edit: EditKind,
    phase: Phase,
    alternatives: &[Vec<Fragment>],
    cap: usize,
) -> Result<Vec<(Rule, Vec<String>)>, RulegenError> {
    let count = alternatives
        .iter()
        .try_fold(1usize, |acc, alt| acc.checked_mul(alt.len()))
        .unwrap_or(usize::MAX);
    if count > cap {
        return Err(RulegenError::CombinationCap {
            node_type: mm.node_type_name(a).to_owned(),
            count,
            cap,
        });
    }
    let shared = match edit {
        EditKind::DeleteNode => 1,
        _ => 0,
    };
    let mut out = Vec::with_capacity(count);
    let mut idx = vec![0usize; alternatives.len()];
    loop {
        let parts: Vec<&Fragment> = idx
            .iter()
            .zip(alternatives)
            .map(|(&i, alt)| &alt[i])
            .collect();
        let mut rule = if parts.is_empty() {
            base_rule(a, edit)
        } else {
            merge(&parts, shared)
        };
        let active: Vec<&&Fragment> = parts.iter().filter(|p| !p.tag.is_empty()).collect();
        let components: Vec<RepairKind> = if active.is_empty() {
            vec![RepairKind::None]
        } else {
            active.iter().map(|p| p.repair).collect()
        };
        let real: Vec<RepairKind> = components
            .iter()
            .copied()
            .filter(|&c| c != RepairKind::None)
            .collect();
        let repair = match real.len() {
            0 => RepairKind::None,
            1 => real[0],
            _ => RepairKind::Iterative,
        };
        let tags: Vec<String> = active.iter().map(|p| p.tag.clone()).collect();
        let mut name = format!("{}_{}", edit.verb(), mm.node_type_name(a));
        if !tags.is_empty() {
            name.push('_');
            name.push_str(&tags.join("+"));
        }
        rule.name = name;
        rule.taxonomy = Taxonomy {
            edit,
            repair,
            phase,
            components,
            tags,
        };
        let cells = parts.iter().map(|p| p.cell.clone()).collect();
        out.push((rule, cells));

        // advance the mixed-radix counter, last incidence fastest
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < alternatives[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

fn base_rule(a: NodeTypeId, edit: EditKind) -> Rule {
    let mut r = Rule::new(
        "",
        Taxonomy {
            edit,
            repair: RepairKind::None,
            phase: Phase::Problem,
            components: vec![RepairKind::None],
            tags: Vec::new(),
        },
    );
    match edit {
        EditKind::DeleteNode => {
            r.lhs.nodes = vec![a];
            r.delete_nodes = vec![0];
        }
        _ => r.create_nodes = vec![a],
    }
    r
}

/// Public form of the combination step: one combined rule per element of
/// the product of `alternatives`.
pub fn generate_iterative_repairs(
    mm: &Metamodel,
    a: NodeTypeId,
    edit: EditKind,
    phase: Phase,
    alternatives: &[Vec<Fragment>],
    cap: usize,
) -> Result<Vec<Rule>, RulegenError> {
    Ok(combine(mm, a, edit, phase, alternatives, cap)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}
