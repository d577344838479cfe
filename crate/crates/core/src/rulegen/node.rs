use super::iterative::{combine, Fragment};
use super::{describe, has_neighbours, oriented, GenOptions, RulegenError};
use crate::graph::{ConstraintSet, EdgeTypeId, End, Metamodel, NodeTypeId, PatternClass, Upper};
use crate::rules::{Condition, EditKind, Phase, RepairKind, Rule, Taxonomy};

fn blank(edit: EditKind) -> Rule {
    Rule::new(
        "",
        Taxonomy {
            edit,
            repair: RepairKind::None,
            phase: Phase::Problem,
            components: Vec::new(),
            tags: Vec::new(),
        },
    )
}

fn fragment(rule: Rule, repair: RepairKind, tag: &str, cell: String) -> Fragment {
    Fragment {
        rule,
        repair,
        tag: tag.to_owned(),
        cell,
    }
}

struct Incidence {
    et: EdgeTypeId,
    a_side: End,
    /// Declared type at the A end (what B counts).
    a_end_ty: NodeTypeId,
    b_ty: NodeTypeId,
    n: u32,
    m: Upper,
    k: u32,
    l: Upper,
    p: PatternClass,
}

impl Incidence {
    fn new(mm: &Metamodel, cs: &ConstraintSet, et: EdgeTypeId, a_side: End) -> Self {
        let p = PatternClass::oriented(mm, cs, et, a_side);
        let decl = mm.edge_type(et);
        Incidence {
            et,
            a_side,
            a_end_ty: decl.end_type(a_side),
            b_ty: decl.end_type(a_side.opposite()),
            n: p.n(),
            m: p.m(),
            k: p.k(),
            l: p.l(),
            p,
        }
    }

    fn cell(&self, mm: &Metamodel, what: &str) -> String {
        format!(
            "{what} {}:{} {}",
            mm.edge_type_name(self.et),
            self.a_side,
            describe(self.n, self.m, self.k, self.l)
        )
    }

    fn b_end(&self) -> End {
        self.a_side.opposite()
    }
}

/// Alternatives for creating an `a` node with respect to one incidence;
/// `None` when no create rule may exist (both ends fixed).
pub fn create_fragments(
    mm: &Metamodel,
    cs: &ConstraintSet,
    a: NodeTypeId,
    et: EdgeTypeId,
    a_side: End,
) -> Option<Vec<Fragment>> {
    let inc = Incidence::new(mm, cs, et, a_side);
    if inc.p.a_fixed && inc.p.b_fixed {
        return None;
    }
    let n = inc.n as usize;
    if n == 0 {
        let mut r = blank(EditKind::CreateNode);
        r.create_nodes = vec![a];
        return Some(vec![fragment(r, RepairKind::None, "", inc.cell(mm, "create n=0"))]);
    }
    let mut out = Vec::new();
    if inc.p.b_fixed {
        out.push(create_lb_single(mm, &inc, a));
        if n > 1 {
            out.push(create_lb_multi(mm, &inc, a));
        }
        return Some(out);
    }
    match inc.l {
        Upper::Unbounded => out.push(create_attach(mm, &inc, a, false)),
        Upper::Bounded(_) => {
            out.push(create_attach(mm, &inc, a, true));
            if !inc.p.a_fixed {
                out.push(create_lb_single(mm, &inc, a));
                if n > 1 {
                    out.push(create_lb_multi(mm, &inc, a));
                }
            }
        }
    }
    Some(out)
}

/// Create A and connect it to n existing B's; with `nac`, no chosen B may
/// already have l A's.
fn create_attach(mm: &Metamodel, inc: &Incidence, a: NodeTypeId, nac: bool) -> Fragment {
    let n = inc.n as usize;
    let mut r = blank(EditKind::CreateNode);
    r.lhs.nodes = vec![inc.b_ty; n];
    r.create_nodes = vec![a];
    r.create_edges = (0..n).map(|i| oriented(inc.et, inc.a_side, n, i)).collect();
    if nac {
        let l = inc.l.finite().expect("bounded l");
        r.nacs = (0..n)
            .map(|i| has_neighbours(n, i, inc.b_end(), inc.et, inc.a_end_ty, l, Vec::new()))
            .collect();
        fragment(r, RepairKind::Nac, "attach_nac", inc.cell(mm, "create attach+nac"))
    } else {
        fragment(r, RepairKind::None, "attach", inc.cell(mm, "create attach"))
    }
}

/// Create A taking n B's from one donor A, which must keep at least n.
fn create_lb_single(mm: &Metamodel, inc: &Incidence, a: NodeTypeId) -> Fragment {
    let n = inc.n as usize;
    let mut r = blank(EditKind::CreateNode);
    r.lhs.nodes = std::iter::once(a).chain(std::iter::repeat(inc.b_ty).take(n)).collect();
    r.lhs.edges = (1..=n).map(|i| oriented(inc.et, inc.a_side, 0, i)).collect();
    r.delete_edges = (0..n).collect();
    r.create_nodes = vec![a];
    let created = n + 1;
    r.create_edges = (1..=n)
        .map(|i| oriented(inc.et, inc.a_side, created, i))
        .collect();
    r.pacs = vec![has_neighbours(
        n + 1,
        0,
        inc.a_side,
        inc.et,
        inc.b_ty,
        inc.n,
        (1..=n).collect(),
    )];
    fragment(r, RepairKind::LbSingle, "lb_single", inc.cell(mm, "create lb single"))
}

/// Create A taking one B from each of n distinct donors.
fn create_lb_multi(mm: &Metamodel, inc: &Incidence, a: NodeTypeId) -> Fragment {
    let n = inc.n as usize;
    let mut r = blank(EditKind::CreateNode);
    r.lhs.nodes = std::iter::repeat(a)
        .take(n)
        .chain(std::iter::repeat(inc.b_ty).take(n))
        .collect();
    r.lhs.edges = (0..n)
        .map(|i| oriented(inc.et, inc.a_side, i, n + i))
        .collect();
    r.delete_edges = (0..n).collect();
    r.create_nodes = vec![a];
    r.create_edges = (0..n)
        .map(|i| oriented(inc.et, inc.a_side, 2 * n, n + i))
        .collect();
    r.pacs = (0..n)
        .map(|i| has_neighbours(2 * n, i, inc.a_side, inc.et, inc.b_ty, inc.n, vec![n + i]))
        .collect();
    fragment(r, RepairKind::LbMulti, "lb_multi", inc.cell(mm, "create lb multi"))
}

/// Alternatives for deleting an `a` node with respect to one incidence;
/// `None` when no delete rule may exist (both ends fixed).
pub fn delete_fragments(
    mm: &Metamodel,
    cs: &ConstraintSet,
    a: NodeTypeId,
    et: EdgeTypeId,
    a_side: End,
) -> Option<Vec<Fragment>> {
    let inc = Incidence::new(mm, cs, et, a_side);
    if inc.p.a_fixed && inc.p.b_fixed {
        return None;
    }
    let mut r = blank(EditKind::DeleteNode);
    r.lhs.nodes = vec![a];
    r.delete_nodes = vec![0];
    if inc.k == 0 {
        return Some(vec![fragment(r, RepairKind::None, "", inc.cell(mm, "delete k=0"))]);
    }
    if !inc.p.b_fixed {
        // no B adjacent to A may be left with fewer than k other A's
        r.nacs = vec![Condition {
            nodes: vec![inc.b_ty],
            edges: vec![oriented(inc.et, inc.a_side, 0, 1)],
            distinct_from: vec![0],
            forbid: vec![has_neighbours(
                2,
                1,
                inc.b_end(),
                inc.et,
                inc.a_end_ty,
                inc.k,
                vec![0],
            )],
            require: Vec::new(),
        }];
        return Some(vec![fragment(r, RepairKind::Pac, "pac", inc.cell(mm, "delete guard"))]);
    }
    if inc.n == 0 {
        // only A's without B's can go without a receiver
        r.nacs = vec![has_neighbours(1, 0, inc.a_side, inc.et, inc.b_ty, 1, Vec::new())];
        return Some(vec![fragment(
            r,
            RepairKind::LbSingle,
            "lb_single",
            inc.cell(mm, "delete lb single n=0"),
        )]);
    }
    let mut out = vec![delete_lb_single(mm, &inc, a)];
    if inc.n >= 2 && inc.k > 1 {
        out.push(delete_lb_multi(mm, &inc, a));
    }
    Some(out)
}

/// Lhs of a reassigning delete: A, its n B's, then `receivers` A's.
fn delete_reassign_base(inc: &Incidence, a: NodeTypeId, receivers: usize) -> Rule {
    let n = inc.n as usize;
    let mut r = blank(EditKind::DeleteNode);
    r.lhs.nodes = std::iter::once(a)
        .chain(std::iter::repeat(inc.b_ty).take(n))
        .chain(std::iter::repeat(a).take(receivers))
        .collect();
    r.lhs.edges = (1..=n).map(|i| oriented(inc.et, inc.a_side, 0, i)).collect();
    r.delete_nodes = vec![0];
    let ctx = r.lhs.nodes.len();
    // A has exactly these n B's
    r.nacs = vec![has_neighbours(
        ctx,
        0,
        inc.a_side,
        inc.et,
        inc.b_ty,
        1,
        (1..=n).collect(),
    )];
    r
}

/// Delete A and hand all its B's to one other A.
fn delete_lb_single(mm: &Metamodel, inc: &Incidence, a: NodeTypeId) -> Fragment {
    let n = inc.n as usize;
    let mut r = delete_reassign_base(inc, a, 1);
    let recv = n + 1;
    r.create_edges = (1..=n)
        .map(|i| oriented(inc.et, inc.a_side, recv, i))
        .collect();
    let mut tag = "lb_single";
    if let Upper::Bounded(m) = inc.m {
        r.nacs.push(has_neighbours(
            n + 2,
            recv,
            inc.a_side,
            inc.et,
            inc.b_ty,
            m - inc.n + 1,
            Vec::new(),
        ));
        tag = "lb_single_nac";
    }
    fragment(r, RepairKind::LbSingle, tag, inc.cell(mm, "delete lb single"))
}

/// Delete A and hand each of its n B's to a different A.
fn delete_lb_multi(mm: &Metamodel, inc: &Incidence, a: NodeTypeId) -> Fragment {
    let n = inc.n as usize;
    let mut r = delete_reassign_base(inc, a, n);
    r.create_edges = (1..=n)
        .map(|i| oriented(inc.et, inc.a_side, n + i, i))
        .collect();
    let mut tag = "lb_multi";
    if let Upper::Bounded(m) = inc.m {
        for i in 1..=n {
            r.nacs.push(has_neighbours(
                2 * n + 1,
                n + i,
                inc.a_side,
                inc.et,
                inc.b_ty,
                m,
                Vec::new(),
            ));
        }
        tag = "lb_multi_nac";
    }
    fragment(r, RepairKind::LbMulti, tag, inc.cell(mm, "delete lb multi"))
}

fn check_concrete(mm: &Metamodel, a: NodeTypeId) -> Result<(), RulegenError> {
    if a.index() >= mm.node_types().len() {
        return Err(RulegenError::ScopeType(format!("#{}", a.0)));
    }
    if mm.node_type(a).is_abstract {
        return Err(RulegenError::AbstractNodeType(mm.node_type_name(a).to_owned()));
    }
    Ok(())
}

type Gen = fn(&Metamodel, &ConstraintSet, NodeTypeId, EdgeTypeId, End) -> Option<Vec<Fragment>>;

fn node_rules(
    mm: &Metamodel,
    cs: &ConstraintSet,
    a: NodeTypeId,
    phase: Phase,
    opts: GenOptions,
    edit: EditKind,
    gen: Gen,
) -> Result<Vec<(Rule, Vec<String>)>, RulegenError> {
    check_concrete(mm, a)?;
    let mut alternatives = Vec::new();
    for (et, side) in mm.incidences(a) {
        match gen(mm, cs, a, et, side) {
            Some(alts) => alternatives.push(alts),
            None => return Ok(Vec::new()),
        }
    }
    combine(mm, a, edit, phase, &alternatives, opts.combination_cap)
}

pub(crate) fn create_rules_with_cells(
    mm: &Metamodel,
    cs: &ConstraintSet,
    a: NodeTypeId,
    phase: Phase,
    opts: GenOptions,
) -> Result<Vec<(Rule, Vec<String>)>, RulegenError> {
    node_rules(mm, cs, a, phase, opts, EditKind::CreateNode, create_fragments)
}

pub(crate) fn delete_rules_with_cells(
    mm: &Metamodel,
    cs: &ConstraintSet,
    a: NodeTypeId,
    phase: Phase,
    opts: GenOptions,
) -> Result<Vec<(Rule, Vec<String>)>, RulegenError> {
    node_rules(mm, cs, a, phase, opts, EditKind::DeleteNode, delete_fragments)
}

/// Create-node operators for `a` over all its incidences.
pub fn generate_create_node_rules(
    mm: &Metamodel,
    cs: &ConstraintSet,
    a: NodeTypeId,
    phase: Phase,
    opts: GenOptions,
) -> Result<Vec<Rule>, RulegenError> {
    Ok(create_rules_with_cells(mm, cs, a, phase, opts)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}

/// Delete-node operators for `a` over all its incidences.
pub fn generate_delete_node_rules(
    mm: &Metamodel,
    cs: &ConstraintSet,
    a: NodeTypeId,
    phase: Phase,
    opts: GenOptions,
) -> Result<Vec<Rule>, RulegenError> {
    Ok(delete_rules_with_cells(mm, cs, a, phase, opts)?
        .into_iter()
        .map(|(r, _)| r)
        .collect())
}
