//! Test support: bounded exhaustive enumeration of consistent models,
//! random synthetic metamodels and random consistent case-study models.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{Attributes, ConstraintSet, EdgeTypeId, End, Metamodel, Model, Multiplicity, NodeId, NodeTypeId};
use crate::problems::{PackKind, ProblemPack};
use crate::rulegen::GenerationScope;

/// Bounds of an exhaustive enumeration.
#[derive(Clone, Debug)]
pub struct EnumCaps {
    /// Inclusive (min, max) node count per node type, indexed by type id.
    /// Abstract types are ignored.
    pub counts: Vec<(usize, usize)>,
    /// Edge types left empty in every enumerated model.
    pub skip_edges: BTreeSet<EdgeTypeId>,
    /// Give up once this many models have been produced.
    pub limit: usize,
}

impl EnumCaps {
    pub fn uniform(mm: &Metamodel, max: usize, limit: usize) -> Self {
        EnumCaps {
            counts: vec![(0, max); mm.node_types().len()],
            skip_edges: BTreeSet::new(),
            limit,
        }
    }

    pub fn set(&mut self, mm: &Metamodel, ty: &str, min: usize, max: usize) -> &mut Self {
        let id = mm.node_type_id(ty).expect("known node type");
        self.counts[id.index()] = (min, max);
        self
    }

    pub fn skip(&mut self, mm: &Metamodel, et: &str) -> &mut Self {
        self.skip_edges.insert(mm.edge_type_id(et).expect("known edge type"));
        self
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct LimitExceeded;

struct Slot {
    et: EdgeTypeId,
    src: usize,
    tgt: usize,
}

/// Per (node, edge type, end) counters.
struct Tally {
    current: Vec<usize>,
    remaining: Vec<usize>,
    lower: Vec<u32>,
    upper: Vec<Option<u32>>,
}

impl Tally {
    fn key(&self, node: usize, et: EdgeTypeId, end: End, edge_types: usize) -> usize {
        (node * edge_types + et.index()) * 2 + usize::from(end == End::Target)
    }
}

/// Visits every model within `caps` that satisfies all effective bounds
/// of `cs`, and returns how many there were. Self-loops are never
/// enumerated. Node ids are assigned type by type in id order.
pub fn enumerate_consistent(
    mm: &Metamodel,
    cs: &ConstraintSet,
    caps: &EnumCaps,
    visit: &mut dyn FnMut(&Model),
) -> Result<usize, LimitExceeded> {
    let types: Vec<NodeTypeId> = mm
        .node_types()
        .filter(|(_, t)| !t.is_abstract)
        .map(|(id, _)| id)
        .collect();
    let mut counts = vec![0usize; types.len()];
    for (i, &t) in types.iter().enumerate() {
        counts[i] = caps.counts[t.index()].0;
    }
    let mut produced = 0;
    loop {
        let nodes: Vec<NodeTypeId> = types
            .iter()
            .zip(&counts)
            .flat_map(|(&t, &c)| std::iter::repeat(t).take(c))
            .collect();
        if edge_totals_feasible(mm, cs, caps, &nodes) {
            enumerate_edges(mm, cs, caps, &nodes, &mut produced, visit)?;
        }
        // odometer over the count vector
        let mut i = 0;
        loop {
            if i == types.len() {
                return Ok(produced);
            }
            let (lo, hi) = caps.counts[types[i].index()];
            if counts[i] < hi {
                counts[i] += 1;
                break;
            }
            counts[i] = lo;
            i += 1;
        }
    }
}

/// Necessary condition on the node counts: for every edge type some edge
/// total fits both the per-source and the per-target bounds.
fn edge_totals_feasible(mm: &Metamodel, cs: &ConstraintSet, caps: &EnumCaps, nodes: &[NodeTypeId]) -> bool {
    mm.edge_types().all(|(et, e)| {
        let sources = nodes.iter().filter(|&&t| mm.conforms(t, e.source)).count();
        let targets = nodes.iter().filter(|&&t| mm.conforms(t, e.target)).count();
        let both = nodes
            .iter()
            .filter(|&&t| mm.conforms(t, e.source) && mm.conforms(t, e.target))
            .count();
        let slots = if caps.skip_edges.contains(&et) {
            0
        } else {
            sources * targets - both
        };
        let mut lo = 0;
        let mut hi = slots;
        for (end, count) in [(End::Source, sources), (End::Target, targets)] {
            let bound = cs.bound(mm, et, end);
            lo = lo.max(count * bound.lower() as usize);
            if let Some(u) = bound.upper().finite() {
                hi = hi.min(count * u as usize);
            }
        }
        lo <= hi
    })
}

fn enumerate_edges(
    mm: &Metamodel,
    cs: &ConstraintSet,
    caps: &EnumCaps,
    nodes: &[NodeTypeId],
    produced: &mut usize,
    visit: &mut dyn FnMut(&Model),
) -> Result<(), LimitExceeded> {
    let ne = mm.edge_types().len();
    let mut slots = Vec::new();
    for (et, e) in mm.edge_types() {
        if caps.skip_edges.contains(&et) {
            continue;
        }
        for (s, &st) in nodes.iter().enumerate() {
            for (t, &tt) in nodes.iter().enumerate() {
                if s != t && mm.conforms(st, e.source) && mm.conforms(tt, e.target) {
                    slots.push(Slot { et, src: s, tgt: t });
                }
            }
        }
    }
    let size = nodes.len() * ne * 2;
    let mut tally = Tally {
        current: vec![0; size],
        remaining: vec![0; size],
        lower: vec![0; size],
        upper: vec![None; size],
    };
    for (node, &ty) in nodes.iter().enumerate() {
        for (et, e) in mm.edge_types() {
            for end in [End::Source, End::Target] {
                if !mm.conforms(ty, e.end_type(end)) {
                    continue;
                }
                let k = tally.key(node, et, end, ne);
                let bound = cs.bound(mm, et, end);
                tally.lower[k] = bound.lower();
                tally.upper[k] = bound.upper().finite();
            }
        }
    }
    for s in &slots {
        let a = tally.key(s.src, s.et, End::Source, ne);
        let b = tally.key(s.tgt, s.et, End::Target, ne);
        tally.remaining[a] += 1;
        tally.remaining[b] += 1;
    }
    // a node with an unsatisfiable lower bound ends the search early
    if (0..size).any(|k| (tally.remaining[k] as u32) < tally.lower[k]) {
        return Ok(());
    }
    let mut chosen = Vec::new();
    descend(mm, nodes, &slots, 0, &mut tally, &mut chosen, caps.limit, produced, visit)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    mm: &Metamodel,
    nodes: &[NodeTypeId],
    slots: &[Slot],
    i: usize,
    tally: &mut Tally,
    chosen: &mut Vec<usize>,
    limit: usize,
    produced: &mut usize,
    visit: &mut dyn FnMut(&Model),
) -> Result<(), LimitExceeded> {
    if i == slots.len() {
        if *produced >= limit {
            return Err(LimitExceeded);
        }
        *produced += 1;
        let mut model = Model::new();
        for (n, &ty) in nodes.iter().enumerate() {
            model
                .insert_node(mm, NodeId(n as u64), ty, Attributes::new())
                .expect("concrete type");
        }
        for &c in chosen.iter() {
            let s = &slots[c];
            model
                .add_edge(mm, s.et, NodeId(s.src as u64), NodeId(s.tgt as u64))
                .expect("typed slot");
        }
        visit(&model);
        return Ok(());
    }
    let ne = mm.edge_types().len();
    let s = &slots[i];
    let a = tally.key(s.src, s.et, End::Source, ne);
    let b = tally.key(s.tgt, s.et, End::Target, ne);
    tally.remaining[a] -= 1;
    tally.remaining[b] -= 1;
    // absent
    let ok = |k: usize, t: &Tally| t.current[k] + t.remaining[k] >= t.lower[k] as usize;
    if ok(a, tally) && ok(b, tally) {
        descend(mm, nodes, slots, i + 1, tally, chosen, limit, produced, visit)?;
    }
    // present
    let fits = |k: usize, t: &Tally| t.upper[k].map_or(true, |u| t.current[k] < u as usize);
    if fits(a, tally) && fits(b, tally) {
        tally.current[a] += 1;
        tally.current[b] += 1;
        chosen.push(i);
        let r = descend(mm, nodes, slots, i + 1, tally, chosen, limit, produced, visit);
        chosen.pop();
        tally.current[a] -= 1;
        tally.current[b] -= 1;
        r?;
    }
    tally.remaining[a] += 1;
    tally.remaining[b] += 1;
    Ok(())
}

/// A randomly drawn metamodel with refinements, everything in scope.
pub struct SyntheticCase {
    pub metamodel: Metamodel,
    pub constraints: ConstraintSet,
    pub scope: GenerationScope,
}

const PALETTE: [(u32, Option<u32>); 8] = [
    (0, Some(1)),
    (0, Some(2)),
    (0, None),
    (1, Some(1)),
    (1, Some(2)),
    (1, None),
    (2, Some(2)),
    (2, None),
];

fn mult((lo, hi): (u32, Option<u32>)) -> Multiplicity {
    match hi {
        Some(h) => Multiplicity::range(lo, h),
        None => Multiplicity::at_least(lo),
    }
}

/// Two or three concrete node types joined by one to three edge types with
/// bounds from a small palette; each end is refined with probability 1/3.
pub fn random_metamodel(rng: &mut impl Rng) -> SyntheticCase {
    let types = rng.gen_range(2..=3);
    let edges = rng.gen_range(1..=3);
    let mut b = Metamodel::builder();
    for t in 0..types {
        b = b.node_type(&format!("T{t}"));
    }
    for e in 0..edges {
        let s = rng.gen_range(0..types);
        let t = rng.gen_range(0..types);
        let ps = mult(*PALETTE.choose(rng).expect("non-empty"));
        let pt = mult(*PALETTE.choose(rng).expect("non-empty"));
        b = b.edge_type(&format!("e{e}"), &format!("T{s}"), &format!("T{t}"), ps, pt);
    }
    let mm = b.build().expect("palette bounds are valid");
    let mut refinements = Vec::new();
    for (et, e) in mm.edge_types() {
        for end in [End::Source, End::Target] {
            if rng.gen_range(0..3) == 0 {
                let base = e.bound(end);
                let narrower: Vec<Multiplicity> = PALETTE
                    .iter()
                    .map(|&p| mult(p))
                    .filter(|m| m.narrows(&base) && *m != base)
                    .collect();
                if let Some(&m) = narrower.choose(rng) {
                    refinements.push((et, end, m));
                }
            }
        }
    }
    let cs = ConstraintSet::new(&mm, refinements).expect("narrowing refinements");
    let scope = GenerationScope {
        node_types: mm.node_types().map(|(id, _)| id).collect(),
        edge_types: mm.edge_types().map(|(id, _)| id).collect(),
    };
    SyntheticCase {
        metamodel: mm,
        constraints: cs,
        scope,
    }
}

/// Enumeration caps used for the case-study packs: one root, no
/// unconstrained dependency edges, and at most six nodes of every mutable
/// type (features split three methods, three attributes).
pub fn case_study_caps(pack: &ProblemPack) -> EnumCaps {
    let mm = &*pack.metamodel;
    let mut caps = EnumCaps::uniform(mm, 0, usize::MAX);
    match pack.kind {
        PackKind::Cra => {
            caps.set(mm, "ClassModel", 1, 1)
                .set(mm, "Class", 0, 6)
                .set(mm, "Method", 0, 3)
                .set(mm, "Attribute", 0, 3)
                .skip(mm, "dataDependency")
                .skip(mm, "functionalDependency");
        }
        PackKind::Sp => {
            caps.set(mm, "Plan", 1, 1).set(mm, "Sprint", 0, 6).set(mm, "WorkItem", 0, 6);
        }
        PackKind::Nrp => {
            caps.set(mm, "Solution", 1, 1)
                .set(mm, "SoftwareArtifact", 0, 6)
                .skip(mm, "dependsOn");
        }
    }
    caps
}

/// A random model of roughly `nodes` nodes that satisfies the pack's
/// solution constraints.
pub fn random_solution_model(pack: &ProblemPack, nodes: usize, rng: &mut impl Rng) -> Model {
    let mm = &*pack.metamodel;
    let seed: u64 = rng.gen();
    match pack.kind {
        PackKind::Cra => {
            let features = (nodes * 3 / 5).max(2);
            let (attrs, methods) = (features / 2, features - features / 2);
            let mut inst = pack
                .generate_instance(&[attrs, methods, attrs.min(methods * attrs), methods.saturating_sub(1)], seed)
                .expect("feasible counts");
            let classes = (nodes - 1 - features).clamp(1, features);
            assign(mm, &mut inst.model, "ClassModel", "classes", "Class", "encapsulates", "Feature", classes, rng);
            inst.model
        }
        PackKind::Sp => {
            let items = (nodes * 7 / 10).max(1);
            let mut inst = pack.generate_instance(&[3, items, items * 4], seed).expect("feasible counts");
            let sprints = (nodes - 1 - items).clamp(1, items);
            assign(mm, &mut inst.model, "Plan", "sprints", "Sprint", "isPlannedFor", "WorkItem", sprints, rng);
            inst.model
        }
        PackKind::Nrp => {
            let artifacts = (nodes * 2 / 5).max(1);
            let mut model = pack
                .generate_instance(&[3, nodes / 6, artifacts], seed)
                .expect("feasible counts")
                .model;
            let solution = model
                .nodes_of_type(mm, mm.node_type_id("Solution").expect("pack type"))
                .next()
                .expect("seed has a solution");
            let selected = mm.edge_type_id("selected").expect("pack edge type");
            let art_ty = mm.node_type_id("SoftwareArtifact").expect("pack type");
            let arts: Vec<NodeId> = model.nodes_of_type(mm, art_ty).collect();
            for a in arts {
                if !model.has_edge(selected, solution, a) && rng.gen_bool(0.5) {
                    model.add_edge(mm, selected, solution, a).expect("free artifact");
                }
            }
            model
        }
    }
}

/// Creates `containers` containers under the root and spreads all items
/// over them, every container receiving at least one.
#[allow(clippy::too_many_arguments)]
fn assign(
    mm: &Metamodel,
    model: &mut Model,
    root: &str,
    root_edge: &str,
    container: &str,
    contains: &str,
    item: &str,
    containers: usize,
    rng: &mut impl Rng,
) {
    let t = |n: &str| mm.node_type_id(n).expect("pack type");
    let e = |n: &str| mm.edge_type_id(n).expect("pack edge type");
    let root = model.nodes_of_type(mm, t(root)).next().expect("root");
    let mut items: Vec<NodeId> = model.nodes_of_type(mm, t(item)).collect();
    items.shuffle(rng);
    let cs: Vec<NodeId> = (0..containers)
        .map(|_| {
            let c = model.add_node(mm, t(container), Attributes::new()).expect("concrete");
            model.add_edge(mm, e(root_edge), root, c).expect("typed");
            c
        })
        .collect();
    for (i, w) in items.into_iter().enumerate() {
        let c = if i < containers { cs[i] } else { cs[rng.gen_range(0..containers)] };
        model.add_edge(mm, e(contains), c, w).expect("typed");
    }
}
