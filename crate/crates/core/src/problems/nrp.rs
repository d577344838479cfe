//! Next release problem: choose software artifacts for a release, trading
//! cost against customer satisfaction.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use super::{edge_ty, node_ty, num_attr, PackKind, ProblemError};
use crate::evolve::SearchOperator;
use crate::graph::{
    AttrKind, AttrValue, Attributes, ConstraintSet, EdgeTypeId, End, Metamodel, Model, Multiplicity, NodeId,
    NodeTypeId,
};
use crate::rulegen::GenerationScope;
use crate::rules::ApplyError;

const PACK: PackKind = PackKind::Nrp;

pub(super) fn pack_parts() -> (Metamodel, ConstraintSet, GenerationScope) {
    let mm = Metamodel::builder()
        .node_type("Customer")
        .attribute("weight", AttrKind::Real)
        .node_type("Requirement")
        .node_type("Realisation")
        .attribute("percentage", AttrKind::Real)
        .node_type("SoftwareArtifact")
        .attribute("cost", AttrKind::Real)
        .node_type("Solution")
        .edge_type("desires", "Customer", "Requirement", Multiplicity::ANY, Multiplicity::ANY)
        .edge_type("realisations", "Requirement", "Realisation", Multiplicity::ANY, Multiplicity::exactly(1))
        .edge_type("realisedBy", "Realisation", "SoftwareArtifact", Multiplicity::exactly(1), Multiplicity::ANY)
        .edge_type("dependsOn", "SoftwareArtifact", "SoftwareArtifact", Multiplicity::ANY, Multiplicity::ANY)
        .edge_type("selected", "Solution", "SoftwareArtifact", Multiplicity::at_least(1), Multiplicity::range(0, 1))
        .build()
        .expect("NRP metamodel");
    let scope = GenerationScope::by_name(&mm, &[], &["selected"]).expect("declared");
    (mm, ConstraintSet::empty(), scope)
}

/// Resolved type ids of the NRP metamodel.
#[derive(Clone, Copy, Debug)]
struct Ids {
    customer: NodeTypeId,
    realisation: NodeTypeId,
    artifact: NodeTypeId,
    solution: NodeTypeId,
    desires: EdgeTypeId,
    realisations: EdgeTypeId,
    realised_by: EdgeTypeId,
    depends: EdgeTypeId,
    selected: EdgeTypeId,
}

impl Ids {
    fn new(mm: &Metamodel) -> Result<Self, ProblemError> {
        Ok(Ids {
            customer: node_ty(mm, PACK, "Customer")?,
            realisation: node_ty(mm, PACK, "Realisation")?,
            artifact: node_ty(mm, PACK, "SoftwareArtifact")?,
            solution: node_ty(mm, PACK, "Solution")?,
            desires: edge_ty(mm, PACK, "desires")?,
            realisations: edge_ty(mm, PACK, "realisations")?,
            realised_by: edge_ty(mm, PACK, "realisedBy")?,
            depends: edge_ty(mm, PACK, "dependsOn")?,
            selected: edge_ty(mm, PACK, "selected")?,
        })
    }
}

fn selected_set(ids: &Ids, mm: &Metamodel, model: &Model) -> BTreeSet<NodeId> {
    model
        .nodes_of_type(mm, ids.solution)
        .flat_map(|s| model.neighbours(s, ids.selected, End::Source))
        .collect()
}

/// Artifacts reachable from `a` over dependency edges, excluding `a`.
fn dependency_closure(ids: &Ids, model: &Model, a: NodeId) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![a];
    while let Some(x) = stack.pop() {
        for d in model.neighbours(x, ids.depends, End::Source) {
            if d != a && seen.insert(d) {
                stack.push(d);
            }
        }
    }
    seen
}

/// Errors on a dependency cycle.
pub fn check_acyclic(mm: &Metamodel, model: &Model) -> Result<(), ProblemError> {
    let ids = Ids::new(mm)?;
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state: HashMap<NodeId, u8> = HashMap::new();
    for root in model.nodes_of_type(mm, ids.artifact) {
        if state.contains_key(&root) {
            continue;
        }
        let mut stack: Vec<(NodeId, Vec<NodeId>)> = vec![(root, deps(&ids, model, root))];
        state.insert(root, 1);
        while let Some((node, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(d) => match state.get(&d) {
                    Some(1) => return Err(ProblemError::DependencyCycle(d)),
                    Some(_) => {}
                    None => {
                        state.insert(d, 1);
                        let next = deps(&ids, model, d);
                        stack.push((d, next));
                    }
                },
                None => {
                    state.insert(*node, 2);
                    stack.pop();
                }
            }
        }
    }
    Ok(())
}

fn deps(ids: &Ids, model: &Model, a: NodeId) -> Vec<NodeId> {
    model.neighbours(a, ids.depends, End::Source).collect()
}

/// Selected artifacts whose whole dependency closure is selected too.
fn effective_set(ids: &Ids, model: &Model, selected: &BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    selected
        .iter()
        .copied()
        .filter(|&a| dependency_closure(ids, model, a).is_subset(selected))
        .collect()
}

fn realised_artifact(ids: &Ids, model: &Model, r: NodeId) -> Option<NodeId> {
    model.neighbours(r, ids.realised_by, End::Source).next()
}

fn satisfaction(
    ids: &Ids,
    mm: &Metamodel,
    model: &Model,
    fulfilled: impl Fn(NodeId) -> bool,
) -> Result<f64, ProblemError> {
    let mut total = 0.0;
    for c in model.nodes_of_type(mm, ids.customer) {
        let weight = model.attr(c, "weight").and_then(AttrValue::as_f64).unwrap_or(1.0);
        let mut sum = 0.0;
        for req in model.neighbours(c, ids.desires, End::Source) {
            let mut best: f64 = 0.0;
            for r in model.neighbours(req, ids.realisations, End::Source) {
                if fulfilled(r) {
                    best = best.max(num_attr(model, PACK, r, "percentage")?);
                }
            }
            sum += best;
        }
        total += weight * sum;
    }
    Ok(total)
}

/// (cost of the selected artifacts, weighted customer satisfaction).
///
/// A realisation is fulfilled when its artifact and that artifact's
/// transitive dependencies are all selected; each desired requirement
/// contributes the best percentage among its fulfilled realisations.
pub fn nrp_objectives(mm: &Metamodel, model: &Model) -> Result<(f64, f64), ProblemError> {
    let ids = Ids::new(mm)?;
    let selected = selected_set(&ids, mm, model);
    let mut cost = 0.0;
    for &a in &selected {
        cost += num_attr(model, PACK, a, "cost")?;
    }
    let effective = effective_set(&ids, model, &selected);
    let sat = satisfaction(&ids, mm, model, |r| {
        realised_artifact(&ids, model, r).is_some_and(|a| effective.contains(&a))
    })?;
    Ok((cost, sat))
}

/// (0, total cost) and (-best possible satisfaction, 0) in minimization space.
pub(super) fn objective_bounds(mm: &Metamodel, model: &Model) -> Result<Vec<(f64, f64)>, ProblemError> {
    let ids = Ids::new(mm)?;
    let mut cost = 0.0;
    for a in model.nodes_of_type(mm, ids.artifact) {
        cost += num_attr(model, PACK, a, "cost")?;
    }
    let best = satisfaction(&ids, mm, model, |_| true)?;
    Ok(vec![(0.0, cost), (-best, 0.0)])
}

/// Customers, requirements and artifacts with a random acyclic dependency
/// graph; the release starts with the first (dependency-free) artifact.
pub fn generate(
    mm: &Metamodel,
    customers: usize,
    requirements: usize,
    artifacts: usize,
    rng: &mut impl Rng,
) -> Result<Model, ProblemError> {
    if artifacts == 0 {
        return Err(ProblemError::Params("at least one software artifact is required".into()));
    }
    let ids = Ids::new(mm)?;
    let requirement_ty = node_ty(mm, PACK, "Requirement")?;
    let mut model = Model::new();
    let mut arts = Vec::with_capacity(artifacts);
    for i in 0..artifacts {
        let cost = Attributes::from([("cost".to_owned(), AttrValue::Int(rng.gen_range(1..=10)))]);
        let a = model.add_node(mm, ids.artifact, cost)?;
        // dependencies only on earlier artifacts keep the graph acyclic
        let n = rng.gen_range(0..=i.min(2));
        let mut picks: Vec<usize> = sample(rng, i, n).into_vec();
        picks.sort_unstable();
        for p in picks {
            model.add_edge(mm, ids.depends, a, arts[p])?;
        }
        arts.push(a);
    }
    let mut reqs = Vec::with_capacity(requirements);
    for _ in 0..requirements {
        let req = model.add_node(mm, requirement_ty, Attributes::new())?;
        for _ in 0..rng.gen_range(1..=3) {
            let pct = Attributes::from([("percentage".to_owned(), AttrValue::Int(rng.gen_range(1..=100)))]);
            let r = model.add_node(mm, ids.realisation, pct)?;
            model.add_edge(mm, ids.realisations, req, r)?;
            model.add_edge(mm, ids.realised_by, r, arts[rng.gen_range(0..artifacts)])?;
        }
        reqs.push(req);
    }
    for _ in 0..customers {
        let weight = Attributes::from([("weight".to_owned(), AttrValue::Real(1.0))]);
        let c = model.add_node(mm, ids.customer, weight)?;
        if requirements > 0 {
            let n = rng.gen_range(1..=requirements.min(5));
            let mut picks: Vec<usize> = sample(rng, requirements, n).into_vec();
            picks.sort_unstable();
            for p in picks {
                model.add_edge(mm, ids.desires, c, reqs[p])?;
            }
        }
    }
    let solution = model.add_node(mm, ids.solution, Attributes::new())?;
    model.add_edge(mm, ids.selected, solution, arts[0])?;
    Ok(model)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ManualKind {
    /// Add an artifact whose dependencies are selected, or remove one no
    /// selected artifact depends on.
    Modify,
    /// Add an artifact with its direct dependencies, or remove one with its
    /// direct dependents.
    ModifyWithDependencies,
    /// Complete the unfulfilled realisation with the highest percentage.
    AssignHighestRealisation,
    /// Add the missing dependency closure of a selected artifact.
    FixDependencies,
}

/// Hand-written NRP mutation. Bindings are `[solution, artifact]`, or
/// `[solution, realisation]` for [`ManualKind::AssignHighestRealisation`].
struct ManualOperator {
    kind: ManualKind,
    name: &'static str,
    ids: Ids,
    metamodel: Arc<Metamodel>,
}

impl ManualOperator {
    fn dependents(&self, model: &Model, a: NodeId) -> Vec<NodeId> {
        model.neighbours(a, self.ids.depends, End::Target).collect()
    }

    /// Every (target, artifacts to add, artifacts to remove) this operator
    /// offers for solution `s`, in id order.
    fn candidates(&self, model: &Model, s: NodeId) -> Vec<(NodeId, Vec<NodeId>, Vec<NodeId>)> {
        let ids = &self.ids;
        let mm = &*self.metamodel;
        let selected: BTreeSet<NodeId> = model.neighbours(s, ids.selected, End::Source).collect();
        // artifacts held by no solution at all
        let free = |a: NodeId| model.count_incident(a, ids.selected, End::Target) == 0;
        let mut out = Vec::new();
        match self.kind {
            ManualKind::Modify | ManualKind::ModifyWithDependencies => {
                for a in model.nodes_of_type(mm, ids.artifact) {
                    let deps = deps(ids, model, a);
                    if selected.contains(&a) {
                        let mut remove = vec![a];
                        let dependents: Vec<NodeId> =
                            self.dependents(model, a).into_iter().filter(|d| selected.contains(d)).collect();
                        if self.kind == ManualKind::Modify {
                            if !dependents.is_empty() {
                                continue;
                            }
                        } else {
                            remove.extend(dependents);
                            remove.sort_unstable();
                            remove.dedup();
                        }
                        if remove.len() < selected.len() {
                            out.push((a, Vec::new(), remove));
                        }
                    } else if free(a) {
                        let missing: Vec<NodeId> = deps.into_iter().filter(|d| !selected.contains(d)).collect();
                        if self.kind == ManualKind::Modify {
                            if missing.is_empty() {
                                out.push((a, vec![a], Vec::new()));
                            }
                        } else if missing.iter().all(|&d| free(d)) {
                            let mut add = missing;
                            add.push(a);
                            add.sort_unstable();
                            add.dedup();
                            out.push((a, add, Vec::new()));
                        }
                    }
                }
            }
            ManualKind::AssignHighestRealisation => {
                let effective = effective_set(ids, model, &selected);
                let mut best: Option<f64> = None;
                let mut found = Vec::new();
                for r in model.nodes_of_type(mm, ids.realisation) {
                    let Some(a) = realised_artifact(ids, model, r) else { continue };
                    if effective.contains(&a) {
                        continue;
                    }
                    let add = self.completion(model, &selected, a);
                    if add.is_empty() || !add.iter().all(|&x| free(x)) {
                        continue;
                    }
                    let pct = model.attr(r, "percentage").and_then(AttrValue::as_f64).unwrap_or(0.0);
                    match best {
                        Some(b) if pct < b => continue,
                        Some(b) if pct == b => {}
                        _ => {
                            best = Some(pct);
                            found.clear();
                        }
                    }
                    found.push((r, add, Vec::new()));
                }
                out = found;
            }
            ManualKind::FixDependencies => {
                for &a in &selected {
                    let add = self.completion(model, &selected, a);
                    if !add.is_empty() && add.iter().all(|&x| free(x)) {
                        out.push((a, add, Vec::new()));
                    }
                }
            }
        }
        out
    }

    /// Artifacts needed so that `a` becomes effective.
    fn completion(&self, model: &Model, selected: &BTreeSet<NodeId>, a: NodeId) -> Vec<NodeId> {
        let mut need: Vec<NodeId> = dependency_closure(&self.ids, model, a)
            .into_iter()
            .filter(|d| !selected.contains(d))
            .collect();
        if !selected.contains(&a) {
            need.push(a);
        }
        need.sort_unstable();
        need
    }
}

impl SearchOperator for ManualOperator {
    fn name(&self) -> &str {
        self.name
    }

    fn for_each_match(&self, model: &Model, visit: &mut dyn FnMut(&[NodeId]) -> bool) -> bool {
        for s in model.nodes_of_type(&self.metamodel, self.ids.solution) {
            for (target, _, _) in self.candidates(model, s) {
                if visit(&[s, target]) {
                    return true;
                }
            }
        }
        false
    }

    fn apply(&self, model: &Model, binding: &[NodeId]) -> Result<Model, ApplyError> {
        let stale = |reason: &str| ApplyError::Stale {
            rule: self.name.to_owned(),
            reason: reason.to_owned(),
        };
        let &[s, target] = binding else {
            return Err(stale("binding must be [solution, target]"));
        };
        if model.node_type(s) != Some(self.ids.solution) {
            return Err(stale("first binding is not a solution"));
        }
        let (_, add, remove) = self
            .candidates(model, s)
            .into_iter()
            .find(|c| c.0 == target)
            .ok_or_else(|| stale("target is not a match"))?;
        let mut out = model.clone();
        for a in remove {
            out.remove_edge(self.ids.selected, s, a);
        }
        for a in add {
            out.add_edge(&self.metamodel, self.ids.selected, s, a)
                .map_err(|source| ApplyError::Graph {
                    rule: self.name.to_owned(),
                    source,
                })?;
        }
        Ok(out)
    }
}

pub(super) fn manual_operators(mm: &Arc<Metamodel>) -> Vec<Box<dyn SearchOperator>> {
    let ids = Ids::new(mm).expect("NRP pack metamodel");
    [
        (ManualKind::Modify, "modify_artifact"),
        (ManualKind::ModifyWithDependencies, "modify_artifact_with_dependencies"),
        (ManualKind::AssignHighestRealisation, "assign_highest_realisation"),
        (ManualKind::FixDependencies, "fix_dependencies"),
    ]
    .into_iter()
    .map(|(kind, name)| {
        Box::new(ManualOperator {
            kind,
            name,
            ids,
            metamodel: mm.clone(),
        }) as Box<dyn SearchOperator>
    })
    .collect()
}
