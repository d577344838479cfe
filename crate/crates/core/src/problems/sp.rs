//! Scrum planning: distribute backlog work items over sprints so that
//! effort and stakeholder importance are balanced.

use rand::seq::index::sample;
use rand::Rng;

use super::{edge_ty, manual_assignment_rules, node_ty, num_attr, population_sd, ManualNames, PackKind, ProblemError};
use crate::graph::{AttrKind, AttrValue, Attributes, ConstraintSet, End, Metamodel, Model, Multiplicity};
use crate::rulegen::GenerationScope;
use crate::rules::Rule;

const PACK: PackKind = PackKind::Sp;

/// Instance parameter holding the team velocity.
pub const VELOCITY: &str = "velocity";
pub const DEFAULT_VELOCITY: f64 = 50.0;

pub(super) fn pack_parts() -> (Metamodel, ConstraintSet, GenerationScope) {
    let mm = Metamodel::builder()
        .node_type("Plan")
        .node_type("Sprint")
        .node_type("WorkItem")
        .attribute("effort", AttrKind::Integer)
        .attribute("importance", AttrKind::Integer)
        .attribute("stakeholder", AttrKind::Integer)
        .edge_type("sprints", "Plan", "Sprint", Multiplicity::ANY, Multiplicity::exactly(1))
        .edge_type("backlog", "Plan", "WorkItem", Multiplicity::ANY, Multiplicity::exactly(1))
        .edge_type("isPlannedFor", "Sprint", "WorkItem", Multiplicity::at_least(1), Multiplicity::range(0, 1))
        .build()
        .expect("SP metamodel");
    let sprints = mm.edge_type_id("sprints").expect("declared");
    let planned = mm.edge_type_id("isPlannedFor").expect("declared");
    let cs = ConstraintSet::new(
        &mm,
        [
            (sprints, End::Source, Multiplicity::at_least(1)),
            (planned, End::Target, Multiplicity::exactly(1)),
        ],
    )
    .expect("narrowing");
    let scope = GenerationScope::by_name(&mm, &["Sprint"], &["isPlannedFor"]).expect("declared");
    (mm, cs, scope)
}

/// Population standard deviations over sprints of (total effort, mean
/// importance). An empty sprint contributes 0 to both; no sprints gives
/// (0, 0).
pub fn sp_objectives(mm: &Metamodel, model: &Model) -> Result<(f64, f64), ProblemError> {
    let sprint_ty = node_ty(mm, PACK, "Sprint")?;
    let planned = edge_ty(mm, PACK, "isPlannedFor")?;
    let mut efforts = Vec::new();
    let mut importances = Vec::new();
    for s in model.nodes_of_type(mm, sprint_ty) {
        let (mut effort, mut importance, mut n) = (0.0, 0.0, 0usize);
        for w in model.neighbours(s, planned, End::Source) {
            effort += num_attr(model, PACK, w, "effort")?;
            importance += num_attr(model, PACK, w, "importance")?;
            n += 1;
        }
        efforts.push(effort);
        importances.push(if n == 0 { 0.0 } else { importance / n as f64 });
    }
    Ok((population_sd(&efforts), population_sd(&importances)))
}

/// Fewest sprints a plan needs: `ceil(total_effort / velocity)`, at least 1.
pub fn min_sprint_count(total_effort: f64, velocity: f64) -> Result<usize, ProblemError> {
    if !(velocity > 0.0 && velocity.is_finite()) {
        return Err(ProblemError::Params(format!("velocity must be positive, got {velocity}")));
    }
    Ok(((total_effort / velocity).ceil() as usize).max(1))
}

pub fn total_effort(mm: &Metamodel, model: &Model) -> Result<f64, ProblemError> {
    let item_ty = node_ty(mm, PACK, "WorkItem")?;
    model
        .nodes_of_type(mm, item_ty)
        .map(|w| num_attr(model, PACK, w, "effort"))
        .sum()
}

/// Sprints short of the minimum; each counts as one violation.
pub fn missing_sprints(mm: &Metamodel, model: &Model, velocity: f64) -> Result<usize, ProblemError> {
    let need = min_sprint_count(total_effort(mm, model)?, velocity)?;
    let have = model.nodes_of_type(mm, node_ty(mm, PACK, "Sprint")?).count();
    Ok(need.saturating_sub(have))
}

/// Upper bounds of both objectives: half the backlog effort, and half the
/// largest importance.
pub(super) fn objective_bounds(mm: &Metamodel, model: &Model) -> Result<Vec<(f64, f64)>, ProblemError> {
    let item_ty = node_ty(mm, PACK, "WorkItem")?;
    let mut max_importance: f64 = 0.0;
    for w in model.nodes_of_type(mm, item_ty) {
        max_importance = max_importance.max(num_attr(model, PACK, w, "importance")?);
    }
    Ok(vec![
        (0.0, total_effort(mm, model)? / 2.0),
        (0.0, max_importance / 2.0),
    ])
}

/// A plan with `items` unplanned work items whose efforts (each at least 1)
/// sum to `effort`. Importance is drawn from 1 to 5.
pub fn generate(
    mm: &Metamodel,
    stakeholders: usize,
    items: usize,
    effort: usize,
    rng: &mut impl Rng,
) -> Result<Model, ProblemError> {
    if stakeholders == 0 && items > 0 {
        return Err(ProblemError::Params("work items need at least one stakeholder".into()));
    }
    if effort < items || (items == 0 && effort > 0) {
        return Err(ProblemError::Params(format!(
            "backlog effort {effort} cannot be split into {items} items of effort at least 1"
        )));
    }
    // random composition: items - 1 distinct cut points in 1..effort
    let mut cuts: Vec<usize> = if items == 0 {
        Vec::new()
    } else {
        sample(rng, effort - 1, items - 1).into_iter().map(|c| c + 1).collect()
    };
    cuts.sort_unstable();
    cuts.push(effort);

    let id = |n: &str| mm.node_type_id(n).expect("pack type");
    let backlog = mm.edge_type_id("backlog").expect("pack edge type");
    let mut model = Model::new();
    let plan = model.add_node(mm, id("Plan"), Attributes::new())?;
    let mut prev = 0;
    for &c in cuts.iter().take(items) {
        let attrs = Attributes::from([
            ("effort".to_owned(), AttrValue::Int((c - prev) as i64)),
            ("importance".to_owned(), AttrValue::Int(rng.gen_range(1..=5))),
            ("stakeholder".to_owned(), AttrValue::Int(rng.gen_range(0..stakeholders) as i64)),
        ]);
        prev = c;
        let w = model.add_node(mm, id("WorkItem"), attrs)?;
        model.add_edge(mm, backlog, plan, w)?;
    }
    Ok(model)
}

pub fn manual_rules(mm: &Metamodel) -> Vec<Rule> {
    manual_assignment_rules(
        mm,
        "Plan",
        "sprints",
        "Sprint",
        "isPlannedFor",
        "WorkItem",
        ManualNames {
            create: "create_Sprint",
            delete: "delete_Sprint",
            add: "add_WorkItem",
            mv: "move_WorkItem",
        },
    )
}
