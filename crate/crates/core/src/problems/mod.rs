//! Case-study packs: class responsibility assignment (CRA), Scrum
//! planning (SP) and the next release problem (NRP).

pub mod cra;
pub mod nrp;
pub mod sp;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolve::{Direction, Problem, RuleOperator, SearchOperator};
use crate::graph::{
    check_conformance, ConstraintSet, EdgeTypeId, GraphError, InstanceDoc, Metamodel, Model, NodeId, NodeTypeId,
};
use crate::rulegen::{generate_acpsos, GenOptions, GenerationScope, RuleSet, RulegenError};
use crate::rules::{Condition, EditKind, PEdge, Phase, RepairKind, Rule, Taxonomy};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Rulegen(#[from] RulegenError),
    #[error("invalid instance parameters: {0}")]
    Params(String),
    #[error("model is not a {pack} instance: {reason}")]
    NotAnInstance { pack: PackKind, reason: String },
    #[error("dependency cycle through artifact {0}")]
    DependencyCycle(NodeId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PackKind {
    Cra,
    Sp,
    Nrp,
}

impl PackKind {
    pub const ALL: [PackKind; 3] = [PackKind::Cra, PackKind::Sp, PackKind::Nrp];

    pub fn name(self) -> &'static str {
        match self {
            PackKind::Cra => "cra",
            PackKind::Sp => "sp",
            PackKind::Nrp => "nrp",
        }
    }
}

impl fmt::Display for PackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PackKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        PackKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown pack `{s}` (expected cra, sp or nrp)"))
    }
}

/// A problem model together with its pack parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub model: Model,
    pub params: BTreeMap<String, f64>,
}

/// Metamodel, solution constraints, mutable scope and objectives of one
/// case study.
pub struct ProblemPack {
    pub kind: PackKind,
    pub metamodel: Arc<Metamodel>,
    pub constraints: ConstraintSet,
    pub scope: GenerationScope,
}

impl ProblemPack {
    pub fn new(kind: PackKind) -> Self {
        let (mm, cs, scope) = match kind {
            PackKind::Cra => cra::pack_parts(),
            PackKind::Sp => sp::pack_parts(),
            PackKind::Nrp => nrp::pack_parts(),
        };
        ProblemPack {
            kind,
            metamodel: Arc::new(mm),
            constraints: cs,
            scope,
        }
    }

    pub fn objectives(&self) -> Vec<(&'static str, Direction)> {
        match self.kind {
            PackKind::Cra => vec![("cra_index", Direction::Max)],
            PackKind::Sp => vec![
                ("effort_deviation", Direction::Min),
                ("satisfaction_index", Direction::Min),
            ],
            PackKind::Nrp => vec![("cost", Direction::Min), ("satisfaction", Direction::Max)],
        }
    }

    pub fn generated_rules(&self, opts: GenOptions) -> Result<RuleSet, RulegenError> {
        generate_acpsos(&self.metamodel, &self.constraints, &self.scope, opts)
    }

    pub fn generated_operators(&self) -> Result<Vec<Box<dyn SearchOperator>>, RulegenError> {
        let set = self.generated_rules(GenOptions::default())?;
        Ok(RuleOperator::boxed_all(set.rules, &self.metamodel))
    }

    /// Hand-written baseline operators.
    pub fn manual_operators(&self) -> Vec<Box<dyn SearchOperator>> {
        match self.kind {
            PackKind::Cra => RuleOperator::boxed_all(cra::manual_rules(&self.metamodel), &self.metamodel),
            PackKind::Sp => RuleOperator::boxed_all(sp::manual_rules(&self.metamodel), &self.metamodel),
            PackKind::Nrp => nrp::manual_operators(&self.metamodel),
        }
    }

    /// Names of the size parameters taken by [`ProblemPack::generate_instance`].
    pub fn size_params(&self) -> &'static [&'static str] {
        match self.kind {
            PackKind::Cra => &["attributes", "methods", "data_dependencies", "functional_dependencies"],
            PackKind::Sp => &["stakeholders", "work_items", "backlog_effort"],
            PackKind::Nrp => &["customers", "requirements", "artifacts"],
        }
    }

    /// Size parameters of the published input model shapes (`A`, `B`, ...).
    pub fn preset(&self, name: &str) -> Option<Vec<usize>> {
        let table: &[(&str, &[usize])] = match self.kind {
            PackKind::Cra => &[
                ("A", &[5, 4, 8, 6]),
                ("B", &[10, 8, 15, 15]),
                ("C", &[20, 15, 50, 50]),
                ("D", &[40, 40, 150, 150]),
                ("E", &[80, 80, 300, 300]),
            ],
            PackKind::Sp => &[("A", &[5, 119, 455]), ("B", &[10, 254, 1021])],
            PackKind::Nrp => &[("A", &[5, 25, 63]), ("B", &[25, 50, 203])],
        };
        table
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.to_vec())
    }

    /// Random seed instance with the given size parameters.
    pub fn generate_instance(&self, size: &[usize], seed: u64) -> Result<Instance, ProblemError> {
        let names = self.size_params();
        if size.len() != names.len() {
            return Err(ProblemError::Params(format!(
                "{} expects {} size values ({}), got {}",
                self.kind,
                names.len(),
                names.join(", "),
                size.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mm = &self.metamodel;
        Ok(match self.kind {
            PackKind::Cra => Instance {
                model: cra::generate(mm, size[0], size[1], size[2], size[3], &mut rng)?,
                params: BTreeMap::new(),
            },
            PackKind::Sp => Instance {
                model: sp::generate(mm, size[0], size[1], size[2], &mut rng)?,
                params: BTreeMap::from([(sp::VELOCITY.to_owned(), sp::DEFAULT_VELOCITY)]),
            },
            PackKind::Nrp => Instance {
                model: nrp::generate(mm, size[0], size[1], size[2], &mut rng)?,
                params: BTreeMap::new(),
            },
        })
    }

    pub fn load_instance(&self, doc: &InstanceDoc) -> Result<Instance, ProblemError> {
        Ok(Instance {
            model: doc.to_model(&self.metamodel)?,
            params: doc.params.clone(),
        })
    }

    pub fn instance_doc(&self, instance: &Instance) -> InstanceDoc {
        let mut doc = InstanceDoc::from_model(&self.metamodel, &instance.model);
        doc.params = instance.params.clone();
        doc
    }

    /// The search problem posed by `instance`.
    pub fn problem(&self, instance: &Instance) -> Result<CaseProblem, ProblemError> {
        let allowed: &[&str] = match self.kind {
            PackKind::Sp => &[sp::VELOCITY],
            _ => &[],
        };
        if let Some(k) = instance.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ProblemError::Params(format!("unknown parameter `{k}` for {}", self.kind)));
        }
        let (velocity, bounds) = match self.kind {
            PackKind::Cra => {
                cra::cra_index(&self.metamodel, &instance.model)?;
                (0.0, None)
            }
            PackKind::Sp => {
                let v = instance.params.get(sp::VELOCITY).copied().unwrap_or(sp::DEFAULT_VELOCITY);
                sp::min_sprint_count(0.0, v)?;
                (v, Some(sp::objective_bounds(&self.metamodel, &instance.model)?))
            }
            PackKind::Nrp => {
                nrp::check_acyclic(&self.metamodel, &instance.model)?;
                (0.0, Some(nrp::objective_bounds(&self.metamodel, &instance.model)?))
            }
        };
        Ok(CaseProblem {
            kind: self.kind,
            metamodel: self.metamodel.clone(),
            constraints: self.constraints.clone(),
            objectives: self.objectives(),
            velocity,
            bounds,
        })
    }
}

/// Evaluator for one pack instance: natural-sign objectives plus the
/// number of solution-constraint violations.
pub struct CaseProblem {
    kind: PackKind,
    metamodel: Arc<Metamodel>,
    constraints: ConstraintSet,
    objectives: Vec<(&'static str, Direction)>,
    velocity: f64,
    bounds: Option<Vec<(f64, f64)>>,
}

impl CaseProblem {
    pub fn evaluate_model(&self, model: &Model) -> Result<(Vec<f64>, usize), ProblemError> {
        let mm = &self.metamodel;
        let mut violations = check_conformance(model, mm, &self.constraints).len();
        let objectives = match self.kind {
            PackKind::Cra => vec![cra::cra_index(mm, model)?],
            PackKind::Sp => {
                let (effort, satisfaction) = sp::sp_objectives(mm, model)?;
                violations += sp::missing_sprints(mm, model, self.velocity)?;
                vec![effort, satisfaction]
            }
            PackKind::Nrp => {
                let (cost, satisfaction) = nrp::nrp_objectives(mm, model)?;
                vec![cost, satisfaction]
            }
        };
        Ok((objectives, violations))
    }
}

impl Problem for CaseProblem {
    fn objective_names(&self) -> Vec<String> {
        self.objectives.iter().map(|(n, _)| (*n).to_owned()).collect()
    }

    fn directions(&self) -> Vec<Direction> {
        self.objectives.iter().map(|&(_, d)| d).collect()
    }

    fn evaluate(&self, model: &Model) -> Result<(Vec<f64>, usize), String> {
        self.evaluate_model(model).map_err(|e| e.to_string())
    }

    fn objective_bounds(&self) -> Option<Vec<(f64, f64)>> {
        self.bounds.clone()
    }
}

pub(crate) fn node_ty(mm: &Metamodel, pack: PackKind, name: &str) -> Result<NodeTypeId, ProblemError> {
    mm.node_type_id(name).map_err(|_| ProblemError::NotAnInstance {
        pack,
        reason: format!("no node type `{name}`"),
    })
}

pub(crate) fn edge_ty(mm: &Metamodel, pack: PackKind, name: &str) -> Result<EdgeTypeId, ProblemError> {
    mm.edge_type_id(name).map_err(|_| ProblemError::NotAnInstance {
        pack,
        reason: format!("no edge type `{name}`"),
    })
}

/// Numeric attribute of a node; missing or non-numeric values are errors.
pub(crate) fn num_attr(model: &Model, pack: PackKind, id: NodeId, name: &str) -> Result<f64, ProblemError> {
    model
        .attr(id, name)
        .and_then(|v| v.as_f64())
        .ok_or_else(|| ProblemError::NotAnInstance {
            pack,
            reason: format!("node {id} lacks numeric attribute `{name}`"),
        })
}

/// Population standard deviation.
pub(crate) fn population_sd(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Names of the four hand-written assignment rules.
pub(crate) struct ManualNames {
    pub create: &'static str,
    pub delete: &'static str,
    pub add: &'static str,
    pub mv: &'static str,
}

/// The classic four-rule baseline for "assign items to containers"
/// problems: create a container holding one free item, delete an empty
/// container, add a free item to a container, move an item between
/// containers. No lower-bound repair anywhere.
pub(crate) fn manual_assignment_rules(
    mm: &Metamodel,
    root: &str,
    root_edge: &str,
    container: &str,
    contains: &str,
    item: &str,
    names: ManualNames,
) -> Vec<Rule> {
    let id = |n: &str| mm.node_type_id(n).expect("pack type");
    let eid = |n: &str| mm.edge_type_id(n).expect("pack edge type");
    let (root, container, item) = (id(root), id(container), id(item));
    let (root_edge, contains) = (eid(root_edge), eid(contains));
    let tax = |edit, repair| Taxonomy {
        edit,
        repair,
        phase: Phase::Problem,
        components: vec![repair],
        tags: vec!["manual".to_owned()],
    };
    // `v` is not in any container.
    let free = |v: usize, ctx: usize| Condition {
        nodes: vec![container],
        edges: vec![PEdge::new(contains, ctx, v)],
        ..Condition::default()
    };

    let mut create = Rule::new(names.create, tax(EditKind::CreateNode, RepairKind::Nac));
    create.lhs.nodes = vec![root, item];
    create.create_nodes = vec![container];
    create.create_edges = vec![PEdge::new(root_edge, 0, 2), PEdge::new(contains, 2, 1)];
    create.nacs = vec![free(1, 2)];

    let mut delete = Rule::new(names.delete, tax(EditKind::DeleteNode, RepairKind::Nac));
    delete.lhs.nodes = vec![container];
    delete.delete_nodes = vec![0];
    delete.nacs = vec![Condition {
        nodes: vec![item],
        edges: vec![PEdge::new(contains, 0, 1)],
        ..Condition::default()
    }];

    let mut add = Rule::new(names.add, tax(EditKind::AddEdge, RepairKind::Nac));
    add.lhs.nodes = vec![container, item];
    add.create_edges = vec![PEdge::new(contains, 0, 1)];
    add.nacs = vec![free(1, 2)];

    let mut mv = Rule::new(names.mv, tax(EditKind::ChangeEdge, RepairKind::None));
    mv.lhs.nodes = vec![container, item, container];
    mv.lhs.edges = vec![PEdge::new(contains, 0, 1)];
    mv.delete_edges = vec![0];
    mv.create_edges = vec![PEdge::new(contains, 2, 1)];

    vec![create, delete, add, mv]
}
