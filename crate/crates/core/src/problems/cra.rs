//! Class responsibility assignment: group methods and attributes into
//! classes so that cohesion is high and coupling low.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;

use super::{edge_ty, manual_assignment_rules, node_ty, ManualNames, PackKind, ProblemError};
use crate::graph::{
    AttrKind, AttrValue, Attributes, ConstraintSet, End, Metamodel, Model, Multiplicity, NodeId,
};
use crate::rulegen::GenerationScope;
use crate::rules::Rule;

const PACK: PackKind = PackKind::Cra;

pub(super) fn pack_parts() -> (Metamodel, ConstraintSet, GenerationScope) {
    let mm = Metamodel::builder()
        .node_type("ClassModel")
        .node_type("Class")
        .abstract_type("Feature")
        .attribute("name", AttrKind::String)
        .subtype("Method", "Feature")
        .subtype("Attribute", "Feature")
        .edge_type("classes", "ClassModel", "Class", Multiplicity::ANY, Multiplicity::exactly(1))
        .edge_type("features", "ClassModel", "Feature", Multiplicity::ANY, Multiplicity::exactly(1))
        .edge_type("encapsulates", "Class", "Feature", Multiplicity::at_least(1), Multiplicity::range(0, 1))
        .edge_type("dataDependency", "Method", "Attribute", Multiplicity::ANY, Multiplicity::ANY)
        .edge_type("functionalDependency", "Method", "Method", Multiplicity::ANY, Multiplicity::ANY)
        .build()
        .expect("CRA metamodel");
    let enc = mm.edge_type_id("encapsulates").expect("declared");
    let cs = ConstraintSet::new(&mm, [(enc, End::Target, Multiplicity::exactly(1))]).expect("narrowing");
    let scope = GenerationScope::by_name(&mm, &["Class"], &["encapsulates"]).expect("declared");
    (mm, cs, scope)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// CRA index: total cohesion minus total coupling. Features not
/// encapsulated by any class are ignored.
pub fn cra_index(mm: &Metamodel, model: &Model) -> Result<f64, ProblemError> {
    let class_ty = node_ty(mm, PACK, "Class")?;
    let method_ty = node_ty(mm, PACK, "Method")?;
    let enc = edge_ty(mm, PACK, "encapsulates")?;
    let dd = edge_ty(mm, PACK, "dataDependency")?;
    let fd = edge_ty(mm, PACK, "functionalDependency")?;

    let classes: Vec<NodeId> = model.nodes_of_type(mm, class_ty).collect();
    let k = classes.len();
    let mut owner: HashMap<NodeId, usize> = HashMap::new();
    let mut methods = vec![0usize; k];
    let mut attrs = vec![0usize; k];
    for (i, &c) in classes.iter().enumerate() {
        for f in model.neighbours(c, enc, End::Source) {
            if owner.contains_key(&f) {
                continue;
            }
            owner.insert(f, i);
            let ty = model.node_type(f).expect("neighbour exists");
            if mm.conforms(ty, method_ty) {
                methods[i] += 1;
            } else {
                attrs[i] += 1;
            }
        }
    }
    let mut mai = vec![0usize; k * k];
    let mut mmi = vec![0usize; k * k];
    for (et, s, t) in model.edges() {
        let table = if et == dd {
            &mut mai
        } else if et == fd {
            &mut mmi
        } else {
            continue;
        };
        if let (Some(&i), Some(&j)) = (owner.get(&s), owner.get(&t)) {
            table[i * k + j] += 1;
        }
    }
    let mut index = 0.0;
    for i in 0..k {
        for j in 0..k {
            let term = ratio(mai[i * k + j], methods[i] * attrs[j])
                + ratio(mmi[i * k + j], methods[i] * methods[j].saturating_sub(1));
            if i == j {
                index += term;
            } else {
                index -= term;
            }
        }
    }
    Ok(index)
}

/// Class model with the given feature and dependency counts and no classes.
pub fn generate(
    mm: &Metamodel,
    attributes: usize,
    methods: usize,
    data_deps: usize,
    func_deps: usize,
    rng: &mut impl Rng,
) -> Result<Model, ProblemError> {
    let data_pairs = methods * attributes;
    let func_pairs = methods * methods.saturating_sub(1);
    if data_deps > data_pairs {
        return Err(ProblemError::Params(format!(
            "{data_deps} data dependencies requested but only {data_pairs} method/attribute pairs exist"
        )));
    }
    if func_deps > func_pairs {
        return Err(ProblemError::Params(format!(
            "{func_deps} functional dependencies requested but only {func_pairs} method pairs exist"
        )));
    }
    let id = |n: &str| mm.node_type_id(n).expect("pack type");
    let eid = |n: &str| mm.edge_type_id(n).expect("pack edge type");
    let mut model = Model::new();
    let root = model.add_node(mm, id("ClassModel"), Attributes::new())?;
    let named = |prefix: &str, i: usize| Attributes::from([("name".to_owned(), AttrValue::Str(format!("{prefix}{i}")))]);
    let mut attr_ids = Vec::with_capacity(attributes);
    for i in 0..attributes {
        let a = model.add_node(mm, id("Attribute"), named("a", i))?;
        model.add_edge(mm, eid("features"), root, a)?;
        attr_ids.push(a);
    }
    let mut method_ids = Vec::with_capacity(methods);
    for i in 0..methods {
        let m = model.add_node(mm, id("Method"), named("m", i))?;
        model.add_edge(mm, eid("features"), root, m)?;
        method_ids.push(m);
    }
    let mut picks: Vec<usize> = sample(rng, data_pairs, data_deps).into_vec();
    picks.sort_unstable();
    for p in picks {
        model.add_edge(mm, eid("dataDependency"), method_ids[p / attributes], attr_ids[p % attributes])?;
    }
    let mut picks: Vec<usize> = sample(rng, func_pairs, func_deps).into_vec();
    picks.sort_unstable();
    for p in picks {
        // pair index over (from, to) with to != from
        let from = p / (methods - 1);
        let mut to = p % (methods - 1);
        if to >= from {
            to += 1;
        }
        model.add_edge(mm, eid("functionalDependency"), method_ids[from], method_ids[to])?;
    }
    Ok(model)
}

pub fn manual_rules(mm: &Metamodel) -> Vec<Rule> {
    manual_assignment_rules(
        mm,
        "ClassModel",
        "classes",
        "Class",
        "encapsulates",
        "Feature",
        ManualNames {
            create: "create_Class",
            delete: "delete_Class",
            add: "assign_Feature",
            mv: "move_Feature",
        },
    )
}
