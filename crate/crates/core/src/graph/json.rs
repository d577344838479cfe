//! On-disk JSON documents for metamodels and instance models.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metamodel::{AttrKind, ConstraintSet, End, Metamodel, Multiplicity};
use super::model::{Attributes, Model, NodeId};
use super::GraphError;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeTypeDoc {
    pub name: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "std::ops::Not::not")]
    pub is_abstract: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supertype: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, AttrKind>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeTypeDoc {
    pub name: String,
    pub source: String,
    pub target: String,
    pub per_source: Multiplicity,
    pub per_target: Multiplicity,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RefinementDoc {
    pub edge_type: String,
    pub end: End,
    pub multiplicity: Multiplicity,
}

/// A metamodel file; `refinements` carries the solution constraints.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetamodelDoc {
    pub node_types: Vec<NodeTypeDoc>,
    pub edge_types: Vec<EdgeTypeDoc>,
    #[serde(default)]
    pub refinements: Vec<RefinementDoc>,
}

impl MetamodelDoc {
    pub fn from_parts(mm: &Metamodel, cs: &ConstraintSet) -> Self {
        let node_types = mm
            .node_types()
            .map(|(_, t)| NodeTypeDoc {
                name: t.name.clone(),
                is_abstract: t.is_abstract,
                supertype: t.supertype.map(|s| mm.node_type_name(s).to_owned()),
                attributes: t.attributes.clone(),
            })
            .collect();
        let edge_types = mm
            .edge_types()
            .map(|(_, e)| EdgeTypeDoc {
                name: e.name.clone(),
                source: mm.node_type_name(e.source).to_owned(),
                target: mm.node_type_name(e.target).to_owned(),
                per_source: e.per_source,
                per_target: e.per_target,
            })
            .collect();
        let refinements = cs
            .refinements()
            .map(|(et, end, multiplicity)| RefinementDoc {
                edge_type: mm.edge_type_name(et).to_owned(),
                end,
                multiplicity,
            })
            .collect();
        MetamodelDoc {
            node_types,
            edge_types,
            refinements,
        }
    }

    pub fn build(&self) -> Result<(Metamodel, ConstraintSet), GraphError> {
        let mut b = Metamodel::builder();
        for t in &self.node_types {
            b = match (&t.supertype, t.is_abstract) {
                (Some(s), false) => b.subtype(&t.name, s),
                (Some(_), true) => return Err(GraphError::AbstractInstantiation(t.name.clone())),
                (None, true) => b.abstract_type(&t.name),
                (None, false) => b.node_type(&t.name),
            };
            for (name, kind) in &t.attributes {
                b = b.attribute(name, *kind);
            }
        }
        for e in &self.edge_types {
            b = b.edge_type(&e.name, &e.source, &e.target, e.per_source, e.per_target);
        }
        let mm = b.build()?;
        let refinements = self
            .refinements
            .iter()
            .map(|r| Ok((mm.edge_type_id(&r.edge_type)?, r.end, r.multiplicity)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        let cs = ConstraintSet::new(&mm, refinements)?;
        Ok((mm, cs))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: u64,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attrs: Attributes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    #[serde(rename = "type")]
    pub ty: String,
    pub source: u64,
    pub target: u64,
}

/// A model file, optionally carrying problem parameters (velocity, ...).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
}

impl InstanceDoc {
    pub fn from_model(mm: &Metamodel, model: &Model) -> Self {
        let nodes = model
            .node_ids()
            .map(|id| NodeDoc {
                id: id.0,
                ty: mm
                    .node_type_name(model.node_type(id).expect("listed node"))
                    .to_owned(),
                attrs: model.attrs(id).cloned().unwrap_or_default(),
            })
            .collect();
        let edges = model
            .edges()
            .map(|(et, s, t)| EdgeDoc {
                ty: mm.edge_type_name(et).to_owned(),
                source: s.0,
                target: t.0,
            })
            .collect();
        InstanceDoc {
            nodes,
            edges,
            params: BTreeMap::new(),
        }
    }

    pub fn to_model(&self, mm: &Metamodel) -> Result<Model, GraphError> {
        let mut model = Model::new();
        for n in &self.nodes {
            let ty = mm.node_type_id(&n.ty)?;
            model.insert_node(mm, NodeId(n.id), ty, n.attrs.clone())?;
        }
        for e in &self.edges {
            let et = mm.edge_type_id(&e.ty)?;
            model.add_edge(mm, et, NodeId(e.source), NodeId(e.target))?;
        }
        Ok(model)
    }
}
