//! Typed graphs: metamodels with multiplicity bounds, instance models and
//! conformance checking.

mod conformance;
mod json;
mod metamodel;
mod model;

pub use conformance::{check_conformance, classify_pattern, ConformanceReport, PatternClass, Violation, ViolationKind};
pub use json::{InstanceDoc, MetamodelDoc};
pub use metamodel::{
    AttrKind, ConstraintSet, EdgeType, EdgeTypeId, End, Metamodel, MetamodelBuilder, Multiplicity,
    NodeType, NodeTypeId, Upper,
};
pub use model::{AttrValue, Attributes, Model, NodeId};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid multiplicity {lower}..{upper}: {reason}")]
    InvalidMultiplicity {
        lower: u32,
        upper: Upper,
        reason: &'static str,
    },
    #[error("unknown node type `{0}`")]
    UnknownNodeType(String),
    #[error("unknown edge type `{0}`")]
    UnknownEdgeType(String),
    #[error("duplicate type name `{0}`")]
    DuplicateName(String),
    #[error("type `{0}` extends a subtype; only one level of subtyping is supported")]
    DeepHierarchy(String),
    #[error("refinement {refined} of `{edge_type}` ({end} end) does not narrow {base}")]
    WideningRefinement {
        edge_type: String,
        end: End,
        base: Multiplicity,
        refined: Multiplicity,
    },
    #[error("abstract type `{0}` cannot be instantiated")]
    AbstractInstantiation(String),
    #[error("type `{node_type}` has no attribute `{attribute}`")]
    UnknownAttribute { node_type: String, attribute: String },
    #[error("attribute `{attribute}` of `{node_type}` must be {expected:?}")]
    AttributeKind {
        node_type: String,
        attribute: String,
        expected: AttrKind,
    },
    #[error("node {0} already exists")]
    DuplicateNode(NodeId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("`{edge_type}` edge at {node}: expected a {expected}, found a {actual}")]
    EdgeEndpointType {
        edge_type: String,
        node: NodeId,
        expected: String,
        actual: String,
    },
    #[error("`{edge_type}` edge {from} -> {to} already exists")]
    ParallelEdge {
        edge_type: String,
        from: NodeId,
        to: NodeId,
    },
}
