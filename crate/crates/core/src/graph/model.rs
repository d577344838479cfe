use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::metamodel::{AttrKind, EdgeTypeId, End, Metamodel, NodeTypeId};
use super::GraphError;

/// Opaque node identifier, stable across clones and never reused within a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Int(i64),
    Real(f64),
    Str(String),
}

impl AttrValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttrValue::Int(i) => Some(*i as f64),
            AttrValue::Real(r) => Some(*r),
            AttrValue::Str(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            AttrValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    fn fits(&self, kind: AttrKind) -> bool {
        matches!(
            (self, kind),
            (AttrValue::Int(_), AttrKind::Integer)
                | (AttrValue::Int(_), AttrKind::Real)
                | (AttrValue::Real(_), AttrKind::Real)
                | (AttrValue::Str(_), AttrKind::String)
        )
    }
}

pub type Attributes = BTreeMap<String, AttrValue>;

#[derive(Clone, Debug, PartialEq)]
struct NodeEntry {
    ty: NodeTypeId,
    attrs: Arc<Attributes>,
    // sorted (edge type, other end)
    out: Vec<(EdgeTypeId, NodeId)>,
    inc: Vec<(EdgeTypeId, NodeId)>,
}

impl NodeEntry {
    fn adjacency(&self, end: End) -> &[(EdgeTypeId, NodeId)] {
        match end {
            End::Source => &self.out,
            End::Target => &self.inc,
        }
    }

    fn adjacency_mut(&mut self, end: End) -> &mut Vec<(EdgeTypeId, NodeId)> {
        match end {
            End::Source => &mut self.out,
            End::Target => &mut self.inc,
        }
    }
}

/// The slice of `adj` holding entries of edge type `et`.
fn typed_range(adj: &[(EdgeTypeId, NodeId)], et: EdgeTypeId) -> &[(EdgeTypeId, NodeId)] {
    let lo = adj.partition_point(|&(t, _)| t < et);
    let hi = adj.partition_point(|&(t, _)| t <= et);
    &adj[lo..hi]
}

/// A typed instance graph.
///
/// Every mutator takes the metamodel and rejects type errors, so a `Model`
/// is always structurally conformant to the metamodel it was built against.
#[derive(Clone, Debug, Default)]
pub struct Model {
    nodes: BTreeMap<NodeId, NodeEntry>,
    next_id: u64,
    edge_count: usize,
    // ids per exact node type, ascending
    by_type: Vec<Vec<NodeId>>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.next_id == other.next_id
    }
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_type(&self, id: NodeId) -> Option<NodeTypeId> {
        self.nodes.get(&id).map(|n| n.ty)
    }

    pub fn attrs(&self, id: NodeId) -> Option<&Attributes> {
        self.nodes.get(&id).map(|n| n.attrs.as_ref())
    }

    pub fn attr(&self, id: NodeId, name: &str) -> Option<&AttrValue> {
        self.nodes.get(&id).and_then(|n| n.attrs.get(name))
    }

    /// Nodes whose type conforms to `ty`, in id order.
    pub fn nodes_of_type<'a>(
        &'a self,
        mm: &'a Metamodel,
        ty: NodeTypeId,
    ) -> impl Iterator<Item = NodeId> + 'a {
        // a single concrete type can be read off the index in id order
        let (indexed, scan) = match mm.instantiable(ty) {
            [] => (None, None),
            [only] => (Some(self.by_type.get(only.index()).map_or(&[][..], Vec::as_slice)), None),
            _ => (None, Some(self.nodes.iter().filter(move |(_, n)| mm.conforms(n.ty, ty)).map(|(id, _)| *id))),
        };
        indexed
            .into_iter()
            .flatten()
            .copied()
            .chain(scan.into_iter().flatten())
    }

    /// Nodes across edges of type `et` from `id`, where `id` sits at `end`.
    pub fn neighbours(
        &self,
        id: NodeId,
        et: EdgeTypeId,
        end: End,
    ) -> impl Iterator<Item = NodeId> + '_ {
        let slice = match self.nodes.get(&id) {
            Some(n) => typed_range(n.adjacency(end), et),
            None => &[],
        };
        slice.iter().map(|&(_, other)| other)
    }

    /// Number of `et` edges at `id` with `id` at `end`; 0 for unknown nodes.
    pub fn count_incident(&self, id: NodeId, et: EdgeTypeId, end: End) -> usize {
        self.nodes
            .get(&id)
            .map_or(0, |n| typed_range(n.adjacency(end), et).len())
    }

    pub fn has_edge(&self, et: EdgeTypeId, source: NodeId, target: NodeId) -> bool {
        self.nodes
            .get(&source)
            .is_some_and(|n| n.out.binary_search(&(et, target)).is_ok())
    }

    /// All edges as (type, source, target), ordered by source, type, target.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeTypeId, NodeId, NodeId)> + '_ {
        self.nodes
            .iter()
            .flat_map(|(&s, n)| n.out.iter().map(move |&(et, t)| (et, s, t)))
    }

    pub fn add_node(
        &mut self,
        mm: &Metamodel,
        ty: NodeTypeId,
        attrs: Attributes,
    ) -> Result<NodeId, GraphError> {
        let id = NodeId(self.next_id);
        self.insert_node(mm, id, ty, attrs)?;
        Ok(id)
    }

    /// Inserts a node under an explicit id (used when loading models).
    pub fn insert_node(
        &mut self,
        mm: &Metamodel,
        id: NodeId,
        ty: NodeTypeId,
        attrs: Attributes,
    ) -> Result<(), GraphError> {
        self.insert_shared(mm, id, ty, Arc::new(attrs))
    }

    pub(crate) fn insert_shared(
        &mut self,
        mm: &Metamodel,
        id: NodeId,
        ty: NodeTypeId,
        attrs: Arc<Attributes>,
    ) -> Result<(), GraphError> {
        if ty.index() >= mm.node_types().len() {
            return Err(GraphError::UnknownNodeType(format!("#{}", ty.0)));
        }
        let t = mm.node_type(ty);
        if t.is_abstract {
            return Err(GraphError::AbstractInstantiation(t.name.clone()));
        }
        for (name, value) in attrs.iter() {
            match mm.attribute_kind(ty, name) {
                None => {
                    return Err(GraphError::UnknownAttribute {
                        node_type: t.name.clone(),
                        attribute: name.clone(),
                    })
                }
                Some(kind) if !value.fits(kind) => {
                    return Err(GraphError::AttributeKind {
                        node_type: t.name.clone(),
                        attribute: name.clone(),
                        expected: kind,
                    })
                }
                Some(_) => {}
            }
        }
        if self.nodes.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        self.nodes.insert(
            id,
            NodeEntry {
                ty,
                attrs,
                out: Vec::new(),
                inc: Vec::new(),
            },
        );
        self.next_id = self.next_id.max(id.0 + 1);
        if self.by_type.len() <= ty.index() {
            self.by_type.resize_with(ty.index() + 1, Vec::new);
        }
        let ids = &mut self.by_type[ty.index()];
        let pos = ids.partition_point(|&x| x < id);
        ids.insert(pos, id);
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        mm: &Metamodel,
        et: EdgeTypeId,
        source: NodeId,
        target: NodeId,
    ) -> Result<(), GraphError> {
        if et.index() >= mm.edge_types().len() {
            return Err(GraphError::UnknownEdgeType(format!("#{}", et.0)));
        }
        let decl = mm.edge_type(et);
        for (id, expected) in [(source, decl.source), (target, decl.target)] {
            let actual = self.node_type(id).ok_or(GraphError::UnknownNode(id))?;
            if !mm.conforms(actual, expected) {
                return Err(GraphError::EdgeEndpointType {
                    edge_type: decl.name.clone(),
                    node: id,
                    expected: mm.node_type_name(expected).to_owned(),
                    actual: mm.node_type_name(actual).to_owned(),
                });
            }
        }
        let src = self.nodes.get_mut(&source).expect("checked above");
        match src.out.binary_search(&(et, target)) {
            Ok(_) => {
                return Err(GraphError::ParallelEdge {
                    edge_type: decl.name.clone(),
                    from: source,
                    to: target,
                })
            }
            Err(pos) => src.out.insert(pos, (et, target)),
        }
        let tgt = self.nodes.get_mut(&target).expect("checked above");
        let pos = tgt.inc.binary_search(&(et, source)).unwrap_err();
        tgt.inc.insert(pos, (et, source));
        self.edge_count += 1;
        Ok(())
    }

    /// Removes an edge; returns whether it was present.
    pub fn remove_edge(&mut self, et: EdgeTypeId, source: NodeId, target: NodeId) -> bool {
        let Some(src) = self.nodes.get_mut(&source) else {
            return false;
        };
        let Ok(pos) = src.out.binary_search(&(et, target)) else {
            return false;
        };
        src.out.remove(pos);
        if let Some(tgt) = self.nodes.get_mut(&target) {
            if let Ok(pos) = tgt.inc.binary_search(&(et, source)) {
                tgt.inc.remove(pos);
            }
        }
        self.edge_count -= 1;
        true
    }

    /// Removes a node together with all its incident edges.
    pub fn remove_node(&mut self, id: NodeId) -> Result<(), GraphError> {
        let entry = self.nodes.remove(&id).ok_or(GraphError::UnknownNode(id))?;
        let ids = &mut self.by_type[entry.ty.index()];
        if let Ok(pos) = ids.binary_search(&id) {
            ids.remove(pos);
        }
        for end in [End::Source, End::Target] {
            for &(et, other) in entry.adjacency(end) {
                if other == id {
                    // self-loop: already gone with the node
                    if end == End::Source {
                        self.edge_count -= 1;
                    }
                    continue;
                }
                if let Some(o) = self.nodes.get_mut(&other) {
                    let adj = o.adjacency_mut(end.opposite());
                    if let Ok(pos) = adj.binary_search(&(et, id)) {
                        adj.remove(pos);
                    }
                }
                self.edge_count -= 1;
            }
        }
        Ok(())
    }

    /// The id the next created node receives.
    pub fn next_node_id(&self) -> NodeId {
        NodeId(self.next_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Multiplicity;

    fn mm() -> Metamodel {
        Metamodel::builder()
            .node_type("S")
            .node_type("W")
            .attribute("effort", AttrKind::Integer)
            .abstract_type("X")
            .edge_type("e", "S", "W", Multiplicity::at_least(1), Multiplicity::range(0, 1))
            .build()
            .unwrap()
    }

    #[test]
    fn add_and_count() {
        let mm = mm();
        let s = mm.node_type_id("S").unwrap();
        let w = mm.node_type_id("W").unwrap();
        let e = mm.edge_type_id("e").unwrap();
        let mut m = Model::new();
        let s0 = m.add_node(&mm, s, Attributes::new()).unwrap();
        assert_eq!(m.count_incident(s0, e, End::Source), 0);
        let ws: Vec<_> = (0..3)
            .map(|_| m.add_node(&mm, w, Attributes::new()).unwrap())
            .collect();
        for &wi in &ws {
            m.add_edge(&mm, e, s0, wi).unwrap();
        }
        assert_eq!(m.count_incident(s0, e, End::Source), 3);
        assert_eq!(m.count_incident(ws[1], e, End::Target), 1);
        assert_eq!(m.edge_count(), 3);
        assert_eq!(m.neighbours(s0, e, End::Source).collect::<Vec<_>>(), ws);
    }

    #[test]
    fn type_errors_are_rejected() {
        let mm = mm();
        let s = mm.node_type_id("S").unwrap();
        let w = mm.node_type_id("W").unwrap();
        let x = mm.node_type_id("X").unwrap();
        let e = mm.edge_type_id("e").unwrap();
        let mut m = Model::new();
        assert!(matches!(
            m.add_node(&mm, x, Attributes::new()),
            Err(GraphError::AbstractInstantiation(_))
        ));
        let mut bad = Attributes::new();
        bad.insert("effort".into(), AttrValue::Str("lots".into()));
        assert!(m.add_node(&mm, w, bad).is_err());
        let s0 = m.add_node(&mm, s, Attributes::new()).unwrap();
        let w0 = m.add_node(&mm, w, Attributes::new()).unwrap();
        assert!(m.add_edge(&mm, e, w0, s0).is_err());
        m.add_edge(&mm, e, s0, w0).unwrap();
        assert!(matches!(
            m.add_edge(&mm, e, s0, w0),
            Err(GraphError::ParallelEdge { .. })
        ));
    }

    #[test]
    fn remove_node_drops_incident_edges_and_keeps_ids() {
        let mm = mm();
        let s = mm.node_type_id("S").unwrap();
        let w = mm.node_type_id("W").unwrap();
        let e = mm.edge_type_id("e").unwrap();
        let mut m = Model::new();
        let s0 = m.add_node(&mm, s, Attributes::new()).unwrap();
        let w0 = m.add_node(&mm, w, Attributes::new()).unwrap();
        m.add_edge(&mm, e, s0, w0).unwrap();
        let copy = m.clone();
        m.remove_node(s0).unwrap();
        assert_eq!(m.edge_count(), 0);
        assert_eq!(m.count_incident(w0, e, End::Target), 0);
        let fresh = m.add_node(&mm, s, Attributes::new()).unwrap();
        assert_ne!(fresh, s0);
        assert!(copy.has_edge(e, s0, w0));
    }
}
