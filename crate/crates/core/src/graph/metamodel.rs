use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::GraphError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeTypeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeTypeId(pub u32);

impl NodeTypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeTypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Upper bound of a multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Upper {
    Bounded(u32),
    Unbounded,
}

impl Upper {
    pub fn is_unbounded(self) -> bool {
        matches!(self, Upper::Unbounded)
    }

    pub fn admits(self, count: usize) -> bool {
        match self {
            Upper::Bounded(u) => count <= u as usize,
            Upper::Unbounded => true,
        }
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Upper::Bounded(u) => Some(u),
            Upper::Unbounded => None,
        }
    }
}

impl fmt::Display for Upper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Upper::Bounded(u) => write!(f, "{u}"),
            Upper::Unbounded => f.write_str("*"),
        }
    }
}

impl Serialize for Upper {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Upper::Bounded(u) => s.serialize_u32(*u),
            Upper::Unbounded => s.serialize_str("*"),
        }
    }
}

impl<'de> Deserialize<'de> for Upper {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(u) => Ok(Upper::Bounded(u)),
            Raw::Str(s) if s == "*" => Ok(Upper::Unbounded),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "upper bound must be a non-negative integer or \"*\", got {s:?}"
            ))),
        }
    }
}

/// Bounds on the number of edges of one type incident to a node at one end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Multiplicity {
    lower: u32,
    upper: Upper,
}

impl Multiplicity {
    pub const ANY: Multiplicity = Multiplicity {
        lower: 0,
        upper: Upper::Unbounded,
    };

    pub fn new(lower: u32, upper: Upper) -> Result<Self, GraphError> {
        match upper {
            Upper::Bounded(0) => Err(GraphError::InvalidMultiplicity {
                lower,
                upper,
                reason: "upper bound must be positive",
            }),
            Upper::Bounded(u) if u < lower => Err(GraphError::InvalidMultiplicity {
                lower,
                upper,
                reason: "lower bound exceeds upper bound",
            }),
            _ => Ok(Multiplicity { lower, upper }),
        }
    }

    /// `lower..upper`; panics on an invalid pair, for literals in code.
    pub fn range(lower: u32, upper: u32) -> Self {
        Self::new(lower, Upper::Bounded(upper)).expect("valid multiplicity literal")
    }

    pub fn at_least(lower: u32) -> Self {
        Multiplicity {
            lower,
            upper: Upper::Unbounded,
        }
    }

    pub fn exactly(n: u32) -> Self {
        Self::range(n, n)
    }

    pub fn lower(&self) -> u32 {
        self.lower
    }

    pub fn upper(&self) -> Upper {
        self.upper
    }

    pub fn is_fixed(&self) -> bool {
        self.upper == Upper::Bounded(self.lower)
    }

    pub fn admits(&self, count: usize) -> bool {
        count >= self.lower as usize && self.upper.admits(count)
    }

    /// True when every count admitted by `self` is admitted by `base`.
    pub fn narrows(&self, base: &Multiplicity) -> bool {
        let upper_ok = match (self.upper, base.upper) {
            (_, Upper::Unbounded) => true,
            (Upper::Unbounded, Upper::Bounded(_)) => false,
            (Upper::Bounded(a), Upper::Bounded(b)) => a <= b,
        };
        self.lower >= base.lower && upper_ok
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            lower: u32,
            upper: Upper,
        }
        let raw = Raw::deserialize(d)?;
        Multiplicity::new(raw.lower, raw.upper).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lower, self.upper)
    }
}

/// Position a node occupies on an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Source,
    Target,
}

impl End {
    pub fn opposite(self) -> End {
        match self {
            End::Source => End::Target,
            End::Target => End::Source,
        }
    }
}

impl fmt::Display for End {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            End::Source => "source",
            End::Target => "target",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Integer,
    Real,
    String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeType {
    pub name: String,
    pub is_abstract: bool,
    pub supertype: Option<NodeTypeId>,
    /// Own attributes; inherited ones are resolved through [`Metamodel::attribute_kind`].
    pub attributes: BTreeMap<String, AttrKind>,
}

/// An edge type between `source` and `target` node types.
///
/// `per_source` bounds how many edges of this type each source node has
/// (the `(n, m)` end when the source plays the A role), `per_target` how
/// many each target node has (`(k, l)`).
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeType {
    pub name: String,
    pub source: NodeTypeId,
    pub target: NodeTypeId,
    pub per_source: Multiplicity,
    pub per_target: Multiplicity,
}

impl EdgeType {
    /// Declared bound for nodes sitting at `end`.
    pub fn bound(&self, end: End) -> Multiplicity {
        match end {
            End::Source => self.per_source,
            End::Target => self.per_target,
        }
    }

    pub fn end_type(&self, end: End) -> NodeTypeId {
        match end {
            End::Source => self.source,
            End::Target => self.target,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Metamodel {
    node_types: Vec<NodeType>,
    edge_types: Vec<EdgeType>,
    node_index: BTreeMap<String, NodeTypeId>,
    edge_index: BTreeMap<String, EdgeTypeId>,
    // conforms[actual][expected]
    conforms: Vec<Vec<bool>>,
    // concrete types conforming to each type
    instantiable: Vec<Vec<NodeTypeId>>,
}

impl Metamodel {
    pub fn builder() -> MetamodelBuilder {
        MetamodelBuilder::default()
    }

    pub fn node_types(&self) -> impl ExactSizeIterator<Item = (NodeTypeId, &NodeType)> {
        self.node_types
            .iter()
            .enumerate()
            .map(|(i, t)| (NodeTypeId(i as u32), t))
    }

    pub fn edge_types(&self) -> impl ExactSizeIterator<Item = (EdgeTypeId, &EdgeType)> {
        self.edge_types
            .iter()
            .enumerate()
            .map(|(i, t)| (EdgeTypeId(i as u32), t))
    }

    pub fn node_type(&self, id: NodeTypeId) -> &NodeType {
        &self.node_types[id.index()]
    }

    pub fn edge_type(&self, id: EdgeTypeId) -> &EdgeType {
        &self.edge_types[id.index()]
    }

    pub fn node_type_id(&self, name: &str) -> Result<NodeTypeId, GraphError> {
        self.node_index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNodeType(name.to_owned()))
    }

    pub fn edge_type_id(&self, name: &str) -> Result<EdgeTypeId, GraphError> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownEdgeType(name.to_owned()))
    }

    pub fn node_type_name(&self, id: NodeTypeId) -> &str {
        &self.node_types[id.index()].name
    }

    pub fn edge_type_name(&self, id: EdgeTypeId) -> &str {
        &self.edge_types[id.index()].name
    }

    /// Whether a node of type `actual` may stand where `expected` is required.
    pub fn conforms(&self, actual: NodeTypeId, expected: NodeTypeId) -> bool {
        self.conforms[actual.index()][expected.index()]
    }

    pub fn attribute_kind(&self, ty: NodeTypeId, name: &str) -> Option<AttrKind> {
        let t = self.node_type(ty);
        t.attributes
            .get(name)
            .copied()
            .or_else(|| t.supertype.and_then(|s| self.attribute_kind(s, name)))
    }

    /// Every (edge type, end) at which a node of type `ty` can sit, ordered by edge type.
    pub fn incidences(&self, ty: NodeTypeId) -> Vec<(EdgeTypeId, End)> {
        let mut out = Vec::new();
        for (id, et) in self.edge_types() {
            if self.conforms(ty, et.source) {
                out.push((id, End::Source));
            }
            if self.conforms(ty, et.target) {
                out.push((id, End::Target));
            }
        }
        out
    }

    pub fn concrete_subtypes(&self, ty: NodeTypeId) -> Vec<NodeTypeId> {
        self.instantiable[ty.index()].clone()
    }

    pub(crate) fn instantiable(&self, ty: NodeTypeId) -> &[NodeTypeId] {
        &self.instantiable[ty.index()]
    }
}

#[derive(Default)]
pub struct MetamodelBuilder {
    node_types: Vec<(String, bool, Option<String>, BTreeMap<String, AttrKind>)>,
    edge_types: Vec<(String, String, String, Multiplicity, Multiplicity)>,
}

impl MetamodelBuilder {
    pub fn node_type(mut self, name: &str) -> Self {
        self.node_types
            .push((name.to_owned(), false, None, BTreeMap::new()));
        self
    }

    pub fn abstract_type(mut self, name: &str) -> Self {
        self.node_types
            .push((name.to_owned(), true, None, BTreeMap::new()));
        self
    }

    pub fn subtype(mut self, name: &str, supertype: &str) -> Self {
        self.node_types.push((
            name.to_owned(),
            false,
            Some(supertype.to_owned()),
            BTreeMap::new(),
        ));
        self
    }

    /// Adds an attribute to the most recently declared node type.
    pub fn attribute(mut self, name: &str, kind: AttrKind) -> Self {
        if let Some(last) = self.node_types.last_mut() {
            last.3.insert(name.to_owned(), kind);
        }
        self
    }

    pub fn edge_type(
        mut self,
        name: &str,
        source: &str,
        target: &str,
        per_source: Multiplicity,
        per_target: Multiplicity,
    ) -> Self {
        self.edge_types.push((
            name.to_owned(),
            source.to_owned(),
            target.to_owned(),
            per_source,
            per_target,
        ));
        self
    }

    pub fn build(self) -> Result<Metamodel, GraphError> {
        let mut node_index = BTreeMap::new();
        for (i, (name, ..)) in self.node_types.iter().enumerate() {
            if node_index.insert(name.clone(), NodeTypeId(i as u32)).is_some() {
                return Err(GraphError::DuplicateName(name.clone()));
            }
        }
        let mut node_types = Vec::with_capacity(self.node_types.len());
        for (name, is_abstract, supertype, attributes) in self.node_types {
            let supertype = match supertype {
                Some(s) => Some(
                    *node_index
                        .get(&s)
                        .ok_or_else(|| GraphError::UnknownNodeType(s.clone()))?,
                ),
                None => None,
            };
            node_types.push(NodeType {
                name,
                is_abstract,
                supertype,
                attributes,
            });
        }
        // one level of subtyping: a supertype may not itself have a supertype
        for t in &node_types {
            if let Some(s) = t.supertype {
                if node_types[s.index()].supertype.is_some() {
                    return Err(GraphError::DeepHierarchy(t.name.clone()));
                }
            }
        }
        let n = node_types.len();
        let mut conforms = vec![vec![false; n]; n];
        for (i, t) in node_types.iter().enumerate() {
            conforms[i][i] = true;
            if let Some(s) = t.supertype {
                conforms[i][s.index()] = true;
            }
        }

        let mut edge_index = BTreeMap::new();
        let mut edge_types = Vec::with_capacity(self.edge_types.len());
        for (i, (name, source, target, per_source, per_target)) in
            self.edge_types.into_iter().enumerate()
        {
            if node_index.contains_key(&name)
                || edge_index.insert(name.clone(), EdgeTypeId(i as u32)).is_some()
            {
                return Err(GraphError::DuplicateName(name));
            }
            let source = *node_index
                .get(&source)
                .ok_or(GraphError::UnknownNodeType(source))?;
            let target = *node_index
                .get(&target)
                .ok_or(GraphError::UnknownNodeType(target))?;
            edge_types.push(EdgeType {
                name,
                source,
                target,
                per_source,
                per_target,
            });
        }
        let instantiable = (0..n)
            .map(|e| {
                (0..n)
                    .filter(|&a| !node_types[a].is_abstract && conforms[a][e])
                    .map(|a| NodeTypeId(a as u32))
                    .collect()
            })
            .collect();
        Ok(Metamodel {
            node_types,
            edge_types,
            node_index,
            edge_index,
            conforms,
            instantiable,
        })
    }
}

/// Solution constraints: refined multiplicities keyed by (edge type, end).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    refinements: BTreeMap<(EdgeTypeId, End), Multiplicity>,
}

impl ConstraintSet {
    /// No refinements: effective bounds are the metamodel's own.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(
        mm: &Metamodel,
        refinements: impl IntoIterator<Item = (EdgeTypeId, End, Multiplicity)>,
    ) -> Result<Self, GraphError> {
        let mut map = BTreeMap::new();
        for (et, end, mult) in refinements {
            if et.index() >= mm.edge_types.len() {
                return Err(GraphError::UnknownEdgeType(format!("#{}", et.0)));
            }
            let base = mm.edge_type(et).bound(end);
            if !mult.narrows(&base) {
                return Err(GraphError::WideningRefinement {
                    edge_type: mm.edge_type_name(et).to_owned(),
                    end,
                    base,
                    refined: mult,
                });
            }
            map.insert((et, end), mult);
        }
        Ok(ConstraintSet { refinements: map })
    }

    /// Effective bound for nodes at `end` of `et`.
    pub fn bound(&self, mm: &Metamodel, et: EdgeTypeId, end: End) -> Multiplicity {
        self.refinements
            .get(&(et, end))
            .copied()
            .unwrap_or_else(|| mm.edge_type(et).bound(end))
    }

    pub fn refinements(&self) -> impl Iterator<Item = (EdgeTypeId, End, Multiplicity)> + '_ {
        self.refinements.iter().map(|(&(et, end), &m)| (et, end, m))
    }

    pub fn is_empty(&self) -> bool {
        self.refinements.is_empty()
    }
}
