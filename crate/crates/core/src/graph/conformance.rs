use serde::Serialize;

use super::metamodel::{ConstraintSet, EdgeTypeId, End, Metamodel, Multiplicity, Upper};
use super::model::{Model, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ViolationKind {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Violation {
    pub node: NodeId,
    pub edge_type: EdgeTypeId,
    /// The end at which `node` sits.
    pub end: End,
    pub kind: ViolationKind,
    pub actual: usize,
    pub bound: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConformanceReport {
    pub violations: Vec<Violation>,
}

impl ConformanceReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every node against the effective bounds of every edge-type end it
/// can occupy. Violations are ordered by node id, then edge type, then end.
pub fn check_conformance(model: &Model, mm: &Metamodel, cs: &ConstraintSet) -> ConformanceReport {
    let mut violations = Vec::new();
    let mut incidences: Vec<Option<Vec<(EdgeTypeId, End, Multiplicity)>>> =
        vec![None; mm.node_types().len()];
    for id in model.node_ids() {
        let ty = model.node_type(id).expect("listed node exists");
        let inc = incidences[ty.index()].get_or_insert_with(|| {
            mm.incidences(ty)
                .into_iter()
                .map(|(et, end)| (et, end, cs.bound(mm, et, end)))
                .collect()
        });
        for &(et, end, bound) in inc.iter() {
            let actual = model.count_incident(id, et, end);
            if actual < bound.lower() as usize {
                violations.push(Violation {
                    node: id,
                    edge_type: et,
                    end,
                    kind: ViolationKind::Lower,
                    actual,
                    bound: bound.lower(),
                });
            } else if let Upper::Bounded(u) = bound.upper() {
                if actual > u as usize {
                    violations.push(Violation {
                        node: id,
                        edge_type: et,
                        end,
                        kind: ViolationKind::Upper,
                        actual,
                        bound: u,
                    });
                }
            }
        }
    }
    ConformanceReport { violations }
}

/// Effective bounds of an edge type seen from the node playing the A role.
///
/// `a_end` is `(n, m)`: how many B neighbours an A must/may have;
/// `b_end` is `(k, l)`: how many A neighbours a B must/may have.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PatternClass {
    pub a_end: Multiplicity,
    pub b_end: Multiplicity,
    pub a_fixed: bool,
    pub b_fixed: bool,
    pub a_open: bool,
    pub b_open: bool,
    pub a_unbounded: bool,
    pub b_unbounded: bool,
}

impl PatternClass {
    pub fn new(a_end: Multiplicity, b_end: Multiplicity) -> Self {
        PatternClass {
            a_end,
            b_end,
            a_fixed: a_end.is_fixed(),
            b_fixed: b_end.is_fixed(),
            a_open: a_end.lower() == 0,
            b_open: b_end.lower() == 0,
            a_unbounded: a_end.upper().is_unbounded(),
            b_unbounded: b_end.upper().is_unbounded(),
        }
    }

    /// Classification with the node at `a_side` playing A.
    pub fn oriented(mm: &Metamodel, cs: &ConstraintSet, et: EdgeTypeId, a_side: End) -> Self {
        Self::new(cs.bound(mm, et, a_side), cs.bound(mm, et, a_side.opposite()))
    }

    pub fn n(&self) -> u32 {
        self.a_end.lower()
    }

    pub fn m(&self) -> Upper {
        self.a_end.upper()
    }

    pub fn k(&self) -> u32 {
        self.b_end.lower()
    }

    pub fn l(&self) -> Upper {
        self.b_end.upper()
    }
}

/// Classification of an edge type with its source playing A.
pub fn classify_pattern(mm: &Metamodel, cs: &ConstraintSet, et: EdgeTypeId) -> PatternClass {
    PatternClass::oriented(mm, cs, et, End::Source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Attributes, Metamodel};

    fn sp() -> (Metamodel, ConstraintSet) {
        let mm = Metamodel::builder()
            .node_type("Sprint")
            .node_type("WorkItem")
            .edge_type(
                "isPlannedFor",
                "Sprint",
                "WorkItem",
                Multiplicity::at_least(1),
                Multiplicity::range(0, 1),
            )
            .build()
            .unwrap();
        let e = mm.edge_type_id("isPlannedFor").unwrap();
        let cs = ConstraintSet::new(&mm, [(e, End::Target, Multiplicity::exactly(1))]).unwrap();
        (mm, cs)
    }

    #[test]
    fn empty_sprint_violates_lower_bound() {
        let (mm, cs) = sp();
        let mut m = Model::new();
        let s = m
            .add_node(&mm, mm.node_type_id("Sprint").unwrap(), Attributes::new())
            .unwrap();
        let r = check_conformance(&m, &mm, &cs);
        assert_eq!(r.len(), 1);
        assert_eq!(r.violations[0].node, s);
        assert_eq!(r.violations[0].kind, ViolationKind::Lower);
        assert_eq!(r.violations[0].end, End::Source);
    }

    #[test]
    fn doubly_planned_item_violates_upper_bound() {
        let (mm, _) = sp();
        let e = mm.edge_type_id("isPlannedFor").unwrap();
        let mut m = Model::new();
        let st = mm.node_type_id("Sprint").unwrap();
        let s1 = m.add_node(&mm, st, Attributes::new()).unwrap();
        let s2 = m.add_node(&mm, st, Attributes::new()).unwrap();
        let w = m
            .add_node(&mm, mm.node_type_id("WorkItem").unwrap(), Attributes::new())
            .unwrap();
        m.add_edge(&mm, e, s1, w).unwrap();
        m.add_edge(&mm, e, s2, w).unwrap();
        let r = check_conformance(&m, &mm, &ConstraintSet::empty());
        assert_eq!(
            r.violations,
            vec![Violation {
                node: w,
                edge_type: e,
                end: End::Target,
                kind: ViolationKind::Upper,
                actual: 2,
                bound: 1
            }]
        );
    }

    #[test]
    fn classification_of_sprint_items() {
        let (mm, cs) = sp();
        let e = mm.edge_type_id("isPlannedFor").unwrap();
        let base = classify_pattern(&mm, &ConstraintSet::empty(), e);
        assert_eq!((base.n(), base.m(), base.k(), base.l()), (1, Upper::Unbounded, 0, Upper::Bounded(1)));
        assert!(!base.a_fixed && !base.b_fixed);
        let refined = classify_pattern(&mm, &cs, e);
        assert!(refined.b_fixed);
        assert_eq!(refined.k(), 1);
        let fixed = PatternClass::new(Multiplicity::exactly(2), Multiplicity::ANY);
        assert!(fixed.a_fixed && fixed.b_open && fixed.b_unbounded);
    }
}
