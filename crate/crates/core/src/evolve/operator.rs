use std::sync::Arc;

use crate::graph::{Metamodel, Model, NodeId};
use crate::rules::{self, ApplyError, Match, Rule};

/// A mutation operator: something with enumerable matches that can be
/// applied at one of them.
pub trait SearchOperator: Send + Sync {
    fn name(&self) -> &str;

    /// Visits matches in a deterministic order until `visit` returns true;
    /// returns whether it did.
    fn for_each_match(&self, model: &Model, visit: &mut dyn FnMut(&[NodeId]) -> bool) -> bool;

    fn apply(&self, model: &Model, binding: &[NodeId]) -> Result<Model, ApplyError>;

    fn count_matches(&self, model: &Model) -> usize {
        let mut n = 0;
        self.for_each_match(model, &mut |_| {
            n += 1;
            false
        });
        n
    }

    fn nth_match(&self, model: &Model, index: usize) -> Option<Vec<NodeId>> {
        let mut seen = 0;
        let mut out = None;
        self.for_each_match(model, &mut |b| {
            if seen == index {
                out = Some(b.to_vec());
                return true;
            }
            seen += 1;
            false
        });
        out
    }

    fn find_matches(&self, model: &Model) -> Vec<Match> {
        let mut out = Vec::new();
        self.for_each_match(model, &mut |b| {
            out.push(Match { binding: b.to_vec() });
            false
        });
        out
    }

    fn applicable(&self, model: &Model) -> bool {
        self.for_each_match(model, &mut |_| true)
    }
}

/// A transformation rule used as a search operator.
pub struct RuleOperator {
    pub rule: Rule,
    pub metamodel: Arc<Metamodel>,
}

impl RuleOperator {
    pub fn new(rule: Rule, metamodel: Arc<Metamodel>) -> Self {
        RuleOperator { rule, metamodel }
    }

    pub fn boxed_all(rules: impl IntoIterator<Item = Rule>, mm: &Arc<Metamodel>) -> Vec<Box<dyn SearchOperator>> {
        rules
            .into_iter()
            .map(|r| Box::new(RuleOperator::new(r, mm.clone())) as Box<dyn SearchOperator>)
            .collect()
    }
}

impl SearchOperator for RuleOperator {
    fn name(&self) -> &str {
        &self.rule.name
    }

    fn for_each_match(&self, model: &Model, visit: &mut dyn FnMut(&[NodeId]) -> bool) -> bool {
        rules::for_each_match(&self.rule, &self.metamodel, model, visit)
    }

    fn apply(&self, model: &Model, binding: &[NodeId]) -> Result<Model, ApplyError> {
        rules::apply(
            &self.rule,
            &self.metamodel,
            model,
            &Match {
                binding: binding.to_vec(),
            },
        )
    }
}
