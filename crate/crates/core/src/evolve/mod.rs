//! Mutation-only NSGA-II over typed graph models.

mod nsga2;
mod operator;

pub use nsga2::{
    crowding_distance, dominates, evolve, init_population, mutate, nondominated_sort, GenerationLog, Mutation,
    SearchResult,
};
pub use operator::{RuleOperator, SearchOperator};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Model;
use crate::rules::ApplyError;

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("no search operators given")]
    NoOperators,
    #[error("objective vectors of different length ({left} and {right})")]
    ArityMismatch { left: usize, right: usize },
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error(transparent)]
    Apply(#[from] ApplyError),
}

/// How a mutation picks the operator application.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Uniform over every (operator, match) pair.
    Classic,
    /// Uniform operator among the applicable ones, then uniform match.
    Nondet,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "classic" => Ok(Strategy::Classic),
            "nondet" => Ok(Strategy::Nondet),
            other => Err(format!("unknown strategy `{other}` (expected classic or nondet)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub population_size: usize,
    pub evolutions: usize,
    pub strategy: Strategy,
    pub rng_seed: u64,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), EvolveError> {
        if self.population_size < 2 {
            return Err(EvolveError::Config(format!(
                "population size must be at least 2, got {}",
                self.population_size
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    /// Maps a natural value into minimization space and back (self-inverse).
    pub fn minimized(self, v: f64) -> f64 {
        match self {
            Direction::Min => v,
            Direction::Max => -v,
        }
    }
}

/// An optimization problem over models.
pub trait Problem: Sync {
    fn objective_names(&self) -> Vec<String>;

    fn directions(&self) -> Vec<Direction>;

    /// Objective values in their natural sign and the number of constraint
    /// violations.
    fn evaluate(&self, model: &Model) -> Result<(Vec<f64>, usize), String>;

    /// Per-objective (low, high) bounds in minimization space, used to
    /// normalize the hypervolume trace.
    fn objective_bounds(&self) -> Option<Vec<(f64, f64)>> {
        None
    }
}

#[derive(Clone, Debug)]
pub struct Individual {
    pub model: Model,
    /// Minimization-space objective values.
    pub objectives: Vec<f64>,
    pub violations: usize,
}

impl Individual {
    pub fn is_feasible(&self) -> bool {
        self.violations == 0
    }

    /// Objectives in their natural sign.
    pub fn natural_objectives(&self, directions: &[Direction]) -> Vec<f64> {
        self.objectives
            .iter()
            .zip(directions)
            .map(|(&v, d)| d.minimized(v))
            .collect()
    }
}
