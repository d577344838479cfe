//! Quality indicators and statistics for comparing search runs.

mod hypervolume;
mod reference;
mod stats;

pub use hypervolume::{hypervolume, pareto_dominates};
pub use reference::{bsr, merge_reference_set, reference_contribution};
pub use stats::{cohens_d, mann_whitney_u, median, summarize, CohensD, EffectSize, MannWhitney, Summary};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("hypervolume supports 1 to 3 objectives, got {0}")]
    UnsupportedArity(usize),
    #[error("expected {expected} objectives, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("point {point:?} lies outside the nadir box {nadir:?}")]
    OutsideNadir { point: Vec<f64>, nadir: Vec<f64> },
    #[error("reference set is empty")]
    EmptyReference,
    #[error("sample is empty")]
    EmptySample,
    #[error("at least {need} samples required")]
    TooFewSamples { need: usize },
}
