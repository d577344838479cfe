use super::hypervolume::pareto_dominates;
use super::MetricsError;

/// Non-dominated, deduplicated union of several fronts, sorted
/// lexicographically.
pub fn merge_reference_set(fronts: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let mut all: Vec<Vec<f64>> = fronts.iter().flatten().cloned().collect();
    all.sort_by(|a, b| lex(a, b));
    all.dedup();
    let keep: Vec<bool> = all
        .iter()
        .map(|p| !all.iter().any(|q| pareto_dominates(q, p)))
        .collect();
    all.into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

pub(crate) fn lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn same(a: &[f64], b: &[f64], epsilon: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            if epsilon == 0.0 {
                x == y
            } else {
                (x - y).abs() <= epsilon
            }
        })
}

/// Best-solutions ratio: the share of reference points found in
/// `contribution`. Membership is exact equality unless `epsilon > 0`.
pub fn bsr(
    contribution: &[Vec<f64>],
    reference: &[Vec<f64>],
    epsilon: f64,
) -> Result<f64, MetricsError> {
    if reference.is_empty() {
        return Err(MetricsError::EmptyReference);
    }
    let hits = reference
        .iter()
        .filter(|r| contribution.iter().any(|c| same(c, r, epsilon)))
        .count();
    Ok(hits as f64 / reference.len() as f64)
}

/// Number of reference points contributed (the numerator of [`bsr`]).
pub fn reference_contribution(contribution: &[Vec<f64>], reference: &[Vec<f64>], epsilon: f64) -> usize {
    reference
        .iter()
        .filter(|r| contribution.iter().any(|c| same(c, r, epsilon)))
        .count()
}
