use std::cmp::Ordering;

use log::warn;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{EvolveError, Individual, Problem, SearchConfig, SearchOperator, Strategy};
use crate::graph::{Model, NodeId};
use crate::metrics::{hypervolume, pareto_dominates};

/// Constrained dominance: fewer violations wins, otherwise Pareto dominance.
pub fn dominates(a: &Individual, b: &Individual) -> Result<bool, EvolveError> {
    if a.objectives.len() != b.objectives.len() {
        return Err(EvolveError::ArityMismatch {
            left: a.objectives.len(),
            right: b.objectives.len(),
        });
    }
    Ok(constrained_dominates(a, b))
}

fn constrained_dominates(a: &Individual, b: &Individual) -> bool {
    match a.violations.cmp(&b.violations) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => pareto_dominates(&a.objectives, &b.objectives),
    }
}

/// Fast non-dominated sort; returns fronts as index lists, each ascending.
pub fn nondominated_sort(pop: &[Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if constrained_dominates(&pop[i], &pop[j]) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if constrained_dominates(&pop[j], &pop[i]) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front` (boundary points infinite).
pub fn crowding_distance(pop: &[Individual], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    let mut dist = vec![0.0; k];
    if k == 0 {
        return dist;
    }
    let m = pop[front[0]].objectives.len();
    for obj in 0..m {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            pop[front[a]].objectives[obj]
                .total_cmp(&pop[front[b]].objectives[obj])
                .then(a.cmp(&b))
        });
        let lo = pop[front[order[0]]].objectives[obj];
        let hi = pop[front[order[k - 1]]].objectives[obj];
        dist[order[0]] = f64::INFINITY;
        dist[order[k - 1]] = f64::INFINITY;
        if hi > lo {
            for w in 1..k.saturating_sub(1) {
                let prev = pop[front[order[w - 1]]].objectives[obj];
                let next = pop[front[order[w + 1]]].objectives[obj];
                dist[order[w]] += (next - prev) / (hi - lo);
            }
        }
    }
    dist
}

/// Result of one mutation attempt.
#[derive(Clone, Debug)]
pub struct Mutation {
    pub model: Model,
    /// Operator index and binding, or `None` if nothing was applicable.
    pub applied: Option<(usize, Vec<NodeId>)>,
}

/// Applies one randomly chosen operator application.
///
/// `Classic` draws uniformly over all (operator, match) pairs; `Nondet`
/// draws an operator uniformly among those not yet tried, then one of its
/// matches uniformly. With nothing applicable the model comes back as is.
pub fn mutate(
    model: &Model,
    operators: &[Box<dyn SearchOperator>],
    strategy: Strategy,
    rng: &mut impl Rng,
) -> Result<Mutation, EvolveError> {
    let chosen = match strategy {
        Strategy::Classic => {
            let counts: Vec<usize> = operators.iter().map(|o| o.count_matches(model)).collect();
            let total: usize = counts.iter().sum();
            if total == 0 {
                None
            } else {
                let mut r = rng.gen_range(0..total);
                let mut pick = None;
                for (i, &c) in counts.iter().enumerate() {
                    if r < c {
                        pick = Some((i, r));
                        break;
                    }
                    r -= c;
                }
                pick
            }
        }
        Strategy::Nondet => {
            let mut remaining: Vec<usize> = (0..operators.len()).collect();
            let mut pick = None;
            while !remaining.is_empty() {
                let i = remaining.swap_remove(rng.gen_range(0..remaining.len()));
                let c = operators[i].count_matches(model);
                if c > 0 {
                    pick = Some((i, rng.gen_range(0..c)));
                    break;
                }
            }
            pick
        }
    };
    let Some((op, index)) = chosen else {
        return Ok(Mutation {
            model: model.clone(),
            applied: None,
        });
    };
    let binding = operators[op]
        .nth_match(model, index)
        .expect("match index within the counted range");
    let out = operators[op].apply(model, &binding)?;
    Ok(Mutation {
        model: out,
        applied: Some((op, binding)),
    })
}

fn evaluate(problem: &dyn Problem, model: Model) -> Result<Individual, EvolveError> {
    let (natural, violations) = problem
        .evaluate(&model)
        .map_err(EvolveError::Evaluation)?;
    let objectives = problem
        .directions()
        .iter()
        .zip(natural)
        .map(|(d, v)| d.minimized(v))
        .collect();
    Ok(Individual {
        model,
        objectives,
        violations,
    })
}

/// Copies of the seed, each after one mutation attempt, all evaluated.
pub fn init_population(
    problem: &dyn Problem,
    seed: &Model,
    operators: &[Box<dyn SearchOperator>],
    config: &SearchConfig,
    rng: &mut impl Rng,
) -> Result<Vec<Individual>, EvolveError> {
    config.validate()?;
    if operators.is_empty() {
        return Err(EvolveError::NoOperators);
    }
    let mut pop = Vec::with_capacity(config.population_size);
    let mut vacuous = 0;
    for _ in 0..config.population_size {
        let m = mutate(seed, operators, config.strategy, rng)?;
        if m.applied.is_none() {
            vacuous += 1;
        }
        pop.push(evaluate(problem, m.model)?);
    }
    if vacuous == config.population_size {
        warn!("no operator is applicable to the seed model; initial population is uniform");
    }
    Ok(pop)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationLog {
    pub generation: usize,
    /// Best value per objective among feasible individuals, natural sign.
    pub best: Vec<Option<f64>>,
    pub feasible: usize,
    pub front0: usize,
    /// Hypervolume of the feasible first front in normalized objective
    /// space, for problems with two or three objectives and known bounds.
    pub hypervolume: Option<f64>,
}

pub struct SearchResult {
    /// Feasible members of the final first front.
    pub front: Vec<Individual>,
    pub population: Vec<Individual>,
    pub log: Vec<GenerationLog>,
}

fn log_generation(problem: &dyn Problem, pop: &[Individual], generation: usize) -> GenerationLog {
    let dirs = problem.directions();
    let feasible: Vec<&Individual> = pop.iter().filter(|i| i.violations == 0).collect();
    let best = (0..dirs.len())
        .map(|o| {
            feasible
                .iter()
                .map(|i| i.objectives[o])
                .min_by(f64::total_cmp)
                .map(|v| dirs[o].minimized(v))
        })
        .collect();
    let fronts = nondominated_sort(pop);
    let front0 = fronts.first().map_or(0, Vec::len);
    let hypervolume = match problem.objective_bounds() {
        Some(bounds) if (2..=3).contains(&bounds.len()) => {
            let pts: Vec<Vec<f64>> = fronts
                .first()
                .into_iter()
                .flatten()
                .filter(|&&i| pop[i].violations == 0)
                .map(|&i| {
                    pop[i]
                        .objectives
                        .iter()
                        .zip(&bounds)
                        .map(|(v, (lo, hi))| {
                            if hi > lo {
                                ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
                            } else {
                                0.0
                            }
                        })
                        .collect()
                })
                .collect();
            hypervolume(&pts, &vec![1.0; bounds.len()]).ok()
        }
        _ => None,
    };
    GenerationLog {
        generation,
        best,
        feasible: feasible.len(),
        front0,
        hypervolume,
    }
}

fn better(rank: &[usize], crowd: &[f64], a: usize, b: usize) -> bool {
    rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] > crowd[b])
}

/// Rank and crowding distance of every individual.
fn rank_and_crowd(pop: &[Individual]) -> (Vec<usize>, Vec<f64>) {
    let mut rank = vec![0; pop.len()];
    let mut crowd = vec![0.0; pop.len()];
    for (r, front) in nondominated_sort(pop).iter().enumerate() {
        let d = crowding_distance(pop, front);
        for (&i, dist) in front.iter().zip(d) {
            rank[i] = r;
            crowd[i] = dist;
        }
    }
    (rank, crowd)
}

/// Mutation-only NSGA-II.
pub fn evolve(
    problem: &dyn Problem,
    operators: &[Box<dyn SearchOperator>],
    seed: &Model,
    config: &SearchConfig,
) -> Result<SearchResult, EvolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut pop = init_population(problem, seed, operators, config, &mut rng)?;
    let mut log = vec![log_generation(problem, &pop, 0)];
    let size = config.population_size;
    for generation in 1..=config.evolutions {
        let (rank, crowd) = rank_and_crowd(&pop);
        let mut offspring = Vec::with_capacity(size);
        for _ in 0..size {
            let a = rng.gen_range(0..pop.len());
            let b = rng.gen_range(0..pop.len());
            let parent = if better(&rank, &crowd, b, a) { b } else { a };
            let child = mutate(&pop[parent].model, operators, config.strategy, &mut rng)?;
            offspring.push(evaluate(problem, child.model)?);
        }
        pop.extend(offspring);
        pop = select(pop, size);
        log.push(log_generation(problem, &pop, generation));
    }
    let fronts = nondominated_sort(&pop);
    let front = fronts
        .first()
        .into_iter()
        .flatten()
        .filter(|&&i| pop[i].violations == 0)
        .map(|&i| pop[i].clone())
        .collect();
    Ok(SearchResult {
        front,
        population: pop,
        log,
    })
}

/// Environmental selection: whole fronts while they fit, then the most
/// crowded-apart members of the first front that does not.
fn select(pop: Vec<Individual>, size: usize) -> Vec<Individual> {
    let fronts = nondominated_sort(&pop);
    let mut keep: Vec<usize> = Vec::with_capacity(size);
    for front in &fronts {
        if keep.len() + front.len() <= size {
            keep.extend(front);
            continue;
        }
        let d = crowding_distance(&pop, front);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
        keep.extend(order.iter().take(size - keep.len()).map(|&w| front[w]));
        break;
    }
    let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
    keep.iter()
        .map(|&i| slots[i].take().expect("each index kept once"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(obj: &[f64], violations: usize) -> Individual {
        Individual {
            model: Model::new(),
            objectives: obj.to_vec(),
            violations,
        }
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&ind(&[1.0, 1.0], 0), &ind(&[2.0, 2.0], 0)).unwrap());
        assert!(dominates(&ind(&[9.0, 9.0], 0), &ind(&[0.0, 0.0], 3)).unwrap());
        let (a, b) = (ind(&[1.0, 2.0], 1), ind(&[2.0, 1.0], 1));
        assert!(!dominates(&a, &b).unwrap() && !dominates(&b, &a).unwrap());
        assert!(dominates(&ind(&[1.0], 0), &ind(&[1.0, 2.0], 0)).is_err());
    }

    #[test]
    fn chain_and_antichain() {
        let chain = vec![ind(&[3.0, 3.0], 0), ind(&[1.0, 1.0], 0), ind(&[2.0, 2.0], 0)];
        assert_eq!(nondominated_sort(&chain), vec![vec![1], vec![2], vec![0]]);
        let anti: Vec<_> = (0..4).map(|i| ind(&[i as f64, 3.0 - i as f64], 0)).collect();
        assert_eq!(nondominated_sort(&anti), vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn crowding_boundaries_are_infinite() {
        let pop: Vec<_> = [0.0, 1.0, 3.0, 4.0]
            .iter()
            .map(|&x| ind(&[x, 4.0 - x], 0))
            .collect();
        let d = crowding_distance(&pop, &[0, 1, 2, 3]);
        assert!(d[0].is_infinite() && d[3].is_infinite());
        assert!((d[1] - 1.5).abs() < 1e-12);
        assert!((d[2] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn selection_keeps_size_and_prefers_feasible() {
        let pop = vec![ind(&[0.0, 0.0], 2), ind(&[5.0, 5.0], 0), ind(&[1.0, 1.0], 1)];
        let kept = select(pop, 2);
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].violations, 0);
        assert_eq!(kept[1].violations, 1);
    }
}
