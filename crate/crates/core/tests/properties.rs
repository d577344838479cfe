use std::collections::{BTreeMap, BTreeSet};

use acpso::evolve::{mutate, nondominated_sort, Individual, RuleOperator, Strategy};
use acpso::graph::{check_conformance, Attributes, End, Model, NodeId};
use acpso::metrics::{hypervolume, mann_whitney_u, pareto_dominates};
use acpso::problems::{cra::cra_index, nrp::nrp_objectives, PackKind, ProblemPack};
use acpso::rulegen::GenOptions;
use acpso::rules::Phase;
use acpso::testkit::random_solution_model;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// CRA model with features assigned to classes by `owner` (class index per
/// feature, `None` = unassigned). Classes are created in `class_order`.
fn cra_model(pack: &ProblemPack, seed: u64, owner: &[Option<usize>], class_order: &[usize]) -> Model {
    let mm = &*pack.metamodel;
    let methods = owner.len() / 2;
    let attrs = owner.len() - methods;
    let mut model = pack
        .generate_instance(&[attrs, methods, attrs * methods / 2, methods * methods.saturating_sub(1) / 2], seed)
        .unwrap()
        .model;
    let feature_ty = mm.node_type_id("Feature").unwrap();
    let features: Vec<NodeId> = model.nodes_of_type(mm, feature_ty).collect();
    let root = model.nodes_of_type(mm, mm.node_type_id("ClassModel").unwrap()).next().unwrap();
    let mut classes = BTreeMap::new();
    for &c in class_order {
        let id = model.add_node(mm, mm.node_type_id("Class").unwrap(), Attributes::new()).unwrap();
        model.add_edge(mm, mm.edge_type_id("classes").unwrap(), root, id).unwrap();
        classes.insert(c, id);
    }
    let enc = mm.edge_type_id("encapsulates").unwrap();
    for (f, o) in features.iter().zip(owner) {
        if let Some(c) = o {
            model.add_edge(mm, enc, classes[c], *f).unwrap();
        }
    }
    model
}

/// Straightforward CRA index over explicit feature sets.
fn cra_oracle(pack: &ProblemPack, model: &Model) -> f64 {
    let mm = &*pack.metamodel;
    let enc = mm.edge_type_id("encapsulates").unwrap();
    let dd = mm.edge_type_id("dataDependency").unwrap();
    let fd = mm.edge_type_id("functionalDependency").unwrap();
    let method = mm.node_type_id("Method").unwrap();
    let classes: Vec<NodeId> = model.nodes_of_type(mm, mm.node_type_id("Class").unwrap()).collect();
    let split = |c: NodeId| {
        let fs: Vec<NodeId> = model.neighbours(c, enc, End::Source).collect();
        let ms: BTreeSet<NodeId> = fs.iter().copied().filter(|&f| model.node_type(f) == Some(method)).collect();
        let as_: BTreeSet<NodeId> = fs.iter().copied().filter(|&f| model.node_type(f) != Some(method)).collect();
        (ms, as_)
    };
    let frac = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let mut total = 0.0;
    for &ci in &classes {
        for &cj in &classes {
            let (mi, _) = split(ci);
            let (mj, aj) = split(cj);
            let mai = mi.iter().map(|&m| aj.iter().filter(|&&a| model.has_edge(dd, m, a)).count()).sum();
            let mmi = mi.iter().map(|&m| mj.iter().filter(|&&x| model.has_edge(fd, m, x)).count()).sum();
            let term = frac(mai, mi.len() * aj.len()) + frac(mmi, mi.len() * mj.len().saturating_sub(1));
            total += if ci == cj { term } else { -term };
        }
    }
    total
}

fn population(points: &[(u8, u8, u8)]) -> Vec<Individual> {
    points
        .iter()
        .map(|&(a, b, v)| Individual {
            model: Model::new(),
            objectives: vec![a as f64, b as f64],
            violations: v as usize,
        })
        .collect()
}

/// Rank by repeatedly peeling off the constrained-nondominated members.
fn sort_oracle(pop: &[Individual]) -> Vec<Vec<usize>> {
    let dominates = |a: &Individual, b: &Individual| {
        a.violations < b.violations || (a.violations == b.violations && pareto_dominates(&a.objectives, &b.objectives))
    };
    let mut left: Vec<usize> = (0..pop.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&pop[j], &pop[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    fronts
}

/// Area of a union of anchored boxes by coordinate compression.
fn area_oracle(points: &[Vec<f64>], nadir: [f64; 2]) -> f64 {
    let mut xs: Vec<f64> = points.iter().map(|p| p[0]).chain([nadir[0]]).collect();
    let mut ys: Vec<f64> = points.iter().map(|p| p[1]).chain([nadir[1]]).collect();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            let covered = points.iter().any(|p| p[0] <= wx[0] && p[1] <= wy[0]);
            if covered {
                area += (wx[1] - wx[0]) * (wy[1] - wy[0]);
            }
        }
    }
    area
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cra_index_matches_oracle(seed in 0u64..1000, owner in prop::collection::vec(prop::option::of(0usize..4), 2..9)) {
        let pack = ProblemPack::new(PackKind::Cra);
        let model = cra_model(&pack, seed, &owner, &[0, 1, 2, 3]);
        let got = cra_index(&pack.metamodel, &model).unwrap();
        prop_assert!((got - cra_oracle(&pack, &model)).abs() < 1e-9);
    }

    #[test]
    fn cra_index_ignores_class_order(seed in 0u64..1000, owner in prop::collection::vec(prop::option::of(0usize..4), 2..9)) {
        let pack = ProblemPack::new(PackKind::Cra);
        let a = cra_index(&pack.metamodel, &cra_model(&pack, seed, &owner, &[0, 1, 2, 3])).unwrap();
        let b = cra_index(&pack.metamodel, &cra_model(&pack, seed, &owner, &[3, 1, 0, 2])).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn nrp_selection_monotonicity(seed in 0u64..500, extra in 0usize..20) {
        let pack = ProblemPack::new(PackKind::Nrp);
        let mm = &*pack.metamodel;
        let mut model = pack.generate_instance(&[3, 8, 20], seed).unwrap().model;
        let solution = model.nodes_of_type(mm, mm.node_type_id("Solution").unwrap()).next().unwrap();
        let selected = mm.edge_type_id("selected").unwrap();
        let arts: Vec<NodeId> = model.nodes_of_type(mm, mm.node_type_id("SoftwareArtifact").unwrap()).collect();
        let mut before = nrp_objectives(mm, &model).unwrap();
        for &a in arts.iter().cycle().skip(extra).take(arts.len()) {
            if model.has_edge(selected, solution, a) {
                continue;
            }
            model.add_edge(mm, selected, solution, a).unwrap();
            let after = nrp_objectives(mm, &model).unwrap();
            prop_assert!(after.0 > before.0);
            prop_assert!(after.1 >= before.1);
            before = after;
        }
    }

    #[test]
    fn nondominated_sort_matches_oracle(points in prop::collection::vec((0u8..6, 0u8..6, 0u8..2), 1..30)) {
        let pop = population(&points);
        let mut got = nondominated_sort(&pop);
        for f in &mut got {
            f.sort_unstable();
        }
        prop_assert_eq!(got, sort_oracle(&pop));
    }

    #[test]
    fn hypervolume_matches_grid_oracle(points in prop::collection::vec((0u8..10, 0u8..10), 0..12)) {
        let pts: Vec<Vec<f64>> = points.iter().map(|&(a, b)| vec![a as f64 / 10.0, b as f64 / 10.0]).collect();
        let hv = hypervolume(&pts, &[1.0, 1.0]).unwrap();
        prop_assert!((hv - area_oracle(&pts, [1.0, 1.0])).abs() < 1e-12);
    }

    #[test]
    fn mann_whitney_u_counts_pairs(a in prop::collection::vec(0u8..5, 1..8), b in prop::collection::vec(0u8..5, 1..8)) {
        let fa: Vec<f64> = a.iter().map(|&x| x as f64).collect();
        let fb: Vec<f64> = b.iter().map(|&x| x as f64).collect();
        let pairs: f64 = fa.iter().map(|x| fb.iter().map(|y| if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 }).sum::<f64>()).sum();
        let r = mann_whitney_u(&fa, &fb).unwrap();
        prop_assert_eq!(r.u_a, pairs);
        prop_assert_eq!(r.u_a + r.u_b, (a.len() * b.len()) as f64);
        prop_assert!((0.0..=1.0).contains(&r.p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Random walks with the solution-phase rules stay consistent.
    #[test]
    fn solution_rule_walks_stay_consistent(seed in any::<u64>(), pack_index in 0usize..3) {
        let pack = ProblemPack::new(PackKind::ALL[pack_index]);
        let set = pack.generated_rules(GenOptions::default()).unwrap();
        let rules: Vec<_> = (0..set.len())
            .filter(|&i| set.produced_in(i, Phase::Solution))
            .map(|i| set.rules[i].clone())
            .collect();
        let ops = RuleOperator::boxed_all(rules, &pack.metamodel);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = random_solution_model(&pack, 40, &mut rng);
        for _ in 0..40 {
            model = mutate(&model, &ops, Strategy::Classic, &mut rng).unwrap().model;
            let report = check_conformance(&model, &pack.metamodel, &pack.constraints);
            prop_assert!(report.is_consistent(), "{:?}", report.violations);
        }
    }
}
