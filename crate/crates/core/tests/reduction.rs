use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcg_core::data::{split, Dataset, FeatureMask, InstanceMask, SplitScheme};
use rcg_core::graph::NeighborhoodGraph;
use rcg_core::metric::{DistanceMatrix, DistanceSpec};
use rcg_core::reduction::{instance_role, reduce, Action, Algorithm, AlgorithmConfig, InstanceRole};
use rcg_core::synth::{blobs, suite};

/// Algorithms that record their steps (the condensing baselines do not).
const TRACED: [&str; 5] = ["none", "fsrcg", "psrcg", "fsps", "fsrcg+psrcg"];

fn random_graph(seed: u64, n: usize, k: usize) -> (DistanceMatrix, NeighborhoodGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
    let labels: Vec<usize> = (0..n).map(|i| if i < 2 { i } else { rng.gen_range(0..3) }).collect();
    let ds = Dataset::from_numeric(&rows, &labels).unwrap();
    let full = InstanceMask::full(n);
    let spec = DistanceSpec::fit(&ds, &full, true);
    let m = DistanceMatrix::compute(&ds, &full, &FeatureMask::full(2), &spec).unwrap();
    let g = NeighborhoodGraph::build(&m, ds.labels(), ds.n_classes(), k).unwrap();
    (m, g)
}

fn role_by_scan(g: &NeighborhoodGraph, i: usize) -> InstanceRole {
    let adjacent: Vec<usize> =
        g.alive_indices().filter(|&j| j != i && (g.out_neighbors(i).contains(&j) || g.out_neighbors(j).contains(&i))).collect();
    let same = adjacent.iter().filter(|&&j| g.labels()[j] == g.labels()[i]).count();
    match same {
        s if s == adjacent.len() => InstanceRole::Center,
        0 => InstanceRole::Mislabeled,
        _ => InstanceRole::Border,
    }
}

#[test]
fn roles_match_adjacency_scan() {
    for seed in 0..20 {
        let (m, mut g) = random_graph(seed, 40, 1 + seed as usize % 4);
        for round in 0..5 {
            for i in g.alive_indices().collect::<Vec<_>>() {
                assert_eq!(instance_role(&g, i), role_by_scan(&g, i), "seed {seed} round {round} row {i}");
            }
            let victim = g.alive_indices().nth(round * 3).unwrap();
            g.remove_instance(&m, victim).unwrap();
        }
    }
}

fn training_fold(ds: &Dataset, seed: u64) -> InstanceMask {
    split(ds, &SplitScheme::KFold { folds: 3, seed, stratified: true }).unwrap().remove(0).train
}

#[test]
fn traces_replay_for_every_algorithm() {
    let cfg = AlgorithmConfig::default();
    for (idx, spec) in suite().iter().enumerate() {
        let ds = blobs(spec, 11, idx as u32).unwrap();
        let train = training_fold(&ds, idx as u64);
        for name in TRACED {
            let algo: Algorithm = name.parse().unwrap();
            let out = reduce(&ds, &train, algo, &cfg).unwrap();
            assert!(out.instances.is_subset_of(&train), "{name}");
            let forward = out.trace.steps.iter().any(|s| matches!(s.action, Action::AddFeature(_)));
            let start = if forward { FeatureMask::empty(ds.n_features()) } else { FeatureMask::full(ds.n_features()) };
            assert_eq!(out.trace.replay(start, train.clone()), (out.features.clone(), out.instances.clone()), "{name}");
            if let Some(last) = out.trace.steps.last() {
                assert_eq!(last.alive_count, out.instances.alive_count(), "{name}");
                assert_eq!(last.selected_count, out.features.selected_count(), "{name}");
            }
        }
    }
}

#[test]
fn accepted_steps_raise_rcg() {
    let cfg = AlgorithmConfig::default();
    for (idx, spec) in suite().iter().enumerate() {
        let ds = blobs(spec, 5, idx as u32).unwrap();
        let train = InstanceMask::full(ds.n_rows());
        for name in ["psrcg", "fsps", "fsrcg"] {
            let out = reduce(&ds, &train, name.parse().unwrap(), &cfg).unwrap();
            let steps = &out.trace.steps;
            for (i, s) in steps.iter().enumerate() {
                let rolled_back = match (&s.action, steps.get(i + 1).map(|n| &n.action)) {
                    (Action::RemoveInstance(a), Some(Action::Rollback(b))) => a == b,
                    _ => false,
                };
                let accepted = matches!(s.action, Action::RemoveInstance(_) | Action::RemoveFeature(_) | Action::AddFeature(_));
                if accepted && !rolled_back {
                    assert!(s.rcg_after > s.rcg_before, "{name} on {}: step {i} {:?}", spec.name, s);
                }
            }
        }
    }
}
