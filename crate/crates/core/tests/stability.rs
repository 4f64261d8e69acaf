mod oracles;

use oracles::{normal_dataset, Mix};
use subbotin_core::estimator::{graph_lambda_max, CombinationRule};
use subbotin_core::seed::rng_from;
use subbotin_core::simgen::{gen_pot, GraphKind, GraphSpec, HawkesParams};
use subbotin_core::solver::RegressionLoss;
use subbotin_core::stability::{
    default_mean_block_len, edge_stability, select_stable_graph, stability_grid, stationary_block_bootstrap,
    stationary_bootstrap_indices, tune, StabilityOptions, StabilityProfile,
};
use subbotin_core::{Dataset, ShapeParam};

fn nu(k: u32) -> ShapeParam {
    ShapeParam::new(k).unwrap()
}

fn planted(seed: u64) -> Dataset {
    let mut rng = Mix(seed);
    let (n, p) = (300, 5);
    let mut cols: Vec<f64> = (0..n * p).map(|_| rng.normal()).collect();
    for t in 0..n {
        cols[n + t] = 0.8 * cols[3 * n + t] + 0.6 * cols[n + t];
    }
    Dataset::from_columns(n, p, cols).unwrap().standardize().unwrap()
}

fn profile(p: usize, pairs: &[(usize, usize, usize)], reps: usize) -> StabilityProfile {
    let mut counts = vec![0; p * p];
    for &(i, j, c) in pairs {
        counts[i * p + j] = c;
        counts[j * p + i] = c;
    }
    StabilityProfile::from_counts(p, &counts, reps, 0, RegressionLoss::Power(nu(2)), 0.1).unwrap()
}

#[test]
fn bootstrap_shapes_and_determinism() {
    let mut rng = rng_from(1, &[]);
    for n in [2usize, 7, 100, 1001] {
        for mean in [1.0, 3.5, default_mean_block_len(n)] {
            let idx = stationary_bootstrap_indices(n, mean, &mut rng).unwrap();
            assert_eq!(idx.len(), n);
            assert!(idx.iter().all(|&r| r < n));
        }
    }
    let a = stationary_bootstrap_indices(500, 9.0, &mut rng_from(4, &[])).unwrap();
    let b = stationary_bootstrap_indices(500, 9.0, &mut rng_from(4, &[])).unwrap();
    assert_eq!(a, b);
    assert!(stationary_bootstrap_indices(1, 1.0, &mut rng).is_err());
    assert!(stationary_bootstrap_indices(10, 0.5, &mut rng).is_err());
    assert_eq!(default_mean_block_len(1000), 32.0);
}

#[test]
fn unit_mean_block_is_iid_resampling() {
    let n = 200;
    let mut rng = rng_from(2, &[]);
    let mut successors = 0;
    let mut total = 0;
    for _ in 0..200 {
        let idx = stationary_bootstrap_indices(n, 1.0, &mut rng).unwrap();
        for w in idx.windows(2) {
            successors += (w[1] == (w[0] + 1) % n) as usize;
            total += 1;
        }
    }
    // i.i.d. uniform draws: P(next = current + 1) = 1/n
    let rate = successors as f64 / total as f64;
    assert!((rate - 1.0 / n as f64).abs() < 0.002, "{rate}");
}

#[test]
fn longer_blocks_keep_more_runs() {
    let n = 400;
    let idx = stationary_bootstrap_indices(n, 20.0, &mut rng_from(3, &[])).unwrap();
    let runs = idx.windows(2).filter(|w| w[1] == (w[0] + 1) % n).count();
    // mean block 20 → about 19 of every 20 transitions continue a block
    let rate = runs as f64 / (n - 1) as f64;
    assert!((0.88..=0.99).contains(&rate), "{rate}");
}

#[test]
fn resample_rows_come_from_data() {
    let d = planted(1);
    let r = stationary_block_bootstrap(&d, 5.0, &mut rng_from(5, &[])).unwrap();
    assert_eq!((r.n(), r.p()), (d.n(), d.p()));
    let first = r.row(0);
    assert!((0..d.n()).any(|t| d.row(t) == first));
}

#[test]
fn selection_examples() {
    let none = profile(3, &[(0, 1, 19), (1, 2, 5)], 20);
    assert!(select_stable_graph(&none, 1.0).unwrap().is_empty());
    let all = select_stable_graph(&none, 0.25).unwrap();
    assert_eq!(all.len(), 2);
    let two = profile(3, &[(0, 1, 24), (0, 2, 20)], 25);
    assert_eq!(two.frequency(0, 1), 0.96);
    assert_eq!(two.frequency(0, 2), 0.80);
    assert_eq!(select_stable_graph(&two, 0.95).unwrap().edges().collect::<Vec<_>>(), vec![(0, 1)]);
    assert!(select_stable_graph(&two, 0.0).is_err());
    assert!(select_stable_graph(&two, 1.5).is_err());
}

#[test]
fn thresholding_is_monotone() {
    let d = planted(2);
    let lm = graph_lambda_max(&d, &RegressionLoss::Power(nu(4))).unwrap();
    let prof = edge_stability(&d, nu(4), 0.1 * lm, 20, CombinationRule::Or, 3, &StabilityOptions::default()).unwrap();
    let mut prev = select_stable_graph(&prof, 0.05).unwrap();
    for t in [0.2, 0.4, 0.6, 0.8, 0.95, 1.0] {
        let g = select_stable_graph(&prof, t).unwrap();
        assert!(g.is_subgraph_of(&prev));
        prev = g;
    }
}

#[test]
fn planted_edge_is_stable() {
    let d = planted(3);
    for k in [2u32, 4, 8] {
        let lm = graph_lambda_max(&d, &RegressionLoss::Power(nu(k))).unwrap();
        let prof = edge_stability(&d, nu(k), 0.3 * lm, 20, CombinationRule::And, 9, &StabilityOptions::default()).unwrap();
        let f = prof.frequency(1, 3);
        assert!(f >= 0.9, "nu={k}: {f}");
        for (i, j, g) in prof.entries() {
            if (i, j) != (1, 3) {
                assert!(g < f, "nu={k}: ({i},{j}) at {g}");
            }
        }
        let above = edge_stability(&d, nu(k), 10.0 * lm, 5, CombinationRule::Or, 9, &StabilityOptions::default()).unwrap();
        assert!(above.frequencies().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn profiles_are_deterministic() {
    let d = planted(4);
    let lm = graph_lambda_max(&d, &RegressionLoss::Power(nu(6))).unwrap();
    let a = edge_stability(&d, nu(6), 0.2 * lm, 8, CombinationRule::And, 77, &StabilityOptions::default()).unwrap();
    let b = edge_stability(&d, nu(6), 0.2 * lm, 8, CombinationRule::And, 77, &StabilityOptions::default()).unwrap();
    assert_eq!(a, b);
    assert!(edge_stability(&d, nu(6), 0.2 * lm, 1, CombinationRule::And, 77, &StabilityOptions::default()).is_err());
}

#[test]
fn single_point_grid_returns_that_point() {
    let d = planted(5);
    let lambda = 0.2 * graph_lambda_max(&d, &RegressionLoss::Power(nu(4))).unwrap();
    let out = tune(&d, &[nu(4)], &[vec![lambda]], 10, 0.9, CombinationRule::And, 1, &StabilityOptions::default()).unwrap();
    assert_eq!(out.nu(), Some(nu(4)));
    assert_eq!(out.lambda, lambda);
    assert_eq!(out.graph, select_stable_graph(&out.profiles[0][0], 0.9).unwrap());
}

#[test]
fn null_data_yields_near_empty_stable_graph() {
    let mut rng = Mix(1234);
    let d = normal_dataset(&mut rng, 1000, 20);
    let grid = stability_grid(&d, &RegressionLoss::Power(nu(2)), 20, 8).unwrap();
    let out = tune(&d, &[nu(2)], &[grid], 50, 0.95, CombinationRule::And, 8, &StabilityOptions::default()).unwrap();
    assert!(out.graph.len() <= 1, "{} stable edges", out.graph.len());
}

#[test]
fn pot_data_prefers_moderate_shapes() {
    let gspec = GraphSpec::new(GraphKind::SmallWorldCliques(5), 15).unwrap();
    let mut picked = Vec::new();
    let mut non_empty = 0;
    for seed in 0..4 {
        let (raw, _) = gen_pot(2000, 10.0, &gspec, &HawkesParams::default(), seed).unwrap();
        let d = raw.standardize().unwrap();
        let shapes = [nu(4), nu(6), nu(8)];
        let grids: Vec<Vec<f64>> = shapes
            .iter()
            .map(|&s| stability_grid(&d, &RegressionLoss::Power(s), 20, seed).unwrap())
            .collect();
        let out = tune(&d, &shapes, &grids, 20, 0.9, CombinationRule::And, seed, &StabilityOptions::default()).unwrap();
        picked.push(out.nu().unwrap().get());
        non_empty += !out.graph.is_empty() as usize;
    }
    assert!(picked.iter().all(|&k| k == 4 || k == 6), "{picked:?}");
    // at this scale most resamples lose the rare joint extremes, so many
    // stable graphs are empty; require the choice to be decided by data somewhere
    assert!(non_empty >= 1, "{picked:?}");
}
