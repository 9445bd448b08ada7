use std::io::BufReader;

use agm_core::compare::{compare_suite, CompareOptions, Property};
use agm_core::fit::read_fit_params;
use agm_core::io::{self, Dataset};
use agm_core::{
    assign_probs_power_law, generate, AffiliationNetwork, AgmParams, FitConfig, FitProblem,
    GenerateOptions, Graph,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Overlapping communities with power-law probabilities.
fn source(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 1500;
    let nodes: Vec<usize> = (0..n).collect();
    let comms: Vec<Vec<usize>> = (0..120)
        .map(|_| {
            let size = (rng.gen_range(2f64.ln()..5f64.ln()).exp() * 8.0) as usize;
            nodes.choose_multiple(&mut rng, size).copied().collect()
        })
        .collect();
    let net = AffiliationNetwork::new(n, comms).unwrap();
    let params = assign_probs_power_law(&net, 0.5, 2.5).unwrap();
    let g = generate(&net, &params, seed, &GenerateOptions::default()).unwrap();
    Dataset::new(g, net).unwrap()
}

#[test]
fn labeled_round_trip_through_preprocess_and_disk() {
    let ds = source(1);
    let (edges, comms) = ds.to_labeled();
    let clean = io::preprocess(&edges, &comms);
    // Preprocessing a clean dataset is idempotent.
    let (e2, c2) = clean.to_labeled();
    assert_eq!(io::preprocess(&e2, &c2), clean);

    let dir = tempfile::tempdir().unwrap();
    clean.save_dir(dir.path()).unwrap();
    assert_eq!(Dataset::load_dir(dir.path()).unwrap(), clean);
}

#[test]
fn fitted_model_reproduces_the_source_better_than_a_random_graph() {
    let ds = source(2);
    let problem = FitProblem::new(&ds.graph, &ds.affiliations, false).unwrap();
    let fit = problem.fit(&FitConfig::default()).unwrap();
    assert!(fit.converged);

    // The report carries everything generation needs.
    let params = read_fit_params(BufReader::new(fit.report().as_bytes())).unwrap();
    assert_eq!(params, fit.to_params());
    let synth = Dataset::new(
        generate(&ds.affiliations, &params, 3, &GenerateOptions::default()).unwrap(),
        ds.affiliations.clone(),
    )
    .unwrap();

    // Same edge count, no community structure.
    let n = ds.graph.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pairs = std::collections::BTreeSet::new();
    while pairs.len() < ds.graph.edge_count() {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            pairs.insert((u.min(v), u.max(v)));
        }
    }
    let random = Dataset::new(Graph::from_edges(n, pairs).unwrap(), ds.affiliations.clone()).unwrap();

    let opts = CompareOptions::default();
    let props = Property::all();
    let fitted = compare_suite(&ds, &synth, &props, &opts).unwrap();
    let baseline = compare_suite(&ds, &random, &props, &opts).unwrap();
    let avg = |r: &agm_core::ComparisonReport| r.row_average(0, &props).unwrap();
    assert!(avg(&fitted) < avg(&baseline), "{} vs {}", avg(&fitted), avg(&baseline));
    assert!(avg(&fitted) < 0.2, "{}", fitted.to_table());
    let improvement = fitted.relative_improvement_over(&baseline).unwrap();
    assert!(improvement.row_average(0, &props).unwrap() > 0.0);
}

#[test]
fn generation_is_reproducible_and_seed_sensitive() {
    let ds = source(5);
    let params = AgmParams::uniform(ds.affiliations.community_count(), 0.2).unwrap();
    let opts = GenerateOptions::default();
    let a = generate(&ds.affiliations, &params, 9, &opts).unwrap();
    let b = generate(&ds.affiliations, &params, 9, &opts).unwrap();
    let c = generate(&ds.affiliations, &params, 10, &opts).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
