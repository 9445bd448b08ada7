//! Fixtures shared by the benchmarks.

use agm_core::{assign_probs_power_law, generate, AffiliationNetwork, AgmParams, Dataset, GenerateOptions};

/// Deterministic overlapping affiliation network: `communities` groups of
/// sizes cycling through 10..=80, drawn from `n` nodes with a fixed stride.
pub fn affiliations(n: usize, communities: usize) -> AffiliationNetwork {
    let comms = (0..communities)
        .map(|c| {
            let size = 10 + (c * 37) % 71;
            let start = (c * 7919) % n;
            (0..size).map(|i| (start + i * 13) % n).collect()
        })
        .collect();
    AffiliationNetwork::new(n, comms).expect("fixture network is valid")
}

pub fn power_law(net: &AffiliationNetwork) -> AgmParams {
    assign_probs_power_law(net, 0.5, 3.0).expect("fixture parameters are valid")
}

/// A sampled dataset for metric and fitting benchmarks.
pub fn dataset(n: usize, communities: usize, seed: u64) -> Dataset {
    let net = affiliations(n, communities);
    let params = power_law(&net);
    let g = generate(&net, &params, seed, &GenerateOptions::default()).expect("generation succeeds");
    Dataset::new(g, net).expect("fixture dataset is consistent")
}
