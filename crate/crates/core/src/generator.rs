//! Graph generation from an affiliation network.
//!
//! Every community `c` links each pair of its members independently with
//! probability `p_c`, and every node pair is additionally linked with the
//! background probability `epsilon`. A pair that is linked by several sources
//! appears once.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{AffiliationNetwork, Graph, NodeId};

/// Stream id reserved for background sampling.
const BACKGROUND_STREAM: u64 = u64::MAX;

/// Per-community edge probabilities plus a background probability.
#[derive(Debug, Clone, PartialEq)]
pub struct AgmParams {
    pub p: Vec<f64>,
    pub epsilon: f64,
}

impl AgmParams {
    pub fn new(p: Vec<f64>, epsilon: f64) -> Result<Self> {
        let params = Self { p, epsilon };
        params.validate()?;
        Ok(params)
    }

    /// Same probability for each of `communities` communities, no background.
    pub fn uniform(communities: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; communities], 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((c, p)) = self
            .p
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::invalid(format!(
                "community {c} probability {p} outside [0, 1]"
            )));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::invalid(format!(
                "background probability {} outside [0, 1)",
                self.epsilon
            )));
        }
        Ok(())
    }

    fn check_against(&self, net: &AffiliationNetwork) -> Result<()> {
        self.validate()?;
        if self.p.len() != net.community_count() {
            return Err(Error::invalid(format!(
                "{} probabilities for {} communities",
                self.p.len(),
                net.community_count()
            )));
        }
        Ok(())
    }
}

/// Limits on generation cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerateOptions {
    /// Largest node count for which background sampling runs without an override.
    pub epsilon_node_guard: usize,
    pub allow_large_epsilon: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            epsilon_node_guard: 50_000,
            allow_large_epsilon: false,
        }
    }
}

/// Probability that the model links `u` and `v`:
/// `1 - (1 - epsilon) * prod_{k in C_uv} (1 - p_k)`.
pub fn edge_probability(
    net: &AffiliationNetwork,
    params: &AgmParams,
    u: NodeId,
    v: NodeId,
) -> Result<f64> {
    if u == v {
        return Err(Error::invalid(format!("self pair ({u}, {u})")));
    }
    params.check_against(net)?;
    let shared = net.shared_communities(u, v)?;
    let miss: f64 = shared.iter().map(|&k| 1.0 - params.p[k]).product();
    Ok(1.0 - (1.0 - params.epsilon) * miss)
}

/// Sample a graph. Output depends only on `(net, params, seed)`; each
/// community draws from its own ChaCha stream so the result does not depend
/// on the number of worker threads.
pub fn generate(
    net: &AffiliationNetwork,
    params: &AgmParams,
    seed: u64,
    opts: &GenerateOptions,
) -> Result<Graph> {
    params.check_against(net)?;
    let n = net.node_count();
    if params.epsilon > 0.0 && n > opts.epsilon_node_guard && !opts.allow_large_epsilon {
        return Err(Error::CostGuard {
            nodes: n,
            guard: opts.epsilon_node_guard,
        });
    }

    let per_community: Vec<Vec<(NodeId, NodeId)>> = (0..net.community_count())
        .into_par_iter()
        .map(|c| {
            let members = net.members(c);
            let mut rng = stream_rng(seed, c as u64);
            let mut out = Vec::new();
            sample_pairs(members.len(), params.p[c], &mut rng, |i, j| {
                out.push((members[i], members[j]));
            });
            out
        })
        .collect();

    let mut edges: Vec<(NodeId, NodeId)> = per_community.into_iter().flatten().collect();
    if params.epsilon > 0.0 {
        let mut rng = stream_rng(seed, BACKGROUND_STREAM);
        sample_pairs(n, params.epsilon, &mut rng, |i, j| edges.push((i, j)));
    }
    edges.par_sort_unstable();
    edges.dedup();
    Graph::from_edges(n, edges)
}

/// `p_c = min(1, scale * n_c^(-beta))` with no background probability.
pub fn assign_probs_power_law(
    net: &AffiliationNetwork,
    beta: f64,
    scale: f64,
) -> Result<AgmParams> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid(format!("beta {beta} outside (0, 1)")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("scale {scale} must be positive")));
    }
    let mut clipped = 0usize;
    let p = net
        .communities()
        .iter()
        .enumerate()
        .map(|(c, members)| {
            if members.is_empty() {
                return Err(Error::invalid(format!("community {c} is empty")));
            }
            let raw = scale * (members.len() as f64).powf(-beta);
            if raw > 1.0 {
                clipped += 1;
            }
            Ok(raw.min(1.0))
        })
        .collect::<Result<Vec<_>>>()?;
    if clipped > 0 {
        warn!("{clipped} community probabilities clipped to 1");
    }
    Ok(AgmParams { p, epsilon: 0.0 })
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Visit each unordered index pair `(i, j)`, `i < j < n`, independently with
/// probability `p`, skipping over unselected pairs with geometric jumps so
/// the cost is proportional to the number of selected pairs plus `n`.
pub(crate) fn sample_pairs<R: Rng, F: FnMut(usize, usize)>(n: usize, p: f64, rng: &mut R, mut emit: F) {
    if n < 2 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        for j in 1..n {
            for i in 0..j {
                emit(i, j);
            }
        }
        return;
    }
    let log_miss = (-p).ln_1p();
    let total = (n as f64) * (n as f64 - 1.0) / 2.0;
    // Pairs are enumerated column by column: (0,1), (0,2), (1,2), (0,3), ...
    let mut col: usize = 1;
    let mut row: i64 = -1;
    loop {
        let u: f64 = rng.gen();
        let skip = ((1.0 - u).ln() / log_miss).floor();
        if skip >= total {
            return;
        }
        row += 1 + skip as i64;
        while row >= col as i64 {
            row -= col as i64;
            col += 1;
            if col >= n {
                return;
            }
        }
        emit(row as usize, col);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn two_overlapping() -> AffiliationNetwork {
        // A = {0,1,2}, B = {1,2,3}
        AffiliationNetwork::new(4, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap()
    }

    #[test]
    fn edge_probability_examples() {
        let net = two_overlapping();
        let half = AgmParams::new(vec![0.5, 0.5], 0.0).unwrap();
        assert_eq!(edge_probability(&net, &half, 1, 2).unwrap(), 0.75);
        assert_eq!(edge_probability(&net, &half, 0, 3).unwrap(), 0.0);
        let eps = AgmParams::new(vec![0.2, 0.0], 0.1).unwrap();
        assert!((edge_probability(&net, &eps, 0, 1).unwrap() - 0.28).abs() < 1e-15);
        assert!(edge_probability(&net, &half, 2, 2).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(AgmParams::new(vec![1.1], 0.0).is_err());
        assert!(AgmParams::new(vec![0.5], 1.0).is_err());
        let net = two_overlapping();
        assert!(generate(&net, &AgmParams::uniform(3, 0.5).unwrap(), 0, &Default::default()).is_err());
    }

    #[test]
    fn generate_extremes() {
        let net = AffiliationNetwork::new(3, vec![vec![0, 1, 2]]).unwrap();
        let g = generate(&net, &AgmParams::uniform(1, 1.0).unwrap(), 9, &Default::default()).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);

        let net = two_overlapping();
        let g = generate(&net, &AgmParams::uniform(2, 0.0).unwrap(), 9, &Default::default()).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn generate_is_deterministic() {
        let comms: Vec<Vec<usize>> = (0..20).map(|c| (c * 5..c * 5 + 30).collect()).collect();
        let net = AffiliationNetwork::new(130, comms).unwrap();
        let params = AgmParams::new(vec![0.3; 20], 0.01).unwrap();
        let a = generate(&net, &params, 42, &Default::default()).unwrap();
        let b = generate(&net, &params, 42, &Default::default()).unwrap();
        let c = generate(&net, &params, 43, &Default::default()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| generate(&net, &params, 42, &Default::default()).unwrap());
        assert_eq!(a, single);
    }

    #[test]
    fn epsilon_guard() {
        let net = AffiliationNetwork::new(100, vec![]).unwrap();
        let params = AgmParams::new(vec![], 0.1).unwrap();
        let opts = GenerateOptions {
            epsilon_node_guard: 50,
            allow_large_epsilon: false,
        };
        assert!(matches!(
            generate(&net, &params, 1, &opts),
            Err(Error::CostGuard { nodes: 100, guard: 50 })
        ));
        let opts = GenerateOptions {
            allow_large_epsilon: true,
            ..opts
        };
        let g = generate(&net, &params, 1, &opts).unwrap();
        assert!(g.edge_count() > 0);
    }

    #[test]
    fn sample_pairs_enumerates_each_pair_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut all = Vec::new();
        sample_pairs(7, 1.0, &mut rng, |i, j| all.push((i, j)));
        assert_eq!(all.len(), 21);

        // Skipping visits strictly increasing positions in the enumeration.
        let mut seen = Vec::new();
        sample_pairs(200, 0.05, &mut rng, |i, j| seen.push((j, i)));
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        assert!(seen.iter().all(|&(j, i)| i < j && j < 200));
    }

    #[test]
    fn sample_pairs_frequency_matches_p() {
        // Every pair position must be hit with probability p, including the
        // first and last positions of the enumeration.
        let n = 6;
        let p = 0.3;
        let trials = 40_000;
        let mut hits = vec![vec![0u32; n]; n];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..trials {
            sample_pairs(n, p, &mut rng, |i, j| hits[i][j] += 1);
        }
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        for j in 1..n {
            for i in 0..j {
                let freq = hits[i][j] as f64 / trials as f64;
                assert!((freq - p).abs() < 4.0 * sd, "pair ({i},{j}) freq {freq}");
            }
        }
    }

    #[test]
    fn power_law_examples() {
        let net = AffiliationNetwork::new(5, vec![vec![0, 1, 2, 3], vec![4]]).unwrap();
        let params = assign_probs_power_law(&net, 0.5, 1.0).unwrap();
        assert!((params.p[0] - 0.5).abs() < 1e-15);
        assert_eq!(params.p[1], 1.0);
        let params = assign_probs_power_law(&net, 0.5, 3.0).unwrap();
        assert_eq!(params.p[1], 1.0);
        assert_eq!(params.epsilon, 0.0);
        let params = assign_probs_power_law(&net, 0.5, 0.4).unwrap();
        assert_eq!(params.p[1], 0.4);
        assert!(assign_probs_power_law(&net, 1.0, 1.0).is_err());
        assert!(assign_probs_power_law(&net, 0.0, 1.0).is_err());
    }

    #[test]
    fn overlap_probability_dominates_and_is_monotone() {
        // Overlap density: two communities with p_A, p_B > 0.
        let net = two_overlapping();
        for &(pa, pb) in &[(0.1, 0.7), (0.5, 0.5), (0.9, 0.01)] {
            let params = AgmParams::new(vec![pa, pb], 0.0).unwrap();
            let inside = edge_probability(&net, &params, 1, 2).unwrap();
            assert!(inside > pa.max(pb));
        }
        // Monotone in the number of shared communities for uniform p.
        let comms = (0..6).map(|k| (0..=k + 1).collect::<Vec<_>>()).collect();
        let nested = AffiliationNetwork::new(8, comms).unwrap();
        let params = AgmParams::uniform(6, 0.3).unwrap();
        let probs: Vec<f64> = (1..8)
            .map(|v| edge_probability(&nested, &params, 0, v).unwrap())
            .collect();
        assert!(probs.windows(2).all(|w| w[0] > w[1]));
    }
}
