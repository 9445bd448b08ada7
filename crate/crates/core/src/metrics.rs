//! Community-level measurements: densification, connector nodes, edge
//! probability versus shared memberships, overlap clustering, and CCDFs.

use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::stream_rng;
use crate::graph::{sorted_intersection_len, CommunityId, Graph, NodeId};
use crate::io::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Raw,
    BinnedMean,
    Ccdf,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Raw => "raw",
            CurveKind::BinnedMean => "binned-mean",
            CurveKind::Ccdf => "ccdf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "raw" => Some(CurveKind::Raw),
            "binned-mean" => Some(CurveKind::BinnedMean),
            "ccdf" => Some(CurveKind::Ccdf),
            _ => None,
        }
    }
}

/// A sampled function with strictly increasing x.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub points: Vec<(f64, f64)>,
    pub x_label: String,
    pub y_label: String,
    pub kind: CurveKind,
}

impl Curve {
    pub fn new(points: Vec<(f64, f64)>, x_label: &str, y_label: &str, kind: CurveKind) -> Self {
        Self {
            points,
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            kind,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn ys(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Check strictly increasing x, finite values, and the CCDF shape.
    pub fn validate(&self) -> Result<()> {
        if self.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("curve has non-finite values"));
        }
        if self.points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("curve x values are not strictly increasing"));
        }
        if self.kind == CurveKind::Ccdf
            && (self.points.windows(2).any(|w| w[0].1 < w[1].1)
                || self.ys().any(|y| !(0.0..=1.0).contains(&y)))
        {
            return Err(Error::invalid("ccdf must be non-increasing within [0, 1]"));
        }
        Ok(())
    }
}

/// Logarithmic binning for size and degree axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBins {
    /// Ratio between consecutive bin edges.
    pub factor: f64,
    /// Bins with fewer samples are dropped.
    pub min_samples: usize,
}

impl Default for LogBins {
    fn default() -> Self {
        Self {
            factor: 2.0,
            min_samples: 5,
        }
    }
}

impl LogBins {
    pub fn new(factor: f64, min_samples: usize) -> Result<Self> {
        if !(factor > 1.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("bin factor {factor} must exceed 1")));
        }
        Ok(Self { factor, min_samples })
    }

    fn index(&self, x: f64) -> i64 {
        // The nudge keeps exact powers of the factor in their own bin.
        (x.ln() / self.factor.ln() + 1e-9).floor() as i64
    }

    /// Mean of `(x, y)` per bin for samples with `x > 0`.
    pub fn binned_mean<I: IntoIterator<Item = (f64, f64)>>(&self, samples: I) -> Vec<(f64, f64)> {
        let mut acc: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
        for (x, y) in samples {
            if x > 0.0 {
                let e = acc.entry(self.index(x)).or_default();
                e.0 += x;
                e.1 += y;
                e.2 += 1;
            }
        }
        collect_bins(acc, self.min_samples)
    }
}

fn collect_bins<K>(acc: BTreeMap<K, (f64, f64, usize)>, min_samples: usize) -> Vec<(f64, f64)> {
    acc.into_values()
        .filter(|&(_, _, n)| n >= min_samples.max(1))
        .map(|(sx, sy, n)| (sx / n as f64, sy / n as f64))
        .collect()
}

/// Least-squares slope of `ln y` on `ln x`; `None` without two distinct x.
pub fn log_log_slope<I: IntoIterator<Item = (f64, f64)>>(points: I) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .into_iter()
        .filter(|&(x, y)| x > 0.0 && y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 1e-12 * n).then(|| sxy / sxx)
}

/// Internal edge count and size of each community.
fn community_edge_counts(ds: &Dataset) -> Vec<(usize, usize)> {
    ds.affiliations
        .communities()
        .par_iter()
        .map(|m| (m.len(), ds.graph.internal_edge_count(m)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Densification {
    pub curve: Curve,
    /// Slope of `ln E_S` against `ln |S|` over communities with `E_S >= 1`.
    pub slope: Option<f64>,
}

/// Mean internal edge count per log-spaced size bin.
pub fn edges_vs_size(ds: &Dataset, bins: &LogBins) -> Densification {
    let counts = community_edge_counts(ds);
    let samples = counts.iter().map(|&(n, e)| (n as f64, e as f64));
    let curve = Curve::new(bins.binned_mean(samples.clone()), "size", "edges", CurveKind::BinnedMean);
    let slope = log_log_slope(samples.filter(|&(_, e)| e >= 1.0));
    Densification { curve, slope }
}

fn max_internal_degree(g: &Graph, members: &[NodeId]) -> (NodeId, usize) {
    let mut best = (members[0], 0);
    for &u in members {
        let d = sorted_intersection_len(g.neighbors(u), members);
        if d > best.1 {
            best = (u, d);
        }
    }
    best
}

/// The member with the largest internal degree, smallest id on ties.
pub fn connector(g: &Graph, members: &[NodeId]) -> Option<NodeId> {
    (!members.is_empty()).then(|| max_internal_degree(g, members).0)
}

/// `max_u d_in(u, S) / |S|` per community; communities without internal
/// edges are skipped.
pub fn max_icdf_values(ds: &Dataset) -> Vec<(usize, f64)> {
    ds.affiliations
        .communities()
        .par_iter()
        .filter(|m| !m.is_empty())
        .filter_map(|m| {
            let (_, d) = max_internal_degree(&ds.graph, m);
            (d > 0).then(|| (m.len(), d as f64 / m.len() as f64))
        })
        .collect()
}

/// Mean maximal internal-degree fraction per log-spaced size bin.
pub fn max_icdf_vs_size(ds: &Dataset, bins: &LogBins) -> Curve {
    let values = max_icdf_values(ds);
    Curve::new(
        bins.binned_mean(values.into_iter().map(|(n, f)| (n as f64, f))),
        "size",
        "max_icdf",
        CurveKind::BinnedMean,
    )
}

/// Connected and total pair counts for one shared-membership count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharedCount {
    pub k: usize,
    pub pairs: u64,
    pub connected: u64,
}

impl SharedCount {
    pub fn probability(&self) -> f64 {
        self.connected as f64 / self.pairs as f64
    }
}

/// Pair counts by number of shared communities, `k = 1..=k_max`, over pairs
/// that share at least one community. Each unordered pair counts once.
pub fn shared_pair_counts(ds: &Dataset, k_max: usize) -> Vec<SharedCount> {
    let net = &ds.affiliations;
    let per_node: Vec<Vec<(u64, u64)>> = (0..net.node_count())
        .into_par_iter()
        .map(|u| {
            let mut partners: Vec<NodeId> = net
                .communities_of(u)
                .iter()
                .flat_map(|&c| {
                    let m = net.members(c);
                    m[m.partition_point(|&v| v <= u)..].iter().copied()
                })
                .collect();
            partners.sort_unstable();
            partners.dedup();
            let mut acc = vec![(0u64, 0u64); k_max];
            for v in partners {
                let k = net.shared_count(u, v);
                if k <= k_max {
                    acc[k - 1].0 += 1;
                    acc[k - 1].1 += u64::from(ds.graph.has_edge(u, v));
                }
            }
            acc
        })
        .collect();
    let mut total = vec![(0u64, 0u64); k_max];
    for acc in per_node {
        for (t, a) in total.iter_mut().zip(acc) {
            t.0 += a.0;
            t.1 += a.1;
        }
    }
    total
        .into_iter()
        .enumerate()
        .filter(|(_, (pairs, _))| *pairs > 0)
        .map(|(i, (pairs, connected))| SharedCount {
            k: i + 1,
            pairs,
            connected,
        })
        .collect()
}

/// Edge probability as a function of the number of shared communities.
pub fn edge_prob_vs_shared(ds: &Dataset, k_max: usize) -> Result<Curve> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let points = shared_pair_counts(ds, k_max)
        .into_iter()
        .map(|s| (s.k as f64, s.probability()))
        .collect();
    Ok(Curve::new(points, "shared", "edge_probability", CurveKind::Raw))
}

/// For each community, the other communities it overlaps with and the overlap size.
fn overlaps(ds: &Dataset) -> Vec<Vec<(CommunityId, usize)>> {
    let net = &ds.affiliations;
    (0..net.community_count())
        .into_par_iter()
        .map(|a| {
            let mut others: Vec<CommunityId> = net
                .members(a)
                .iter()
                .flat_map(|&u| net.communities_of(u).iter().copied())
                .filter(|&b| b != a)
                .collect();
            others.sort_unstable();
            others
                .chunk_by(|x, y| x == y)
                .map(|run| (run[0], run.len()))
                .collect()
        })
        .collect()
}

/// One ordered community pair `(A, B)` with a proper non-empty overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectorSample {
    pub a: CommunityId,
    pub b: CommunityId,
    /// `|O| / |A|`.
    pub ratio: f64,
    /// Whether the connector of `A` lies in `O = A ∩ B`.
    pub in_overlap: bool,
}

/// All ordered pairs `(A, B)` with `∅ ≠ A ∩ B ≠ A`.
pub fn connector_samples(ds: &Dataset) -> Vec<ConnectorSample> {
    let net = &ds.affiliations;
    let connectors: Vec<Option<NodeId>> = net
        .communities()
        .par_iter()
        .map(|m| connector(&ds.graph, m))
        .collect();
    overlaps(ds)
        .into_iter()
        .enumerate()
        .flat_map(|(a, list)| {
            let size = net.members(a).len();
            let hub = connectors[a];
            list.into_iter()
                .filter(move |&(_, o)| o < size)
                .map(move |(b, o)| ConnectorSample {
                    a,
                    b,
                    ratio: o as f64 / size as f64,
                    in_overlap: hub.is_some_and(|h| net.members(b).binary_search(&h).is_ok()),
                })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectorOverlap {
    /// Fraction of pairs whose connector is in the overlap, per `|O|/|A|` bin.
    pub curve: Curve,
    /// `y = x`: the same fraction if the connector were a uniform member.
    pub reference: Curve,
    pub samples: Vec<ConnectorSample>,
}

pub const RATIO_BINS: usize = 10;

/// Connector-in-overlap probability in ten equal-width bins of `|O|/|A|` on
/// `[0, 1)`; bins with fewer than `bins.min_samples` pairs are dropped.
pub fn connector_in_overlap(ds: &Dataset, bins: &LogBins) -> ConnectorOverlap {
    let samples = connector_samples(ds);
    let mut acc: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for s in &samples {
        let idx = ((s.ratio * RATIO_BINS as f64) as usize).min(RATIO_BINS - 1);
        let e = acc.entry(idx).or_default();
        e.0 += s.ratio;
        e.1 += f64::from(u8::from(s.in_overlap));
        e.2 += 1;
    }
    let points = collect_bins(acc, bins.min_samples);
    let reference = points.iter().map(|&(x, _)| (x, x)).collect();
    ConnectorOverlap {
        curve: Curve::new(points, "overlap_fraction", "connector_in_overlap", CurveKind::BinnedMean),
        reference: Curve::new(reference, "overlap_fraction", "overlap_fraction", CurveKind::Raw),
        samples,
    }
}

/// Neighbor-pair connectivity of one overlap node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapTriple {
    /// Both neighbors in the overlap.
    pub oo: Option<f64>,
    /// Both neighbors in `A` only, or both in `B` only.
    pub aabb: Option<f64>,
    /// One neighbor in `A` only and the other in `B` only.
    pub ab: Option<f64>,
    pub degree: usize,
}

fn connected_within(g: &Graph, set: &[NodeId]) -> usize {
    set.iter()
        .map(|&x| sorted_intersection_len(g.neighbors(x), set))
        .sum::<usize>()
        / 2
}

fn connected_across(g: &Graph, a: &[NodeId], b: &[NodeId]) -> usize {
    a.iter().map(|&x| sorted_intersection_len(g.neighbors(x), b)).sum()
}

fn choose2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Classify the neighbors of `u ∈ A ∩ B` and measure the three pair fractions.
pub fn overlap_triple(g: &Graph, a: &[NodeId], b: &[NodeId], u: NodeId) -> OverlapTriple {
    let (mut au, mut bu, mut ou) = (Vec::new(), Vec::new(), Vec::new());
    for &v in g.neighbors(u) {
        match (a.binary_search(&v).is_ok(), b.binary_search(&v).is_ok()) {
            (true, true) => ou.push(v),
            (true, false) => au.push(v),
            (false, true) => bu.push(v),
            (false, false) => {}
        }
    }
    let within = choose2(au.len()) + choose2(bu.len());
    OverlapTriple {
        oo: ratio(connected_within(g, &ou), choose2(ou.len())),
        aabb: ratio(connected_within(g, &au) + connected_within(g, &bu), within),
        ab: ratio(connected_across(g, &au, &bu), au.len() * bu.len()),
        degree: g.degree(u),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapClustering {
    pub oo: Curve,
    pub aabb: Curve,
    pub ab: Curve,
    pub samples: Vec<OverlapTriple>,
}

/// OO, AABB and AB fractions averaged per degree bin over overlap nodes of
/// overlapping community pairs. When there are more than `pair_sample`
/// overlapping pairs a uniform seeded subset is used.
pub fn overlap_clustering(ds: &Dataset, pair_sample: usize, seed: u64, bins: &LogBins) -> OverlapClustering {
    let net = &ds.affiliations;
    let mut pairs: Vec<(CommunityId, CommunityId)> = overlaps(ds)
        .into_iter()
        .enumerate()
        .flat_map(|(a, list)| list.into_iter().filter(move |&(b, _)| b > a).map(move |(b, _)| (a, b)))
        .collect();
    if pairs.len() > pair_sample {
        let mut rng = stream_rng(seed, 0);
        let mut picked = index::sample(&mut rng, pairs.len(), pair_sample).into_vec();
        picked.sort_unstable();
        pairs = picked.into_iter().map(|i| pairs[i]).collect();
    }

    let samples: Vec<OverlapTriple> = pairs
        .par_iter()
        .flat_map_iter(|&(a, b)| {
            let (ma, mb) = (net.members(a), net.members(b));
            let mut common = Vec::new();
            crate::graph::sorted_intersection_into(ma, mb, &mut common);
            common
                .into_iter()
                .map(move |u| overlap_triple(&ds.graph, ma, mb, u))
        })
        .collect();

    let curve = |pick: fn(&OverlapTriple) -> Option<f64>, label: &str| {
        let pts = bins.binned_mean(
            samples
                .iter()
                .filter_map(|t| pick(t).map(|y| (t.degree as f64, y))),
        );
        Curve::new(pts, "degree", label, CurveKind::BinnedMean)
    };
    OverlapClustering {
        oo: curve(|t| t.oo, "oo"),
        aabb: curve(|t| t.aabb, "aabb"),
        ab: curve(|t| t.ab, "ab"),
        samples,
    }
}

/// Fraction of values at or above each distinct value.
pub fn ccdf(values: &[usize]) -> Result<Curve> {
    if values.is_empty() {
        return Err(Error::invalid("ccdf of an empty list"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len() as f64;
    let points = sorted
        .chunk_by(|a, b| a == b)
        .scan(0usize, |below, run| {
            let y = (sorted.len() - *below) as f64 / n;
            *below += run.len();
            Some((run[0] as f64, y))
        })
        .collect();
    Ok(Curve::new(points, "value", "ccdf", CurveKind::Ccdf))
}

pub fn community_size_ccdf(ds: &Dataset) -> Result<Curve> {
    let sizes: Vec<usize> = ds.affiliations.communities().iter().map(Vec::len).collect();
    let mut c = ccdf(&sizes)?;
    c.x_label = "size".into();
    Ok(c)
}

pub fn membership_ccdf(ds: &Dataset) -> Result<Curve> {
    let counts: Vec<usize> = (0..ds.affiliations.node_count())
        .map(|u| ds.affiliations.communities_of(u).len())
        .collect();
    let mut c = ccdf(&counts)?;
    c.x_label = "memberships".into();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AffiliationNetwork;

    fn dataset(n: usize, edges: &[(usize, usize)], comms: Vec<Vec<usize>>) -> Dataset {
        Dataset::new(
            Graph::from_edges(n, edges.iter().copied()).unwrap(),
            AffiliationNetwork::new(n, comms).unwrap(),
        )
        .unwrap()
    }

    fn one_bin() -> LogBins {
        LogBins::new(2.0, 1).unwrap()
    }

    #[test]
    fn triangles_densification() {
        let edges: Vec<_> = (0..4)
            .flat_map(|t| {
                let b = 3 * t;
                [(b, b + 1), (b + 1, b + 2), (b, b + 2)]
            })
            .collect();
        let comms = (0..4).map(|t| vec![3 * t, 3 * t + 1, 3 * t + 2]).collect();
        let ds = dataset(12, &edges, comms);
        let d = edges_vs_size(&ds, &one_bin());
        assert_eq!(d.curve.points, vec![(3.0, 3.0)]);
        assert_eq!(d.slope, None);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<_> = (1..20).map(|i| (i as f64, 2.0 * (i as f64).powf(1.6))).collect();
        assert!((log_log_slope(pts).unwrap() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn max_icdf_star_and_clique() {
        let n = 6;
        let star: Vec<_> = (1..n).map(|v| (0, v)).collect();
        let ds = dataset(n, &star, vec![(0..n).collect()]);
        let c = max_icdf_vs_size(&ds, &one_bin());
        assert_eq!(c.points, vec![(6.0, 5.0 / 6.0)]);

        let clique: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let ds = dataset(n, &clique, vec![(0..n).collect(), vec![0, 1]]);
        let vals = max_icdf_values(&ds);
        assert_eq!(vals[0], (6, 5.0 / 6.0));

        // No internal edges: excluded.
        let ds = dataset(4, &[(0, 1)], vec![vec![2, 3]]);
        assert!(max_icdf_values(&ds).is_empty());
    }

    #[test]
    fn shared_counts() {
        let edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)];
        let ds = dataset(6, &edges, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(edge_prob_vs_shared(&ds, 3).unwrap().points, vec![(1.0, 1.0)]);

        let ds = dataset(3, &[(0, 2)], vec![vec![0, 1], vec![0, 1]]);
        let c = edge_prob_vs_shared(&ds, 4).unwrap();
        assert_eq!(c.points, vec![(2.0, 0.0)]);
        assert!(edge_prob_vs_shared(&ds, 0).is_err());
    }

    #[test]
    fn connector_cases() {
        // A = star around 0 on {0..4}; B = {0, 5}.
        let edges = [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)];
        let ds = dataset(6, &edges, vec![vec![0, 1, 2, 3, 4], vec![0, 5]]);
        let s = connector_samples(&ds);
        let ab = s.iter().find(|s| s.a == 0).unwrap();
        assert!(ab.in_overlap);
        assert_eq!(ab.ratio, 0.2);

        // Nested identical: O = A excluded in that direction.
        let ds = dataset(3, &[(0, 1), (1, 2)], vec![vec![0, 1], vec![0, 1, 2]]);
        let s = connector_samples(&ds);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].a, s[0].b), (1, 0));

        let co = connector_in_overlap(&ds, &one_bin());
        assert_eq!(co.reference.points[0].0, co.reference.points[0].1);
    }

    /// Fig. 3a: u = 0; overlap neighbors {1,2} linked; A-only {3,4,5} with
    /// two links; B-only {6,7} unlinked.
    pub(crate) fn toy_overlap() -> Dataset {
        let mut edges: Vec<(usize, usize)> = (1..8).map(|v| (0, v)).collect();
        edges.extend([(1, 2), (3, 4), (4, 5)]);
        dataset(8, &edges, vec![vec![0, 1, 2, 3, 4, 5], vec![0, 1, 2, 6, 7]])
    }

    #[test]
    fn overlap_worked_example() {
        let ds = toy_overlap();
        let t = overlap_triple(&ds.graph, ds.affiliations.members(0), ds.affiliations.members(1), 0);
        assert_eq!(t.oo, Some(1.0));
        assert_eq!(t.aabb, Some(0.5));
        assert_eq!(t.ab, Some(0.0));
        assert_eq!(t.degree, 7);

        // A single overlap neighbor leaves OO without pairs.
        let small = dataset(4, &[(0, 1), (0, 2), (0, 3), (1, 2)], vec![vec![0, 1, 2], vec![0, 3]]);
        let t = overlap_triple(&small.graph, small.affiliations.members(0), small.affiliations.members(1), 0);
        assert_eq!((t.oo, t.aabb, t.ab), (None, Some(1.0), Some(0.0)));

        let oc = overlap_clustering(&ds, 10, 0, &one_bin());
        assert_eq!(oc.samples.len(), 3);
    }

    #[test]
    fn ccdf_examples() {
        assert_eq!(ccdf(&[1, 1, 1]).unwrap().points, vec![(1.0, 1.0)]);
        let c = ccdf(&[4, 1, 2]).unwrap();
        assert_eq!(c.points, vec![(1.0, 1.0), (2.0, 2.0 / 3.0), (4.0, 1.0 / 3.0)]);
        c.validate().unwrap();
        assert!(ccdf(&[]).is_err());
    }

    #[test]
    fn log_bins_group_by_powers() {
        let b = LogBins::new(2.0, 2).unwrap();
        let pts = b.binned_mean([(1.0, 1.0), (1.5, 3.0), (2.0, 5.0), (4.0, 1.0), (7.0, 3.0)]);
        assert_eq!(pts, vec![(1.25, 2.0), (5.5, 2.0)]);
        assert!(LogBins::new(1.0, 1).is_err());
    }
}
