//! Social graph and affiliation network representations.
//!
//! Node ids are dense indices `0..node_count`. Neighbor lists and membership
//! lists are kept sorted so that edge lookups are binary searches and set
//! intersections are linear merges.

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type CommunityId = usize;

/// Undirected simple graph with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `node_count` isolated nodes.
    pub fn empty(node_count: usize) -> Self {
        Self {
            adjacency: vec![Vec::new(); node_count],
            edge_count: 0,
        }
    }

    /// Build from an arbitrary pair list. Self-loops are dropped and duplicate
    /// pairs (in either orientation) are merged.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut adjacency = vec![Vec::new(); node_count];
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {node_count} nodes"
                )));
            }
            if u == v {
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut degree_sum = 0;
        for nbrs in adjacency.iter_mut() {
            nbrs.sort_unstable();
            nbrs.dedup();
            degree_sum += nbrs.len();
        }
        Ok(Self {
            adjacency,
            edge_count: degree_sum / 2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.adjacency[u].len()
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            let start = nbrs.partition_point(|&v| v <= u);
            nbrs[start..].iter().map(move |&v| (u, v))
        })
    }

    /// Number of edges with both endpoints in the sorted member list.
    pub fn internal_edge_count(&self, members: &[NodeId]) -> usize {
        let twice: usize = members
            .iter()
            .map(|&u| sorted_intersection_len(&self.adjacency[u], members))
            .sum();
        twice / 2
    }
}

/// Bipartite membership structure linking nodes to communities.
///
/// `members(c)` and `communities_of(u)` are mutual inverses and both are
/// kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AffiliationNetwork {
    communities: Vec<Vec<NodeId>>,
    memberships: Vec<Vec<CommunityId>>,
}

impl AffiliationNetwork {
    /// Build from member lists over `node_count` nodes. Members are sorted and
    /// deduplicated; community order (and therefore ids) is preserved.
    pub fn new(node_count: usize, communities: Vec<Vec<NodeId>>) -> Result<Self> {
        let mut memberships = vec![Vec::new(); node_count];
        let mut cleaned = Vec::with_capacity(communities.len());
        for (c, mut members) in communities.into_iter().enumerate() {
            members.sort_unstable();
            members.dedup();
            for &u in &members {
                if u >= node_count {
                    return Err(Error::invalid(format!(
                        "community {c} has member {u} outside {node_count} nodes"
                    )));
                }
                memberships[u].push(c);
            }
            cleaned.push(members);
        }
        Ok(Self {
            communities: cleaned,
            memberships,
        })
    }

    pub fn node_count(&self) -> usize {
        self.memberships.len()
    }

    pub fn community_count(&self) -> usize {
        self.communities.len()
    }

    pub fn members(&self, c: CommunityId) -> &[NodeId] {
        &self.communities[c]
    }

    pub fn communities(&self) -> &[Vec<NodeId>] {
        &self.communities
    }

    pub fn communities_of(&self, u: NodeId) -> &[CommunityId] {
        &self.memberships[u]
    }

    /// Total number of memberships, `sum_c n_c`.
    pub fn membership_count(&self) -> usize {
        self.communities.iter().map(Vec::len).sum()
    }

    /// Sorted list of communities containing both `u` and `v` (the set C_uv).
    pub fn shared_communities(&self, u: NodeId, v: NodeId) -> Result<Vec<CommunityId>> {
        for w in [u, v] {
            if w >= self.node_count() {
                return Err(Error::invalid(format!(
                    "node {w} out of range for {} nodes",
                    self.node_count()
                )));
            }
        }
        let mut out = Vec::new();
        sorted_intersection_into(&self.memberships[u], &self.memberships[v], &mut out);
        Ok(out)
    }

    pub(crate) fn shared_count(&self, u: NodeId, v: NodeId) -> usize {
        sorted_intersection_len(&self.memberships[u], &self.memberships[v])
    }

    /// Member set and internal edge count of a community.
    pub fn view(&self, g: &Graph, c: CommunityId) -> CommunityView {
        let members = self.communities[c].clone();
        let internal_edges = g.internal_edge_count(&members);
        CommunityView {
            community_id: c,
            members,
            internal_edges,
        }
    }
}

/// One community together with its induced edge count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunityView {
    pub community_id: CommunityId,
    pub members: Vec<NodeId>,
    pub internal_edges: usize,
}

/// Number of members of the sorted set `members` adjacent to `u`.
pub fn internal_degree(g: &Graph, u: NodeId, members: &[NodeId]) -> Result<usize> {
    if members.binary_search(&u).is_err() {
        return Err(Error::invalid(format!("node {u} is not a member")));
    }
    Ok(sorted_intersection_len(g.neighbors(u), members))
}

/// Connected components of the subgraph induced by `members`, each sorted,
/// ordered by smallest member id.
pub fn split_into_components(g: &Graph, members: &[NodeId]) -> Vec<Vec<NodeId>> {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let mut seen = vec![false; sorted.len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..sorted.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(i) = queue.pop_front() {
            let u = sorted[i];
            comp.push(u);
            for &v in g.neighbors(u) {
                if let Ok(j) = sorted.binary_search(&v) {
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components
}

pub(crate) fn sorted_intersection_len<T: Ord>(a: &[T], b: &[T]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub(crate) fn sorted_intersection_into<T: Ord + Copy>(a: &[T], b: &[T], out: &mut Vec<T>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    #[test]
    fn construction_drops_loops_and_duplicates() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (1, 1), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(g.has_edge(2, 1));
        assert!(!g.has_edge(0, 2));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(Graph::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn shared_communities_cases() {
        // A=0, B=1, C=2; node 0 in {A,B}, node 1 in {B,C}, node 2 in none.
        let net = AffiliationNetwork::new(3, vec![vec![0], vec![0, 1], vec![1]]).unwrap();
        assert_eq!(net.shared_communities(0, 1).unwrap(), vec![1]);
        assert_eq!(net.shared_communities(2, 0).unwrap(), Vec::<usize>::new());
        assert_eq!(net.shared_communities(0, 0).unwrap(), vec![0, 1]);
        assert!(net.shared_communities(0, 3).is_err());
    }

    #[test]
    fn internal_degree_cases() {
        let g = star(4);
        let members: Vec<_> = (0..5).collect();
        assert_eq!(internal_degree(&g, 0, &members).unwrap(), 4);

        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        assert_eq!(internal_degree(&g, 3, &[0, 1, 3]).unwrap(), 0);

        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(internal_degree(&tri, 0, &[0, 1, 2]).unwrap(), 2);

        assert!(internal_degree(&tri, 0, &[1, 2]).is_err());
    }

    #[test]
    fn components_cases() {
        let g = Graph::from_edges(4, [(1, 2)]).unwrap();
        assert_eq!(split_into_components(&g, &[1, 2, 3]), vec![vec![1, 2], vec![3]]);

        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(split_into_components(&tri, &[2, 1, 0]), vec![vec![0, 1, 2]]);

        let e = Graph::empty(5);
        assert_eq!(split_into_components(&e, &[4, 0, 2]).len(), 3);
        assert!(split_into_components(&e, &[]).is_empty());
    }

    fn arb_instance() -> impl Strategy<Value = (Graph, AffiliationNetwork)> {
        (2usize..25).prop_flat_map(|n| {
            (
                proptest::collection::vec((0..n, 0..n), 0..60),
                proptest::collection::vec(proptest::collection::vec(0..n, 1..8), 1..6),
            )
                .prop_map(move |(edges, comms)| {
                    (
                        Graph::from_edges(n, edges).unwrap(),
                        AffiliationNetwork::new(n, comms).unwrap(),
                    )
                })
        })
    }

    proptest! {
        #[test]
        fn structural_invariants((g, net) in arb_instance()) {
            let n = g.node_count();
            let degree_sum: usize = (0..n).map(|u| g.degree(u)).sum();
            prop_assert_eq!(degree_sum, 2 * g.edge_count());
            for (u, v) in g.edges() {
                prop_assert!(g.has_edge(v, u));
                prop_assert!(u != v);
            }
            for u in 0..n {
                for &c in net.communities_of(u) {
                    prop_assert!(net.members(c).binary_search(&u).is_ok());
                }
                for v in 0..n {
                    prop_assert_eq!(
                        net.shared_communities(u, v).unwrap(),
                        net.shared_communities(v, u).unwrap()
                    );
                }
            }
            for c in 0..net.community_count() {
                let members = net.members(c);
                let id_sum: usize = members
                    .iter()
                    .map(|&u| internal_degree(&g, u, members).unwrap())
                    .sum();
                prop_assert_eq!(id_sum, 2 * net.view(&g, c).internal_edges);

                let comps = split_into_components(&g, members);
                let mut union: Vec<_> = comps.iter().flatten().copied().collect();
                union.sort_unstable();
                prop_assert_eq!(union, members.to_vec());
            }
        }
    }
}
