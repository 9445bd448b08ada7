//! Network-level structural properties: degree, clustering, hop plot,
//! triangle participation, and the top of the adjacency spectrum.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rand::Rng;
use log::warn;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::stream_rng;
use crate::graph::{sorted_intersection_len, split_into_components, Graph, NodeId};
use crate::metrics::{Curve, CurveKind};

/// `(degree, node count)` for every observed degree.
pub fn degree_distribution(g: &Graph) -> Curve {
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for u in 0..g.node_count() {
        *hist.entry(g.degree(u)).or_default() += 1;
    }
    Curve::new(
        hist.into_iter().map(|(d, c)| (d as f64, c as f64)).collect(),
        "degree",
        "count",
        CurveKind::Raw,
    )
}

/// Number of triangles through each node.
pub fn node_triangles(g: &Graph) -> Vec<usize> {
    (0..g.node_count())
        .into_par_iter()
        .map(|u| {
            let nbrs = g.neighbors(u);
            let twice: usize = nbrs
                .iter()
                .map(|&v| sorted_intersection_len(nbrs, g.neighbors(v)))
                .sum();
            twice / 2
        })
        .collect()
}

/// Mean local clustering coefficient for each degree `>= 2`.
pub fn clustering_distribution(g: &Graph) -> Curve {
    let tri = node_triangles(g);
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (u, &t) in tri.iter().enumerate() {
        let d = g.degree(u);
        if d >= 2 {
            let e = acc.entry(d).or_default();
            e.0 += t as f64 / (d * (d - 1) / 2) as f64;
            e.1 += 1;
        }
    }
    Curve::new(
        acc.into_iter().map(|(d, (s, n))| (d as f64, s / n as f64)).collect(),
        "degree",
        "clustering",
        CurveKind::Raw,
    )
}

/// `(t, nodes in exactly t triangles)` for `t >= 1`.
pub fn triad_participation(g: &Graph) -> Curve {
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for t in node_triangles(g) {
        if t > 0 {
            *hist.entry(t).or_default() += 1;
        }
    }
    Curve::new(
        hist.into_iter().map(|(t, c)| (t as f64, c as f64)).collect(),
        "triangles",
        "count",
        CurveKind::Raw,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopOptions {
    pub sources: usize,
    pub seed: u64,
    /// Graphs with at most this many nodes always use exact all-source BFS.
    pub exact_threshold: usize,
}

impl Default for HopOptions {
    fn default() -> Self {
        Self {
            sources: 1000,
            seed: 0,
            exact_threshold: 10_000,
        }
    }
}

fn bfs_counts(g: &Graph, src: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) -> Vec<u64> {
    dist.fill(u32::MAX);
    dist[src] = 0;
    queue.clear();
    queue.push_back(src);
    let mut counts: Vec<u64> = Vec::new();
    while let Some(u) = queue.pop_front() {
        let d = dist[u];
        for &v in g.neighbors(u) {
            if dist[v] == u32::MAX {
                dist[v] = d + 1;
                let h = (d + 1) as usize;
                if counts.len() < h {
                    counts.resize(h, 0);
                }
                counts[h - 1] += 1;
                queue.push_back(v);
            }
        }
    }
    counts
}

/// Number of node pairs within distance `x`, for `x = 1..=diameter`.
///
/// Exact when the graph is at most `exact_threshold` nodes or `sources`
/// covers every node; otherwise BFS runs from a seeded uniform sample of
/// sources and counts are scaled by `N / sources`.
pub fn hop_plot(g: &Graph, opts: &HopOptions) -> Result<Curve> {
    if opts.sources == 0 {
        return Err(Error::invalid("hop plot needs at least one source"));
    }
    let n = g.node_count();
    let exact = n <= opts.exact_threshold || opts.sources >= n;
    let sources: Vec<usize> = if exact {
        (0..n).collect()
    } else {
        let mut rng = stream_rng(opts.seed, 0);
        let mut s = index::sample(&mut rng, n, opts.sources).into_vec();
        s.sort_unstable();
        s
    };
    let per_source: Vec<Vec<u64>> = sources
        .par_iter()
        .map_init(
            || (vec![u32::MAX; n], VecDeque::new()),
            |(dist, queue), &s| bfs_counts(g, s, dist, queue),
        )
        .collect();
    let mut at: Vec<u64> = Vec::new();
    for counts in per_source {
        if at.len() < counts.len() {
            at.resize(counts.len(), 0);
        }
        for (a, c) in at.iter_mut().zip(counts) {
            *a += c;
        }
    }
    let scale = if exact { 1.0 } else { n as f64 / sources.len() as f64 };
    let mut cum = 0u64;
    let points = at
        .into_iter()
        .enumerate()
        .map(|(h, c)| {
            cum += c;
            ((h + 1) as f64, cum as f64 * scale / 2.0)
        })
        .collect();
    Ok(Curve::new(points, "hops", "reachable_pairs", CurveKind::Raw))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Largest adjacency eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvector of the largest eigenvalue, oriented so that its
    /// largest-magnitude component is positive.
    pub leading_vector: Vec<f64>,
    /// `||A v - lambda v||` for each returned pair.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl SpectralSummary {
    pub fn eigenvalue_curve(&self) -> Curve {
        Curve::new(
            self.eigenvalues
                .iter()
                .enumerate()
                .map(|(i, &l)| ((i + 1) as f64, l))
                .collect(),
            "rank",
            "eigenvalue",
            CurveKind::Raw,
        )
    }

    /// Leading-vector component magnitudes sorted descending, by rank.
    pub fn eigenvector_curve(&self) -> Curve {
        let mut comps: Vec<f64> = self.leading_vector.iter().map(|v| v.abs()).collect();
        comps.sort_unstable_by(|a, b| b.total_cmp(a));
        Curve::new(
            comps
                .into_iter()
                .enumerate()
                .map(|(i, v)| ((i + 1) as f64, v))
                .collect(),
            "rank",
            "component",
            CurveKind::Raw,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    pub k: usize,
    pub tol: f64,
    /// Largest number of matrix-vector products per connected component.
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            k: 50,
            tol: 1e-8,
            max_iter: 1000,
            seed: 0,
        }
    }
}

fn adjacency_mul(g: &Graph, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().enumerate().for_each(|(u, yu)| {
        *yu = g.neighbors(u).iter().map(|&v| x[v]).sum();
    });
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

const BLOCK: usize = 4096;

/// Remove the span of `basis` from `w` by two rounds of classical
/// Gram-Schmidt; returns the total coefficient of each basis vector.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut total = vec![0.0; basis.len()];
    for _ in 0..2 {
        let c: Vec<f64> = basis.par_iter().map(|q| dot(w, q)).collect();
        // Blocked so each basis vector streams through cache once per block;
        // every element still subtracts in basis order.
        w.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
            let (lo, len) = (b * BLOCK, chunk.len());
            for (q, ci) in basis.iter().zip(&c) {
                chunk
                    .iter_mut()
                    .zip(&q[lo..lo + len])
                    .for_each(|(wi, qi)| *wi -= ci * qi);
            }
        });
        total.iter_mut().zip(&c).for_each(|(t, ci)| *t += ci);
    }
    total
}

/// Components up to this size are solved densely.
const DENSE_LIMIT: usize = 256;

/// Eigenpairs of one connected piece: values descending with residuals, and
/// the leading vector in local ids.
struct Piece {
    values: Vec<f64>,
    residuals: Vec<f64>,
    leading: Vec<f64>,
    converged: bool,
}

/// Top-`k` adjacency eigenpairs.
///
/// The spectrum of a graph is the union of the spectra of its connected
/// components, so each component is solved on its own: small ones with a
/// dense symmetric eigensolver, larger ones by Lanczos with full
/// reorthogonalization. The leading vector is that of the component holding
/// the largest eigenvalue (the first such component on ties).
pub fn spectral_summary(g: &Graph, opts: &SpectralOptions) -> Result<SpectralSummary> {
    let n = g.node_count();
    if opts.k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    if n == 0 {
        return Err(Error::invalid("spectrum of an empty graph"));
    }
    let k = opts.k.min(n);
    let all: Vec<NodeId> = (0..n).collect();
    let components = split_into_components(g, &all);

    let mut local = vec![usize::MAX; n];
    let mut pieces = Vec::with_capacity(components.len());
    for (ci, members) in components.iter().enumerate() {
        let piece = if members.len() == 1 {
            Piece {
                values: vec![0.0],
                residuals: vec![0.0],
                leading: vec![1.0],
                converged: true,
            }
        } else {
            for (i, &u) in members.iter().enumerate() {
                local[u] = i;
            }
            let sub = Graph::from_edges(
                members.len(),
                members.iter().flat_map(|&u| {
                    let local = &local;
                    g.neighbors(u)
                        .iter()
                        .filter(move |&&v| u < v)
                        .map(move |&v| (local[u], local[v]))
                }),
            )?;
            let kc = k.min(members.len());
            if members.len() <= DENSE_LIMIT {
                dense_top(&sub, kc)
            } else {
                lanczos(&sub, kc, opts, ci as u64)
            }
        };
        pieces.push(piece);
    }

    let mut ranked: Vec<(f64, f64, usize)> = pieces
        .iter()
        .enumerate()
        .flat_map(|(ci, p)| p.values.iter().zip(&p.residuals).map(move |(&l, &r)| (l, r, ci)))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)));
    ranked.truncate(k);

    let top = ranked[0].2;
    let mut leading_vector = vec![0.0; n];
    for (&u, &x) in components[top].iter().zip(&pieces[top].leading) {
        leading_vector[u] = x;
    }
    let (imax, _) = leading_vector
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
    if leading_vector[imax] < 0.0 {
        leading_vector.iter_mut().for_each(|v| *v = -*v);
    }
    Ok(SpectralSummary {
        eigenvalues: ranked.iter().map(|r| r.0).collect(),
        residuals: ranked.iter().map(|r| r.1).collect(),
        leading_vector,
        converged: pieces.iter().all(|p| p.converged),
    })
}

fn residual(g: &Graph, v: &[f64], lambda: f64, av: &mut [f64]) -> f64 {
    adjacency_mul(g, v, av);
    av.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn dense_top(g: &Graph, k: usize) -> Piece {
    let n = g.node_count();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let mut av = vec![0.0; n];
    let mut residuals = Vec::with_capacity(k);
    let mut values = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        values.push(eig.eigenvalues[idx]);
        residuals.push(residual(g, &v, eig.eigenvalues[idx], &mut av));
    }
    let leading = eig.eigenvectors.column(order[0]).iter().copied().collect();
    Piece {
        values,
        residuals,
        leading,
        converged: true,
    }
}

/// Thick-restart Lanczos with full reorthogonalization on a graph with at
/// least `k` nodes.
///
/// The projected matrix is `Q^T A Q` against the whole basis. When the basis
/// reaches its size limit it is replaced by the leading Ritz vectors, whose
/// projected block is exactly diagonal, and the iteration continues from the
/// current residual direction. Convergence is screened with the estimate
/// `beta * |s_last|` and confirmed with true residuals. When the Krylov space
/// becomes invariant a fresh random direction orthogonal to the basis is
/// used, so repeated eigenvalues are found as well.
fn lanczos(g: &Graph, k: usize, opts: &SpectralOptions, stream: u64) -> Piece {
    let n = g.node_count();
    let max_dim = (2 * k + 20).min(n);
    let keep = (k + (max_dim - k) / 2).min(max_dim - 1);
    let mut rng = stream_rng(opts.seed, stream);
    let accept = |r: f64, l: f64| r <= opts.tol * l.abs().max(1.0);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_dim);
    let mut t = DMatrix::<f64>::zeros(max_dim, max_dim);
    let mut w = vec![0.0; n];
    let mut next = random_unit(&mut rng, n, &basis);
    let mut products = 0;

    while let Some(q) = next.take() {
        let j = basis.len();
        basis.push(q);
        adjacency_mul(g, &basis[j], &mut w);
        products += 1;
        let c = orthogonalize(&mut w, &basis);
        for (i, ci) in c.into_iter().enumerate() {
            t[(i, j)] = ci;
            t[(j, i)] = ci;
        }
        let beta = norm(&w);
        let dim = basis.len();
        let scale = t.view((0, 0), (dim, dim)).amax().max(1.0);
        let invariant = beta <= 1e-10 * scale;
        let exhausted = products >= opts.max_iter || (invariant && dim == n);

        if dim >= k && (dim == max_dim || invariant || exhausted) {
            let eig = SymmetricEigen::new(t.view((0, 0), (dim, dim)).into_owned());
            let order = descending(&eig, dim);
            let estimated = order[..k]
                .iter()
                .all(|&i| accept(beta * eig.eigenvectors[(dim - 1, i)].abs(), eig.eigenvalues[i]));
            if estimated || exhausted {
                let piece = ritz(g, &basis, &eig, &order[..k], &accept);
                if piece.converged || exhausted {
                    return piece;
                }
            }
            if dim == max_dim {
                basis = restart(&basis, &eig, &order[..keep]);
                t.fill(0.0);
                for (i, &idx) in order[..keep].iter().enumerate() {
                    t[(i, i)] = eig.eigenvalues[idx];
                }
            }
        }
        next = if invariant {
            random_unit(&mut rng, n, &basis)
        } else {
            Some(w.iter().map(|v| v / beta).collect())
        };
    }
    // Only reached when no further direction exists.
    let dim = basis.len();
    let eig = SymmetricEigen::new(t.view((0, 0), (dim, dim)).into_owned());
    let order = descending(&eig, k.min(dim));
    ritz(g, &basis, &eig, &order, &accept)
}

/// The Ritz vectors `Q s_i` for the selected eigenvectors of the projected matrix.
fn restart(basis: &[Vec<f64>], eig: &SymmetricEigen<f64, nalgebra::Dyn>, order: &[usize]) -> Vec<Vec<f64>> {
    let n = basis[0].len();
    order
        .par_iter()
        .map(|&idx| {
            let mut v = vec![0.0; n];
            for (j, q) in basis.iter().enumerate() {
                let c = eig.eigenvectors[(j, idx)];
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi += c * qi);
            }
            v
        })
        .collect()
}

fn descending(eig: &SymmetricEigen<f64, nalgebra::Dyn>, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order.truncate(k);
    order
}

fn random_unit<R: Rng>(rng: &mut R, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    if basis.len() >= n {
        return None;
    }
    for _ in 0..10 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        orthogonalize(&mut v, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// Ritz values for the selected eigenvectors of the projected matrix, with
/// their true residuals and the leading Ritz vector.
fn ritz(
    g: &Graph,
    basis: &[Vec<f64>],
    eig: &SymmetricEigen<f64, nalgebra::Dyn>,
    order: &[usize],
    accept: &dyn Fn(f64, f64) -> bool,
) -> Piece {
    let n = g.node_count();
    let mut values = Vec::with_capacity(order.len());
    let mut residuals = Vec::with_capacity(order.len());
    let mut leading = Vec::new();
    let mut av = vec![0.0; n];
    for (&idx, mut v) in order.iter().zip(restart(basis, eig, order)) {
        let lambda = eig.eigenvalues[idx];
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        values.push(lambda);
        residuals.push(residual(g, &v, lambda, &mut av));
        if leading.is_empty() {
            leading = v;
        }
    }
    let converged = residuals.iter().zip(&values).all(|(&r, &l)| accept(r, l));
    if !converged {
        warn!("Lanczos stopped before all {} eigenpairs met the residual tolerance", values.len());
    }
    Piece {
        values,
        residuals,
        leading,
        converged,
    }
}
