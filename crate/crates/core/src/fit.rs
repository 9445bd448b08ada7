//! Maximum-likelihood fitting of per-community edge probabilities.
//!
//! With `1 - p_c = exp(-x_c)` the log-likelihood of an observed graph becomes
//!
//! ```text
//! sum_{(u,v) in E} ln(1 - exp(-s_uv)) - sum_c x_c * (P_c - E_c),   s_uv = sum_{k in C_uv} x_k
//! ```
//!
//! where `P_c` is the number of member pairs of `c` and `E_c` its internal
//! edge count. The objective is concave in `x >= 0`, so projected gradient
//! ascent reaches the global optimum.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generator::AgmParams;
use crate::graph::{AffiliationNetwork, Graph, NodeId};

/// Upper bound on the transformed variables; keeps `p < 1` strictly.
pub const X_MAX: f64 = 23.025850929940457; // -ln(1e-10)

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 50;
const CHUNK: usize = 8192;

/// Everything the likelihood needs, precomputed from a graph and an
/// affiliation network.
///
/// Variable `c < community_count` belongs to community `c`; when the
/// background community is enabled it is the last variable and contains every
/// node.
#[derive(Debug, Clone)]
pub struct FitProblem {
    node_count: usize,
    community_count: usize,
    fit_epsilon: bool,
    edges: Vec<(NodeId, NodeId)>,
    /// CSR layout of C_uv per edge, as variable indices.
    edge_offsets: Vec<usize>,
    edge_vars: Vec<usize>,
    sizes: Vec<usize>,
    pairs: Vec<f64>,
    internal: Vec<f64>,
}

impl FitProblem {
    pub fn new(g: &Graph, net: &AffiliationNetwork, fit_epsilon: bool) -> Result<Self> {
        if g.node_count() != net.node_count() {
            return Err(Error::invalid(format!(
                "graph has {} nodes but affiliation network has {}",
                g.node_count(),
                net.node_count()
            )));
        }
        let community_count = net.community_count();
        let edges: Vec<(NodeId, NodeId)> = g.edges().collect();
        let mut edge_offsets = Vec::with_capacity(edges.len() + 1);
        let mut edge_vars = Vec::new();
        let mut internal = vec![0.0; community_count + usize::from(fit_epsilon)];
        let mut shared = Vec::new();
        edge_offsets.push(0);
        for &(u, v) in &edges {
            crate::graph::sorted_intersection_into(
                net.communities_of(u),
                net.communities_of(v),
                &mut shared,
            );
            for &c in &shared {
                internal[c] += 1.0;
            }
            edge_vars.extend_from_slice(&shared);
            if fit_epsilon {
                edge_vars.push(community_count);
            }
            edge_offsets.push(edge_vars.len());
        }

        let mut sizes: Vec<usize> = net.communities().iter().map(Vec::len).collect();
        if fit_epsilon {
            sizes.push(g.node_count());
            internal[community_count] = edges.len() as f64;
        }
        let pairs = sizes.iter().map(|&n| pair_count(n)).collect();
        Ok(Self {
            node_count: g.node_count(),
            community_count,
            fit_epsilon,
            edges,
            edge_offsets,
            edge_vars,
            sizes,
            pairs,
            internal,
        })
    }

    /// Number of variables: one per community, plus the background community.
    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn fit_epsilon(&self) -> bool {
        self.fit_epsilon
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Variables shared by the endpoints of edge `i`.
    pub fn edge_shared(&self, i: usize) -> &[usize] {
        &self.edge_vars[self.edge_offsets[i]..self.edge_offsets[i + 1]]
    }

    /// Member pair count `P_c` of variable `c`.
    pub fn pair_count(&self, c: usize) -> f64 {
        self.pairs[c]
    }

    /// Internal edge count `E_c` of variable `c`.
    pub fn internal_edges(&self, c: usize) -> f64 {
        self.internal[c]
    }

    /// First edge whose endpoints share no variable.
    pub fn uncovered_edge(&self) -> Option<(NodeId, NodeId)> {
        (0..self.edges.len())
            .find(|&i| self.edge_shared(i).is_empty())
            .map(|i| self.edges[i])
    }

    fn check_len(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::invalid(format!(
                "{what} has length {}, expected {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        self.check_len(x, "x")?;
        if let Some((c, v)) = x.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("x[{c}] = {v} must be finite and >= 0")));
        }
        Ok(())
    }

    /// Sum of `f(i)` over edges, in fixed-size chunks combined in order so the
    /// result is the same for any number of threads.
    fn edge_sum<F: Fn(usize) -> f64 + Sync>(&self, f: F) -> f64 {
        let m = self.edges.len();
        let partial: Vec<f64> = (0..m.div_ceil(CHUNK))
            .into_par_iter()
            .map(|k| (k * CHUNK..((k + 1) * CHUNK).min(m)).map(&f).sum())
            .collect();
        partial.into_iter().sum()
    }

    /// Log-likelihood in the original probabilities. Returns `-inf` when an
    /// observed edge has probability zero.
    pub fn log_likelihood_p(&self, p: &[f64]) -> Result<f64> {
        self.check_len(p, "p")?;
        if let Some((c, v)) = p.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("p[{c}] = {v} outside [0, 1]")));
        }
        let log_miss: Vec<f64> = p.iter().map(|&q| (-q).ln_1p()).collect();
        let edge_term = self.edge_sum(|i| {
            let lm: f64 = self.edge_shared(i).iter().map(|&k| log_miss[k]).sum();
            (-lm.exp_m1()).ln()
        });
        let non_edge: f64 = (0..self.dim())
            .map(|c| {
                let missing = self.pairs[c] - self.internal[c];
                if missing == 0.0 {
                    0.0
                } else {
                    missing * log_miss[c]
                }
            })
            .sum();
        Ok(edge_term + non_edge)
    }

    /// Log-likelihood in the transformed variables.
    pub fn log_likelihood_x(&self, x: &[f64]) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.objective(x))
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let edge_term = self.edge_sum(|i| {
            let s: f64 = self.edge_shared(i).iter().map(|&k| x[k]).sum();
            log_one_minus_exp_neg(s)
        });
        edge_term - self.non_edge_rate(x)
    }

    fn non_edge_rate(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.pairs.iter().zip(&self.internal))
            .map(|(&xc, (&pc, &ec))| xc * (pc - ec))
            .sum()
    }

    /// Gradient of [`FitProblem::log_likelihood_x`].
    pub fn gradient_x(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        self.gradient(x)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let weights: Vec<f64> = (0..self.edges.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|i| {
                let s: f64 = self.edge_shared(i).iter().map(|&k| x[k]).sum();
                1.0 / s.exp_m1()
            })
            .collect();
        let mut grad: Vec<f64> = self
            .pairs
            .iter()
            .zip(&self.internal)
            .map(|(pc, ec)| -(pc - ec))
            .collect();
        for (i, w) in weights.into_iter().enumerate() {
            if !w.is_finite() {
                let (u, v) = self.edges[i];
                return Err(Error::GradientUndefined { u, v });
            }
            for &k in self.edge_shared(i) {
                grad[k] += w;
            }
        }
        Ok(grad)
    }

    /// Density-based starting point, `x_c = -ln(1 - min(0.9, E_c / P_c))`.
    pub fn default_init(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .zip(&self.internal)
            .map(|(&pc, &ec)| {
                if pc == 0.0 {
                    0.0
                } else {
                    -(-(ec / pc).min(0.9)).ln_1p()
                }
            })
            .collect()
    }

    /// Projected gradient ascent over `0 <= x <= X_MAX`.
    ///
    /// Each iteration tries a Barzilai-Borwein step length (1.0 on the first
    /// iteration) and halves it until the Armijo condition holds, so accepted
    /// steps never decrease the objective.
    pub fn fit(&self, config: &FitConfig) -> Result<FitResult> {
        if let Some((u, v)) = self.uncovered_edge() {
            return Err(Error::Infeasible { u, v });
        }
        let mut x = match &config.x_init {
            Some(init) => {
                self.check_x(init)?;
                init.clone()
            }
            None => self.default_init(),
        };
        for (c, xc) in x.iter_mut().enumerate() {
            *xc = if self.pairs[c] == 0.0 { 0.0 } else { xc.min(X_MAX) };
        }

        let mut f = self.objective(&x);
        if !f.is_finite() {
            return Err(Error::invalid(
                "initial point gives an observed edge zero probability",
            ));
        }
        let mut g = self.gradient(&x)?;
        let mut step = 1.0;
        let mut converged = false;
        let mut iterations = 0;
        let mut grad_norm = projected_gradient_norm(&x, &g, &self.pairs);

        while iterations < config.max_iter {
            if grad_norm < config.tol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut accepted = None;
            let mut trial = step;
            for _ in 0..=MAX_HALVINGS {
                let candidate = self.project_step(&x, &g, trial);
                let ascent: f64 = candidate
                    .iter()
                    .zip(&x)
                    .zip(&g)
                    .map(|((xn, xo), gc)| gc * (xn - xo))
                    .sum();
                if ascent <= 0.0 {
                    break;
                }
                let f_new = self.objective(&candidate);
                if f_new >= f + ARMIJO * ascent {
                    accepted = Some((candidate, f_new));
                    break;
                }
                trial *= 0.5;
            }

            let Some((x_new, f_new)) = accepted else {
                // No representable ascent step remains along the projected gradient.
                debug!("line search exhausted at iteration {iterations}, objective {f}");
                converged = grad_norm < config.tol.sqrt();
                break;
            };
            let g_new = self.gradient(&x_new)?;

            let (mut ss, mut sy) = (0.0, 0.0);
            for c in 0..x.len() {
                let s = x_new[c] - x[c];
                ss += s * s;
                sy -= s * (g_new[c] - g[c]);
            }
            step = if sy > 0.0 && ss > 0.0 {
                (ss / sy).clamp(1e-12, 1e12)
            } else {
                1.0
            };

            let improvement = (f_new - f) / f.abs().max(1.0);
            x = x_new;
            f = f_new;
            g = g_new;
            grad_norm = projected_gradient_norm(&x, &g, &self.pairs);
            if improvement < config.tol {
                converged = true;
                break;
            }
        }
        if !converged && grad_norm < config.tol {
            converged = true;
        }
        if converged {
            if let Some((xb, fb, gb)) = self.snap_to_cap(&x, &g, f)? {
                x = xb;
                f = fb;
                grad_norm = projected_gradient_norm(&x, &gb, &self.pairs);
            }
        }

        let capped = x.iter().map(|&v| v >= X_MAX).collect();
        let p = x.iter().map(|&v| -(-v).exp_m1()).collect();
        Ok(FitResult {
            x,
            p,
            log_likelihood: f,
            iterations,
            converged,
            grad_norm,
            capped,
            fit_epsilon: self.fit_epsilon,
        })
    }

    /// Variables still pushed upward at the stopping point approach the cap
    /// only geometrically slowly; move them onto it when that does not lower
    /// the objective.
    fn snap_to_cap(&self, x: &[f64], g: &[f64], f: f64) -> Result<Option<(Vec<f64>, f64, Vec<f64>)>> {
        let mut candidate = x.to_vec();
        let mut moved = false;
        for c in 0..x.len() {
            if self.pairs[c] > 0.0 && g[c] > 0.0 && x[c] < X_MAX && self.internal[c] == self.pairs[c] {
                candidate[c] = X_MAX;
                moved = true;
            }
        }
        if !moved {
            return Ok(None);
        }
        let fc = self.objective(&candidate);
        if fc >= f {
            let gc = self.gradient(&candidate)?;
            Ok(Some((candidate, fc, gc)))
        } else {
            Ok(None)
        }
    }

    fn project_step(&self, x: &[f64], g: &[f64], step: f64) -> Vec<f64> {
        x.iter()
            .zip(g)
            .zip(&self.pairs)
            .map(|((&xc, &gc), &pc)| {
                if pc == 0.0 {
                    0.0
                } else {
                    (xc + step * gc).clamp(0.0, X_MAX)
                }
            })
            .collect()
    }
}

fn pair_count(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// `ln(1 - exp(-s))` for `s >= 0`.
fn log_one_minus_exp_neg(s: f64) -> f64 {
    if s > std::f64::consts::LN_2 {
        (-(-s).exp()).ln_1p()
    } else {
        (-(-s).exp_m1()).ln()
    }
}

/// Norm of `P(x + g) - x`, which vanishes exactly at constrained stationary points.
fn projected_gradient_norm(x: &[f64], g: &[f64], pairs: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(pairs)
        .filter(|(_, &pc)| pc > 0.0)
        .map(|((&xc, &gc), _)| {
            let d = (xc + gc).clamp(0.0, X_MAX) - xc;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Relative objective improvement and projected-gradient norm threshold.
    pub tol: f64,
    pub max_iter: usize,
    pub x_init: Option<Vec<f64>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 1000,
            x_init: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub x: Vec<f64>,
    /// `1 - exp(-x)`; strictly below one even when the cap binds.
    pub p: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Projected-gradient norm at the returned point.
    pub grad_norm: f64,
    /// Variables that sit on the upper bound; reported as `p = 1`.
    pub capped: Vec<bool>,
    pub fit_epsilon: bool,
}

impl FitResult {
    /// Fitted background probability, if one was fitted.
    pub fn background(&self) -> Option<f64> {
        self.fit_epsilon.then(|| self.reported_p(self.p.len() - 1))
    }

    /// Community probabilities, without the background variable.
    pub fn community_p(&self) -> &[f64] {
        let n = self.p.len() - usize::from(self.fit_epsilon);
        &self.p[..n]
    }

    fn reported_p(&self, c: usize) -> f64 {
        if self.capped[c] {
            1.0
        } else {
            self.p[c]
        }
    }

    /// Generation parameters with capped communities at exactly one.
    pub fn to_params(&self) -> AgmParams {
        let n = self.community_p().len();
        AgmParams {
            p: (0..n).map(|c| self.reported_p(c)).collect(),
            epsilon: self.background().unwrap_or(0.0).min(1.0 - 1e-10),
        }
    }

    /// Text report: `key<TAB>value` header lines followed by one
    /// `community<TAB>p<TAB>x<TAB>boundary` row per community.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let n = self.community_p().len();
        writeln!(out, "# agm fit report").unwrap();
        writeln!(out, "log_likelihood\t{}", self.log_likelihood).unwrap();
        writeln!(out, "iterations\t{}", self.iterations).unwrap();
        writeln!(out, "converged\t{}", self.converged).unwrap();
        writeln!(out, "grad_norm\t{}", self.grad_norm).unwrap();
        writeln!(out, "fit_epsilon\t{}", self.fit_epsilon).unwrap();
        writeln!(out, "epsilon\t{}", self.background().unwrap_or(0.0)).unwrap();
        writeln!(
            out,
            "boundary_count\t{}",
            self.capped[..n].iter().filter(|&&b| b).count()
        )
        .unwrap();
        writeln!(out, "communities\t{n}").unwrap();
        writeln!(out, "# community\tp\tx\tboundary").unwrap();
        for c in 0..n {
            writeln!(
                out,
                "{c}\t{}\t{}\t{}",
                self.reported_p(c),
                self.x[c],
                u8::from(self.capped[c])
            )
            .unwrap();
        }
        out
    }

    pub fn write_report<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(self.report().as_bytes())?;
        Ok(())
    }
}

/// Read generation parameters back from a fit report.
pub fn read_fit_params<R: BufRead>(reader: R) -> Result<AgmParams> {
    let mut epsilon = 0.0;
    let mut p = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = t.split('\t').collect();
        let bad = |message: String| Error::Parse {
            path: None,
            line: i + 1,
            message,
        };
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("expected a number, found {s:?}")));
        match fields.as_slice() {
            ["epsilon", v] => epsilon = num(v)?,
            [key, _] if !key.chars().all(|ch| ch.is_ascii_digit()) => {}
            [id, pv, _, _] => {
                let id: usize = id.parse().map_err(|_| bad(format!("bad community id {id:?}")))?;
                if id != p.len() {
                    return Err(bad(format!("expected community {}, found {id}", p.len())));
                }
                p.push(num(pv)?);
            }
            _ => return Err(bad(format!("unrecognized line {t:?}"))),
        }
    }
    AgmParams::new(p, epsilon)
}
