//! Curve comparison: a cumulative-area KS statistic and relative improvement
//! scores, tabulated over the community and network properties.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::metrics::{self, Curve, LogBins};
use crate::network::{self, HopOptions, SpectralOptions, SpectralSummary};

/// Recorded in every rendered report.
pub const NORMALIZATION_NOTE: &str = "KS = sup_x |F(x) - G(x)| of cumulative areas; each curve is \
    normalized to unit area and interpolated piecewise-linearly on the union x-grid; \
    size/degree axes compared in log-x";

/// How the x-axis is treated before integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    /// `x -> ln x`; points with `x <= 0` are dropped.
    Log,
}

impl AxisScale {
    pub fn apply(self, curve: &Curve) -> Curve {
        match self {
            AxisScale::Linear => curve.clone(),
            AxisScale::Log => Curve {
                points: curve
                    .points
                    .iter()
                    .filter(|p| p.0 > 0.0)
                    .map(|&(x, y)| (x.ln(), y))
                    .collect(),
                ..curve.clone()
            },
        }
    }
}

fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Linear interpolation of `points` at `x`, which must lie inside their range.
fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let i = points.partition_point(|p| p.0 < x);
    if i < points.len() && points[i].0 == x {
        return points[i].1;
    }
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Cumulative area of `points` at every grid point; the curve is zero
/// outside its own x-range.
fn cumulative_on(points: &[(f64, f64)], grid: &[f64]) -> Vec<f64> {
    let (lo, hi) = (points[0].0, points[points.len() - 1].0);
    let mut out = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a >= lo && b <= hi {
            acc += 0.5 * (b - a) * (interpolate(points, a) + interpolate(points, b));
        }
        out.push(acc);
    }
    out
}

/// `sup_x |F(x) - G(x)|` where `F`, `G` are the running areas under the two
/// curves after each is scaled to unit total area.
pub fn ks_statistic(f: &Curve, g: &Curve) -> Result<f64> {
    for c in [f, g] {
        if c.is_empty() {
            return Err(Error::invalid("KS statistic of an empty curve"));
        }
        c.validate()?;
    }
    let (af, ag) = (trapezoid(&f.points), trapezoid(&g.points));
    if !(af > 0.0 && ag > 0.0) {
        return Err(Error::invalid("curve has zero total area"));
    }
    let mut grid: Vec<f64> = f.xs().chain(g.xs()).collect();
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    let cf = cumulative_on(&f.points, &grid);
    let cg = cumulative_on(&g.points, &grid);
    Ok(cf
        .iter()
        .zip(&cg)
        .map(|(a, b)| (a / af - b / ag).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeImprovement {
    /// `(ks_b - ks_a) / max(ks_a, ks_b)`; positive when A fits better.
    pub value: f64,
    /// Both statistics were zero.
    pub both_perfect: bool,
}

pub fn relative_improvement(ks_a: f64, ks_b: f64) -> Result<RelativeImprovement> {
    if !(ks_a >= 0.0 && ks_b >= 0.0) {
        return Err(Error::invalid(format!(
            "KS values must be non-negative, got {ks_a} and {ks_b}"
        )));
    }
    let larger = ks_a.max(ks_b);
    Ok(if larger == 0.0 {
        RelativeImprovement {
            value: 0.0,
            both_perfect: true,
        }
    } else {
        RelativeImprovement {
            value: (ks_b - ks_a) / larger,
            both_perfect: false,
        }
    })
}

/// The compared structural properties, community group first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    Vol,
    Mid,
    Pc,
    Ep,
    Oo,
    Aabb,
    Deg,
    Ccf,
    Hop,
    Tp,
    EigVal,
    EigVec,
}

impl Property {
    pub const COMMUNITY: [Property; 6] = [
        Property::Vol,
        Property::Mid,
        Property::Pc,
        Property::Ep,
        Property::Oo,
        Property::Aabb,
    ];
    pub const NETWORK: [Property; 6] = [
        Property::Deg,
        Property::Ccf,
        Property::Hop,
        Property::Tp,
        Property::EigVal,
        Property::EigVec,
    ];

    pub fn all() -> Vec<Property> {
        Self::COMMUNITY.iter().chain(&Self::NETWORK).copied().collect()
    }

    pub fn label(self) -> &'static str {
        match self {
            Property::Vol => "Vol",
            Property::Mid => "MID",
            Property::Pc => "PC",
            Property::Ep => "EP",
            Property::Oo => "OO",
            Property::Aabb => "AABB",
            Property::Deg => "Deg",
            Property::Ccf => "CCF",
            Property::Hop => "Hop",
            Property::Tp => "TP",
            Property::EigVal => "EigVal",
            Property::EigVec => "EigVec",
        }
    }

    /// Case-insensitive label lookup.
    pub fn parse(s: &str) -> Option<Property> {
        Self::all()
            .into_iter()
            .find(|p| p.label().eq_ignore_ascii_case(s.trim()))
    }

    pub fn is_community(self) -> bool {
        Self::COMMUNITY.contains(&self)
    }

    pub fn axis(self) -> AxisScale {
        match self {
            Property::Pc | Property::Ep | Property::Hop | Property::EigVal => AxisScale::Linear,
            _ => AxisScale::Log,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parse a comma-separated property list; `all` selects everything.
pub fn parse_selection(s: &str) -> Result<Vec<Property>> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if tok.eq_ignore_ascii_case("all") {
            return Ok(Property::all());
        }
        let p = Property::parse(tok)
            .ok_or_else(|| Error::invalid(format!("unknown property {tok:?}")))?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("empty property selection"));
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareOptions {
    pub bins: LogBins,
    pub k_max: usize,
    pub pair_sample: usize,
    pub seed: u64,
    pub hop: HopOptions,
    pub spectral: SpectralOptions,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            bins: LogBins::default(),
            k_max: 20,
            pair_sample: 1000,
            seed: 0,
            hop: HopOptions::default(),
            spectral: SpectralOptions::default(),
        }
    }
}

/// Curve of one property on a dataset, or `None` when it has fewer than two
/// points (no overlaps, single bin, and so on).
pub fn property_curve(ds: &Dataset, prop: Property, opts: &CompareOptions) -> Result<Option<Curve>> {
    property_curve_with(ds, prop, opts, None)
}

/// Spectral summary when either eigen property is selected and the graph is
/// non-empty, so both can share one computation.
fn spectral_for(ds: &Dataset, props: &[Property], opts: &CompareOptions) -> Result<Option<SpectralSummary>> {
    let wanted = props.iter().any(|p| matches!(p, Property::EigVal | Property::EigVec));
    if !wanted || ds.graph.node_count() == 0 {
        return Ok(None);
    }
    network::spectral_summary(&ds.graph, &opts.spectral).map(Some)
}

fn property_curve_with(
    ds: &Dataset,
    prop: Property,
    opts: &CompareOptions,
    spectral: Option<&SpectralSummary>,
) -> Result<Option<Curve>> {
    let curve = match prop {
        Property::Vol => metrics::edges_vs_size(ds, &opts.bins).curve,
        Property::Mid => metrics::max_icdf_vs_size(ds, &opts.bins),
        Property::Pc => metrics::connector_in_overlap(ds, &opts.bins).curve,
        Property::Ep => metrics::edge_prob_vs_shared(ds, opts.k_max)?,
        Property::Oo => metrics::overlap_clustering(ds, opts.pair_sample, opts.seed, &opts.bins).oo,
        Property::Aabb => {
            metrics::overlap_clustering(ds, opts.pair_sample, opts.seed, &opts.bins).aabb
        }
        Property::Deg => network::degree_distribution(&ds.graph),
        Property::Ccf => network::clustering_distribution(&ds.graph),
        Property::Hop => network::hop_plot(&ds.graph, &opts.hop)?,
        Property::Tp => network::triad_participation(&ds.graph),
        Property::EigVal | Property::EigVec => {
            let owned;
            let s = match spectral {
                Some(s) => s,
                None => match spectral_for(ds, &[prop], opts)? {
                    Some(s) => {
                        owned = s;
                        &owned
                    }
                    None => return Ok(None),
                },
            };
            if prop == Property::EigVal {
                let mut c = s.eigenvalue_curve();
                c.points.retain(|p| p.1 > 0.0);
                c
            } else {
                s.eigenvector_curve()
            }
        }
    };
    let scaled = prop.axis().apply(&curve);
    Ok((scaled.len() >= 2).then_some(curve))
}

/// One table row: a value (or absence) per column.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub values: Vec<Option<f64>>,
}

/// KS statistics (or relative improvements) per property, one row per
/// compared network.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub columns: Vec<Property>,
    pub rows: Vec<ReportRow>,
}

fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let present: Vec<f64> = values.flatten().collect();
    (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
}

impl ComparisonReport {
    pub fn value(&self, row: usize, prop: Property) -> Option<f64> {
        let col = self.columns.iter().position(|&p| p == prop)?;
        self.rows[row].values[col]
    }

    /// Mean of the present values of a row over the given group of columns.
    pub fn row_average(&self, row: usize, group: &[Property]) -> Option<f64> {
        mean(
            self.columns
                .iter()
                .zip(&self.rows[row].values)
                .filter(|(p, _)| group.contains(p))
                .map(|(_, v)| *v),
        )
    }

    pub fn column_average(&self, prop: Property) -> Option<f64> {
        let col = self.columns.iter().position(|&p| p == prop)?;
        mean(self.rows.iter().map(|r| r.values[col]))
    }

    /// Stack the rows of another report with the same columns.
    pub fn append(&mut self, other: ComparisonReport) -> Result<()> {
        if other.columns != self.columns {
            return Err(Error::invalid("reports have different columns"));
        }
        self.rows.extend(other.rows);
        Ok(())
    }

    /// Row-wise relative improvement of model A (`self`) over model B.
    pub fn relative_improvement_over(&self, other: &ComparisonReport) -> Result<ComparisonReport> {
        if other.columns != self.columns || other.rows.len() != self.rows.len() {
            return Err(Error::invalid("reports have different shapes"));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| {
                let values = a
                    .values
                    .iter()
                    .zip(&b.values)
                    .map(|(x, y)| match (x, y) {
                        (Some(x), Some(y)) => relative_improvement(*x, *y).map(|r| Some(r.value)),
                        _ => Ok(None),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ReportRow {
                    label: a.label.clone(),
                    values,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ComparisonReport {
            columns: self.columns.clone(),
            rows,
        })
    }

    fn groups(&self) -> Vec<Vec<Property>> {
        [&Property::COMMUNITY[..], &Property::NETWORK[..]]
            .iter()
            .map(|g| g.iter().copied().filter(|p| self.columns.contains(p)).collect::<Vec<_>>())
            .filter(|g| !g.is_empty())
            .collect()
    }

    /// Aligned text tables, community and network properties separately, each
    /// with a per-row `Avg` column and a final `Avg` row.
    pub fn to_table(&self) -> String {
        let fmt_cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        let width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .chain([7])
            .max()
            .unwrap_or(7);
        let mut out = String::new();
        writeln!(out, "# {NORMALIZATION_NOTE}").unwrap();
        for group in self.groups() {
            write!(out, "{:<width$}", "Network").unwrap();
            for p in &group {
                write!(out, "  {:>8}", p.label()).unwrap();
            }
            writeln!(out, "  {:>8}", "Avg").unwrap();
            for (i, row) in self.rows.iter().enumerate() {
                write!(out, "{:<width$}", row.label).unwrap();
                for &p in &group {
                    write!(out, "  {:>8}", fmt_cell(self.value(i, p))).unwrap();
                }
                writeln!(out, "  {:>8}", fmt_cell(self.row_average(i, &group))).unwrap();
            }
            write!(out, "{:<width$}", "Avg").unwrap();
            for &p in &group {
                write!(out, "  {:>8}", fmt_cell(self.column_average(p))).unwrap();
            }
            let all = mean(self.rows.iter().enumerate().map(|(i, _)| self.row_average(i, &group)));
            writeln!(out, "  {:>8}", fmt_cell(all)).unwrap();
            writeln!(out).unwrap();
        }
        out
    }

    /// `row.property<TAB>value` lines, `absent` for missing entries.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            for (p, v) in self.columns.iter().zip(&row.values) {
                match v {
                    Some(x) => writeln!(out, "{}.{}\t{x}", row.label, p.label()).unwrap(),
                    None => writeln!(out, "{}.{}\tabsent", row.label, p.label()).unwrap(),
                }
            }
        }
        out
    }
}

/// Compute the selected property curves on both datasets and the KS
/// statistic between each pair. Properties that cannot be computed on either
/// dataset are marked absent.
pub fn compare_suite(
    real: &Dataset,
    synth: &Dataset,
    properties: &[Property],
    opts: &CompareOptions,
) -> Result<ComparisonReport> {
    let mut columns = properties.to_vec();
    columns.sort_unstable();
    columns.dedup();
    let spectra = (
        spectral_for(real, &columns, opts)?,
        spectral_for(synth, &columns, opts)?,
    );
    let values = columns
        .par_iter()
        .map(|&p| {
            let a = property_curve_with(real, p, opts, spectra.0.as_ref())?;
            let b = property_curve_with(synth, p, opts, spectra.1.as_ref())?;
            Ok(match (a, b) {
                (Some(a), Some(b)) => {
                    let axis = p.axis();
                    ks_statistic(&axis.apply(&a), &axis.apply(&b)).ok()
                }
                _ => None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        columns,
        rows: vec![ReportRow {
            label: "synthetic".into(),
            values,
        }],
    })
}
