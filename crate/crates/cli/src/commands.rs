//! The subcommands, callable as library functions.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use agm_core::compare::{self, parse_selection, CompareOptions, ComparisonReport, Property};
use agm_core::fit::read_fit_params;
use agm_core::io::{self, CommunityFormat, Dataset, DatasetSummary, IdMap, Label};
use agm_core::metrics::{self, Curve, LogBins};
use agm_core::network::{self, HopOptions, SpectralOptions, SpectralSummary};
use agm_core::{
    assign_probs_power_law, generate, AffiliationNetwork, AgmParams, FitConfig, FitProblem,
    FitResult, GenerateOptions,
};
use log::{info, warn};
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, REQUIRED};
use crate::error::{CliError, CliResult};

pub const INDEX_FILE: &str = "index.tsv";
pub const TABLE_FILE: &str = "table.txt";
pub const KS_FILE: &str = "ks.tsv";
pub const FIT_FILE: &str = "fit.tsv";
pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const SEED_FILE: &str = "seed.txt";

/// Use the given seed, or draw one from the clock and say so.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0);
        warn!("no seed given; using {s}");
        s
    })
}

/// Run `f` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::usage(format!("cannot start {t} threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Parse both input files, clean them and write the canonical dataset.
pub fn cmd_ingest(
    edges: &Path,
    communities: &Path,
    format: CommunityFormat,
    out: &Path,
) -> CliResult<DatasetSummary> {
    let raw_edges = io::parse_edge_list(open(edges)?).map_err(|e| e.with_path(edges))?;
    let raw_comms =
        io::parse_community_file_as(open(communities)?, format).map_err(|e| e.with_path(communities))?;
    let ds = io::preprocess(&raw_edges, &raw_comms);
    create_dir(out)?;
    ds.save_dir(out)?;
    let summary = io::summarize(&ds);
    info!(
        "ingested {} nodes, {} edges, {} communities into {}",
        summary.nodes,
        summary.edges,
        summary.communities,
        out.display()
    );
    Ok(summary)
}

pub fn load_dataset(dir: &Path) -> CliResult<Dataset> {
    if !dir.is_dir() {
        return Err(CliError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a dataset directory"),
        ));
    }
    Ok(Dataset::load_dir(dir)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub fit_epsilon: bool,
}

impl FitSettings {
    pub fn from_config(cfg: &RunConfig) -> Self {
        Self {
            tol: cfg.tol(),
            max_iter: cfg.max_iter(),
            fit_epsilon: cfg.fit_epsilon(),
        }
    }
}

/// Fit community probabilities to a dataset and write the report to `out`.
/// The result is returned whether or not the optimizer converged.
pub fn cmd_fit(dataset: &Path, settings: &FitSettings, out: &Path) -> CliResult<FitResult> {
    let ds = load_dataset(dataset)?;
    let uncovered = |u: usize, v: usize| CliError::Uncovered {
        u: ds.id_map.label(u),
        v: ds.id_map.label(v),
    };
    let problem = FitProblem::new(&ds.graph, &ds.affiliations, settings.fit_epsilon)?;
    let config = FitConfig {
        tol: settings.tol,
        max_iter: settings.max_iter,
        x_init: None,
    };
    let result = problem.fit(&config).map_err(|e| match e {
        agm_core::Error::Infeasible { u, v } => uncovered(u, v),
        other => other.into(),
    })?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    write_file(out, &result.report())?;
    if !result.converged {
        warn!(
            "fit stopped after {} iterations without converging (grad norm {:e})",
            result.iterations, result.grad_norm
        );
    }
    Ok(result)
}

/// Where generation parameters come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSource {
    /// A report written by `fit`.
    Report(PathBuf),
    PowerLaw { beta: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSettings {
    pub source: ParamSource,
    /// Replaces the background probability of the source when set.
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub allow_large_epsilon: bool,
}

/// Affiliations from a dataset directory or a bare community file. For a
/// file, every label that appears becomes a node.
pub fn load_affiliations(path: &Path) -> CliResult<(AffiliationNetwork, IdMap)> {
    if path.is_dir() {
        let ds = load_dataset(path)?;
        return Ok((ds.affiliations, ds.id_map));
    }
    let comms = io::parse_community_file(open(path)?).map_err(|e| e.with_path(path))?;
    let mut labels: Vec<Label> = comms.iter().flatten().copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let id_map = IdMap::from_sorted(labels)?;
    let dense = comms
        .iter()
        .map(|c| c.iter().map(|&l| id_map.id(l).expect("label was collected")).collect())
        .collect();
    Ok((AffiliationNetwork::new(id_map.len(), dense)?, id_map))
}

/// Sample a graph on the given affiliations and write it with the
/// affiliations and seed into `out`.
pub fn cmd_generate(
    affiliations: &Path,
    settings: &GenerateSettings,
    out: &Path,
) -> CliResult<DatasetSummary> {
    let (net, id_map) = load_affiliations(affiliations)?;
    let mut params = match &settings.source {
        ParamSource::Report(p) => read_fit_params(open(p)?).map_err(|e| e.with_path(p))?,
        ParamSource::PowerLaw { beta, scale } => assign_probs_power_law(&net, *beta, *scale)?,
    };
    if let Some(e) = settings.epsilon {
        params = AgmParams::new(params.p, e)?;
    }
    let opts = GenerateOptions {
        allow_large_epsilon: settings.allow_large_epsilon,
        ..GenerateOptions::default()
    };
    let graph = generate(&net, &params, settings.seed, &opts)?;
    let ds = Dataset {
        graph,
        affiliations: net,
        id_map,
    };
    create_dir(out)?;
    ds.save_dir(out)?;
    write_file(&out.join(SEED_FILE), &format!("{}\n", settings.seed))?;
    Ok(io::summarize(&ds))
}

/// Options shared by the measurement commands.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSettings {
    pub bins: LogBins,
    pub k_max: usize,
    pub pair_sample: usize,
    pub seed: u64,
}

impl MetricSettings {
    pub fn from_config(cfg: &RunConfig, seed: u64) -> CliResult<Self> {
        Ok(Self {
            bins: LogBins::new(cfg.bins(), cfg.min_bin_samples())?,
            k_max: cfg.k_max(),
            pair_sample: cfg.pair_sample(),
            seed,
        })
    }

    pub fn compare_options(&self) -> CompareOptions {
        CompareOptions {
            bins: self.bins,
            k_max: self.k_max,
            pair_sample: self.pair_sample,
            seed: self.seed,
            hop: HopOptions {
                seed: self.seed,
                ..HopOptions::default()
            },
            spectral: SpectralOptions {
                seed: self.seed,
                ..SpectralOptions::default()
            },
        }
    }
}

/// Something `stats` can write: a compared property or an extra curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StatItem {
    Prop(Property),
    Ab,
    SizeCcdf,
    MembershipCcdf,
}

impl StatItem {
    pub fn all() -> Vec<StatItem> {
        let mut v: Vec<StatItem> = Property::all().into_iter().map(StatItem::Prop).collect();
        v.extend([StatItem::Ab, StatItem::SizeCcdf, StatItem::MembershipCcdf]);
        v
    }

    pub fn label(self) -> &'static str {
        match self {
            StatItem::Prop(p) => p.label(),
            StatItem::Ab => "AB",
            StatItem::SizeCcdf => "SizeCCDF",
            StatItem::MembershipCcdf => "MembershipCCDF",
        }
    }

    pub fn file_name(self) -> String {
        format!("{}.tsv", self.label().to_ascii_lowercase())
    }
}

/// Comma-separated stat labels (case-insensitive) or `all`.
pub fn parse_stat_selection(s: &str) -> CliResult<Vec<StatItem>> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if tok.eq_ignore_ascii_case("all") {
            return Ok(StatItem::all());
        }
        let item = StatItem::all()
            .into_iter()
            .find(|i| i.label().eq_ignore_ascii_case(tok))
            .ok_or_else(|| CliError::usage(format!("unknown property {tok:?}")))?;
        if !out.contains(&item) {
            out.push(item);
        }
    }
    if out.is_empty() {
        return Err(CliError::usage("empty property selection"));
    }
    out.sort_unstable();
    Ok(out)
}

/// Outcome of one stat in the index.
#[derive(Debug, Clone, PartialEq)]
pub enum StatStatus {
    Written(String),
    /// Nothing to measure, such as overlap statistics without overlaps.
    Absent,
    /// The computation failed; the message is recorded.
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatsIndex {
    pub seed: u64,
    pub entries: Vec<(StatItem, StatStatus)>,
}

impl StatsIndex {
    pub fn status(&self, item: StatItem) -> Option<&StatStatus> {
        self.entries.iter().find(|(i, _)| *i == item).map(|(_, s)| s)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# seed\t{}", self.seed).unwrap();
        writeln!(out, "# property\tstatus\tdetail").unwrap();
        for (item, status) in &self.entries {
            let (s, d) = match status {
                StatStatus::Written(f) => ("ok", f.as_str()),
                StatStatus::Absent => ("absent", "no data"),
                StatStatus::Skipped(m) => ("skipped", m.as_str()),
            };
            writeln!(out, "{}\t{s}\t{d}", item.label()).unwrap();
        }
        out
    }
}

fn stat_curve(
    ds: &Dataset,
    item: StatItem,
    settings: &MetricSettings,
    overlap: &mut Option<metrics::OverlapClustering>,
    spectral: &mut Option<SpectralSummary>,
) -> agm_core::Result<Option<Curve>> {
    let opts = settings.compare_options();
    let mut overlap_curve = |pick: fn(&metrics::OverlapClustering) -> &Curve| {
        let oc = overlap.get_or_insert_with(|| {
            metrics::overlap_clustering(ds, settings.pair_sample, settings.seed, &settings.bins)
        });
        pick(oc).clone()
    };
    let curve = match item {
        StatItem::Prop(Property::Vol) => metrics::edges_vs_size(ds, &settings.bins).curve,
        StatItem::Prop(Property::Mid) => metrics::max_icdf_vs_size(ds, &settings.bins),
        StatItem::Prop(Property::Pc) => metrics::connector_in_overlap(ds, &settings.bins).curve,
        StatItem::Prop(Property::Ep) => metrics::edge_prob_vs_shared(ds, settings.k_max)?,
        StatItem::Prop(Property::Oo) => overlap_curve(|o| &o.oo),
        StatItem::Prop(Property::Aabb) => overlap_curve(|o| &o.aabb),
        StatItem::Ab => overlap_curve(|o| &o.ab),
        StatItem::Prop(Property::Deg) => network::degree_distribution(&ds.graph),
        StatItem::Prop(Property::Ccf) => network::clustering_distribution(&ds.graph),
        StatItem::Prop(Property::Hop) => network::hop_plot(&ds.graph, &opts.hop)?,
        StatItem::Prop(Property::Tp) => network::triad_participation(&ds.graph),
        StatItem::Prop(p @ (Property::EigVal | Property::EigVec)) => {
            if ds.graph.node_count() == 0 {
                return Ok(None);
            }
            if spectral.is_none() {
                *spectral = Some(network::spectral_summary(&ds.graph, &opts.spectral)?);
            }
            let s = spectral.as_ref().expect("just computed");
            if p == Property::EigVal {
                s.eigenvalue_curve()
            } else {
                s.eigenvector_curve()
            }
        }
        StatItem::SizeCcdf | StatItem::MembershipCcdf => {
            let empty = if item == StatItem::SizeCcdf {
                ds.affiliations.community_count() == 0
            } else {
                ds.affiliations.node_count() == 0
            };
            if empty {
                return Ok(None);
            }
            if item == StatItem::SizeCcdf {
                metrics::community_size_ccdf(ds)?
            } else {
                metrics::membership_ccdf(ds)?
            }
        }
    };
    Ok((!curve.is_empty()).then_some(curve))
}

/// Write one TSV per selected stat plus an index listing every outcome.
pub fn stats_for(
    ds: &Dataset,
    selection: &[StatItem],
    settings: &MetricSettings,
    out: &Path,
) -> CliResult<StatsIndex> {
    create_dir(out)?;
    let (mut overlap, mut spectral) = (None, None);
    let mut entries = Vec::with_capacity(selection.len());
    for &item in selection {
        let status = match stat_curve(ds, item, settings, &mut overlap, &mut spectral) {
            Ok(Some(curve)) => {
                let name = item.file_name();
                io::write_curve_file(&curve, &out.join(&name))?;
                StatStatus::Written(name)
            }
            Ok(None) => StatStatus::Absent,
            Err(e) => {
                warn!("skipping {}: {e}", item.label());
                StatStatus::Skipped(e.to_string())
            }
        };
        entries.push((item, status));
    }
    let index = StatsIndex {
        seed: settings.seed,
        entries,
    };
    write_file(&out.join(INDEX_FILE), &index.to_text())?;
    Ok(index)
}

pub fn cmd_stats(
    dataset: &Path,
    selection: &[StatItem],
    settings: &MetricSettings,
    out: &Path,
) -> CliResult<StatsIndex> {
    let ds = load_dataset(dataset)?;
    stats_for(&ds, selection, settings, out)
}

fn write_report(report: &ComparisonReport, seed: u64, out: &Path) -> CliResult<()> {
    create_dir(out)?;
    write_file(&out.join(TABLE_FILE), &report.to_table())?;
    write_file(
        &out.join(KS_FILE),
        &format!("# seed\t{seed}\n{}", report.to_key_values()),
    )
}

/// KS statistics between the property curves of two datasets, written as
/// `table.txt` and `ks.tsv` under `out`.
pub fn cmd_compare(
    real: &Path,
    synth: &Path,
    properties: &[Property],
    settings: &MetricSettings,
    out: &Path,
) -> CliResult<ComparisonReport> {
    let real = load_dataset(real)?;
    let synth = load_dataset(synth)?;
    let report = compare::compare_suite(&real, &synth, properties, &settings.compare_options())?;
    write_report(&report, settings.seed, out)?;
    Ok(report)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        write!(s, "{b:02x}").unwrap();
        s
    })
}

/// Create `base/run-<timestamp>`, adding `-2`, `-3`, ... on collision.
fn fresh_run_dir(base: &Path) -> CliResult<PathBuf> {
    create_dir(base)?;
    let stamp = chrono::Local::now().format("run-%Y%m%d-%H%M%S").to_string();
    for n in 1.. {
        let name = if n == 1 { stamp.clone() } else { format!("{stamp}-{n}") };
        let dir = base.join(name);
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::io(&dir, e)),
        }
    }
    unreachable!()
}

/// Result of a pipeline run.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub dir: PathBuf,
    pub fit: FitResult,
    pub report: ComparisonReport,
}

/// Run ingest, fit, generate, stats and compare from a config file, with
/// `overrides` (from command-line flags) taking precedence.
///
/// Layout of the run directory: `config.txt` (resolved settings),
/// `manifest.tsv`, `real/` and `synthetic/` datasets, `fit.tsv`,
/// `stats/real/`, `stats/synthetic/` and `compare/`.
pub fn cmd_bench(config_path: &Path, overrides: &RunConfig) -> CliResult<BenchRun> {
    let text = fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let mut cfg = RunConfig::parse(&text)?;
    cfg.merge(overrides);
    cfg.validate(&REQUIRED)?;
    let resolved = cfg.to_text();
    let hash = hex(&Sha256::digest(resolved.as_bytes()));
    with_threads(cfg.threads, || run_pipeline(&cfg, &resolved, &hash))?
}

fn run_pipeline(cfg: &RunConfig, resolved: &str, hash: &str) -> CliResult<BenchRun> {
    let seed = cfg.seed.expect("validated");
    let base = cfg.out.as_deref().expect("validated");
    let dir = fresh_run_dir(base)?;
    write_file(&dir.join("config.txt"), resolved)?;

    let real_dir = dir.join("real");
    let summary = cmd_ingest(
        cfg.edges.as_deref().expect("validated"),
        cfg.communities.as_deref().expect("validated"),
        cfg.format()?,
        &real_dir,
    )
    .map_err(|e| e.in_stage("ingest"))?;
    info!("ingest: {} nodes, {} edges", summary.nodes, summary.edges);

    let fit_path = dir.join(FIT_FILE);
    let fit = cmd_fit(&real_dir, &FitSettings::from_config(cfg), &fit_path).map_err(|e| e.in_stage("fit"))?;

    let source = match cfg.beta {
        Some(beta) => ParamSource::PowerLaw {
            beta,
            scale: cfg.scale(),
        },
        None => ParamSource::Report(fit_path),
    };
    let gen = GenerateSettings {
        source,
        epsilon: cfg.epsilon,
        seed,
        allow_large_epsilon: false,
    };
    let synth_dir = dir.join("synthetic");
    cmd_generate(&real_dir, &gen, &synth_dir).map_err(|e| e.in_stage("generate"))?;

    let metrics = MetricSettings::from_config(cfg, seed).map_err(|e| e.in_stage("stats"))?;
    let props = parse_selection(cfg.properties()).map_err(|e| CliError::from(e).in_stage("stats"))?;
    let mut selection: Vec<StatItem> = props.iter().copied().map(StatItem::Prop).collect();
    selection.extend([StatItem::Ab, StatItem::SizeCcdf, StatItem::MembershipCcdf]);
    for (name, src) in [("real", &real_dir), ("synthetic", &synth_dir)] {
        cmd_stats(src, &selection, &metrics, &dir.join("stats").join(name))
            .map_err(|e| e.in_stage("stats"))?;
    }

    let report = cmd_compare(&real_dir, &synth_dir, &props, &metrics, &dir.join("compare"))
        .map_err(|e| e.in_stage("compare"))?;

    let mut manifest = String::new();
    writeln!(manifest, "seed\t{seed}").unwrap();
    writeln!(manifest, "config_sha256\t{hash}").unwrap();
    writeln!(manifest, "agm-core\t{}", agm_core::VERSION).unwrap();
    writeln!(manifest, "agm-cli\t{}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(manifest, "fit_converged\t{}", fit.converged).unwrap();
    writeln!(manifest, "fit_iterations\t{}", fit.iterations).unwrap();
    writeln!(manifest, "stages\tingest,fit,generate,stats,compare").unwrap();
    write_file(&dir.join(MANIFEST_FILE), &manifest)?;
    write_file(&dir.join("summary.tsv"), &summary.to_string())?;

    Ok(BenchRun { dir, fit, report })
}
