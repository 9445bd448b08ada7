use std::path::PathBuf;

use agm_core::compare::parse_selection;
use clap::{Args, Parser, Subcommand};

use crate::commands::{self, FitSettings, GenerateSettings, MetricSettings, ParamSource};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "agm", version, about = "Affiliation graph model toolkit")]
pub struct Cli {
    /// Worker thread cap for parallel stages.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean an edge list and community file into a dataset directory.
    Ingest {
        edges: PathBuf,
        communities: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// auto, per_line or node_pairs.
        #[arg(long)]
        community_format: Option<String>,
    },
    /// Fit community edge probabilities by maximum likelihood.
    Fit {
        dataset: PathBuf,
        /// Report file to write.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        fit: FitFlags,
    },
    /// Sample a graph from an affiliation network.
    Generate {
        /// Dataset directory or community file.
        affiliations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fit report to take probabilities from.
        #[arg(long, conflicts_with_all = ["beta", "scale"], required_unless_present = "beta")]
        params: Option<PathBuf>,
        #[command(flatten)]
        gen: GenFlags,
        #[arg(long)]
        seed: Option<u64>,
        /// Allow background sampling on large graphs.
        #[arg(long)]
        allow_large_epsilon: bool,
    },
    /// Write one curve file per structural property.
    Stats {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        metrics: MetricFlags,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// KS comparison of two datasets over the selected properties.
    Compare {
        real: PathBuf,
        synthetic: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        metrics: MetricFlags,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the whole pipeline from a config file; flags override its values.
    Bench {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        edges: Option<PathBuf>,
        #[arg(long)]
        communities: Option<PathBuf>,
        #[command(flatten)]
        fit: FitFlags,
        #[command(flatten)]
        gen: GenFlags,
        #[command(flatten)]
        metrics: MetricFlags,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct FitFlags {
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Also fit a background probability for pairs sharing no community.
    #[arg(long)]
    pub fit_epsilon: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GenFlags {
    /// Power-law exponent: p_c = min(1, scale * n_c^-beta).
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, requires = "beta")]
    pub scale: Option<f64>,
    /// Background probability.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MetricFlags {
    /// Logarithmic bin factor.
    #[arg(long)]
    pub bins: Option<f64>,
    #[arg(long)]
    pub min_bin_samples: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Largest number of overlapping community pairs examined.
    #[arg(long)]
    pub pair_sample: Option<usize>,
    /// Comma-separated property labels, or `all`.
    #[arg(long)]
    pub properties: Option<String>,
}

impl FitFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.tol = self.tol;
        cfg.max_iter = self.max_iter;
        cfg.fit_epsilon = self.fit_epsilon.then_some(true);
    }
}

impl GenFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.beta = self.beta;
        cfg.scale = self.scale;
        cfg.epsilon = self.epsilon;
    }
}

impl MetricFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.bins = self.bins;
        cfg.min_bin_samples = self.min_bin_samples;
        cfg.k_max = self.k_max;
        cfg.pair_sample = self.pair_sample;
        cfg.properties = self.properties.clone();
    }
}

fn checked(cfg: RunConfig) -> CliResult<RunConfig> {
    cfg.validate(&[])?;
    Ok(cfg)
}

/// Execute a parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    commands::with_threads(cli.threads, || dispatch(cli.command))?
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Ingest {
            edges,
            communities,
            out,
            community_format,
        } => {
            let cfg = checked(RunConfig {
                community_format,
                ..Default::default()
            })?;
            let summary = commands::cmd_ingest(&edges, &communities, cfg.format()?, &out)?;
            print!("{summary}");
        }
        Command::Fit { dataset, out, fit } => {
            let mut cfg = RunConfig::default();
            fit.apply(&mut cfg);
            let cfg = checked(cfg)?;
            let result = commands::cmd_fit(&dataset, &FitSettings::from_config(&cfg), &out)?;
            println!("log_likelihood\t{}", result.log_likelihood);
            println!("iterations\t{}", result.iterations);
            println!("converged\t{}", result.converged);
            println!("report\t{}", out.display());
            if !result.converged {
                return Err(CliError::NotConverged {
                    iterations: result.iterations,
                    grad_norm: result.grad_norm,
                });
            }
        }
        Command::Generate {
            affiliations,
            out,
            params,
            gen,
            seed,
            allow_large_epsilon,
        } => {
            let mut cfg = RunConfig::default();
            gen.apply(&mut cfg);
            let cfg = checked(cfg)?;
            let source = match (params, cfg.beta) {
                (Some(p), _) => ParamSource::Report(p),
                (None, Some(beta)) => ParamSource::PowerLaw {
                    beta,
                    scale: cfg.scale(),
                },
                (None, None) => return Err(CliError::usage("pass --params or --beta")),
            };
            let settings = GenerateSettings {
                source,
                epsilon: cfg.epsilon,
                seed: commands::resolve_seed(seed),
                allow_large_epsilon,
            };
            let summary = commands::cmd_generate(&affiliations, &settings, &out)?;
            print!("{summary}");
        }
        Command::Stats {
            dataset,
            out,
            metrics,
            seed,
        } => {
            let mut cfg = RunConfig::default();
            metrics.apply(&mut cfg);
            let cfg = checked(cfg)?;
            let selection = commands::parse_stat_selection(cfg.properties())?;
            let settings = MetricSettings::from_config(&cfg, commands::resolve_seed(seed))?;
            let index = commands::cmd_stats(&dataset, &selection, &settings, &out)?;
            print!("{}", index.to_text());
        }
        Command::Compare {
            real,
            synthetic,
            out,
            metrics,
            seed,
        } => {
            let mut cfg = RunConfig::default();
            metrics.apply(&mut cfg);
            let cfg = checked(cfg)?;
            let props = parse_selection(cfg.properties())?;
            let settings = MetricSettings::from_config(&cfg, commands::resolve_seed(seed))?;
            let report = commands::cmd_compare(&real, &synthetic, &props, &settings, &out)?;
            print!("{}", report.to_table());
        }
        Command::Bench {
            config,
            seed,
            out,
            edges,
            communities,
            fit,
            gen,
            metrics,
        } => {
            let mut overrides = RunConfig {
                seed,
                out,
                edges,
                communities,
                ..Default::default()
            };
            fit.apply(&mut overrides);
            gen.apply(&mut overrides);
            metrics.apply(&mut overrides);
            let run = commands::cmd_bench(&config, &overrides)?;
            println!("run\t{}", run.dir.display());
            println!("fit_converged\t{}", run.fit.converged);
        }
    }
    Ok(())
}
