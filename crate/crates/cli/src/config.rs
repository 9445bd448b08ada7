//! Flat `key = value` run configuration with `#` comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use agm_core::compare::parse_selection;
use agm_core::io::CommunityFormat;

use crate::error::{CliError, CliResult};

/// Every recognised key, in manifest order.
pub const KEYS: [&str; 17] = [
    "seed",
    "edges",
    "communities",
    "community_format",
    "out",
    "threads",
    "tol",
    "max_iter",
    "fit_epsilon",
    "beta",
    "scale",
    "epsilon",
    "bins",
    "min_bin_samples",
    "k_max",
    "pair_sample",
    "properties",
];

/// Keys a pipeline run cannot do without.
pub const REQUIRED: [&str; 4] = ["seed", "edges", "communities", "out"];

/// All settings of a run. `None` means "not given"; defaults are applied by
/// the accessors so that flag overrides can be merged first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub edges: Option<PathBuf>,
    pub communities: Option<PathBuf>,
    pub community_format: Option<String>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub fit_epsilon: Option<bool>,
    pub beta: Option<f64>,
    pub scale: Option<f64>,
    pub epsilon: Option<f64>,
    pub bins: Option<f64>,
    pub min_bin_samples: Option<usize>,
    pub k_max: Option<usize>,
    pub pair_sample: Option<usize>,
    pub properties: Option<String>,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("config line {line}: invalid value {value:?} for key {key}")))
}

fn parse_bool(key: &str, value: &str, line: usize) -> CliResult<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::usage(format!(
            "config line {line}: invalid boolean {value:?} for key {key}"
        ))),
    }
}

impl RunConfig {
    /// Parse config text. Keys may use `-` or `_`; unknown and repeated keys
    /// are rejected.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {line}: expected key = value")))?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::usage(format!("config line {line}: unknown key {key:?}")));
            }
            if let Some(prev) = seen.insert(key.clone(), line) {
                return Err(CliError::usage(format!(
                    "config line {line}: key {key} already set on line {prev}"
                )));
            }
            cfg.set(&key, value, line)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str, line: usize) -> CliResult<()> {
        match key {
            "seed" => self.seed = Some(parse_value(key, v, line)?),
            "edges" => self.edges = Some(PathBuf::from(v)),
            "communities" => self.communities = Some(PathBuf::from(v)),
            "community_format" => self.community_format = Some(v.to_string()),
            "out" => self.out = Some(PathBuf::from(v)),
            "threads" => self.threads = Some(parse_value(key, v, line)?),
            "tol" => self.tol = Some(parse_value(key, v, line)?),
            "max_iter" => self.max_iter = Some(parse_value(key, v, line)?),
            "fit_epsilon" => self.fit_epsilon = Some(parse_bool(key, v, line)?),
            "beta" => self.beta = Some(parse_value(key, v, line)?),
            "scale" => self.scale = Some(parse_value(key, v, line)?),
            "epsilon" => self.epsilon = Some(parse_value(key, v, line)?),
            "bins" => self.bins = Some(parse_value(key, v, line)?),
            "min_bin_samples" => self.min_bin_samples = Some(parse_value(key, v, line)?),
            "k_max" => self.k_max = Some(parse_value(key, v, line)?),
            "pair_sample" => self.pair_sample = Some(parse_value(key, v, line)?),
            "properties" => self.properties = Some(v.to_string()),
            _ => unreachable!("key list and setter disagree on {key}"),
        }
        Ok(())
    }

    /// Values set in `other` replace those in `self`.
    pub fn merge(&mut self, other: &RunConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f.clone(); } )* };
        }
        take!(
            seed, edges, communities, community_format, out, threads, tol, max_iter, fit_epsilon,
            beta, scale, epsilon, bins, min_bin_samples, k_max, pair_sample, properties
        );
    }

    /// Check presence of required keys and the ranges of every numeric option.
    pub fn validate(&self, required: &[&str]) -> CliResult<()> {
        for &key in required {
            if !self.has(key) {
                return Err(CliError::usage(format!("missing required config key {key:?}")));
            }
        }
        let bad = |key: &str, why: &str| Err(CliError::usage(format!("config key {key}: {why}")));
        if self.threads == Some(0) {
            return bad("threads", "must be at least 1");
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return bad("tol", "must be positive");
            }
        }
        if self.max_iter == Some(0) {
            return bad("max_iter", "must be at least 1");
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b < 1.0) {
                return bad("beta", "must lie in (0, 1)");
            }
        }
        if let Some(s) = self.scale {
            if !(s > 0.0 && s.is_finite()) {
                return bad("scale", "must be positive");
            }
        }
        if let Some(e) = self.epsilon {
            if !(0.0..1.0).contains(&e) {
                return bad("epsilon", "must lie in [0, 1)");
            }
        }
        if let Some(f) = self.bins {
            if !(f > 1.0 && f.is_finite()) {
                return bad("bins", "bin factor must exceed 1");
            }
        }
        if self.k_max == Some(0) {
            return bad("k_max", "must be at least 1");
        }
        if self.pair_sample == Some(0) {
            return bad("pair_sample", "must be at least 1");
        }
        if let Some(p) = &self.properties {
            parse_selection(p).map_err(|e| CliError::usage(format!("config key properties: {e}")))?;
        }
        self.format()?;
        Ok(())
    }

    fn has(&self, key: &str) -> bool {
        match key {
            "seed" => self.seed.is_some(),
            "edges" => self.edges.is_some(),
            "communities" => self.communities.is_some(),
            "community_format" => self.community_format.is_some(),
            "out" => self.out.is_some(),
            "threads" => self.threads.is_some(),
            "tol" => self.tol.is_some(),
            "max_iter" => self.max_iter.is_some(),
            "fit_epsilon" => self.fit_epsilon.is_some(),
            "beta" => self.beta.is_some(),
            "scale" => self.scale.is_some(),
            "epsilon" => self.epsilon.is_some(),
            "bins" => self.bins.is_some(),
            "min_bin_samples" => self.min_bin_samples.is_some(),
            "k_max" => self.k_max.is_some(),
            "pair_sample" => self.pair_sample.is_some(),
            "properties" => self.properties.is_some(),
            _ => false,
        }
    }

    pub fn format(&self) -> CliResult<CommunityFormat> {
        match self.community_format.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("auto") => Ok(CommunityFormat::Auto),
            Some("per_line") | Some("per-line") => Ok(CommunityFormat::PerLine),
            Some("node_pairs") | Some("node-pairs") => Ok(CommunityFormat::NodePairs),
            Some(other) => Err(CliError::usage(format!(
                "config key community_format: unknown format {other:?} (auto, per_line, node_pairs)"
            ))),
        }
    }

    /// The resolved settings as `key = value` lines, defaults included, so
    /// that the text can be fed back to reproduce the run.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                writeln!(out, "{k} = {v}").unwrap();
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        line("seed", self.seed.map(|s| s.to_string()));
        line("edges", path(&self.edges));
        line("communities", path(&self.communities));
        line("community_format", self.community_format.clone());
        line("out", path(&self.out));
        line("threads", self.threads.map(|t| t.to_string()));
        line("tol", Some(self.tol().to_string()));
        line("max_iter", Some(self.max_iter().to_string()));
        line("fit_epsilon", Some(self.fit_epsilon().to_string()));
        line("beta", self.beta.map(|b| b.to_string()));
        line("scale", self.beta.map(|_| self.scale().to_string()));
        line("epsilon", self.epsilon.map(|e| e.to_string()));
        line("bins", Some(self.bins().to_string()));
        line("min_bin_samples", Some(self.min_bin_samples().to_string()));
        line("k_max", Some(self.k_max().to_string()));
        line("pair_sample", Some(self.pair_sample().to_string()));
        line("properties", Some(self.properties().to_string()));
        out
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-6)
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter.unwrap_or(1000)
    }

    pub fn fit_epsilon(&self) -> bool {
        self.fit_epsilon.unwrap_or(false)
    }

    pub fn scale(&self) -> f64 {
        self.scale.unwrap_or(1.0)
    }

    pub fn bins(&self) -> f64 {
        self.bins.unwrap_or(2.0)
    }

    pub fn min_bin_samples(&self) -> usize {
        self.min_bin_samples.unwrap_or(5)
    }

    pub fn k_max(&self) -> usize {
        self.k_max.unwrap_or(20)
    }

    pub fn pair_sample(&self) -> usize {
        self.pair_sample.unwrap_or(1000)
    }

    pub fn properties(&self) -> &str {
        self.properties.as_deref().unwrap_or("all")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let cfg = RunConfig::parse(
            "# run\nseed = 7\nedges = e.txt # trailing\nmax-iter = 50\nfit_epsilon = yes\n\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.edges, Some(PathBuf::from("e.txt")));
        assert_eq!(cfg.max_iter, Some(50));
        assert_eq!(cfg.fit_epsilon, Some(true));
    }

    #[test]
    fn rejects_unknown_repeated_and_malformed() {
        assert!(RunConfig::parse("colour = red").unwrap_err().to_string().contains("colour"));
        assert!(RunConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(RunConfig::parse("seed 1").is_err());
        assert!(RunConfig::parse("seed = x").is_err());
    }

    #[test]
    fn missing_required_key_is_named() {
        let cfg = RunConfig::parse("seed = 1\nedges = e\nout = o").unwrap();
        let err = cfg.validate(&REQUIRED).unwrap_err().to_string();
        assert!(err.contains("communities"), "{err}");
    }

    #[test]
    fn range_checks() {
        for text in ["beta = 1.5", "tol = 0", "bins = 1", "epsilon = 1", "k_max = 0", "properties = foo"] {
            let cfg = RunConfig::parse(text).unwrap();
            assert!(cfg.validate(&[]).is_err(), "{text}");
        }
    }

    #[test]
    fn merge_and_round_trip() {
        let mut a = RunConfig::parse("seed = 1\ntol = 1e-5").unwrap();
        let b = RunConfig {
            seed: Some(9),
            ..Default::default()
        };
        a.merge(&b);
        assert_eq!(a.seed, Some(9));
        assert_eq!(a.tol, Some(1e-5));
        let again = RunConfig::parse(&a.to_text()).unwrap();
        assert_eq!(again.seed, Some(9));
        assert_eq!(again.tol(), 1e-5);
    }
}
