//! Community-affiliation graph model (AGM) toolkit.
//!
//! Graphs are generated from a bipartite node/community affiliation network
//! where every community links each pair of its members independently with its
//! own probability. The crate also fits those probabilities to an observed
//! graph by convex maximum likelihood, and measures the community-level and
//! network-level statistics used to compare real and synthetic networks.

pub mod compare;
pub mod error;
pub mod fit;
pub mod generator;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod network;

pub use compare::{
    compare_suite, ks_statistic, relative_improvement, AxisScale, ComparisonReport, CompareOptions,
    Property, RelativeImprovement,
};
pub use error::{Error, Result};
pub use fit::{FitConfig, FitProblem, FitResult};
pub use generator::{assign_probs_power_law, edge_probability, generate, AgmParams, GenerateOptions};
pub use graph::{AffiliationNetwork, CommunityId, CommunityView, Graph, NodeId};
pub use io::{Dataset, DatasetSummary, IdMap};
pub use metrics::{Curve, CurveKind, LogBins, OverlapTriple};
pub use network::SpectralSummary;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
