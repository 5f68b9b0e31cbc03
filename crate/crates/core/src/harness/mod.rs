//! Experiment harness: configuration, episode loop, robust metrics,
//! brute-force oracles and result files.

pub mod artifacts;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod oracle;

pub use artifacts::{read_episodes, read_summary, write_artifacts};
pub use config::{set_dotted, HarnessConfig, ProtocolConfig, ProtocolKind, RunConfig};
pub use experiment::{
    aggregate, run_episode, run_experiment, run_seed, EpisodeRecord, EpisodeStats, ExperimentResult, HarnessError,
    MetricsSummary, SeedOutcome,
};
pub use metrics::{compute_metrics, cvar, mean_ci, MetricsError, ReturnStats};
pub use oracle::{maze_mdp, perturbed_kernel, value_iteration, ExplicitMdp, OracleError, ValueTable};
