//! Seeded experiments under the in-training and post-training protocols.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{cem_iteration, Agent, AgentConfig, AnyAgent, Transition};
use crate::disruptors::{Phase, Pipeline, PipelineError};
use crate::error::ConfigError;
use crate::harness::config::{ProtocolKind, RunConfig};
use crate::harness::metrics::{compute_metrics, cvar, mean_ci, MetricsError};
use crate::mdp::StepTranscript;
use crate::rng::{derive_seed, derive_stream, StreamRng};

/// Totals of one episode. Returns are undiscounted sums.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub return_true: f64,
    pub return_observed: f64,
    pub cost_true: f64,
    pub steps: usize,
    pub fired_count: u64,
    pub clamp_count: u64,
}

/// One line of `episodes.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub seed: u64,
    /// `train`, `eval`, `nominal` or `shift`.
    pub phase: String,
    pub episode: usize,
    #[serde(flatten)]
    pub stats: EpisodeStats,
}

/// A pipeline fault, with the totals accumulated before it.
#[derive(Debug, Error)]
#[error("{error} (after {} steps)", partial.steps)]
pub struct EpisodeFault {
    pub partial: EpisodeStats,
    pub error: PipelineError,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("seed {seed}, {phase} episode {episode}: {fault}")]
    Episode { seed: u64, phase: String, episode: usize, fault: Box<EpisodeFault> },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {error}")]
    Io { path: String, error: std::io::Error },
}

impl HarnessError {
    pub fn is_config(&self) -> bool {
        matches!(self, HarnessError::Config(_))
    }
}

/// Plays one episode; learners receive observed values only.
pub fn run_episode(
    pipeline: &mut Pipeline,
    agent: &mut dyn Agent,
    phase: Phase,
    learn: bool,
    env_seed: u64,
    rng: &mut StreamRng,
) -> Result<(EpisodeStats, Vec<StepTranscript>), EpisodeFault> {
    let mut transcripts = Vec::new();
    let stats = play(pipeline, agent, phase, learn, env_seed, rng, Some(&mut transcripts))?;
    Ok((stats, transcripts))
}

fn play(
    pipeline: &mut Pipeline,
    agent: &mut dyn Agent,
    phase: Phase,
    learn: bool,
    env_seed: u64,
    rng: &mut StreamRng,
    mut keep: Option<&mut Vec<StepTranscript>>,
) -> Result<EpisodeStats, EpisodeFault> {
    let mut stats = EpisodeStats::default();
    pipeline.set_phase(phase);
    pipeline.reset(env_seed);
    let fault = |stats: EpisodeStats| move |error| EpisodeFault { partial: stats, error };
    loop {
        let obs = pipeline.observe().map_err(fault(stats))?;
        let action = agent.act(&obs, phase, rng);
        let tr = pipeline.execute(action.clone()).map_err(fault(stats))?;
        stats.return_true += tr.true_reward;
        stats.return_observed += tr.observed_reward;
        stats.cost_true += tr.true_cost;
        stats.steps += 1;
        stats.fired_count += tr.fired.len() as u64;
        stats.clamp_count += tr.clamps as u64;
        if learn {
            let next = pipeline.observe().map_err(fault(stats))?;
            agent.learn(&Transition {
                state: &obs.state,
                action: &action,
                reward: tr.observed_reward,
                cost: tr.observed_cost,
                next_state: &next.state,
                terminated: tr.terminated,
                info: &tr.info,
            });
        }
        let over = tr.terminated || tr.truncated;
        if let Some(k) = keep.as_deref_mut() {
            k.push(tr);
        }
        if over {
            return Ok(stats);
        }
    }
}

/// One row of `summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    /// `None` on the aggregate row.
    pub seed: Option<u64>,
    pub episodes: usize,
    pub mean_return: f64,
    pub std_return: f64,
    pub ci95: f64,
    pub min_return: f64,
    pub cvar_return: f64,
    pub nominal_return: f64,
    pub worst_case_return: Option<f64>,
    pub average_shift_return: Option<f64>,
    pub total_cost: f64,
    pub clamp_count: u64,
    pub fired_count: u64,
}

pub const SUMMARY_COLUMNS: [&str; 13] = [
    "seed",
    "episodes",
    "mean_return",
    "std_return",
    "ci95",
    "min_return",
    "cvar_return",
    "nominal_return",
    "worst_case_return",
    "average_shift_return",
    "total_cost",
    "clamp_count",
    "fired_count",
];

impl MetricsSummary {
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        [
            self.seed.map_or_else(|| "all".to_string(), |s| s.to_string()),
            self.episodes.to_string(),
            self.mean_return.to_string(),
            self.std_return.to_string(),
            self.ci95.to_string(),
            self.min_return.to_string(),
            self.cvar_return.to_string(),
            self.nominal_return.to_string(),
            opt(self.worst_case_return),
            opt(self.average_shift_return),
            self.total_cost.to_string(),
            self.clamp_count.to_string(),
            self.fired_count.to_string(),
        ]
        .join(",")
    }

    /// Looks up a numeric column by name.
    pub fn metric(&self, name: &str) -> Option<f64> {
        Some(match name {
            "episodes" => self.episodes as f64,
            "mean_return" => self.mean_return,
            "std_return" => self.std_return,
            "ci95" => self.ci95,
            "min_return" => self.min_return,
            "cvar_return" => self.cvar_return,
            "nominal_return" => self.nominal_return,
            "worst_case_return" => self.worst_case_return?,
            "average_shift_return" => self.average_shift_return?,
            "total_cost" => self.total_cost,
            "clamp_count" => self.clamp_count as f64,
            "fired_count" => self.fired_count as f64,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub records: Vec<EpisodeRecord>,
    pub eval_returns: Vec<f64>,
    pub summary: MetricsSummary,
    /// Text snapshot of the trained agent.
    pub policy: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: RunConfig,
    pub seeds: Vec<SeedOutcome>,
    pub aggregate: MetricsSummary,
}

impl ExperimentResult {
    /// Across-seed mean, std and 95% half-width of a per-seed metric.
    pub fn seed_stat(&self, metric: &str) -> Option<(f64, f64, f64)> {
        let xs: Option<Vec<f64>> = self.seeds.iter().map(|s| s.summary.metric(metric)).collect();
        xs.filter(|v| !v.is_empty()).map(|v| mean_ci(&v))
    }
}

struct SeedRun<'a> {
    cfg: &'a RunConfig,
    seed: u64,
    pipeline: Pipeline,
    records: Vec<EpisodeRecord>,
    rng: StreamRng,
}

impl SeedRun<'_> {
    fn env_seed(&self, label: &str, episode: usize) -> u64 {
        derive_seed(self.seed, label, episode as u64)
    }

    fn episode(
        &mut self,
        agent: &mut dyn Agent,
        phase_name: &str,
        phase: Phase,
        learn: bool,
        episode: usize,
        env_seed: u64,
    ) -> Result<EpisodeStats, HarnessError> {
        let stats = play(&mut self.pipeline, agent, phase, learn, env_seed, &mut self.rng, None).map_err(|fault| {
            HarnessError::Episode { seed: self.seed, phase: phase_name.into(), episode, fault: Box::new(fault) }
        })?;
        self.records.push(EpisodeRecord { seed: self.seed, phase: phase_name.into(), episode, stats });
        Ok(stats)
    }

    fn train(&mut self, agent: &mut AnyAgent) -> Result<(), HarnessError> {
        let n = self.cfg.protocol.train_episodes;
        if let (AnyAgent::Cem(policy), AgentConfig::Cem { episodes_per_candidate, .. }) = (&mut *agent, &self.cfg.agent) {
            let per_candidate = *episodes_per_candidate;
            let iterations = n.div_ceil(policy.population * per_candidate);
            let mut outer = derive_stream(self.seed, "agent/cem", 0);
            let mut e = 0;
            for _ in 0..iterations {
                cem_iteration(policy, &mut outer, |candidate| {
                    let mut total = 0.0;
                    for _ in 0..per_candidate {
                        let env_seed = self.env_seed("env/train", e);
                        total += self.episode(candidate, "train", Phase::Train, false, e, env_seed)?.return_true;
                        e += 1;
                    }
                    Ok::<_, HarnessError>(total / per_candidate as f64)
                })?;
            }
            return Ok(());
        }
        for e in 0..n {
            agent.begin_episode(e, n);
            let env_seed = self.env_seed("env/train", e);
            self.episode(agent, "train", Phase::Train, true, e, env_seed)?;
        }
        Ok(())
    }

    fn evaluate(&mut self, agent: &mut AnyAgent, phase_name: &str) -> Result<Vec<EpisodeStats>, HarnessError> {
        (0..self.cfg.protocol.eval_episodes)
            .map(|e| {
                let env_seed = self.env_seed("env/eval", e);
                self.episode(agent, phase_name, Phase::Eval, false, e, env_seed)
            })
            .collect()
    }

    fn restore_nominal(&mut self) {
        self.pipeline.env_mut().params_mut().reset_to_nominal();
    }
}

/// Runs every phase of one seed: train, disrupted evaluation, nominal
/// evaluation and the optional parameter grid.
pub fn run_seed(cfg: &RunConfig, seed: u64) -> Result<SeedOutcome, HarnessError> {
    let env = cfg.build_env()?;
    let mut agent = cfg.agent.build(env.as_ref())?;
    let pipeline =
        Pipeline::new(env, cfg.disruptors.clone(), derive_seed(seed, "disruptors", 0)).map_err(|e| match e {
            PipelineError::Config(c) => HarnessError::Config(c),
            other => HarnessError::Episode {
                seed,
                phase: "setup".into(),
                episode: 0,
                fault: Box::new(EpisodeFault { partial: EpisodeStats::default(), error: other }),
            },
        })?;
    let mut run = SeedRun { cfg, seed, pipeline, records: Vec::new(), rng: derive_stream(seed, "agent", 0) };
    run.restore_nominal();

    run.pipeline.set_suppressed(cfg.protocol.kind == ProtocolKind::PostTraining);
    run.train(&mut agent)?;
    let train_episodes = cfg.protocol.train_episodes;
    agent.begin_episode(train_episodes, train_episodes);

    run.pipeline.set_suppressed(false);
    let eval = run.evaluate(&mut agent, "eval")?;
    let returns: Vec<f64> = eval.iter().map(|s| s.return_true).collect();
    let stats = compute_metrics(&returns, cfg.harness.cvar_alpha)?;

    run.pipeline.set_suppressed(true);
    run.restore_nominal();
    let nominal = run.evaluate(&mut agent, "nominal")?;
    let nominal_return = nominal.iter().map(|s| s.return_true).sum::<f64>() / nominal.len() as f64;

    let mut shift_means = Vec::new();
    for point in cfg.grid_points() {
        run.restore_nominal();
        run.pipeline.env_mut().set_params(&point).map_err(|e| ConfigError::new("harness.eval_param_grid", e.to_string()))?;
        let shifted = run.evaluate(&mut agent, "shift")?;
        shift_means.push(shifted.iter().map(|s| s.return_true).sum::<f64>() / shifted.len() as f64);
    }
    run.restore_nominal();
    let (worst_case_return, average_shift_return) = if shift_means.is_empty() {
        (None, None)
    } else {
        let worst = shift_means.iter().copied().fold(f64::INFINITY, f64::min);
        (Some(worst), Some(shift_means.iter().sum::<f64>() / shift_means.len() as f64))
    };

    let disrupted = run.records.iter().filter(|r| r.phase == "train" || r.phase == "eval");
    let (fired_count, clamp_count) =
        disrupted.fold((0, 0), |(f, c), r| (f + r.stats.fired_count, c + r.stats.clamp_count));
    let summary = MetricsSummary {
        seed: Some(seed),
        episodes: returns.len(),
        mean_return: stats.mean,
        std_return: stats.std,
        ci95: stats.ci95,
        min_return: stats.min,
        cvar_return: stats.cvar,
        nominal_return,
        worst_case_return,
        average_shift_return,
        total_cost: eval.iter().map(|s| s.cost_true).sum(),
        clamp_count,
        fired_count,
    };
    Ok(SeedOutcome { seed, records: run.records, eval_returns: returns, summary, policy: agent.to_snapshot() })
}

/// Aggregate row: mean of seed means with its across-seed spread, pooled
/// min and CVaR, averaged nominal and shift metrics, summed costs and counts.
pub fn aggregate(seeds: &[SeedOutcome], alpha: f64) -> Result<MetricsSummary, MetricsError> {
    if seeds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let means: Vec<f64> = seeds.iter().map(|s| s.summary.mean_return).collect();
    let (mean, std, ci95) = mean_ci(&means);
    let pooled: Vec<f64> = seeds.iter().flat_map(|s| s.eval_returns.iter().copied()).collect();
    let avg = |f: &dyn Fn(&MetricsSummary) -> f64| seeds.iter().map(|s| f(&s.summary)).sum::<f64>() / seeds.len() as f64;
    let avg_opt = |f: &dyn Fn(&MetricsSummary) -> Option<f64>| -> Option<f64> {
        let xs: Option<Vec<f64>> = seeds.iter().map(|s| f(&s.summary)).collect();
        xs.map(|v| v.iter().sum::<f64>() / v.len() as f64)
    };
    Ok(MetricsSummary {
        seed: None,
        episodes: pooled.len(),
        mean_return: mean,
        std_return: std,
        ci95,
        min_return: pooled.iter().copied().fold(f64::INFINITY, f64::min),
        cvar_return: cvar(&pooled, alpha)?,
        nominal_return: avg(&|s| s.nominal_return),
        worst_case_return: avg_opt(&|s| s.worst_case_return),
        average_shift_return: avg_opt(&|s| s.average_shift_return),
        total_cost: seeds.iter().map(|s| s.summary.total_cost).sum(),
        clamp_count: seeds.iter().map(|s| s.summary.clamp_count).sum(),
        fired_count: seeds.iter().map(|s| s.summary.fired_count).sum(),
    })
}

fn map_seeds(cfg: &RunConfig) -> Vec<Result<SeedOutcome, HarnessError>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.harness.workers.unwrap_or(0)).build();
        if let Ok(pool) = pool {
            return pool.install(|| cfg.harness.seeds.par_iter().map(|s| run_seed(cfg, *s)).collect());
        }
    }
    cfg.harness.seeds.iter().map(|s| run_seed(cfg, *s)).collect()
}

/// Runs every seed (in parallel when enabled) and aggregates in seed order.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let seeds = map_seeds(cfg).into_iter().collect::<Result<Vec<_>, _>>()?;
    let aggregate = aggregate(&seeds, cfg.harness.cvar_alpha)?;
    Ok(ExperimentResult { config: cfg.clone(), seeds, aggregate })
}

/// Per-phase episode counts, handy for sanity checks.
pub fn phase_counts(result: &ExperimentResult) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for r in result.seeds.iter().flat_map(|s| &s.records) {
        *out.entry(r.phase.clone()).or_insert(0) += 1;
    }
    out
}
