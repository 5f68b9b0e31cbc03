//! The disrupted interaction loop around one base environment.
//!
//! Order within step `t`:
//! 1. environment-parameter disruptors that fire update the parameter set;
//! 2. state disruptors turn `s_t` into the observed state;
//! 3. the agent sees (observed state, observed reward and cost of `t - 1`)
//!    and picks `a_t`;
//! 4. action disruptors turn `a_t` into the executed action;
//! 5. the environment steps on the executed action;
//! 6. reward and cost disruptors produce the observed reward and cost of
//!    step `t`, handed to the agent at `t + 1`.
//!
//! Disruptors sharing a source apply in declaration order. Each disruptor
//! owns two streams (firing and perturbation) derived from the pipeline seed
//! and its id, independent of the environment's stream.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::adversary::{clamp_to_region, Adversary, AdversaryContext, AdversaryError, AdversaryRequest, DEFAULT_TASK};
use crate::disruptors::params::eval_param_schedule;
use crate::disruptors::schedule::{schedule_fires, Counters, Phase};
use crate::disruptors::spec::{DisruptorSpec, Mode, Source};
use crate::error::ConfigError;
use crate::mdp::{EnvError, Environment, Space, StepTranscript, Value};
use crate::rng::{derive_stream, StreamRng};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("environment fault: {0}")]
    Env(#[from] EnvError),
    #[error("adversary of disruptor `{id}` failed: {error}")]
    Adversary { id: String, error: AdversaryError },
    #[error("pipeline used before reset")]
    NotReset,
}

/// What the agent sees at step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub t: usize,
    pub state: Value,
    /// Observed reward of the previous step (0 at `t = 0`).
    pub reward: f64,
    /// Observed cost of the previous step (0 at `t = 0`).
    pub cost: f64,
}

struct Active {
    spec: DisruptorSpec,
    schedule_rng: StreamRng,
    noise_rng: StreamRng,
    adversary: Option<Box<dyn Adversary>>,
    region: Option<(Vec<f64>, Vec<f64>)>,
}

struct Staged {
    obs: Observation,
    true_state: Value,
    fired: BTreeSet<String>,
    clamps: usize,
    env_params: BTreeMap<String, f64>,
}

pub struct Pipeline {
    env: Box<dyn Environment>,
    active: Vec<Active>,
    phase: Phase,
    suppressed: bool,
    episode: Option<u64>,
    step: u64,
    global_step: u64,
    staged: Option<Staged>,
    obs_reward: f64,
    obs_cost: f64,
    true_rewards: (f64, f64),
    done: bool,
}

fn fires(a: &mut Active, counters: Counters, phase: Phase, suppressed: bool) -> bool {
    !suppressed && schedule_fires(&a.spec.schedule, counters, phase, &mut a.schedule_rng)
}

/// Perturbs a state or action value. Returns the new value and the number of clamps.
fn disrupt_value(
    a: &mut Active,
    value: &Value,
    space: &Space,
    env: &dyn Environment,
    rewards: (f64, f64),
    clip_to_space: bool,
) -> Result<(Value, usize), PipelineError> {
    let mask = a.spec.agent_mask.as_ref();
    let (value, mut clamps) = match a.spec.mode() {
        Mode::Random(noise) => (noise.perturb(value, space, mask, &mut a.noise_rng), 0),
        Mode::Adversarial(spec) => {
            let (low, high) = a.region.clone().expect("region resolved at construction");
            let req = AdversaryRequest {
                task_description: spec.task.clone().unwrap_or_else(|| DEFAULT_TASK.into()),
                value: value.to_reals(),
                region_low: low,
                region_high: high,
                current_reward: rewards.0,
                previous_reward: rewards.1,
            };
            let adversary = a.adversary.as_mut().expect("built at construction");
            let ctx = AdversaryContext { env, space, rng: &mut a.noise_rng };
            let reply = adversary
                .perturb(&req, ctx)
                .map_err(|error| PipelineError::Adversary { id: a.spec.id.clone(), error })?;
            let (mut reals, violations) = clamp_to_region(&reply, &req);
            if let Some(m) = mask {
                for (i, x) in reals.iter_mut().enumerate() {
                    if !m.contains(&i) {
                        *x = req.value[i];
                    }
                }
            }
            match space {
                Space::Box { .. } => (Value::Vector(reals), violations),
                _ => {
                    let (v, clamped) = space.from_reals(&reals);
                    (v, violations + usize::from(clamped))
                }
            }
        }
        Mode::InternalShift(_) | Mode::External(_) => unreachable!("env disruptors never touch values"),
    };
    if clip_to_space {
        let (clipped, c) = space.clip(&value);
        clamps += usize::from(c);
        return Ok((clipped, clamps));
    }
    Ok((value, clamps))
}

fn disrupt_scalar(a: &mut Active, x: f64, env: &dyn Environment, rewards: (f64, f64)) -> Result<(f64, usize), PipelineError> {
    let space = Space::Box { low: vec![f64::NEG_INFINITY], high: vec![f64::INFINITY] };
    match a.spec.mode() {
        Mode::Random(noise) => Ok((noise.perturb_scalar(x, &mut a.noise_rng), 0)),
        _ => {
            let (v, c) = disrupt_value(a, &Value::Vector(vec![x]), &space, env, rewards, false)?;
            Ok((v.as_vector().expect("scalar")[0], c))
        }
    }
}

/// Checks disruptor specs against an environment without building anything.
/// Returns the resolved adversary region of each spec.
#[allow(clippy::type_complexity)]
pub fn validate_specs(env: &dyn Environment, specs: &[DisruptorSpec]) -> Result<Vec<Option<(Vec<f64>, Vec<f64>)>>, ConfigError> {
    let state_space = env.state_space();
    let action_space = env.action_space();
    let mut ids = BTreeSet::new();
    let mut shifted: BTreeMap<String, usize> = BTreeMap::new();
    let mut regions = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let key = format!("disruptor[{i}]");
        spec.validate(&key)?;
        if !ids.insert(spec.id.clone()) {
            return Err(ConfigError::new(format!("{key}.id"), format!("duplicate id `{}`", spec.id)));
        }
        let space = match spec.source {
            Source::State => Some(&state_space),
            Source::Action => Some(&action_space),
            _ => None,
        };
        if let Some(mask) = &spec.agent_mask {
            if env.num_agents() < 2 {
                return Err(ConfigError::new(format!("{key}.agent_mask"), "environment has a single agent"));
            }
            if let Some(bad) = mask.iter().find(|m| **m >= env.num_agents()) {
                return Err(ConfigError::new(format!("{key}.agent_mask"), format!("no agent {bad}")));
            }
        }
        let mut region = None;
        match spec.mode() {
            Mode::Random(noise) => noise.check_space(space, &format!("{key}.noise"))?,
            Mode::Adversarial(adv) => {
                let dim = space.map_or(1, Space::dim);
                region = Some(adv.region(dim).ok_or_else(|| {
                    ConfigError::new(
                        format!("{key}.adversary.region_low"),
                        format!("region has {} elements, expected 1 or {dim}", adv.region_low.len()),
                    )
                })?);
            }
            Mode::InternalShift(ps) | Mode::External(ps) => {
                for name in ps.names() {
                    if !env.params().contains(name) {
                        return Err(ConfigError::new(
                            format!("{key}.params.{name}"),
                            format!("`{}` has no parameter `{name}`", env.id()),
                        ));
                    }
                    if let Some(other) = shifted.insert(name.to_string(), i) {
                        return Err(ConfigError::new(
                            format!("{key}.params.{name}"),
                            format!("already driven by disruptor[{other}]"),
                        ));
                    }
                }
            }
        }
        regions.push(region);
    }
    Ok(regions)
}

impl Pipeline {
    /// Validates `specs` against `env` and builds their streams and adversaries.
    pub fn new(env: Box<dyn Environment>, specs: Vec<DisruptorSpec>, seed: u64) -> Result<Self, PipelineError> {
        let regions = validate_specs(env.as_ref(), &specs)?;
        let mut active = Vec::with_capacity(specs.len());
        for (spec, region) in specs.into_iter().zip(regions) {
            let adversary = match spec.mode() {
                Mode::Adversarial(adv) => {
                    Some(adv.build().map_err(|error| PipelineError::Adversary { id: spec.id.clone(), error })?)
                }
                _ => None,
            };
            active.push(Active {
                schedule_rng: derive_stream(seed, &format!("schedule/{}", spec.id), 0),
                noise_rng: derive_stream(seed, &format!("noise/{}", spec.id), 0),
                spec,
                adversary,
                region,
            });
        }
        Ok(Self {
            env,
            active,
            phase: Phase::Train,
            suppressed: false,
            episode: None,
            step: 0,
            global_step: 0,
            staged: None,
            obs_reward: 0.0,
            obs_cost: 0.0,
            true_rewards: (0.0, 0.0),
            done: false,
        })
    }

    /// Pipeline with no disruptors.
    pub fn bare(env: Box<dyn Environment>) -> Self {
        Self::new(env, Vec::new(), 0).expect("no disruptors to validate")
    }

    pub fn env(&self) -> &dyn Environment {
        self.env.as_ref()
    }

    pub fn env_mut(&mut self) -> &mut dyn Environment {
        self.env.as_mut()
    }

    pub fn specs(&self) -> impl Iterator<Item = &DisruptorSpec> {
        self.active.iter().map(|a| &a.spec)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    /// While suppressed no disruptor fires or draws randomness.
    pub fn set_suppressed(&mut self, suppressed: bool) {
        self.suppressed = suppressed;
    }

    /// Index of the current episode within the run.
    pub fn episode(&self) -> Option<u64> {
        self.episode
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    fn counters(&self) -> Counters {
        Counters { global_step: self.global_step, episode: self.episode.unwrap_or(0), step_in_episode: self.step }
    }

    /// Starts the next episode; the environment is reset with `env_seed`.
    pub fn reset(&mut self, env_seed: u64) {
        self.episode = Some(self.episode.map_or(0, |e| e + 1));
        self.step = 0;
        self.staged = None;
        self.obs_reward = 0.0;
        self.obs_cost = 0.0;
        self.true_rewards = (0.0, 0.0);
        self.done = false;
        self.env.reset(env_seed);
    }

    /// Runs stages 1 and 2 for the current step (once) and returns the
    /// observation. After the episode ended only stage 2 runs, which yields
    /// the observed final state.
    pub fn observe(&mut self) -> Result<Observation, PipelineError> {
        if self.episode.is_none() {
            return Err(PipelineError::NotReset);
        }
        if let Some(s) = &self.staged {
            return Ok(s.obs.clone());
        }
        let result = self.stage_observation();
        if result.is_err() {
            self.done = true;
        }
        result
    }

    fn stage_observation(&mut self) -> Result<Observation, PipelineError> {
        let counters = self.counters();
        let (phase, suppressed) = (self.phase, self.suppressed);
        let mut fired = BTreeSet::new();
        let mut clamps = 0;
        if !self.done {
            for a in self.active.iter_mut().filter(|a| a.spec.source == Source::EnvParams) {
                if fires(a, counters, phase, suppressed) {
                    let (Mode::InternalShift(ps) | Mode::External(ps)) = a.spec.mode() else { unreachable!() };
                    let updates = eval_param_schedule(ps, counters.episode, counters.step_in_episode, &mut a.noise_rng);
                    clamps += self.env.set_params(&updates)?.clamped.len();
                    fired.insert(a.spec.id.clone());
                }
            }
        }
        let true_state = self.env.state();
        let space = self.env.state_space();
        let mut state = true_state.clone();
        for a in self.active.iter_mut().filter(|a| a.spec.source == Source::State) {
            if fires(a, counters, phase, suppressed) {
                let (s, c) = disrupt_value(a, &state, &space, self.env.as_ref(), self.true_rewards, false)?;
                state = s;
                clamps += c;
                fired.insert(a.spec.id.clone());
            }
        }
        let obs = Observation { t: self.step as usize, state, reward: self.obs_reward, cost: self.obs_cost };
        self.staged = Some(Staged {
            obs: obs.clone(),
            true_state,
            fired,
            clamps,
            env_params: self.env.params().snapshot(),
        });
        Ok(obs)
    }

    /// Runs stages 4 to 6 with the agent's action.
    pub fn execute(&mut self, agent_action: Value) -> Result<StepTranscript, PipelineError> {
        if self.staged.is_none() {
            self.observe()?;
        }
        if self.done {
            return Err(EnvError::EpisodeOver.into());
        }
        let result = self.stage_execute(agent_action);
        if result.is_err() {
            self.done = true;
        }
        result
    }

    fn stage_execute(&mut self, agent_action: Value) -> Result<StepTranscript, PipelineError> {
        let counters = self.counters();
        let (phase, suppressed) = (self.phase, self.suppressed);
        let staged = self.staged.take().expect("observed");
        let mut fired = staged.fired;
        let mut clamps = staged.clamps;

        let space = self.env.action_space();
        let mut executed = agent_action.clone();
        for a in self.active.iter_mut().filter(|a| a.spec.source == Source::Action) {
            if fires(a, counters, phase, suppressed) {
                let (v, c) = disrupt_value(a, &executed, &space, self.env.as_ref(), self.true_rewards, true)?;
                executed = v;
                clamps += c;
                fired.insert(a.spec.id.clone());
            }
        }

        let out = self.env.step(&executed)?;
        let next_rewards = (out.reward, self.true_rewards.0);

        let mut reward = out.reward;
        let mut cost = out.cost;
        for a in self.active.iter_mut() {
            let target = match a.spec.source {
                Source::Reward => &mut reward,
                Source::Cost => &mut cost,
                _ => continue,
            };
            if fires(a, counters, phase, suppressed) {
                let (v, c) = disrupt_scalar(a, *target, self.env.as_ref(), self.true_rewards)?;
                *target = v;
                clamps += c;
                fired.insert(a.spec.id.clone());
            }
        }

        self.true_rewards = next_rewards;
        self.obs_reward = reward;
        self.obs_cost = cost;
        self.step += 1;
        self.global_step += 1;
        self.done = out.terminated || out.truncated;

        Ok(StepTranscript {
            t: counters.step_in_episode as usize,
            true_state: staged.true_state,
            observed_state: staged.obs.state,
            agent_action,
            executed_action: executed,
            true_reward: out.reward,
            observed_reward: reward,
            true_cost: out.cost,
            observed_cost: cost,
            fired,
            clamps,
            env_params: staged.env_params,
            terminated: out.terminated,
            truncated: out.truncated,
            info: out.info,
        })
    }

    /// One full step: observe, ask `policy`, execute.
    pub fn step_with<F>(&mut self, policy: F) -> Result<StepTranscript, PipelineError>
    where
        F: FnOnce(&Observation) -> Value,
    {
        let obs = self.observe()?;
        let action = policy(&obs);
        self.execute(action)
    }
}

/// Free-function form of [`Pipeline::step_with`].
pub fn pipeline_step<F>(pipeline: &mut Pipeline, policy: F) -> Result<StepTranscript, PipelineError>
where
    F: FnOnce(&Observation) -> Value,
{
    pipeline.step_with(policy)
}
