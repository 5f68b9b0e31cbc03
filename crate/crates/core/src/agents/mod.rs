//! Baseline learners. Agents only ever receive observed (possibly disrupted)
//! values: [`Observation`] when acting and [`Transition`] when learning.

pub mod cem;
pub mod tabular;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use cem::{cem_iteration, CemPolicy, CemStats};
pub use tabular::{argmax, linear_epsilon, FixedPolicy, IndependentQTeam, PenalizedQAgent, QParams, TabularQAgent};

use crate::disruptors::{Observation, Phase};
use crate::error::ConfigError;
use crate::mdp::{Environment, Space, Value};
use crate::rng::StreamRng;

/// One learning step, built from observed values only.
#[derive(Debug, Clone, Copy)]
pub struct Transition<'a> {
    pub state: &'a Value,
    /// The agent's own choice, before any action disruption.
    pub action: &'a Value,
    pub reward: f64,
    pub cost: f64,
    pub next_state: &'a Value,
    pub terminated: bool,
    pub info: &'a BTreeMap<String, f64>,
}

pub trait Agent: Send {
    fn name(&self) -> &'static str;

    /// Called before each episode; `episode` counts training episodes.
    fn begin_episode(&mut self, _episode: usize, _train_episodes: usize) {}

    fn act(&mut self, obs: &Observation, phase: Phase, rng: &mut StreamRng) -> Value;

    fn learn(&mut self, _tr: &Transition<'_>) {}
}

fn default_alpha() -> f64 {
    0.1
}
fn default_gamma() -> f64 {
    0.99
}
fn default_eps_start() -> f64 {
    1.0
}
fn default_eps_end() -> f64 {
    0.05
}
fn default_lambda() -> f64 {
    1.0
}
fn default_population() -> usize {
    32
}
fn default_elite_frac() -> f64 {
    0.25
}
fn default_one() -> usize {
    1
}
fn default_init_std() -> [f64; 2] {
    [5.0, 5.0]
}

/// `[agent]` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum AgentConfig {
    TabularQ {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default = "default_eps_start")]
        eps_start: f64,
        #[serde(default = "default_eps_end")]
        eps_end: f64,
    },
    PenalizedQ {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default = "default_eps_start")]
        eps_start: f64,
        #[serde(default = "default_eps_end")]
        eps_end: f64,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    IndependentQTeam {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_gamma")]
        gamma: f64,
        #[serde(default = "default_eps_start")]
        eps_start: f64,
        #[serde(default = "default_eps_end")]
        eps_end: f64,
    },
    Cem {
        #[serde(default = "default_population")]
        population: usize,
        #[serde(default = "default_elite_frac")]
        elite_frac: f64,
        #[serde(default = "default_one")]
        episodes_per_candidate: usize,
        #[serde(default)]
        init_mean: [f64; 2],
        #[serde(default = "default_init_std")]
        init_std: [f64; 2],
    },
}

pub const AGENT_IDS: [&str; 4] = ["tabular_q", "penalized_q", "independent_q_team", "cem"];

impl AgentConfig {
    pub fn tabular_q() -> Self {
        let p = QParams::default();
        AgentConfig::TabularQ { alpha: p.alpha, gamma: p.gamma, eps_start: p.eps_start, eps_end: p.eps_end }
    }

    pub fn independent_q_team() -> Self {
        let p = QParams::default();
        AgentConfig::IndependentQTeam { alpha: p.alpha, gamma: p.gamma, eps_start: p.eps_start, eps_end: p.eps_end }
    }

    pub fn penalized_q(lambda: f64) -> Self {
        let p = QParams::default();
        AgentConfig::PenalizedQ { alpha: p.alpha, gamma: p.gamma, eps_start: p.eps_start, eps_end: p.eps_end, lambda }
    }

    pub fn cem() -> Self {
        AgentConfig::Cem {
            population: default_population(),
            elite_frac: default_elite_frac(),
            episodes_per_candidate: 1,
            init_mean: [0.0, 0.0],
            init_std: default_init_std(),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            AgentConfig::TabularQ { .. } => "tabular_q",
            AgentConfig::PenalizedQ { .. } => "penalized_q",
            AgentConfig::IndependentQTeam { .. } => "independent_q_team",
            AgentConfig::Cem { .. } => "cem",
        }
    }

    fn q_params(&self) -> Option<QParams> {
        match *self {
            AgentConfig::TabularQ { alpha, gamma, eps_start, eps_end }
            | AgentConfig::PenalizedQ { alpha, gamma, eps_start, eps_end, .. }
            | AgentConfig::IndependentQTeam { alpha, gamma, eps_start, eps_end } => {
                Some(QParams { alpha, gamma, eps_start, eps_end })
            }
            AgentConfig::Cem { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let in_unit = |key: &str, x: f64, open_low: bool| {
            let ok = if open_low { x > 0.0 && x <= 1.0 } else { (0.0..=1.0).contains(&x) };
            if ok {
                Ok(())
            } else {
                let range = if open_low { "(0, 1]" } else { "[0, 1]" };
                Err(ConfigError::new(format!("agent.{key}"), format!("must lie in {range}, got {x}")))
            }
        };
        if let Some(p) = self.q_params() {
            in_unit("alpha", p.alpha, true)?;
            in_unit("gamma", p.gamma, false)?;
            in_unit("eps_start", p.eps_start, false)?;
            in_unit("eps_end", p.eps_end, false)?;
        }
        match *self {
            AgentConfig::PenalizedQ { lambda, .. } if !(lambda >= 0.0 && lambda.is_finite()) => {
                Err(ConfigError::new("agent.lambda", format!("must be >= 0, got {lambda}")))
            }
            AgentConfig::Cem { population, elite_frac, episodes_per_candidate, init_mean, init_std } => {
                if population == 0 {
                    return Err(ConfigError::new("agent.population", "must be >= 1"));
                }
                if episodes_per_candidate == 0 {
                    return Err(ConfigError::new("agent.episodes_per_candidate", "must be >= 1"));
                }
                in_unit("elite_frac", elite_frac, true)?;
                if init_mean.iter().any(|x| !x.is_finite()) {
                    return Err(ConfigError::new("agent.init_mean", "must be finite"));
                }
                if init_std.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(ConfigError::new("agent.init_std", "must be finite and >= 0"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Builds a fresh agent bound to `env`'s spaces.
    pub fn build(&self, env: &dyn Environment) -> Result<AnyAgent, ConfigError> {
        self.validate()?;
        let (states, actions) = (env.state_space(), env.action_space());
        let mismatch = |wanted: &str| {
            ConfigError::new(
                "agent.id",
                format!("`{}` needs {wanted}; `{}` has state {states} and action {actions}", self.id(), env.id()),
            )
        };
        match self {
            AgentConfig::TabularQ { .. } | AgentConfig::PenalizedQ { .. } => {
                let (Space::Discrete(ns), Space::Discrete(na)) = (&states, &actions) else {
                    return Err(mismatch("discrete state and action spaces"));
                };
                let p = self.q_params().expect("tabular");
                Ok(match *self {
                    AgentConfig::PenalizedQ { lambda, .. } => AnyAgent::PenalizedQ(PenalizedQAgent::new(*ns, *na, p, lambda)),
                    _ => AnyAgent::TabularQ(TabularQAgent::new(*ns, *na, p)),
                })
            }
            AgentConfig::IndependentQTeam { .. } => {
                let (Space::MultiDiscrete(ns), Space::MultiDiscrete(na)) = (&states, &actions) else {
                    return Err(mismatch("per-agent discrete spaces"));
                };
                if ns.len() != na.len() || ns.iter().any(|n| *n != ns[0]) || na.iter().any(|n| *n != na[0]) {
                    return Err(mismatch("identical per-agent spaces"));
                }
                let p = self.q_params().expect("tabular");
                Ok(AnyAgent::Team(IndependentQTeam::new(ns.len(), ns[0], na[0], p)))
            }
            AgentConfig::Cem { population, elite_frac, init_mean, init_std, .. } => {
                if !(states.is_continuous() && states.dim() == 2 && actions.is_continuous() && actions.dim() == 1) {
                    return Err(mismatch("a 2-dimensional box state and a scalar box action"));
                }
                Ok(AnyAgent::Cem(CemPolicy::new(*init_mean, *init_std, *population, *elite_frac)))
            }
        }
    }
}

/// Any shipped agent; serializes to a JSON text snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnyAgent {
    TabularQ(TabularQAgent),
    PenalizedQ(PenalizedQAgent),
    Team(IndependentQTeam),
    Cem(CemPolicy),
    Fixed(FixedPolicy),
}

impl AnyAgent {
    fn inner(&self) -> &dyn Agent {
        match self {
            AnyAgent::TabularQ(a) => a,
            AnyAgent::PenalizedQ(a) => a,
            AnyAgent::Team(a) => a,
            AnyAgent::Cem(a) => a,
            AnyAgent::Fixed(a) => a,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn Agent {
        match self {
            AnyAgent::TabularQ(a) => a,
            AnyAgent::PenalizedQ(a) => a,
            AnyAgent::Team(a) => a,
            AnyAgent::Cem(a) => a,
            AnyAgent::Fixed(a) => a,
        }
    }

    pub fn to_snapshot(&self) -> String {
        serde_json::to_string(self).expect("agents serialize")
    }

    pub fn from_snapshot(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl Agent for AnyAgent {
    fn name(&self) -> &'static str {
        self.inner().name()
    }

    fn begin_episode(&mut self, episode: usize, train_episodes: usize) {
        self.inner_mut().begin_episode(episode, train_episodes)
    }

    fn act(&mut self, obs: &Observation, phase: Phase, rng: &mut StreamRng) -> Value {
        self.inner_mut().act(obs, phase, rng)
    }

    fn learn(&mut self, tr: &Transition<'_>) {
        self.inner_mut().learn(tr)
    }
}
