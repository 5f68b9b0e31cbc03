//! Finite-horizon MDP vocabulary: spaces, values, parameter sets, step
//! records and the base-environment contract.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rng::StreamRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("unknown environment parameter `{0}`")]
    UnknownParam(String),
    #[error("parameter `{name}` received non-finite value {value}")]
    NonFiniteParam { name: String, value: f64 },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("action {action} is outside the action space {space}")]
    ActionOutOfSpace { action: String, space: String },
    #[error("non-finite {0} in environment dynamics")]
    NonFinite(&'static str),
    #[error("step called before reset")]
    NotReset,
    #[error("step called after the episode ended")]
    EpisodeOver,
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid layout: {0}")]
    Layout(String),
}

/// State or action space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Space {
    Discrete(usize),
    /// One discrete component per agent.
    MultiDiscrete(Vec<usize>),
    Box { low: Vec<f64>, high: Vec<f64> },
}

impl Space {
    pub fn discrete(n: usize) -> Result<Self, EnvError> {
        if n == 0 {
            return Err(EnvError::InvalidSpace("discrete space needs n >= 1".into()));
        }
        Ok(Space::Discrete(n))
    }

    pub fn multi_discrete(ns: Vec<usize>) -> Result<Self, EnvError> {
        if ns.is_empty() || ns.contains(&0) {
            return Err(EnvError::InvalidSpace("every component needs n >= 1".into()));
        }
        Ok(Space::MultiDiscrete(ns))
    }

    pub fn boxed(low: Vec<f64>, high: Vec<f64>) -> Result<Self, EnvError> {
        if low.len() != high.len() || low.is_empty() {
            return Err(EnvError::InvalidSpace(format!(
                "box bounds have lengths {} and {}",
                low.len(),
                high.len()
            )));
        }
        if let Some(i) = (0..low.len()).find(|&i| low[i].is_nan() || high[i].is_nan() || low[i] > high[i]) {
            return Err(EnvError::InvalidSpace(format!(
                "box low[{i}] = {} exceeds high[{i}] = {}",
                low[i], high[i]
            )));
        }
        Ok(Space::Box { low, high })
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Space::Box { .. })
    }

    /// Number of scalar components of a value in this space.
    pub fn dim(&self) -> usize {
        match self {
            Space::Discrete(_) => 1,
            Space::MultiDiscrete(ns) => ns.len(),
            Space::Box { low, .. } => low.len(),
        }
    }

    /// Per-component inclusive bounds as reals.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Space::Discrete(n) => (vec![0.0], vec![(*n - 1) as f64]),
            Space::MultiDiscrete(ns) => (vec![0.0; ns.len()], ns.iter().map(|n| (*n - 1) as f64).collect()),
            Space::Box { low, high } => (low.clone(), high.clone()),
        }
    }

    pub fn contains(&self, value: &Value) -> bool {
        match (self, value) {
            (Space::Discrete(n), Value::Index(i)) => i < n,
            (Space::MultiDiscrete(ns), Value::Indices(is)) => {
                ns.len() == is.len() && is.iter().zip(ns).all(|(i, n)| i < n)
            }
            (Space::Box { low, high }, Value::Vector(v)) => {
                v.len() == low.len()
                    && v.iter().zip(low.iter().zip(high)).all(|(x, (l, h))| x >= l && x <= h)
            }
            _ => false,
        }
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Value {
        match self {
            Space::Discrete(n) => Value::Index(rng.random_range(0..*n)),
            Space::MultiDiscrete(ns) => Value::Indices(ns.iter().map(|n| rng.random_range(0..*n)).collect()),
            Space::Box { low, high } => Value::Vector(
                low.iter()
                    .zip(high)
                    .map(|(l, h)| if l < h { rng.random_range(*l..=*h) } else { *l })
                    .collect(),
            ),
        }
    }

    /// Converts a real vector into a member of this space, rounding discrete
    /// components and clamping everything into bounds. The flag reports
    /// whether any component had to be clamped.
    pub fn from_reals(&self, reals: &[f64]) -> (Value, bool) {
        let (low, high) = self.bounds();
        let mut clamped = false;
        let mut fit = |i: usize, x: f64| {
            let y = x.clamp(low[i], high[i]);
            if y != x {
                clamped = true;
            }
            y
        };
        let value = match self {
            Space::Discrete(_) => Value::Index(fit(0, reals[0].round()) as usize),
            Space::MultiDiscrete(_) => {
                Value::Indices(reals.iter().enumerate().map(|(i, x)| fit(i, x.round()) as usize).collect())
            }
            Space::Box { .. } => Value::Vector(reals.iter().enumerate().map(|(i, x)| fit(i, *x)).collect()),
        };
        (value, clamped)
    }

    /// Clips a value into the space. Only continuous components can be out of
    /// range after noise; discrete values are produced in range by construction.
    pub fn clip(&self, value: &Value) -> (Value, bool) {
        match (self, value) {
            (Space::Box { low, high }, Value::Vector(v)) => {
                let mut clamped = false;
                let out = v
                    .iter()
                    .zip(low.iter().zip(high))
                    .map(|(x, (l, h))| {
                        let y = x.clamp(*l, *h);
                        clamped |= y != *x;
                        y
                    })
                    .collect();
                (Value::Vector(out), clamped)
            }
            _ => self.from_reals(&value.to_reals()),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Discrete(n) => write!(f, "Discrete({n})"),
            Space::MultiDiscrete(ns) => write!(f, "MultiDiscrete({ns:?})"),
            Space::Box { low, high } => write!(f, "Box({low:?}, {high:?})"),
        }
    }
}

/// A state or action. Discrete environments use `Index`, multi-agent grids
/// use one index per agent, continuous environments use `Vector`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Index(usize),
    Indices(Vec<usize>),
    Vector(Vec<f64>),
}

pub type StateValue = Value;
pub type ActionValue = Value;

impl Value {
    pub fn as_index(&self) -> Option<usize> {
        match self {
            Value::Index(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Value::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_reals(&self) -> Vec<f64> {
        match self {
            Value::Index(i) => vec![*i as f64],
            Value::Indices(is) => is.iter().map(|i| *i as f64).collect(),
            Value::Vector(v) => v.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Index(i) => write!(f, "{i}"),
            Value::Indices(is) => write!(f, "{is:?}"),
            Value::Vector(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamEntry {
    pub nominal: f64,
    pub current: f64,
    pub low: f64,
    pub high: f64,
}

/// Named dynamics parameters. Every `current` stays inside `[low, high]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParamSet {
    entries: BTreeMap<String, ParamEntry>,
}

/// Result of a parameter update.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamUpdate {
    pub params: ParamSet,
    /// Names whose requested value was clamped into bounds.
    pub clamped: Vec<String>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, nominal: f64, low: f64, high: f64) -> Result<Self, EnvError> {
        if !(low <= nominal && nominal <= high) {
            return Err(EnvError::InvalidParam {
                name: name.into(),
                reason: format!("nominal {nominal} outside [{low}, {high}]"),
            });
        }
        self.entries.insert(name.into(), ParamEntry { nominal, current: nominal, low, high });
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.get(name).map(|e| e.current)
    }

    pub fn entry(&self, name: &str) -> Option<&ParamEntry> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Applies `updates` atomically: every name is checked before anything
    /// changes. Values are clamped into bounds.
    pub fn apply(&mut self, updates: &BTreeMap<String, f64>) -> Result<ParamUpdate, EnvError> {
        for (name, value) in updates {
            if !self.entries.contains_key(name) {
                return Err(EnvError::UnknownParam(name.clone()));
            }
            if !value.is_finite() {
                return Err(EnvError::NonFiniteParam { name: name.clone(), value: *value });
            }
        }
        let mut clamped = Vec::new();
        for (name, value) in updates {
            let e = self.entries.get_mut(name).expect("checked above");
            let v = value.clamp(e.low, e.high);
            if v != *value {
                clamped.push(name.clone());
            }
            e.current = v;
        }
        Ok(ParamUpdate { params: self.clone(), clamped })
    }

    pub fn reset_to_nominal(&mut self) {
        for e in self.entries.values_mut() {
            e.current = e.nominal;
        }
    }

    pub fn snapshot(&self) -> BTreeMap<String, f64> {
        self.entries.iter().map(|(k, e)| (k.clone(), e.current)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: Value,
    pub reward: f64,
    /// Safety cost; 0 for environments without a cost channel.
    pub cost: f64,
    pub terminated: bool,
    pub truncated: bool,
    pub info: BTreeMap<String, f64>,
}

/// Everything that happened at one pipeline step, true and observed.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTranscript {
    pub t: usize,
    pub true_state: Value,
    pub observed_state: Value,
    pub agent_action: Value,
    pub executed_action: Value,
    pub true_reward: f64,
    pub observed_reward: f64,
    pub true_cost: f64,
    pub observed_cost: f64,
    pub fired: BTreeSet<String>,
    pub clamps: usize,
    pub env_params: BTreeMap<String, f64>,
    pub terminated: bool,
    pub truncated: bool,
    pub info: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizonSpec(usize);

impl HorizonSpec {
    pub fn new(steps: usize) -> Result<Self, EnvError> {
        if steps == 0 {
            return Err(EnvError::InvalidParam { name: "horizon".into(), reason: "must be >= 1".into() });
        }
        Ok(Self(steps))
    }

    pub fn steps(self) -> usize {
        self.0
    }
}

/// Step counter and end-of-episode bookkeeping shared by the environments.
#[derive(Debug, Clone)]
pub(crate) struct EpisodeClock {
    pub horizon: HorizonSpec,
    pub t: usize,
    pub started: bool,
    pub done: bool,
}

impl EpisodeClock {
    pub fn new(horizon: HorizonSpec) -> Self {
        Self { horizon, t: 0, started: false, done: false }
    }

    pub fn reset(&mut self) {
        self.t = 0;
        self.started = true;
        self.done = false;
    }

    pub fn check(&self) -> Result<(), EnvError> {
        if !self.started {
            Err(EnvError::NotReset)
        } else if self.done {
            Err(EnvError::EpisodeOver)
        } else {
            Ok(())
        }
    }

    /// Advances the counter; returns `truncated` for a step that did not terminate.
    pub fn tick(&mut self, terminated: bool) -> bool {
        self.t += 1;
        let truncated = !terminated && self.t >= self.horizon.steps();
        self.done = terminated || truncated;
        truncated
    }
}

/// Base-environment contract.
///
/// Randomness comes from a stream owned by the environment and seeded at
/// `reset`. Parameter updates take effect on the next `step`.
pub trait Environment: Send {
    fn id(&self) -> &'static str;
    fn state_space(&self) -> Space;
    fn action_space(&self) -> Space;
    fn horizon(&self) -> HorizonSpec;
    fn num_agents(&self) -> usize {
        1
    }

    fn reset(&mut self, seed: u64) -> Value;
    fn step(&mut self, action: &Value) -> Result<StepOutcome, EnvError>;
    /// Current true state.
    fn state(&self) -> Value;

    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;

    fn set_params(&mut self, updates: &BTreeMap<String, f64>) -> Result<ParamUpdate, EnvError> {
        self.params_mut().apply(updates)
    }

    /// Independent copy with identical state, parameters and stream position.
    fn fork(&self) -> Box<dyn Environment>;
}

pub(crate) fn check_action(space: &Space, action: &Value) -> Result<(), EnvError> {
    if space.contains(action) {
        Ok(())
    } else {
        Err(EnvError::ActionOutOfSpace { action: action.to_string(), space: space.to_string() })
    }
}
