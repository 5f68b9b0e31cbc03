use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{Agent, Transition};
use crate::disruptors::{Observation, Phase};
use crate::mdp::Value;
use crate::rng::StreamRng;

/// Learning hyperparameters shared by the tabular learners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QParams {
    pub alpha: f64,
    pub gamma: f64,
    pub eps_start: f64,
    pub eps_end: f64,
}

impl Default for QParams {
    fn default() -> Self {
        Self { alpha: 0.1, gamma: 0.99, eps_start: 1.0, eps_end: 0.05 }
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// Linear decay from `start` at episode 0 to `end` at the last training episode.
pub fn linear_epsilon(start: f64, end: f64, episode: usize, train_episodes: usize) -> f64 {
    if train_episodes <= 1 {
        return end;
    }
    let frac = (episode as f64 / (train_episodes - 1) as f64).min(1.0);
    start + (end - start) * frac
}

/// Q-learning over an explicit table, acting and learning on observed values only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularQAgent {
    pub n_states: usize,
    pub n_actions: usize,
    pub params: QParams,
    pub epsilon: f64,
    /// Row-major `n_states x n_actions`.
    pub q: Vec<f64>,
}

impl TabularQAgent {
    pub fn new(n_states: usize, n_actions: usize, params: QParams) -> Self {
        Self { n_states, n_actions, params, epsilon: params.eps_start, q: vec![0.0; n_states * n_actions] }
    }

    /// Maps an observed index into the table. Out-of-range indices wrap.
    pub fn state_index(&self, state: &Value) -> usize {
        state.as_index().expect("tabular agents observe discrete states") % self.n_states
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.n_actions + a]
    }

    pub fn greedy(&self, s: usize) -> usize {
        argmax(self.row(s))
    }

    /// ε-greedy in training, greedy in evaluation.
    pub fn choose(&self, s: usize, phase: Phase, rng: &mut StreamRng) -> usize {
        if phase == Phase::Train && rng.random::<f64>() < self.epsilon {
            rng.random_range(0..self.n_actions)
        } else {
            self.greedy(s)
        }
    }

    pub fn q_update(&mut self, s: usize, a: usize, r: f64, s_next: usize, done: bool) {
        let bootstrap = if done { 0.0 } else { self.params.gamma * self.row(s_next)[self.greedy(s_next)] };
        let i = s * self.n_actions + a;
        self.q[i] += self.params.alpha * (r + bootstrap - self.q[i]);
    }

    pub fn set_episode(&mut self, episode: usize, train_episodes: usize) {
        self.epsilon = linear_epsilon(self.params.eps_start, self.params.eps_end, episode, train_episodes);
    }
}

impl Agent for TabularQAgent {
    fn name(&self) -> &'static str {
        "tabular_q"
    }

    fn begin_episode(&mut self, episode: usize, train_episodes: usize) {
        self.set_episode(episode, train_episodes);
    }

    fn act(&mut self, obs: &Observation, phase: Phase, rng: &mut StreamRng) -> Value {
        Value::Index(self.choose(self.state_index(&obs.state), phase, rng))
    }

    fn learn(&mut self, tr: &Transition<'_>) {
        let s = self.state_index(tr.state);
        let s2 = self.state_index(tr.next_state);
        let a = tr.action.as_index().expect("discrete action");
        self.q_update(s, a, tr.reward, s2, tr.terminated);
    }
}

/// Q-learning on `observed reward - λ · observed cost`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenalizedQAgent {
    pub inner: TabularQAgent,
    pub lambda: f64,
}

impl PenalizedQAgent {
    pub fn new(n_states: usize, n_actions: usize, params: QParams, lambda: f64) -> Self {
        assert!(lambda >= 0.0, "λ must be non-negative");
        Self { inner: TabularQAgent::new(n_states, n_actions, params), lambda }
    }
}

impl Agent for PenalizedQAgent {
    fn name(&self) -> &'static str {
        "penalized_q"
    }

    fn begin_episode(&mut self, episode: usize, train_episodes: usize) {
        self.inner.set_episode(episode, train_episodes);
    }

    fn act(&mut self, obs: &Observation, phase: Phase, rng: &mut StreamRng) -> Value {
        self.inner.act(obs, phase, rng)
    }

    fn learn(&mut self, tr: &Transition<'_>) {
        let shaped = Transition { reward: tr.reward - self.lambda * tr.cost, ..*tr };
        self.inner.learn(&shaped);
    }
}

/// One independent Q-learner per agent, each acting on its own observed position.
///
/// A member stops learning once the environment reports it home (`done_<i>`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndependentQTeam {
    pub members: Vec<TabularQAgent>,
    #[serde(skip)]
    home: Vec<bool>,
}

impl IndependentQTeam {
    pub fn new(n_agents: usize, n_states: usize, n_actions: usize, params: QParams) -> Self {
        Self { members: vec![TabularQAgent::new(n_states, n_actions, params); n_agents], home: vec![false; n_agents] }
    }

    fn component(value: &Value, i: usize) -> usize {
        match value {
            Value::Indices(v) => v[i],
            other => panic!("team agents observe per-agent indices, got {other:?}"),
        }
    }
}

impl Agent for IndependentQTeam {
    fn name(&self) -> &'static str {
        "independent_q_team"
    }

    fn begin_episode(&mut self, episode: usize, train_episodes: usize) {
        self.home = vec![false; self.members.len()];
        for m in &mut self.members {
            m.set_episode(episode, train_episodes);
        }
    }

    fn act(&mut self, obs: &Observation, phase: Phase, rng: &mut StreamRng) -> Value {
        let actions = self
            .members
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let s = Self::component(&obs.state, i) % m.n_states;
                m.choose(s, phase, rng)
            })
            .collect();
        Value::Indices(actions)
    }

    fn learn(&mut self, tr: &Transition<'_>) {
        if self.home.len() != self.members.len() {
            self.home = vec![false; self.members.len()];
        }
        for (i, m) in self.members.iter_mut().enumerate() {
            if self.home[i] {
                continue;
            }
            let done = tr.terminated || tr.info.get(&format!("done_{i}")).is_some_and(|d| *d > 0.5);
            let s = Self::component(tr.state, i) % m.n_states;
            let s2 = Self::component(tr.next_state, i) % m.n_states;
            let a = Self::component(tr.action, i);
            m.q_update(s, a, tr.reward, s2, done);
            self.home[i] = done;
        }
    }
}

/// Deterministic state-indexed policy, e.g. a value-iteration greedy policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPolicy {
    pub actions: Vec<usize>,
}

impl Agent for FixedPolicy {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn act(&mut self, obs: &Observation, _phase: Phase, _rng: &mut StreamRng) -> Value {
        let s = obs.state.as_index().expect("discrete state") % self.actions.len();
        Value::Index(self.actions[s])
    }
}
