//! Adversarial-mode perturbation strategies.
//!
//! Every strategy maps an [`AdversaryRequest`] (true value plus the region
//! the perturbed value must lie in) to an [`AdversaryReply`]. The caller
//! clamps replies into the region and counts violations.

mod external;
mod prompt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use external::{
    external_adversary_roundtrip, serve_mock, ChildProcessEndpoint, Endpoint, ExternalAdversary, MockMode, TcpEndpoint,
    WireReply, WireRequest, DEFAULT_TIMEOUT_MS,
};
pub use prompt::build_llm_prompt;

use crate::error::ConfigError;
use crate::mdp::{Environment, Space};
use crate::rng::StreamRng;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("adversary timed out after {0} ms")]
    Timeout(u64),
    #[error("malformed adversary reply: {0}")]
    Malformed(String),
    #[error("adversary endpoint closed")]
    Closed,
    #[error("adversary endpoint unusable after an earlier failure")]
    Poisoned,
    #[error("adversary i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("simulation on forked environment failed: {0}")]
    Simulation(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryRequest {
    pub task_description: String,
    /// True state or action being perturbed.
    pub value: Vec<f64>,
    pub region_low: Vec<f64>,
    pub region_high: Vec<f64>,
    pub current_reward: f64,
    pub previous_reward: f64,
}

impl AdversaryRequest {
    pub fn new(value: Vec<f64>, region_low: Vec<f64>, region_high: Vec<f64>) -> Self {
        Self {
            task_description: DEFAULT_TASK.into(),
            value,
            region_low,
            region_high,
            current_reward: 0.0,
            previous_reward: 0.0,
        }
    }

    pub fn with_rewards(mut self, current: f64, previous: f64) -> Self {
        self.current_reward = current;
        self.previous_reward = previous;
        self
    }

    pub fn is_valid(&self) -> bool {
        self.value.len() == self.region_low.len()
            && self.value.len() == self.region_high.len()
            && self.region_low.iter().zip(&self.region_high).all(|(l, h)| l <= h)
    }
}

pub const DEFAULT_TASK: &str = "robust reinforcement learning adversary";

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryReply {
    pub value: Vec<f64>,
}

/// Clamps a reply into the request region; returns the number of clamped elements.
pub fn clamp_to_region(reply: &AdversaryReply, req: &AdversaryRequest) -> (Vec<f64>, usize) {
    let mut violations = 0;
    let out = reply
        .value
        .iter()
        .zip(req.region_low.iter().zip(&req.region_high))
        .map(|(x, (l, h))| {
            let y = x.clamp(*l, *h);
            if y != *x {
                violations += 1;
            }
            y
        })
        .collect();
    (out, violations)
}

/// Uniform draw from the region, element by element.
pub fn random_in_set(req: &AdversaryRequest, rng: &mut StreamRng) -> AdversaryReply {
    let value = req
        .region_low
        .iter()
        .zip(&req.region_high)
        .map(|(l, h)| if l < h { rng.random_range(*l..=*h) } else { *l })
        .collect();
    AdversaryReply { value }
}

/// Uniform draw over the integers inside the region.
pub fn random_in_set_discrete(req: &AdversaryRequest, rng: &mut StreamRng) -> AdversaryReply {
    let value = req
        .region_low
        .iter()
        .zip(&req.region_high)
        .map(|(l, h)| {
            let (lo, hi) = (l.ceil() as i64, h.floor() as i64);
            if lo >= hi {
                lo as f64
            } else {
                rng.random_range(lo..=hi) as f64
            }
        })
        .collect();
    AdversaryReply { value }
}

fn integer_candidates(req: &AdversaryRequest) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for (l, h) in req.region_low.iter().zip(&req.region_high) {
        let (lo, hi) = (l.ceil() as i64, h.floor() as i64);
        if lo > hi {
            return None;
        }
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |v| {
                    let mut c = prefix.clone();
                    c.push(v as f64);
                    c
                })
            })
            .collect();
        if out.len() > 1 << 16 {
            return None;
        }
    }
    Some(out)
}

/// One-step worst case: simulates each candidate on a fork of `env` and
/// returns the one with the lowest immediate true reward (ties to the lowest
/// candidate index).
///
/// On discrete spaces a budget covering the whole region enumerates it in
/// order; otherwise candidates are drawn like [`random_in_set`].
pub fn greedy_worst_case(
    req: &AdversaryRequest,
    env: &dyn Environment,
    space: &Space,
    n_candidates: usize,
    rng: &mut StreamRng,
) -> Result<AdversaryReply, AdversaryError> {
    let n = n_candidates.max(1);
    let candidates: Vec<Vec<f64>> = if space.is_continuous() {
        (0..n).map(|_| random_in_set(req, rng).value).collect()
    } else {
        match integer_candidates(req) {
            Some(all) if all.len() <= n => all,
            _ => (0..n).map(|_| random_in_set_discrete(req, rng).value).collect(),
        }
    };
    let mut best: Option<(f64, usize)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let (action, _) = space.from_reals(c);
        let mut fork = env.fork();
        let out = fork.step(&action).map_err(|e| AdversaryError::Simulation(e.to_string()))?;
        if best.is_none_or(|(r, _)| out.reward < r) {
            best = Some((out.reward, i));
        }
    }
    let (_, idx) = best.expect("at least one candidate");
    Ok(AdversaryReply { value: candidates[idx].clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    RandomInSet,
    Greedy,
    External,
}

fn default_candidates() -> usize {
    8
}

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_MS
}

/// Adversary configuration attached to an adversarial disruptor.
///
/// The region bounds the perturbed value itself. A one-element region is
/// broadcast over every component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub region_low: Vec<f64>,
    pub region_high: Vec<f64>,
    #[serde(default = "default_candidates")]
    pub n_candidates: usize,
    /// Child process command line for `external`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
    /// `host:port` of a socket endpoint for `external`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
}

impl AdversarySpec {
    pub fn new(kind: AdversaryKind, region_low: Vec<f64>, region_high: Vec<f64>) -> Self {
        Self {
            kind,
            region_low,
            region_high,
            n_candidates: default_candidates(),
            command: None,
            address: None,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            task: None,
        }
    }

    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if self.region_low.is_empty() || self.region_low.len() != self.region_high.len() {
            return Err(ConfigError::new(
                format!("{key}.region_low"),
                "region_low and region_high must be non-empty and of equal length",
            ));
        }
        if let Some(i) = (0..self.region_low.len()).find(|&i| self.region_low[i].is_nan() || self.region_high[i].is_nan() || self.region_low[i] > self.region_high[i]) {
            return Err(ConfigError::new(
                format!("{key}.region_low"),
                format!("element {i}: {} exceeds region_high {}", self.region_low[i], self.region_high[i]),
            ));
        }
        if self.n_candidates == 0 {
            return Err(ConfigError::new(format!("{key}.n_candidates"), "must be >= 1"));
        }
        match (self.kind, &self.command, &self.address) {
            (AdversaryKind::External, None, None) => {
                Err(ConfigError::new(format!("{key}.command"), "external adversary needs `command` or `address`"))
            }
            (AdversaryKind::External, Some(_), Some(_)) => {
                Err(ConfigError::new(format!("{key}.address"), "give either `command` or `address`"))
            }
            (AdversaryKind::External, Some(c), None) if c.is_empty() => {
                Err(ConfigError::new(format!("{key}.command"), "empty command"))
            }
            (AdversaryKind::RandomInSet | AdversaryKind::Greedy, c, a) if c.is_some() || a.is_some() => Err(
                ConfigError::new(format!("{key}.command"), "`command`/`address` only apply to external adversaries"),
            ),
            _ => Ok(()),
        }
    }

    /// Region broadcast to `dim` components.
    pub fn region(&self, dim: usize) -> Option<(Vec<f64>, Vec<f64>)> {
        match self.region_low.len() {
            1 => Some((vec![self.region_low[0]; dim], vec![self.region_high[0]; dim])),
            n if n == dim => Some((self.region_low.clone(), self.region_high.clone())),
            _ => None,
        }
    }

    pub fn build(&self) -> Result<Box<dyn Adversary>, AdversaryError> {
        Ok(match self.kind {
            AdversaryKind::RandomInSet => Box::new(RandomInSet),
            AdversaryKind::Greedy => Box::new(Greedy { n_candidates: self.n_candidates }),
            AdversaryKind::External => {
                let endpoint: Box<dyn Endpoint> = match (&self.command, &self.address) {
                    (Some(cmd), _) => Box::new(ChildProcessEndpoint::spawn(cmd)?),
                    (None, Some(addr)) => Box::new(TcpEndpoint::connect(addr)?),
                    (None, None) => return Err(AdversaryError::Malformed("no endpoint configured".into())),
                };
                Box::new(ExternalAdversary::new(endpoint, self.timeout_ms))
            }
        })
    }
}

/// What an adversary may look at besides the request.
pub struct AdversaryContext<'a> {
    /// Live environment, positioned before the step being attacked.
    pub env: &'a dyn Environment,
    /// Space the perturbed value must belong to.
    pub space: &'a Space,
    pub rng: &'a mut StreamRng,
}

pub trait Adversary: Send {
    fn name(&self) -> &'static str;
    fn perturb(&mut self, req: &AdversaryRequest, ctx: AdversaryContext<'_>) -> Result<AdversaryReply, AdversaryError>;
}

pub struct RandomInSet;

impl Adversary for RandomInSet {
    fn name(&self) -> &'static str {
        "random_in_set"
    }

    fn perturb(&mut self, req: &AdversaryRequest, ctx: AdversaryContext<'_>) -> Result<AdversaryReply, AdversaryError> {
        Ok(if ctx.space.is_continuous() { random_in_set(req, ctx.rng) } else { random_in_set_discrete(req, ctx.rng) })
    }
}

pub struct Greedy {
    pub n_candidates: usize,
}

impl Adversary for Greedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn perturb(&mut self, req: &AdversaryRequest, ctx: AdversaryContext<'_>) -> Result<AdversaryReply, AdversaryError> {
        greedy_worst_case(req, ctx.env, ctx.space, self.n_candidates, ctx.rng)
    }
}
