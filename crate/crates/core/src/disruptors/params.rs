//! Per-parameter rules for environment disruptors (dynamics shifts and
//! external disturbances).

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::rng::StreamRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawAt {
    #[default]
    EpisodeStart,
    Step,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinIndex {
    #[default]
    Episode,
    Step,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamRule {
    Constant {
        value: f64,
    },
    UniformDraw {
        low: f64,
        high: f64,
        #[serde(default)]
        at: DrawAt,
    },
    /// `base + amp * sin(freq * index)`.
    Sinusoid {
        base: f64,
        amp: f64,
        freq: f64,
        #[serde(default)]
        index: SinIndex,
    },
}

impl ParamRule {
    pub fn sinusoid(base: f64, amp: f64, freq: f64) -> Self {
        ParamRule::Sinusoid { base, amp, freq, index: SinIndex::Episode }
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        ParamRule::UniformDraw { low, high, at: DrawAt::EpisodeStart }
    }

    fn validate(&self, key: &str) -> Result<(), ConfigError> {
        let nums: Vec<(&str, f64)> = match *self {
            ParamRule::Constant { value } => vec![("value", value)],
            ParamRule::UniformDraw { low, high, .. } => {
                if low > high {
                    return Err(ConfigError::new(format!("{key}.low"), format!("{low} exceeds high {high}")));
                }
                vec![("low", low), ("high", high)]
            }
            ParamRule::Sinusoid { base, amp, freq, .. } => vec![("base", base), ("amp", amp), ("freq", freq)],
        };
        match nums.iter().find(|(_, x)| !x.is_finite()) {
            Some((name, _)) => Err(ConfigError::new(format!("{key}.{name}"), "must be finite")),
            None => Ok(()),
        }
    }
}

/// Parameter name to rule. Values it produces are clamped by the
/// environment's bounds when applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamSchedule(pub BTreeMap<String, ParamRule>);

impl ParamSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, rule: ParamRule) -> Self {
        self.0.insert(name.into(), rule);
        self
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if self.0.is_empty() {
            return Err(ConfigError::new(key, "needs at least one parameter rule"));
        }
        self.0.iter().try_for_each(|(name, rule)| rule.validate(&format!("{key}.{name}")))
    }
}

/// Values to write into the environment at this point of the run.
///
/// `uniform_draw` rules with `at = episode_start` only produce a value at
/// step 0; elsewhere the parameter keeps whatever it holds.
pub fn eval_param_schedule(ps: &ParamSchedule, episode: u64, step: u64, rng: &mut StreamRng) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (name, rule) in &ps.0 {
        let value = match *rule {
            ParamRule::Constant { value } => Some(value),
            ParamRule::UniformDraw { low, high, at } => {
                if at == DrawAt::Step || step == 0 {
                    Some(if low < high { rng.random_range(low..=high) } else { low })
                } else {
                    None
                }
            }
            ParamRule::Sinusoid { base, amp, freq, index } => {
                let i = match index {
                    SinIndex::Episode => episode,
                    SinIndex::Step => step,
                } as f64;
                Some(base + amp * (freq * i).sin())
            }
        };
        if let Some(v) = value {
            out.insert(name.clone(), v);
        }
    }
    out
}
