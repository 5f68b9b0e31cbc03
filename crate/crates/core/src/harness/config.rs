//! Run configuration: parsing, strict validation and dotted-key overrides.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::AgentConfig;
use crate::disruptors::{validate_specs, DisruptorSpec, PhaseGate};
use crate::envs::{build_env, EnvOptions};
use crate::error::ConfigError;
use crate::mdp::{EnvError, Environment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    /// Disruptors fire while training and while evaluating.
    InTraining,
    /// Training runs clean; disruptors only fire while evaluating.
    PostTraining,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub kind: ProtocolKind,
    pub train_episodes: usize,
    pub eval_episodes: usize,
}

fn default_alpha() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub seeds: Vec<u64>,
    #[serde(default = "default_alpha")]
    pub cvar_alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    /// Parameter values for the shifted-environment metrics.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub eval_param_grid: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub env: EnvOptions,
    pub agent: AgentConfig,
    #[serde(default, rename = "disruptor", skip_serializing_if = "Vec::is_empty")]
    pub disruptors: Vec<DisruptorSpec>,
    pub protocol: ProtocolConfig,
    pub harness: HarnessConfig,
}

fn env_error(e: EnvError) -> ConfigError {
    match e {
        EnvError::InvalidParam { name, reason } => {
            let key = match name.as_str() {
                "horizon" => "harness.horizon".to_string(),
                n if n.starts_with("env.") => n.to_string(),
                n => format!("env.{n}"),
            };
            ConfigError::new(key, reason)
        }
        EnvError::Layout(m) => ConfigError::new("env.map", m),
        other => ConfigError::new("env", other.to_string()),
    }
}

fn parse_error(e: toml::de::Error) -> ConfigError {
    ConfigError::new("config", e.to_string().trim_end().replace('\n', " | "))
}

impl RunConfig {
    /// Parses, resolves `env.map_file` against `base_dir` and validates.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(parse_error)?;
        cfg.resolve(base_dir)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_value(value: toml::Table, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        Self::from_toml_str(&toml::to_string(&value).expect("tables serialize"), base_dir)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&read_config(path)?, path.parent())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn resolve(&mut self, base_dir: Option<&Path>) -> Result<(), ConfigError> {
        if let Some(file) = self.env.map_file.take() {
            if self.env.map.is_some() {
                return Err(ConfigError::new("env.map_file", "give either `map` or `map_file`"));
            }
            let path = base_dir.map_or_else(|| Path::new(&file).to_path_buf(), |d| d.join(&file));
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ConfigError::new("env.map_file", format!("{}: {e}", path.display())))?;
            self.env.map = Some(text);
        }
        Ok(())
    }

    /// Builds the configured environment (nominal parameters).
    pub fn build_env(&self) -> Result<Box<dyn Environment>, ConfigError> {
        build_env(&self.env, self.harness.horizon).map_err(env_error)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.env.map_file.is_some() {
            return Err(ConfigError::new("env.map_file", "unresolved map file"));
        }
        if self.protocol.eval_episodes == 0 {
            return Err(ConfigError::new("protocol.eval_episodes", "must be >= 1"));
        }
        let h = &self.harness;
        if h.seeds.is_empty() {
            return Err(ConfigError::new("harness.seeds", "must list at least one seed"));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = h.seeds.iter().find(|s| !seen.insert(**s)) {
            return Err(ConfigError::new("harness.seeds", format!("seed {dup} listed twice")));
        }
        if !(h.cvar_alpha > 0.0 && h.cvar_alpha <= 1.0) {
            return Err(ConfigError::new("harness.cvar_alpha", format!("must lie in (0, 1], got {}", h.cvar_alpha)));
        }
        if h.workers == Some(0) {
            return Err(ConfigError::new("harness.workers", "must be >= 1"));
        }
        let env = self.build_env()?;
        self.agent.build(env.as_ref())?;
        validate_specs(env.as_ref(), &self.disruptors)?;
        if self.protocol.kind == ProtocolKind::PostTraining {
            if let Some(i) = self.disruptors.iter().position(|d| d.schedule.phase == PhaseGate::TrainOnly) {
                return Err(ConfigError::new(
                    format!("disruptor[{i}].schedule.phase"),
                    "train_only contradicts protocol post_training, which trains clean",
                ));
            }
        }
        for (name, values) in &h.eval_param_grid {
            let key = format!("harness.eval_param_grid.{name}");
            let entry =
                env.params().entry(name).ok_or_else(|| ConfigError::new(&key, format!("`{}` has no such parameter", env.id())))?;
            if values.is_empty() {
                return Err(ConfigError::new(&key, "needs at least one value"));
            }
            if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= entry.low && **v <= entry.high)) {
                return Err(ConfigError::new(&key, format!("{v} outside [{}, {}]", entry.low, entry.high)));
            }
        }
        Ok(())
    }

    /// Every combination of the evaluation grid, in name order.
    pub fn grid_points(&self) -> Vec<BTreeMap<String, f64>> {
        let mut points = vec![BTreeMap::new()];
        for (name, values) in &self.harness.eval_param_grid {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(name.clone(), *v);
                        q
                    })
                })
                .collect();
        }
        if self.harness.eval_param_grid.is_empty() {
            return Vec::new();
        }
        points
    }
}

pub fn read_config(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))
}

pub fn parse_table(text: &str) -> Result<toml::Table, ConfigError> {
    text.parse::<toml::Table>().map_err(parse_error)
}

/// Parses a command-line value, keeping the type of the value it replaces.
pub fn parse_scalar(text: &str, like: Option<&toml::Value>) -> toml::Value {
    let t = text.trim();
    match like {
        Some(toml::Value::Float(_)) => {
            if let Ok(f) = t.parse::<f64>() {
                return toml::Value::Float(f);
            }
        }
        Some(toml::Value::String(_)) => return toml::Value::String(t.to_string()),
        _ => {}
    }
    if let Ok(i) = t.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    if let Ok(f) = t.parse::<f64>() {
        return toml::Value::Float(f);
    }
    if let Ok(b) = t.parse::<bool>() {
        return toml::Value::Boolean(b);
    }
    toml::Value::String(t.to_string())
}

/// Sets `dotted` (e.g. `disruptor.0.noise.std`) inside `table`. Every parent
/// must exist; the leaf may be new.
pub fn set_dotted(table: &mut toml::Table, dotted: &str, raw: &str) -> Result<toml::Value, ConfigError> {
    let parts: Vec<&str> = dotted.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::new(dotted, "malformed key"));
    }
    let (first, rest) = parts.split_first().expect("split yields one part");
    let result = if rest.is_empty() {
        let value = parse_scalar(raw, table.get(*first));
        table.insert(first.to_string(), value.clone());
        Ok(value)
    } else {
        match table.get_mut(*first) {
            Some(node) => set_in(node, rest, raw),
            None => Err("key does not resolve"),
        }
    };
    result.map_err(|m| ConfigError::new(dotted, m))
}

fn set_in(node: &mut toml::Value, path: &[&str], raw: &str) -> Result<toml::Value, &'static str> {
    let (head, rest) = path.split_first().expect("non-empty path");
    let slot = match node {
        toml::Value::Table(t) => {
            if rest.is_empty() {
                let value = parse_scalar(raw, t.get(*head));
                t.insert(head.to_string(), value.clone());
                return Ok(value);
            }
            t.get_mut(*head).ok_or("key does not resolve")?
        }
        toml::Value::Array(a) => {
            let i: usize = head.parse().map_err(|_| "array segment must be an index")?;
            a.get_mut(i).ok_or("index out of range")?
        }
        _ => return Err("key does not resolve"),
    };
    if rest.is_empty() {
        let value = parse_scalar(raw, Some(slot));
        *slot = value.clone();
        return Ok(value);
    }
    set_in(slot, rest, raw)
}
