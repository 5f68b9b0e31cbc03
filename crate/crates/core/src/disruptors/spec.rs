use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryKind, AdversarySpec};
use crate::disruptors::noise::NoiseModel;
use crate::disruptors::params::ParamSchedule;
use crate::disruptors::schedule::Schedule;
use crate::error::ConfigError;

/// Interaction channel a disruptor acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    State,
    Reward,
    Cost,
    Action,
    EnvParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Random,
    Adversarial,
    InternalShift,
    External,
}

/// Borrowed view of a validated disruptor's mode and payload.
#[derive(Debug, Clone, Copy)]
pub enum Mode<'a> {
    Random(&'a NoiseModel),
    Adversarial(&'a AdversarySpec),
    InternalShift(&'a ParamSchedule),
    External(&'a ParamSchedule),
}

/// One disruption channel as it appears in a `[[disruptor]]` table.
///
/// The payload matching `mode` must be present: `noise` for random,
/// `adversary` for adversarial, `params` for internal_shift / external.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisruptorSpec {
    pub id: String,
    pub source: Source,
    pub mode: ModeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<AdversarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamSchedule>,
    #[serde(default)]
    pub schedule: Schedule,
    /// Agents whose components may be disrupted (multi-agent environments).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_mask: Option<BTreeSet<usize>>,
}

impl DisruptorSpec {
    pub fn random(id: &str, source: Source, noise: NoiseModel, schedule: Schedule) -> Self {
        Self {
            id: id.into(),
            source,
            mode: ModeKind::Random,
            noise: Some(noise),
            adversary: None,
            params: None,
            schedule,
            agent_mask: None,
        }
    }

    pub fn adversarial(id: &str, source: Source, adversary: AdversarySpec, schedule: Schedule) -> Self {
        Self {
            mode: ModeKind::Adversarial,
            noise: None,
            adversary: Some(adversary),
            ..Self::random(id, source, NoiseModel::gaussian(0.0, 0.0), schedule)
        }
    }

    pub fn internal_shift(id: &str, params: ParamSchedule, schedule: Schedule) -> Self {
        Self {
            source: Source::EnvParams,
            mode: ModeKind::InternalShift,
            noise: None,
            params: Some(params),
            ..Self::random(id, Source::EnvParams, NoiseModel::gaussian(0.0, 0.0), schedule)
        }
    }

    pub fn external(id: &str, params: ParamSchedule, schedule: Schedule) -> Self {
        Self { mode: ModeKind::External, ..Self::internal_shift(id, params, schedule) }
    }

    pub fn with_mask(mut self, agents: impl IntoIterator<Item = usize>) -> Self {
        self.agent_mask = Some(agents.into_iter().collect());
        self
    }

    /// Mode and payload. Only meaningful after [`DisruptorSpec::validate`].
    pub fn mode(&self) -> Mode<'_> {
        match self.mode {
            ModeKind::Random => Mode::Random(self.noise.as_ref().expect("validated")),
            ModeKind::Adversarial => Mode::Adversarial(self.adversary.as_ref().expect("validated")),
            ModeKind::InternalShift => Mode::InternalShift(self.params.as_ref().expect("validated")),
            ModeKind::External => Mode::External(self.params.as_ref().expect("validated")),
        }
    }

    /// Structural checks that need no environment. `key` is e.g. `disruptor[2]`.
    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        if self.id.trim().is_empty() {
            return Err(ConfigError::new(format!("{key}.id"), "must not be empty"));
        }
        let env_source = self.source == Source::EnvParams;
        let env_mode = matches!(self.mode, ModeKind::InternalShift | ModeKind::External);
        if env_source != env_mode {
            return Err(ConfigError::new(
                format!("{key}.mode"),
                format!("mode {:?} cannot drive source {:?}", self.mode, self.source),
            ));
        }
        let present = [
            ("noise", self.noise.is_some(), self.mode == ModeKind::Random),
            ("adversary", self.adversary.is_some(), self.mode == ModeKind::Adversarial),
            ("params", self.params.is_some(), env_mode),
        ];
        for (name, is_set, wanted) in present {
            match (is_set, wanted) {
                (false, true) => {
                    return Err(ConfigError::new(format!("{key}.{name}"), format!("required by mode {:?}", self.mode)))
                }
                (true, false) => {
                    return Err(ConfigError::new(format!("{key}.{name}"), format!("not used by mode {:?}", self.mode)))
                }
                _ => {}
            }
        }
        if let Some(n) = &self.noise {
            n.validate(&format!("{key}.noise"))?;
        }
        if let Some(a) = &self.adversary {
            a.validate(&format!("{key}.adversary"))?;
            if a.kind == AdversaryKind::Greedy && self.source != Source::Action {
                return Err(ConfigError::new(
                    format!("{key}.adversary.kind"),
                    "the greedy adversary simulates actions and only attacks source = action",
                ));
            }
        }
        if let Some(p) = &self.params {
            p.validate(&format!("{key}.params"))?;
        }
        self.schedule.validate(&format!("{key}.schedule"))?;
        if self.agent_mask.is_some() && !matches!(self.source, Source::State | Source::Action) {
            return Err(ConfigError::new(format!("{key}.agent_mask"), "only state and action disruptors take a mask"));
        }
        Ok(())
    }
}
