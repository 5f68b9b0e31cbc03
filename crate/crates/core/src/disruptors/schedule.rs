//! Firing schedules: which steps a disruptor acts on, and in which phase.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::rng::StreamRng;

/// Whether the agent is learning or being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Train,
    Eval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseGate {
    TrainOnly,
    EvalOnly,
    #[default]
    Both,
}

impl PhaseGate {
    pub fn admits(self, phase: Phase) -> bool {
        !matches!((self, phase), (PhaseGate::TrainOnly, Phase::Eval) | (PhaseGate::EvalOnly, Phase::Train))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiringRule {
    EveryStep,
    /// Steps `k, 2k, ...` of each episode; step 0 never fires.
    EveryK(u64),
    /// Step 0 of each episode.
    PerEpisode,
    Bernoulli(f64),
    /// Every step of episodes `from..=to`.
    EpisodeWindow { from: u64, to: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    pub rule: FiringRule,
    pub phase: PhaseGate,
    /// A disabled schedule never fires.
    pub enabled: bool,
}

impl Default for Schedule {
    fn default() -> Self {
        Self::new(FiringRule::EveryStep)
    }
}

impl Schedule {
    pub fn new(rule: FiringRule) -> Self {
        Self { rule, phase: PhaseGate::Both, enabled: true }
    }

    pub fn with_phase(mut self, phase: PhaseGate) -> Self {
        self.phase = phase;
        self
    }

    pub fn disabled(mut self) -> Self {
        self.enabled = false;
        self
    }

    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        match self.rule {
            FiringRule::EveryK(0) => Err(ConfigError::new(format!("{key}.k"), "must be >= 1")),
            FiringRule::Bernoulli(q) if !(0.0..=1.0).contains(&q) => {
                Err(ConfigError::new(format!("{key}.q"), format!("must lie in [0, 1], got {q}")))
            }
            FiringRule::EpisodeWindow { from, to } if from > to => {
                Err(ConfigError::new(format!("{key}.from"), format!("{from} exceeds to {to}")))
            }
            _ => Ok(()),
        }
    }
}

/// Position of the pipeline within a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counters {
    pub global_step: u64,
    pub episode: u64,
    pub step_in_episode: u64,
}

/// Decides whether a schedule fires. Phase gating is applied first; only the
/// Bernoulli rule consumes randomness.
pub fn schedule_fires(schedule: &Schedule, counters: Counters, phase: Phase, rng: &mut StreamRng) -> bool {
    if !schedule.enabled || !schedule.phase.admits(phase) {
        return false;
    }
    let step = counters.step_in_episode;
    match schedule.rule {
        FiringRule::EveryStep => true,
        FiringRule::EveryK(k) => step > 0 && step.is_multiple_of(k),
        FiringRule::PerEpisode => step == 0,
        FiringRule::Bernoulli(q) => rng.random::<f64>() < q,
        FiringRule::EpisodeWindow { from, to } => (from..=to).contains(&counters.episode),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RuleKind {
    EveryStep,
    EveryK,
    PerEpisode,
    Bernoulli,
    EpisodeWindow,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRepr {
    kind: RuleKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    from: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    to: Option<u64>,
    #[serde(default)]
    phase: PhaseGate,
    #[serde(default = "enabled_default")]
    enabled: bool,
}

fn enabled_default() -> bool {
    true
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = String;

    fn try_from(r: ScheduleRepr) -> Result<Self, String> {
        let expect_only = |allowed: &[&str]| -> Result<(), String> {
            let present = [("k", r.k.is_some()), ("q", r.q.is_some()), ("from", r.from.is_some()), ("to", r.to.is_some())];
            match present.iter().find(|(name, set)| *set && !allowed.contains(name)) {
                Some((name, _)) => Err(format!("schedule field `{name}` does not apply to kind {:?}", r.kind)),
                None => Ok(()),
            }
        };
        let missing = |name: &str| format!("schedule kind {:?} requires `{name}`", r.kind);
        let rule = match r.kind {
            RuleKind::EveryStep => {
                expect_only(&[])?;
                FiringRule::EveryStep
            }
            RuleKind::PerEpisode => {
                expect_only(&[])?;
                FiringRule::PerEpisode
            }
            RuleKind::EveryK => {
                expect_only(&["k"])?;
                FiringRule::EveryK(r.k.ok_or_else(|| missing("k"))?)
            }
            RuleKind::Bernoulli => {
                expect_only(&["q"])?;
                FiringRule::Bernoulli(r.q.ok_or_else(|| missing("q"))?)
            }
            RuleKind::EpisodeWindow => {
                expect_only(&["from", "to"])?;
                FiringRule::EpisodeWindow {
                    from: r.from.ok_or_else(|| missing("from"))?,
                    to: r.to.ok_or_else(|| missing("to"))?,
                }
            }
        };
        Ok(Schedule { rule, phase: r.phase, enabled: r.enabled })
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        let mut r = ScheduleRepr {
            kind: RuleKind::EveryStep,
            k: None,
            q: None,
            from: None,
            to: None,
            phase: s.phase,
            enabled: s.enabled,
        };
        match s.rule {
            FiringRule::EveryStep => {}
            FiringRule::PerEpisode => r.kind = RuleKind::PerEpisode,
            FiringRule::EveryK(k) => {
                r.kind = RuleKind::EveryK;
                r.k = Some(k);
            }
            FiringRule::Bernoulli(q) => {
                r.kind = RuleKind::Bernoulli;
                r.q = Some(q);
            }
            FiringRule::EpisodeWindow { from, to } => {
                r.kind = RuleKind::EpisodeWindow;
                r.from = Some(from);
                r.to = Some(to);
            }
        }
        r
    }
}
