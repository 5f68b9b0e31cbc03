//! Plain-Rust side of the browser demo, testable natively.

use std::collections::BTreeMap;

use thiserror::Error;

use dmdp::agents::{AgentConfig, CemPolicy};
use dmdp::disruptors::{DisruptorSpec, FiringRule, NoiseModel, ParamRule, ParamSchedule, Pipeline, Schedule, Source};
use dmdp::envs::{build_env, EnvOptions, GridLayout};
use dmdp::harness::{
    maze_mdp, perturbed_kernel, run_experiment, value_iteration, HarnessConfig, ProtocolConfig, ProtocolKind, RunConfig,
};
use dmdp::mdp::Value;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Run(String),
}

fn run_err(e: impl std::fmt::Display) -> DemoError {
    DemoError::Run(e.to_string())
}

pub const PENDULUM_PARAMS: [&str; 3] = ["gravity", "wind", "length"];

/// Value a pendulum parameter actually takes at the start of episodes
/// `0..episodes` under a per-episode rule, after clamping to its bounds.
///
/// `rule` is `sinusoid` (`a + b * sin(c * episode)`) or `uniform` (draw in `[a, b]`).
pub fn schedule_curve(param: &str, rule: &str, a: f64, b: f64, c: f64, episodes: usize, seed: u64) -> Result<Vec<f64>, DemoError> {
    if !PENDULUM_PARAMS.contains(&param) {
        return Err(DemoError::Input(format!("unknown parameter `{param}`")));
    }
    let rule = match rule {
        "sinusoid" => ParamRule::sinusoid(a, b, c),
        "uniform" if a <= b => ParamRule::uniform(a, b),
        "uniform" => return Err(DemoError::Input(format!("low {a} exceeds high {b}"))),
        other => return Err(DemoError::Input(format!("unknown rule `{other}`"))),
    };
    let spec = DisruptorSpec::internal_shift("curve", ParamSchedule::new().with(param, rule), Schedule::new(FiringRule::PerEpisode));
    let env = build_env(&EnvOptions::new("windy_pendulum"), Some(1)).map_err(run_err)?;
    let mut p = Pipeline::new(env, vec![spec], seed).map_err(run_err)?;
    (0..episodes as u64)
        .map(|e| {
            p.reset(e);
            let t = p.execute(Value::Vector(vec![0.0])).map_err(run_err)?;
            Ok(t.env_params[param])
        })
        .collect()
}

/// Bounds of a pendulum parameter as `(nominal, low, high)`.
pub fn param_bounds(param: &str) -> Option<(f64, f64, f64)> {
    let env = build_env(&EnvOptions::new("windy_pendulum"), None).ok()?;
    env.params().entry(param).map(|e| (e.nominal, e.low, e.high))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub theta: Vec<f64>,
    pub observed_theta: Vec<f64>,
    pub torque: Vec<f64>,
    pub total_return: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutSpec {
    pub gains: [f64; 2],
    pub gravity: f64,
    pub wind: f64,
    pub length: f64,
    /// Gaussian observation noise; 0 disables it.
    pub obs_std: f64,
    pub steps: usize,
    pub seed: u64,
}

/// One episode of the linear controller `u = k1 * theta + k2 * theta_dot`
/// acting on (possibly noisy) observations.
pub fn pendulum_rollout(spec: &RolloutSpec) -> Result<Rollout, DemoError> {
    if !(spec.obs_std >= 0.0 && spec.obs_std.is_finite()) {
        return Err(DemoError::Input(format!("observation noise std must be >= 0, got {}", spec.obs_std)));
    }
    let mut env = build_env(&EnvOptions::new("windy_pendulum"), Some(spec.steps.max(1))).map_err(run_err)?;
    let params = BTreeMap::from([
        ("gravity".to_string(), spec.gravity),
        ("wind".to_string(), spec.wind),
        ("length".to_string(), spec.length),
    ]);
    env.set_params(&params).map_err(run_err)?;
    let specs = if spec.obs_std > 0.0 {
        vec![DisruptorSpec::random("obs", Source::State, NoiseModel::gaussian(0.0, spec.obs_std), Schedule::default())]
    } else {
        Vec::new()
    };
    let mut p = Pipeline::new(env, specs, spec.seed).map_err(run_err)?;
    p.reset(spec.seed);
    let mut out = Rollout { theta: Vec::new(), observed_theta: Vec::new(), torque: Vec::new(), total_return: 0.0 };
    while !p.is_done() {
        let t = p
            .step_with(|o| Value::Vector(vec![CemPolicy::torque(spec.gains, o.state.as_vector().unwrap_or(&[0.0, 0.0]))]))
            .map_err(run_err)?;
        let first = |v: &Value| v.as_vector().map_or(0.0, |x| x[0]);
        out.theta.push(first(&t.true_state));
        out.observed_theta.push(first(&t.observed_state));
        out.torque.push(first(&t.executed_action));
        out.total_return += t.true_reward;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradationPoint {
    pub p: f64,
    pub mean_return: f64,
    pub ci95: f64,
    pub nominal_return: f64,
    /// Optimal expected return under action replacement (NaN for the state channel).
    pub oracle: f64,
}

/// Tabular Q-learning on a 5x5 maze with `discrete_replace` noise of each
/// probability in `ps` on `channel` (`state` or `action`), trained in-training.
pub fn maze_degradation(channel: &str, ps: &[f64], train_episodes: usize, seeds: usize) -> Result<Vec<DegradationPoint>, DemoError> {
    let source = match channel {
        "state" => Source::State,
        "action" => Source::Action,
        other => return Err(DemoError::Input(format!("unknown channel `{other}`"))),
    };
    if seeds == 0 {
        return Err(DemoError::Input("need at least one seed".into()));
    }
    let layout = GridLayout::open(5, 5).map_err(run_err)?;
    let base = maze_mdp(&layout, 0.0, -1.0);
    ps.iter()
        .map(|&p| {
            let cfg = RunConfig {
                env: EnvOptions::sized("grid_maze", 5, 5),
                agent: AgentConfig::tabular_q(),
                disruptors: vec![DisruptorSpec::random("noise", source, NoiseModel::discrete_replace(p), Schedule::default())],
                protocol: ProtocolConfig { kind: ProtocolKind::InTraining, train_episodes, eval_episodes: 20 },
                harness: HarnessConfig {
                    seeds: (1..=seeds as u64).collect(),
                    cvar_alpha: 0.1,
                    horizon: None,
                    out_dir: None,
                    eval_param_grid: BTreeMap::new(),
                    workers: None,
                },
            };
            let r = run_experiment(&cfg).map_err(run_err)?;
            let (nominal, _, _) = r.seed_stat("nominal_return").unwrap_or((f64::NAN, 0.0, 0.0));
            let oracle = match source {
                Source::Action => {
                    let k = perturbed_kernel(&base, p).map_err(run_err)?;
                    value_iteration(&k, 1.0, 1e-10).map_err(run_err)?.values[layout.index(layout.start)]
                }
                _ => f64::NAN,
            };
            Ok(DegradationPoint { p, mean_return: r.aggregate.mean_return, ci95: r.aggregate.ci95, nominal_return: nominal, oracle })
        })
        .collect()
}
