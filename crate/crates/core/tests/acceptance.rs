//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

// Oracle tables are pasted at full printed precision.
#![allow(clippy::excessive_precision)]
// `ensure!` negates on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::Rng;

use dmdp::adversary::{
    build_llm_prompt, external_adversary_roundtrip, AdversaryError, AdversaryKind, AdversaryRequest, AdversarySpec,
    ChildProcessEndpoint, Endpoint,
};
use dmdp::cli::{cmd_run, RunOpts};
use dmdp::disruptors::{
    DisruptorSpec, FiringRule, NoiseModel, ParamRule, ParamSchedule, Pipeline, PipelineError, Schedule, Source,
};
use dmdp::envs::{build_env, EnvOptions, GridLayout, ENV_IDS};
use dmdp::harness::{cvar, maze_mdp, perturbed_kernel, run_experiment, value_iteration, ExperimentResult, RunConfig};
use dmdp::mdp::{Environment, Value};
use dmdp::rng::stream;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() {
    let criteria: [Check; 11] = [
        ("identity pipeline equals bare environment", identity_pipeline),
        ("parameter schedule formulas", schedule_formulas),
        ("value iteration oracle vs Monte Carlo", oracle_equivalence),
        ("degradation with state noise level", degradation),
        ("attack frequency effect", frequency),
        ("partial attack ordering", partial_attack),
        ("protocol asymmetry", protocol_asymmetry),
        ("noise moments", noise_moments),
        ("adversary protocol", adversary_protocol),
        ("determinism of run artifacts", determinism),
        ("metric properties", metric_properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1} s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- 1

fn random_spec(i: usize, env: &dyn Environment, rng: &mut impl Rng) -> DisruptorSpec {
    let schedule = Schedule::new(match rng.random_range(0..4) {
        0 => FiringRule::EveryStep,
        1 => FiringRule::EveryK(rng.random_range(1..5)),
        2 => FiringRule::PerEpisode,
        _ => FiringRule::Bernoulli(rng.random()),
    })
    .disabled();
    let id = format!("d{i}");
    let source = *[Source::State, Source::Action, Source::Reward, Source::Cost, Source::EnvParams].choose(rng).unwrap();
    let space = match source {
        Source::State => Some(env.state_space()),
        Source::Action => Some(env.action_space()),
        _ => None,
    };
    let continuous = space.as_ref().is_none_or(|s| s.is_continuous());
    let spec = match source {
        Source::EnvParams => {
            let names: Vec<&str> = env.params().names().collect();
            let name = names.choose(rng).unwrap();
            let e = env.params().entry(name).unwrap();
            let ps = ParamSchedule::new().with(name, ParamRule::uniform(e.low, e.high));
            if rng.random() {
                DisruptorSpec::internal_shift(&id, ps, schedule)
            } else {
                DisruptorSpec::external(&id, ps, schedule)
            }
        }
        _ if rng.random_bool(0.3) => {
            // The greedy adversary only attacks actions.
            let kind = if source == Source::Action && rng.random() { AdversaryKind::Greedy } else { AdversaryKind::RandomInSet };
            let (lo, hi) = match &space {
                Some(s) => s.bounds(),
                None => (vec![-1.0], vec![1.0]),
            };
            DisruptorSpec::adversarial(&id, source, AdversarySpec::new(kind, lo, hi), schedule)
        }
        _ => {
            let noise = if !continuous {
                NoiseModel::discrete_replace(rng.random())
            } else if rng.random() {
                NoiseModel::gaussian(0.0, rng.random_range(0.01..1.0))
            } else {
                NoiseModel::uniform(-0.5, 0.5)
            };
            DisruptorSpec::random(&id, source, noise, schedule)
        }
    };
    if env.num_agents() > 1 && matches!(source, Source::State | Source::Action) && rng.random() {
        spec.with_mask([rng.random_range(0..env.num_agents())])
    } else {
        spec
    }
}

fn identity_pipeline() -> Outcome {
    let mut rng = stream(2024);
    let mut steps = 0usize;
    for cfg in 0..200 {
        let (id, _) = ENV_IDS[cfg % ENV_IDS.len()];
        let horizon = rng.random_range(5..60);
        let make = || build_env(&EnvOptions::new(id), Some(horizon)).unwrap();
        let probe = make();
        let mut specs = Vec::new();
        let mut taken = BTreeSet::new();
        for i in 0..rng.random_range(1..6) {
            let s = random_spec(i, probe.as_ref(), &mut rng);
            // At most one environment disruptor may drive a parameter.
            if let Some(ps) = &s.params {
                if !ps.names().all(|n| taken.insert(n.to_string())) {
                    continue;
                }
            }
            specs.push(s);
        }
        let seed: u64 = rng.random();
        let mut disrupted = Pipeline::new(make(), specs, seed).map_err(|e| format!("config {cfg}: {e}"))?;
        let mut bare = make();
        for ep in 0..3u64 {
            let env_seed = seed ^ ep;
            disrupted.reset(env_seed);
            let first = bare.reset(env_seed);
            ensure!(disrupted.observe().unwrap().state == first, "config {cfg}: initial state differs");
            loop {
                let action = bare.action_space().sample(&mut rng);
                let before = bare.state();
                let params = bare.params().snapshot();
                let tr = disrupted.execute(action.clone()).map_err(|e| format!("config {cfg}: {e}"))?;
                let out = bare.step(&action).unwrap();
                let same = tr.true_state == before
                    && tr.observed_state == before
                    && tr.agent_action == action
                    && tr.executed_action == action
                    && tr.true_reward.to_bits() == out.reward.to_bits()
                    && tr.observed_reward.to_bits() == out.reward.to_bits()
                    && tr.true_cost.to_bits() == out.cost.to_bits()
                    && tr.observed_cost.to_bits() == out.cost.to_bits()
                    && tr.fired.is_empty()
                    && tr.clamps == 0
                    && tr.env_params == params
                    && tr.terminated == out.terminated
                    && tr.truncated == out.truncated
                    && tr.info == out.info
                    && disrupted.env().state() == out.next_state;
                ensure!(same, "config {cfg} ({id}) episode {ep} step {}: transcript differs", tr.t);
                steps += 1;
                if out.terminated || out.truncated {
                    break;
                }
            }
        }
    }
    Ok(format!("200 configs, {steps} steps bit-identical"))
}

// ---------------------------------------------------------------- 2

// 30-digit evaluations of base + amp * sin(freq * i) for i = 0..=10.
const GRAVITY: [f64; 11] = [
    14.715, 17.066582266853616, 18.842415180482732, 19.607712909292887, 19.175103878579969, 17.650505866829907,
    15.407193639533649, 12.994408268182415, 11.002883760514612, 9.9202147728526989, 10.011476432777306,
];
const WIND: [f64; 11] = [
    1.0, 1.0958851077208406, 1.1682941969615793, 1.1994989973208109, 1.1818594853651363, 1.1196944288207913,
    1.0282240016119734, 0.92984335446207603, 0.84863950093841435, 0.80449397646698059, 0.80821514506737231,
];
const WALKER_LENGTH: [f64; 11] = [
    0.2, 0.22955202066613396, 0.25646424733950354, 0.27833269096274834, 0.29320390859672263, 0.29974949866040544,
    0.29738476308781952, 0.28632093666488738, 0.26754631805511509, 0.24273798802338299, 0.21411200080598672,
];
const HOPPER_LENGTH: [f64; 11] = [
    0.4, 0.41986693307950612, 0.43894183423086505, 0.45646424733950354, 0.47173560908995228, 0.48414709848078965,
    0.49320390859672263, 0.49854497299884602, 0.49995736030415052, 0.49738476308781952, 0.49092974268256817,
];

/// Parameter values seen at step 0 of episodes 0..n on a driven pendulum.
fn driven_params(specs: Vec<DisruptorSpec>, n: usize) -> Vec<std::collections::BTreeMap<String, f64>> {
    let env = build_env(&EnvOptions::new("windy_pendulum"), Some(3)).unwrap();
    let mut p = Pipeline::new(env, specs, 5).unwrap();
    (0..n as u64)
        .map(|e| {
            p.reset(e);
            p.execute(Value::Vector(vec![0.0])).unwrap().env_params
        })
        .collect()
}

fn schedule_formulas() -> Outcome {
    let per_episode = || Schedule::new(FiringRule::PerEpisode);
    let shifts = driven_params(
        vec![
            DisruptorSpec::internal_shift(
                "g",
                ParamSchedule::new().with("gravity", ParamRule::sinusoid(14.715, 4.905, 0.5)),
                per_episode(),
            ),
            DisruptorSpec::external("w", ParamSchedule::new().with("wind", ParamRule::sinusoid(1.0, 0.2, 0.5)), per_episode()),
        ],
        11,
    );
    let walker = driven_params(
        vec![DisruptorSpec::internal_shift(
            "l",
            ParamSchedule::new().with("length", ParamRule::sinusoid(0.2, 0.1, 0.3)),
            per_episode(),
        )],
        11,
    );
    let hopper = driven_params(
        vec![DisruptorSpec::internal_shift(
            "l",
            ParamSchedule::new().with("length", ParamRule::sinusoid(0.4, 0.1, 0.2)),
            per_episode(),
        )],
        11,
    );
    let mut worst: f64 = 0.0;
    for i in 0..11 {
        for (got, want, what) in [
            (shifts[i]["gravity"], GRAVITY[i], "gravity"),
            (shifts[i]["wind"], WIND[i], "wind"),
            (walker[i]["length"], WALKER_LENGTH[i], "walker length"),
            (hopper[i]["length"], HOPPER_LENGTH[i], "hopper length"),
        ] {
            let err = (got - want).abs();
            ensure!(err <= 1e-9, "{what} at episode {i}: {got} vs {want}");
            worst = worst.max(err);
        }
    }
    let draws = driven_params(
        vec![DisruptorSpec::internal_shift(
            "u",
            ParamSchedule::new().with("gravity", ParamRule::uniform(9.81, 19.82)),
            per_episode(),
        )],
        10_000,
    );
    let g: Vec<f64> = draws.iter().map(|d| d["gravity"]).collect();
    ensure!(g.iter().all(|x| (9.81..=19.82).contains(x)), "uniform draw out of bounds");
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    ensure!((mean - 14.815).abs() < 0.1, "uniform draw mean {mean}");
    Ok(format!("44 schedule values within {worst:.1e}; 10^4 uniform draws in bounds, mean {mean:.3}"))
}

// ---------------------------------------------------------------- 3

fn oracle_equivalence() -> Outcome {
    let layout = GridLayout::open(5, 5).unwrap();
    let p = 0.2;
    let mdp = perturbed_kernel(&maze_mdp(&layout, 0.0, -1.0), p).unwrap();
    let vt = value_iteration(&mdp, 1.0, 1e-12).unwrap();
    let v_start = vt.values[layout.index(layout.start)];

    let episodes = 100_000u64;
    let threads = 4u64;
    let total: f64 = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let policy = vt.policy.clone();
                scope.spawn(move || {
                    let env = build_env(&EnvOptions::sized("grid_maze", 5, 5), Some(10_000)).unwrap();
                    let spec = DisruptorSpec::random(
                        "replace",
                        Source::Action,
                        NoiseModel::discrete_replace(p),
                        Schedule::new(FiringRule::EveryStep),
                    );
                    let mut pipe = Pipeline::new(env, vec![spec], 77 + w).unwrap();
                    let mut sum = 0.0;
                    for e in (w..episodes).step_by(threads as usize) {
                        pipe.reset(e);
                        loop {
                            let tr = pipe.step_with(|o| Value::Index(policy[o.state.as_index().unwrap()])).unwrap();
                            sum += tr.true_reward;
                            if tr.terminated || tr.truncated {
                                break;
                            }
                        }
                    }
                    sum
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    let mc = total / episodes as f64;
    let rel = ((mc - v_start) / v_start).abs();
    ensure!(rel <= 0.02, "Monte Carlo {mc:.4} vs value iteration {v_start:.4} ({:.2}%)", rel * 100.0);
    Ok(format!("V(start) {v_start:.4}, Monte Carlo {mc:.4} over 10^5 episodes ({:.2}%)", rel * 100.0))
}

// ---------------------------------------------------------------- 4 to 7

const SEEDS: usize = 20;
const TRAIN: usize = 1000;
const EVAL: usize = 50;

fn seeds() -> String {
    (1..=SEEDS).map(|s| s.to_string()).collect::<Vec<_>>().join(", ")
}

fn maze_config(source: &str, p: f64, schedule: &str, protocol: &str) -> RunConfig {
    let text = format!(
        r#"
[env]
id = "grid_maze"
width = 5
height = 5

[agent]
id = "tabular_q"

[[disruptor]]
id = "noise"
source = "{source}"
mode = "random"
noise = {{ family = "discrete_replace", p = {p} }}
schedule = {schedule}

[protocol]
kind = "{protocol}"
train_episodes = {TRAIN}
eval_episodes = {EVAL}

[harness]
seeds = [{}]
"#,
        seeds()
    );
    RunConfig::from_toml_str(&text, None).unwrap()
}

fn team_config(schedule: &str) -> RunConfig {
    let text = format!(
        r#"
[env]
id = "two_agent_grid"
width = 5
height = 5

[agent]
id = "independent_q_team"

[[disruptor]]
id = "noise"
source = "action"
mode = "random"
noise = {{ family = "discrete_replace", p = 0.3 }}
{schedule}

[protocol]
kind = "in_training"
train_episodes = {TRAIN}
eval_episodes = {EVAL}

[harness]
seeds = [{}]
"#,
        seeds()
    );
    RunConfig::from_toml_str(&text, None).unwrap()
}

const EVERY_STEP: &str = r#"{ kind = "every_step" }"#;

/// (mean, ci95) of a metric across seed means.
fn stat(r: &ExperimentResult, metric: &str) -> (f64, f64) {
    let (m, _, ci) = r.seed_stat(metric).unwrap();
    (m, ci)
}

fn separated(high: (f64, f64), low: (f64, f64)) -> bool {
    high.0 - high.1 > low.0 + low.1
}

fn show(label: &str, s: (f64, f64)) -> String {
    format!("{label} {:.3} ± {:.3}", s.0, s.1)
}

fn degradation() -> Outcome {
    let runs: Vec<(f64, (f64, f64))> = [0.0, 0.1, 0.3]
        .into_iter()
        .map(|p| (p, stat(&run_experiment(&maze_config("state", p, EVERY_STEP, "in_training")).unwrap(), "mean_return")))
        .collect();
    let text = runs.iter().map(|(p, s)| show(&format!("p={p}"), *s)).collect::<Vec<_>>().join(", ");
    ensure!(runs[0].1 .0 > runs[1].1 .0 && runs[1].1 .0 > runs[2].1 .0, "not strictly decreasing: {text}");
    ensure!(separated(runs[0].1, runs[2].1), "p=0 and p=0.3 intervals overlap: {text}");
    Ok(text)
}

fn frequency() -> Outcome {
    let runs: Vec<(u64, (f64, f64))> = [1u64, 10, 100]
        .into_iter()
        .map(|k| {
            let schedule = format!(r#"{{ kind = "every_k", k = {k} }}"#);
            (k, stat(&run_experiment(&maze_config("state", 0.3, &schedule, "in_training")).unwrap(), "mean_return"))
        })
        .collect();
    let text = runs.iter().map(|(k, s)| show(&format!("k={k}"), *s)).collect::<Vec<_>>().join(", ");
    ensure!(runs[0].1 .0 <= runs[1].1 .0 && runs[1].1 .0 <= runs[2].1 .0, "not non-decreasing: {text}");
    ensure!(separated(runs[2].1, runs[0].1), "k=1 and k=100 intervals overlap: {text}");
    Ok(text)
}

fn partial_attack() -> Outcome {
    let full = stat(&run_experiment(&team_config("agent_mask = [0, 1]")).unwrap(), "mean_return");
    let partial = stat(&run_experiment(&team_config("agent_mask = [0]")).unwrap(), "mean_return");
    let none = stat(
        &run_experiment(&team_config(r#"schedule = { kind = "every_step", enabled = false }"#)).unwrap(),
        "mean_return",
    );
    let text = format!("{}, {}, {}", show("none", none), show("partial", partial), show("full", full));
    ensure!(none.0 >= partial.0 && partial.0 >= full.0, "ordering violated: {text}");
    ensure!(separated(none, full), "none and full intervals overlap: {text}");
    Ok(text)
}

fn protocol_asymmetry() -> Outcome {
    let trained_under_attack =
        stat(&run_experiment(&maze_config("action", 0.3, EVERY_STEP, "in_training")).unwrap(), "nominal_return");
    let clean_then_attacked =
        stat(&run_experiment(&maze_config("action", 0.3, EVERY_STEP, "post_training")).unwrap(), "mean_return");
    let text = format!(
        "{}, {}",
        show("in-training nominal", trained_under_attack),
        show("post-training attacked", clean_then_attacked)
    );
    ensure!(
        trained_under_attack.0 >= clean_then_attacked.0 && separated(trained_under_attack, clean_then_attacked),
        "{text}"
    );
    // State-channel variant, reported for reference only.
    let state_in = stat(&run_experiment(&maze_config("state", 0.3, EVERY_STEP, "in_training")).unwrap(), "nominal_return");
    let state_post = stat(&run_experiment(&maze_config("state", 0.3, EVERY_STEP, "post_training")).unwrap(), "mean_return");
    Ok(format!(
        "action channel: {text}; state channel (informational): {}, {}",
        show("in-training nominal", state_in),
        show("post-training attacked", state_post)
    ))
}

// ---------------------------------------------------------------- 8

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn noise_moments() -> Outcome {
    let n = 100_000;
    let mut out = Vec::new();
    for (i, sigma) in [0.1, 0.15].into_iter().enumerate() {
        let model = NoiseModel::gaussian(0.0, sigma);
        let mut rng = stream(10 + i as u64);
        let xs: Vec<f64> = (0..n).map(|_| model.sample_delta(&mut rng)).collect();
        let (m, s) = moments(&xs);
        ensure!(m.abs() <= 0.005 && (s - sigma).abs() <= 0.005, "gaussian σ={sigma}: mean {m}, std {s}");
        out.push(format!("σ={sigma}: mean {m:+.4} std {s:.4}"));
    }
    let model = NoiseModel::uniform(0.2, 0.8);
    let mut rng = stream(12);
    let xs: Vec<f64> = (0..n).map(|_| model.sample_delta(&mut rng)).collect();
    ensure!(xs.iter().all(|x| (0.2..=0.8).contains(x)), "uniform delta out of bounds");
    let (m, s) = moments(&xs);
    let sd = 0.6 / 12f64.sqrt();
    ensure!((m - 0.5).abs() <= 0.005 && (s - sd).abs() <= 0.005, "uniform: mean {m}, std {s}");
    out.push(format!("uniform: mean {m:.4} std {s:.4}"));
    Ok(out.join("; "))
}

// ---------------------------------------------------------------- 9

fn mock(args: &[&str]) -> ChildProcessEndpoint {
    let mut cmd = vec![env!("CARGO_BIN_EXE_dmdp").to_string(), "adversary-mock".into()];
    cmd.extend(args.iter().map(|s| s.to_string()));
    ChildProcessEndpoint::spawn(&cmd).unwrap()
}

fn adversary_protocol() -> Outcome {
    let req = AdversaryRequest::new(vec![0.5, 0.1], vec![0.2, 0.0], vec![0.8, 0.3]).with_rewards(-1.0, -2.0);
    let t = Duration::from_secs(5);
    let call = |ep: &mut dyn Endpoint, timeout| external_adversary_roundtrip(&req, ep, timeout);

    let mut echo = mock(&["--mode", "echo"]);
    ensure!(call(&mut echo, t).ok().map(|r| r.value) == Some(vec![0.5, 0.1]), "echo round trip");
    ensure!(call(&mut echo, t).ok().map(|r| r.value) == Some(vec![0.5, 0.1]), "second echo round trip");
    let mut constant = mock(&["--mode", "constant", "--value", "0.7,-0.4"]);
    ensure!(call(&mut constant, t).ok().map(|r| r.value) == Some(vec![0.7, -0.4]), "constant round trip");
    let mut short = mock(&["--mode", "constant", "--value", "1"]);
    ensure!(matches!(call(&mut short, t), Err(AdversaryError::Malformed(_))), "wrong-length constant accepted");
    let mut malformed = mock(&["--mode", "malformed"]);
    ensure!(matches!(call(&mut malformed, t), Err(AdversaryError::Malformed(_))), "malformed reply accepted");
    let mut garbage = mock(&["--mode", "garbage"]);
    ensure!(matches!(call(&mut garbage, t), Err(AdversaryError::Malformed(_))), "garbage reply accepted");
    let mut silent = mock(&["--mode", "silent"]);
    ensure!(matches!(call(&mut silent, Duration::from_millis(200)), Err(AdversaryError::Timeout(200))), "no timeout");
    ensure!(matches!(call(&mut silent, t), Err(AdversaryError::Poisoned)), "endpoint reused after timeout");
    let mut dead = mock(&["--mode", "no-such-mode"]);
    ensure!(matches!(call(&mut dead, t), Err(AdversaryError::Closed | AdversaryError::Io(_))), "exited mock not reported");

    // Through the pipeline: an out-of-region reply is clamped, garbage ends the episode.
    let external = |args: &[&str]| {
        let mut spec = AdversarySpec::new(AdversaryKind::External, vec![-0.5], vec![0.5]);
        let mut cmd = vec![env!("CARGO_BIN_EXE_dmdp").to_string(), "adversary-mock".into()];
        cmd.extend(args.iter().map(|s| s.to_string()));
        spec.command = Some(cmd);
        let env = build_env(&EnvOptions::new("windy_pendulum"), Some(5)).unwrap();
        let d = DisruptorSpec::adversarial("llm", Source::State, spec, Schedule::new(FiringRule::EveryStep));
        Pipeline::new(env, vec![d], 1).unwrap()
    };
    let mut p = external(&["--mode", "constant", "--value", "3,0.25"]);
    p.reset(0);
    let tr = p.execute(Value::Vector(vec![0.0])).map_err(|e| e.to_string())?;
    ensure!(tr.observed_state == Value::Vector(vec![0.5, 0.25]) && tr.clamps == 1, "clamping: {:?}", tr.observed_state);
    let mut p = external(&["--mode", "garbage"]);
    p.reset(0);
    ensure!(
        matches!(p.observe(), Err(PipelineError::Adversary { ref id, error: AdversaryError::Malformed(_) }) if id == "llm"),
        "garbage reply not surfaced with the disruptor id"
    );
    ensure!(p.is_done(), "episode continues after adversary failure");

    let prompt = build_llm_prompt(&req);
    ensure!(prompt.contains("we want you as an adversary policy"), "prompt sentence missing");
    Ok("echo, constant, wrong length, malformed, garbage, timeout, poisoned, closed, clamp, pipeline error, prompt".into())
}

// ---------------------------------------------------------------- 10

const DETERMINISM_CONFIGS: [&str; 2] = [
    r#"
[env]
id = "safe_grid_maze"
slip = 0.1

[agent]
id = "penalized_q"
lambda = 0.5

[[disruptor]]
id = "obs"
source = "state"
mode = "random"
noise = { family = "discrete_replace", p = 0.2 }
schedule = { kind = "bernoulli", q = 0.5 }

[[disruptor]]
id = "slip"
source = "env_params"
mode = "internal_shift"
params = { slip = { rule = "uniform_draw", low = 0.0, high = 0.3 } }
schedule = { kind = "per_episode" }

[[disruptor]]
id = "act"
source = "action"
mode = "adversarial"
adversary = { kind = "greedy", region_low = [0], region_high = [3] }
schedule = { kind = "every_k", k = 4 }

[protocol]
kind = "in_training"
train_episodes = 60
eval_episodes = 10

[harness]
seeds = [3, 1, 4]
workers = 3
eval_param_grid = { slip = [0.0, 0.2] }
"#,
    r#"
[env]
id = "windy_pendulum"

[agent]
id = "cem"
population = 8
episodes_per_candidate = 1

[[disruptor]]
id = "obs"
source = "state"
mode = "random"
noise = { family = "gaussian", std = 0.05 }

[[disruptor]]
id = "gravity"
source = "env_params"
mode = "internal_shift"
params = { gravity = { rule = "sinusoid", base = 14.715, amp = 4.905, freq = 0.5 } }
schedule = { kind = "per_episode" }

[protocol]
kind = "post_training"
train_episodes = 24
eval_episodes = 4

[harness]
seeds = [7, 8]
horizon = 60
eval_param_grid = { wind = [0.5, 1.5] }
"#,
];

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut bytes = 0;
    for (i, text) in DETERMINISM_CONFIGS.iter().enumerate() {
        let config = tmp.path().join(format!("config-{i}.toml"));
        std::fs::write(&config, text).unwrap();
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out: PathBuf = tmp.path().join(format!("out-{i}-{run}"));
            let opts = RunOpts { config: config.clone(), out: Some(out.clone()), seed_override: None, workers: None };
            cmd_run(&opts).map_err(|e| format!("config {i}: {e}"))?;
            let episodes = std::fs::read(out.join("episodes.jsonl")).unwrap();
            let summary = std::fs::read(out.join("summary.csv")).unwrap();
            outputs.push((episodes, summary));
        }
        ensure!(outputs[0].0 == outputs[1].0, "config {i}: episodes.jsonl differs between runs");
        ensure!(outputs[0].1 == outputs[1].1, "config {i}: summary.csv differs between runs");
        bytes += outputs[0].0.len() + outputs[0].1.len();
    }
    Ok(format!("2 configs run twice, {bytes} bytes identical"))
}

// ---------------------------------------------------------------- 11

fn metric_properties() -> Outcome {
    let mut rng = stream(11);
    let alphas = [0.05, 0.1, 0.25, 0.5, 0.75, 1.0];
    for list in 0..1000 {
        let n = rng.random_range(1..200);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-100.0..100.0)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let mut prev = f64::NEG_INFINITY;
        for a in alphas {
            let c = cvar(&xs, a).unwrap();
            ensure!(min <= c && c <= mean + 1e-12, "list {list}: cvar {c} outside [{min}, {mean}] at alpha {a}");
            ensure!(c >= prev, "list {list}: cvar not monotone at alpha {a}");
            prev = c;
        }
    }
    let c = cvar(&[-10.0, -8.0, -6.0, -4.0], 0.5).unwrap();
    ensure!(c == -9.0, "CVaR([-10, -8, -6, -4], 0.5) = {c}");
    Ok("1000 random lists; CVaR([-10, -8, -6, -4], 0.5) = -9".into())
}
