use dmdp::adversary::{AdversaryKind, AdversarySpec};
use dmdp::disruptors::{
    pipeline_step, DisruptorSpec, FiringRule, NoiseModel, ParamRule, ParamSchedule, Pipeline, Schedule, Source,
};
use dmdp::envs::{build_env, EnvOptions};
use dmdp::mdp::{StepTranscript, Value};

fn pendulum(horizon: usize, specs: Vec<DisruptorSpec>) -> Pipeline {
    Pipeline::new(build_env(&EnvOptions::new("windy_pendulum"), Some(horizon)).unwrap(), specs, 17).unwrap()
}

fn grid(id: &str, horizon: usize, specs: Vec<DisruptorSpec>) -> Pipeline {
    Pipeline::new(build_env(&EnvOptions::sized(id, 5, 5), Some(horizon)).unwrap(), specs, 17).unwrap()
}

fn episode(p: &mut Pipeline, seed: u64, action: impl Fn(usize) -> Value) -> Vec<StepTranscript> {
    p.reset(seed);
    let mut out = Vec::new();
    while !p.is_done() {
        let t = out.len();
        out.push(pipeline_step(p, |_| action(t)).unwrap());
    }
    out
}

fn torque(u: f64) -> impl Fn(usize) -> Value {
    move |_| Value::Vector(vec![u])
}

#[test]
fn every_hundred_steps_fires_at_multiples_of_100() {
    let spec =
        DisruptorSpec::random("s", Source::State, NoiseModel::gaussian(0.0, 0.1), Schedule::new(FiringRule::EveryK(100)));
    let mut p = pendulum(301, vec![spec]);
    let fired: Vec<usize> = episode(&mut p, 0, torque(0.0)).iter().filter(|t| !t.fired.is_empty()).map(|t| t.t).collect();
    assert_eq!(fired, [100, 200, 300]);
}

#[test]
fn bernoulli_rate() {
    let spec = DisruptorSpec::random("r", Source::Reward, NoiseModel::gaussian(0.0, 0.0), Schedule::new(FiringRule::Bernoulli(0.25)));
    let mut p = pendulum(1000, vec![spec]);
    let mut fired = 0;
    for e in 0..100 {
        fired += episode(&mut p, e, torque(0.0)).iter().filter(|t| !t.fired.is_empty()).count();
    }
    let rate = fired as f64 / 100_000.0;
    assert!((rate - 0.25).abs() < 0.01, "{rate}");
}

#[test]
fn state_noise_fires_every_step_and_spares_actions() {
    let spec = DisruptorSpec::random("s", Source::State, NoiseModel::gaussian(0.0, 0.1), Schedule::default());
    let mut p = pendulum(50, vec![spec]);
    for t in episode(&mut p, 1, torque(0.7)) {
        assert!(t.fired.contains("s"));
        assert_eq!(t.executed_action, t.agent_action);
        assert_ne!(t.observed_state, t.true_state);
    }
}

#[test]
fn zero_noise_still_counts_as_fired() {
    let spec = DisruptorSpec::random("a", Source::Action, NoiseModel::gaussian(0.0, 0.0), Schedule::default());
    let mut p = pendulum(10, vec![spec]);
    for t in episode(&mut p, 1, torque(1.5)) {
        assert_eq!(t.executed_action, Value::Vector(vec![1.5]));
        assert!(t.fired.contains("a"));
    }
}

#[test]
fn gravity_follows_episode_index_within_every_step() {
    let ps = ParamSchedule::new().with("gravity", ParamRule::sinusoid(14.715, 4.905, 0.5));
    let spec = DisruptorSpec::internal_shift("g", ps, Schedule::new(FiringRule::PerEpisode));
    let mut p = pendulum(25, vec![spec]);
    for e in 0..3 {
        episode(&mut p, e, torque(0.0));
    }
    let ep3 = episode(&mut p, 3, torque(0.0));
    for t in &ep3 {
        assert!((t.env_params["gravity"] - 19.607712909292887).abs() < 1e-9);
    }
    assert!(ep3[0].fired.contains("g") && ep3[1].fired.is_empty());
}

#[test]
fn full_action_replacement_is_uniform() {
    let spec = DisruptorSpec::random("a", Source::Action, NoiseModel::discrete_replace(1.0), Schedule::default());
    let mut p = grid("grid_maze", 100_000, vec![spec]);
    p.reset(0);
    let mut counts = [0usize; 4];
    let mut n = 0;
    while n < 100_000 {
        if p.is_done() {
            p.reset(n as u64);
        }
        let t = p.step_with(|_| Value::Index(0)).unwrap();
        counts[t.executed_action.as_index().unwrap()] += 1;
        n += 1;
    }
    for c in counts {
        assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
    }
}

#[test]
fn executed_torque_stays_in_box_and_clamps_are_counted() {
    let spec = DisruptorSpec::random("a", Source::Action, NoiseModel::gaussian(0.0, 3.0), Schedule::default());
    let mut p = pendulum(200, vec![spec]);
    let tr = episode(&mut p, 2, torque(1.9));
    assert!(tr.iter().all(|t| t.executed_action.as_vector().unwrap()[0].abs() <= 2.0));
    let clamps: usize = tr.iter().map(|t| t.clamps).sum();
    assert!(clamps > 0 && clamps < 200, "{clamps}");
}

#[test]
fn agent_mask_leaves_other_agent_untouched() {
    let specs = vec![
        DisruptorSpec::random("s", Source::State, NoiseModel::discrete_replace(1.0), Schedule::default()).with_mask([0]),
        DisruptorSpec::random("a", Source::Action, NoiseModel::discrete_replace(1.0), Schedule::default()).with_mask([0]),
    ];
    let mut p = grid("two_agent_grid", 40, specs);
    let mut differed = 0;
    for e in 0..20 {
        for t in episode(&mut p, e, |i| Value::Indices(vec![i % 4, (i + 1) % 4])) {
            let (Value::Indices(obs), Value::Indices(tru)) = (&t.observed_state, &t.true_state) else { panic!() };
            let (Value::Indices(exe), Value::Indices(ag)) = (&t.executed_action, &t.agent_action) else { panic!() };
            assert_eq!(obs[1], tru[1]);
            assert_eq!(exe[1], ag[1]);
            differed += usize::from(obs[0] != tru[0]);
        }
    }
    assert!(differed > 0);
}

#[test]
fn disruptors_on_one_source_apply_in_declaration_order() {
    let pin = || {
        DisruptorSpec::adversarial(
            "pin",
            Source::Action,
            AdversarySpec::new(AdversaryKind::RandomInSet, vec![2.0], vec![2.0]),
            Schedule::default(),
        )
    };
    let replace = || DisruptorSpec::random("rep", Source::Action, NoiseModel::discrete_replace(1.0), Schedule::default());
    let executed = |specs| -> Vec<usize> {
        let mut p = grid("grid_maze", 30, specs);
        episode(&mut p, 0, |_| Value::Index(0)).iter().map(|t| t.executed_action.as_index().unwrap()).collect()
    };
    assert!(executed(vec![replace(), pin()]).iter().all(|a| *a == 2));
    assert!(executed(vec![pin(), replace()]).iter().any(|a| *a != 2));
}

#[test]
fn replaying_a_seed_replays_everything() {
    let specs = || {
        vec![
            DisruptorSpec::random("s", Source::State, NoiseModel::uniform(0.2, 0.8), Schedule::new(FiringRule::Bernoulli(0.5))),
            DisruptorSpec::random("a", Source::Action, NoiseModel::gaussian(0.0, 0.5), Schedule::new(FiringRule::EveryK(3))),
            DisruptorSpec::external(
                "w",
                ParamSchedule::new().with("wind", ParamRule::uniform(0.0, 2.0)),
                Schedule::new(FiringRule::PerEpisode),
            ),
        ]
    };
    let run = || {
        let mut p = pendulum(60, specs());
        (0..4).flat_map(|e| episode(&mut p, e, torque(0.3))).collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}

#[test]
fn uniform_state_deltas_lie_in_range() {
    let spec = DisruptorSpec::random("s", Source::State, NoiseModel::uniform(0.2, 0.8), Schedule::default());
    let mut p = pendulum(200, vec![spec]);
    for t in episode(&mut p, 5, torque(-1.0)) {
        for (o, s) in t.observed_state.as_vector().unwrap().iter().zip(t.true_state.as_vector().unwrap()) {
            let d = o - s;
            assert!((0.2 - 1e-12..=0.8 + 1e-12).contains(&d), "{d}");
        }
    }
}

#[test]
fn greedy_action_attack_is_no_better_than_random() {
    // One-step reward under greedy replacement versus uniform replacement,
    // on a maze where the goal is reachable from the start in one move.
    let layout = "SG.\n...\n...";
    let opts = EnvOptions { map: Some(layout.into()), ..EnvOptions::new("grid_maze") };
    let mut greedy_spec = AdversarySpec::new(AdversaryKind::Greedy, vec![0.0], vec![3.0]);
    greedy_spec.n_candidates = 4;
    let one_step = |spec: DisruptorSpec, n: u64| -> f64 {
        let mut p = Pipeline::new(build_env(&opts, Some(10)).unwrap(), vec![spec], 3).unwrap();
        (0..n)
            .map(|e| {
                p.reset(e);
                p.step_with(|_| Value::Index(3)).unwrap().true_reward
            })
            .sum::<f64>()
            / n as f64
    };
    let greedy = one_step(DisruptorSpec::adversarial("g", Source::Action, greedy_spec, Schedule::default()), 50);
    let random = one_step(DisruptorSpec::random("r", Source::Action, NoiseModel::discrete_replace(1.0), Schedule::default()), 2000);
    assert!(greedy <= random, "greedy {greedy} random {random}");
}
