use dmdp::harness::config::{parse_table, set_dotted};
use dmdp::harness::RunConfig;

const BASE: &str = r#"
[env]
id = "windy_pendulum"

[agent]
id = "cem"
population = 8

[[disruptor]]
id = "obs"
source = "state"
mode = "random"
noise = { family = "gaussian", std = 0.1 }
schedule = { kind = "every_k", k = 5, phase = "eval_only" }

[[disruptor]]
id = "gravity"
source = "env_params"
mode = "internal_shift"
params = { gravity = { rule = "sinusoid", base = 14.715, amp = 4.905, freq = 0.5 } }
schedule = { kind = "per_episode" }

[[disruptor]]
id = "torque"
source = "action"
mode = "adversarial"
adversary = { kind = "random_in_set", region_low = [-1.0], region_high = [1.0] }
schedule = { kind = "bernoulli", q = 0.1 }

[protocol]
kind = "post_training"
train_episodes = 16
eval_episodes = 4

[harness]
seeds = [1, 2]
horizon = 50
cvar_alpha = 0.25
eval_param_grid = { wind = [0.5, 1.5] }
"#;

fn key_of(text: &str) -> String {
    RunConfig::from_toml_str(text, None).unwrap_err().key
}

#[test]
fn toml_round_trip() {
    let cfg = RunConfig::from_toml_str(BASE, None).unwrap();
    let again = RunConfig::from_toml_str(&cfg.to_toml(), None).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(cfg.disruptors.len(), 3);
    assert_eq!(cfg.grid_points().len(), 2);
}

#[test]
fn unknown_keys_rejected_at_every_level() {
    for (from, to) in [
        ("[env]", "[env]\ncolour = 1"),
        ("population = 8", "population = 8\nmomentum = 0.9"),
        ("std = 0.1 }", "std = 0.1, sigma = 2 }"),
        ("k = 5,", "k = 5, jitter = 1,"),
        ("id = \"obs\"", "id = \"obs\"\nweight = 1"),
        ("eval_episodes = 4", "eval_episodes = 4\nwarmup = 1"),
        ("cvar_alpha = 0.25", "cvar_alpha = 0.25\nbeta = 1"),
    ] {
        let text = BASE.replacen(from, to, 1);
        assert_ne!(text, BASE, "{from}");
        assert!(RunConfig::from_toml_str(&text, None).is_err(), "accepted {to}");
    }
}

#[test]
fn offending_keys_are_named() {
    assert_eq!(key_of(&BASE.replace("std = 0.1", "std = -0.1")), "disruptor[0].noise.std");
    assert_eq!(key_of(&BASE.replace("cvar_alpha = 0.25", "cvar_alpha = 1.5")), "harness.cvar_alpha");
    assert_eq!(key_of(&BASE.replace("seeds = [1, 2]", "seeds = [1, 1]")), "harness.seeds");
    assert_eq!(key_of(&BASE.replace("seeds = [1, 2]", "seeds = []")), "harness.seeds");
    assert_eq!(key_of(&BASE.replace("wind = [0.5, 1.5]", "wind = [0.5, 9.0]")), "harness.eval_param_grid.wind");
    assert_eq!(key_of(&BASE.replace("wind = [0.5, 1.5]", "slip = [0.1]")), "harness.eval_param_grid.slip");
    assert_eq!(key_of(&BASE.replace("eval_episodes = 4", "eval_episodes = 0")), "protocol.eval_episodes");
    assert_eq!(key_of(&BASE.replace("horizon = 50", "horizon = 0")), "harness.horizon");
    assert_eq!(key_of(&BASE.replace("population = 8", "population = 0")), "agent.population");
    assert!(key_of(&BASE.replace("id = \"windy_pendulum\"", "id = \"ant\"")).starts_with("env"));
    assert_eq!(key_of(&BASE.replace("id = \"torque\"", "id = \"obs\"")), "disruptor[2].id");
    assert_eq!(
        key_of(&BASE.replace("family = \"gaussian\", std = 0.1", "family = \"discrete_replace\", p = 0.1")),
        "disruptor[0].noise"
    );
    assert_eq!(key_of(&BASE.replace("phase = \"eval_only\"", "phase = \"train_only\"")), "disruptor[0].schedule.phase");
    // Parse failures carry the generic key.
    assert_eq!(key_of("not toml ["), "config");
}

#[test]
fn agent_must_fit_the_environment() {
    let text = BASE.replace("id = \"cem\"\npopulation = 8", "id = \"tabular_q\"");
    assert!(key_of(&text).starts_with("agent"));
}

#[test]
fn map_file_is_resolved_relative_to_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("board.txt"), "S.#\n...\n#.G\n").unwrap();
    let text = r#"
[env]
id = "grid_maze"
map_file = "board.txt"

[agent]
id = "tabular_q"

[protocol]
kind = "in_training"
train_episodes = 1
eval_episodes = 1

[harness]
seeds = [1]
"#;
    let path = tmp.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(cfg.env.map.as_deref(), Some("S.#\n...\n#.G\n"));
    assert!(cfg.env.map_file.is_none());
    assert_eq!(RunConfig::from_toml_str(text, Some(&tmp.path().join("elsewhere"))).unwrap_err().key, "env.map_file");
}

#[test]
fn dotted_overrides() {
    let mut t = parse_table(BASE).unwrap();
    assert_eq!(set_dotted(&mut t, "disruptor.0.noise.std", "0.25").unwrap(), toml::Value::Float(0.25));
    // Integers typed where a float lived stay floats.
    assert_eq!(set_dotted(&mut t, "harness.cvar_alpha", "1").unwrap(), toml::Value::Float(1.0));
    assert_eq!(set_dotted(&mut t, "protocol.train_episodes", "32").unwrap(), toml::Value::Integer(32));
    assert_eq!(set_dotted(&mut t, "protocol.kind", "in_training").unwrap(), toml::Value::String("in_training".into()));
    let cfg = RunConfig::from_value(t.clone(), None).unwrap();
    assert_eq!(cfg.protocol.train_episodes, 32);
    assert_eq!(cfg.harness.cvar_alpha, 1.0);
    assert_eq!(cfg.disruptors[0].noise, Some(dmdp::disruptors::NoiseModel::gaussian(0.0, 0.25)));

    for bad in ["disruptor.9.noise.std", "disruptor.x.noise.std", "nothing.here", "harness..seeds", "env.id.deeper"] {
        assert_eq!(set_dotted(&mut t, bad, "1").unwrap_err().key, bad);
    }
}
