use dmdp_wasm::demo::{maze_degradation, param_bounds, pendulum_rollout, schedule_curve, RolloutSpec};
use dmdp_wasm::{maze_degradation_js, pendulum_rollout_js};

#[test]
fn gravity_curve_follows_the_sinusoid_and_clamps() {
    let g = schedule_curve("gravity", "sinusoid", 14.715, 4.905, 0.5, 11, 0).unwrap();
    assert_eq!(g[0], 14.715);
    assert!((g[3] - 19.607712909292887).abs() < 1e-9);
    // Amplitude past the bound is clamped to the high end of [4.9, 19.82].
    let big = schedule_curve("gravity", "sinusoid", 14.715, 10.0, 0.5, 11, 0).unwrap();
    assert_eq!(big.iter().copied().fold(f64::MIN, f64::max), 19.82);
}

#[test]
fn uniform_curve_is_seeded_and_bounded() {
    let a = schedule_curve("wind", "uniform", 0.5, 1.5, 0.0, 200, 4).unwrap();
    assert_eq!(a, schedule_curve("wind", "uniform", 0.5, 1.5, 0.0, 200, 4).unwrap());
    assert_ne!(a, schedule_curve("wind", "uniform", 0.5, 1.5, 0.0, 200, 5).unwrap());
    assert!(a.iter().all(|w| (0.5..=1.5).contains(w)));
}

#[test]
fn bad_inputs_are_reported() {
    assert!(schedule_curve("mass", "sinusoid", 1.0, 0.0, 0.0, 3, 0).is_err());
    assert!(schedule_curve("wind", "triangle", 1.0, 0.0, 0.0, 3, 0).is_err());
    assert!(schedule_curve("wind", "uniform", 2.0, 1.0, 0.0, 3, 0).is_err());
    assert!(maze_degradation("reward", &[0.1], 10, 1).is_err());
    assert!(maze_degradation("state", &[0.1], 10, 0).is_err());
    assert_eq!(param_bounds("length"), Some((0.4, 0.1, 0.8)));
    assert_eq!(param_bounds("nope"), None);
}

fn rollout(obs_std: f64) -> RolloutSpec {
    RolloutSpec { gains: [-10.0, -2.0], gravity: 9.81, wind: 0.0, length: 0.4, obs_std, steps: 200, seed: 3 }
}

#[test]
fn rollout_lengths_and_noise() {
    let clean = pendulum_rollout(&rollout(0.0)).unwrap();
    assert_eq!(clean.theta.len(), 200);
    assert_eq!(clean.theta, clean.observed_theta);
    assert!(clean.torque.iter().all(|u| u.abs() <= 2.0));
    let noisy = pendulum_rollout(&rollout(0.3)).unwrap();
    assert_ne!(noisy.theta, noisy.observed_theta);
    assert!(pendulum_rollout(&rollout(-1.0)).is_err());

    let flat = pendulum_rollout_js(-10.0, -2.0, 9.81, 0.0, 0.4, 0.0, 200, 3).unwrap();
    assert_eq!(flat.len(), 1 + 3 * 200);
    assert_eq!(flat[0], clean.total_return);
}

#[test]
fn maze_degrades_with_action_noise_and_tracks_the_oracle() {
    let pts = maze_degradation("action", &[0.0, 0.3], 600, 4).unwrap();
    assert_eq!(pts[0].oracle, -8.0);
    assert!(pts[1].oracle < -8.0);
    assert!(pts[1].mean_return < pts[0].mean_return);
    // A learned policy cannot beat the optimum in expectation by much.
    assert!(pts[1].mean_return < pts[1].oracle + 1.0);
    let flat = maze_degradation_js("state", vec![0.1], 100, 1).unwrap();
    assert_eq!(flat.len(), 5);
    assert!(flat[4].is_nan());
}
