//! wasm-bindgen surface of the browser demo. Results cross the boundary as
//! flat `Float64Array`s; the layouts are documented per function.

pub mod demo;

use wasm_bindgen::prelude::*;

use demo::{maze_degradation, pendulum_rollout, schedule_curve, DemoError, RolloutSpec};

impl From<DemoError> for JsValue {
    fn from(e: DemoError) -> Self {
        JsValue::from_str(&e.to_string())
    }
}

/// Per-episode values of a pendulum parameter; see [`demo::schedule_curve`].
#[wasm_bindgen(js_name = scheduleCurve)]
pub fn schedule_curve_js(param: &str, rule: &str, a: f64, b: f64, c: f64, episodes: usize, seed: u64) -> Result<Vec<f64>, JsValue> {
    Ok(schedule_curve(param, rule, a, b, c, episodes, seed)?)
}

/// `[nominal, low, high]` of a pendulum parameter, empty if unknown.
#[wasm_bindgen(js_name = paramBounds)]
pub fn param_bounds_js(param: &str) -> Vec<f64> {
    demo::param_bounds(param).map_or_else(Vec::new, |(n, l, h)| vec![n, l, h])
}

/// Layout: `[total_return, theta[0..n], observed_theta[0..n], torque[0..n]]`.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = pendulumRollout)]
pub fn pendulum_rollout_js(
    k1: f64,
    k2: f64,
    gravity: f64,
    wind: f64,
    length: f64,
    obs_std: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    let r = pendulum_rollout(&RolloutSpec { gains: [k1, k2], gravity, wind, length, obs_std, steps, seed })?;
    let mut out = vec![r.total_return];
    out.extend(r.theta);
    out.extend(r.observed_theta);
    out.extend(r.torque);
    Ok(out)
}

/// Layout: five numbers per probability, `[p, mean_return, ci95, nominal_return, oracle]`.
#[wasm_bindgen(js_name = mazeDegradation)]
pub fn maze_degradation_js(channel: &str, ps: Vec<f64>, train_episodes: usize, seeds: usize) -> Result<Vec<f64>, JsValue> {
    let points = maze_degradation(channel, &ps, train_episodes, seeds)?;
    Ok(points.iter().flat_map(|d| [d.p, d.mean_return, d.ci95, d.nominal_return, d.oracle]).collect())
}
