//! Inverted pendulum with a constant wind torque. `theta = 0` is upright.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;

use crate::mdp::{check_action, EnvError, Environment, EpisodeClock, HorizonSpec, ParamSet, Space, StepOutcome, Value};
use crate::rng::{stream, StreamRng};

pub const DT: f64 = 0.05;
pub const MAX_TORQUE: f64 = 2.0;
pub const MAX_SPEED: f64 = 8.0;
pub const DEFAULT_HORIZON: usize = 200;

/// Parameter values used by one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    pub gravity: f64,
    pub wind: f64,
    pub length: f64,
    pub mass: f64,
    pub damping: f64,
}

impl PendulumParams {
    pub fn from_set(p: &ParamSet) -> Self {
        let g = |k: &str| p.get(k).expect("pendulum parameter present");
        Self { gravity: g("gravity"), wind: g("wind"), length: g("length"), mass: g("mass"), damping: g("damping") }
    }
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self { gravity: 9.81, wind: 1.0, length: 0.4, mass: 1.0, damping: 0.05 }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let y = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

/// One semi-implicit Euler step. Returns `(theta', theta_dot', reward)`.
///
/// The reward is evaluated at the pre-step angle and the post-step velocity.
pub fn pendulum_dynamics(theta: f64, theta_dot: f64, u: f64, p: &PendulumParams) -> Result<(f64, f64, f64), EnvError> {
    if !theta.is_finite() || !theta_dot.is_finite() {
        return Err(EnvError::NonFinite("state"));
    }
    if !u.is_finite() {
        return Err(EnvError::NonFinite("action"));
    }
    let ml2 = p.mass * p.length * p.length;
    let accel = (p.gravity / p.length) * theta.sin() - p.damping * theta_dot + (u + p.wind) / ml2;
    let theta_dot_next = (theta_dot + DT * accel).clamp(-MAX_SPEED, MAX_SPEED);
    let theta_next = wrap_angle(theta + DT * theta_dot_next);
    let reward = -(theta * theta + 0.1 * theta_dot_next * theta_dot_next + 0.001 * u * u);
    if !theta_next.is_finite() || !reward.is_finite() {
        return Err(EnvError::NonFinite("state"));
    }
    Ok((theta_next, theta_dot_next, reward))
}

#[derive(Debug, Clone)]
pub struct WindyPendulum {
    params: ParamSet,
    clock: EpisodeClock,
    theta: f64,
    theta_dot: f64,
    rng: StreamRng,
}

impl WindyPendulum {
    pub fn new(horizon: HorizonSpec) -> Self {
        let params = ParamSet::new()
            .with("gravity", 9.81, 4.9, 19.82)
            .and_then(|p| p.with("wind", 1.0, 0.0, 2.0))
            .and_then(|p| p.with("length", 0.4, 0.1, 0.8))
            .and_then(|p| p.with("mass", 1.0, 1.0, 1.0))
            .and_then(|p| p.with("damping", 0.05, 0.05, 0.05))
            .expect("static pendulum parameters are consistent");
        Self { params, clock: EpisodeClock::new(horizon), theta: 0.0, theta_dot: 0.0, rng: stream(0) }
    }

    /// Overwrites the state; used by tests and analysis tools.
    pub fn set_state(&mut self, theta: f64, theta_dot: f64) {
        self.theta = wrap_angle(theta);
        self.theta_dot = theta_dot.clamp(-MAX_SPEED, MAX_SPEED);
    }
}

impl Default for WindyPendulum {
    fn default() -> Self {
        Self::new(HorizonSpec::new(DEFAULT_HORIZON).expect("nonzero"))
    }
}

impl Environment for WindyPendulum {
    fn id(&self) -> &'static str {
        "windy_pendulum"
    }

    fn state_space(&self) -> Space {
        Space::Box { low: vec![-PI, -MAX_SPEED], high: vec![PI, MAX_SPEED] }
    }

    fn action_space(&self) -> Space {
        Space::Box { low: vec![-MAX_TORQUE], high: vec![MAX_TORQUE] }
    }

    fn horizon(&self) -> HorizonSpec {
        self.clock.horizon
    }

    fn reset(&mut self, seed: u64) -> Value {
        self.rng = stream(seed);
        self.clock.reset();
        self.theta = self.rng.random_range(-0.1..0.1);
        self.theta_dot = self.rng.random_range(-0.05..0.05);
        self.state()
    }

    fn step(&mut self, action: &Value) -> Result<StepOutcome, EnvError> {
        self.clock.check()?;
        check_action(&self.action_space(), action)?;
        let u = action.as_vector().expect("checked")[0];
        let (theta, theta_dot, reward) =
            pendulum_dynamics(self.theta, self.theta_dot, u, &PendulumParams::from_set(&self.params))?;
        self.theta = theta;
        self.theta_dot = theta_dot;
        let truncated = self.clock.tick(false);
        Ok(StepOutcome {
            next_state: self.state(),
            reward,
            cost: 0.0,
            terminated: false,
            truncated,
            info: BTreeMap::new(),
        })
    }

    fn state(&self) -> Value {
        Value::Vector(vec![self.theta, self.theta_dot])
    }

    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    fn fork(&self) -> Box<dyn Environment> {
        Box::new(self.clone())
    }
}
