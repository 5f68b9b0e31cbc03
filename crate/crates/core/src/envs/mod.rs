//! Desk-scale environment suite and the id registry.

pub mod grid;
pub mod grid_maze;
pub mod pendulum;
pub mod two_agent;

use serde::{Deserialize, Serialize};

pub use grid::{maze_transition, Cell, GridLayout, Move};
pub use grid_maze::GridMaze;
pub use pendulum::{pendulum_dynamics, wrap_angle, PendulumParams, WindyPendulum};
pub use two_agent::TwoAgentGrid;

use crate::mdp::{EnvError, Environment, HorizonSpec};

pub const ENV_IDS: [(&str, &str); 4] = [
    ("grid_maze", "discrete maze, -1 per step, slip parameter"),
    ("safe_grid_maze", "grid_maze with hazard cells emitting a safety cost"),
    ("windy_pendulum", "inverted pendulum with gravity, wind and length parameters"),
    ("two_agent_grid", "two cooperating agents on one board, shared reward"),
];

pub const DEFAULT_SAFE_MAP: &str = "\
S....
.HH..
.HH..
.....
....G
";

/// `[env]` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvOptions {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<usize>,
    /// Inline board in the plain-text map format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    /// Board file; resolved into `map` when the configuration is loaded.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slip: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hazard_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_reward: Option<f64>,
}

impl EnvOptions {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.into(),
            width: None,
            height: None,
            map: None,
            map_file: None,
            slip: None,
            hazard_cost: None,
            step_reward: None,
        }
    }

    pub fn sized(id: &str, width: usize, height: usize) -> Self {
        Self { width: Some(width), height: Some(height), ..Self::new(id) }
    }
}

pub fn default_horizon(id: &str) -> usize {
    match id {
        "windy_pendulum" => pendulum::DEFAULT_HORIZON,
        _ => 100,
    }
}

fn grid_layout(opts: &EnvOptions, default_map: Option<&str>) -> Result<GridLayout, EnvError> {
    match (&opts.map, opts.width, opts.height) {
        (Some(map), None, None) => GridLayout::parse(map),
        (Some(_), _, _) => Err(EnvError::Layout("give either `map` or `width`/`height`, not both".into())),
        (None, None, None) => match default_map {
            Some(m) => GridLayout::parse(m),
            None => GridLayout::open(5, 5),
        },
        (None, w, h) => GridLayout::open(w.unwrap_or(5), h.unwrap_or(5)),
    }
}

/// Builds a registered environment. `horizon` overrides the id's default.
pub fn build_env(opts: &EnvOptions, horizon: Option<usize>) -> Result<Box<dyn Environment>, EnvError> {
    let horizon = HorizonSpec::new(horizon.unwrap_or_else(|| default_horizon(&opts.id)))?;
    let grid_only = |name: &str, set: bool| {
        if set {
            Err(EnvError::InvalidParam { name: name.into(), reason: format!("not an option of `{}`", opts.id) })
        } else {
            Ok(())
        }
    };
    match opts.id.as_str() {
        "grid_maze" | "safe_grid_maze" => {
            let default_map = (opts.id == "safe_grid_maze").then_some(DEFAULT_SAFE_MAP);
            let layout = grid_layout(opts, default_map)?;
            if opts.id == "safe_grid_maze" && layout.hazards.is_empty() {
                return Err(EnvError::Layout("safe_grid_maze needs at least one `H` cell".into()));
            }
            let mut m = GridMaze::new(layout, horizon)?.with_slip(opts.slip.unwrap_or(0.0))?;
            if let Some(c) = opts.hazard_cost {
                m = m.with_hazard_cost(c)?;
            }
            if let Some(r) = opts.step_reward {
                m = m.with_step_reward(r);
            }
            Ok(Box::new(m))
        }
        "two_agent_grid" => {
            grid_only("hazard_cost", opts.hazard_cost.is_some())?;
            grid_only("step_reward", opts.step_reward.is_some())?;
            let layout = grid_layout(opts, None)?;
            Ok(Box::new(TwoAgentGrid::from_layout(layout, horizon)?.with_slip(opts.slip.unwrap_or(0.0))?))
        }
        "windy_pendulum" => {
            for (name, set) in [
                ("width", opts.width.is_some()),
                ("height", opts.height.is_some()),
                ("map", opts.map.is_some()),
                ("slip", opts.slip.is_some()),
                ("hazard_cost", opts.hazard_cost.is_some()),
                ("step_reward", opts.step_reward.is_some()),
            ] {
                grid_only(name, set)?;
            }
            Ok(Box::new(WindyPendulum::new(horizon)))
        }
        other => Err(EnvError::InvalidParam { name: "env.id".into(), reason: format!("unknown environment `{other}`") }),
    }
}
