use std::collections::BTreeMap;

use crate::envs::grid::{maze_transition, Cell, GridLayout, Move};
use crate::mdp::{check_action, EnvError, Environment, EpisodeClock, HorizonSpec, ParamSet, Space, StepOutcome, Value};
use crate::rng::{stream, StreamRng};

/// Single-agent maze. Reaching the goal terminates; hazards only add cost.
#[derive(Debug, Clone)]
pub struct GridMaze {
    layout: GridLayout,
    params: ParamSet,
    step_reward: f64,
    hazard_cost: f64,
    clock: EpisodeClock,
    pos: Cell,
    rng: StreamRng,
    id: &'static str,
}

impl GridMaze {
    pub fn new(layout: GridLayout, horizon: HorizonSpec) -> Result<Self, EnvError> {
        layout.validate_endpoints(layout.start, layout.goal)?;
        let params = ParamSet::new().with("slip", 0.0, 0.0, 1.0)?;
        let id = if layout.hazards.is_empty() { "grid_maze" } else { "safe_grid_maze" };
        Ok(Self {
            pos: layout.start,
            layout,
            params,
            step_reward: -1.0,
            hazard_cost: 1.0,
            clock: EpisodeClock::new(horizon),
            rng: stream(0),
            id,
        })
    }

    pub fn with_slip(mut self, slip: f64) -> Result<Self, EnvError> {
        self.params = ParamSet::new().with("slip", slip, 0.0, 1.0)?;
        Ok(self)
    }

    pub fn with_hazard_cost(mut self, cost: f64) -> Result<Self, EnvError> {
        if cost.is_nan() || cost < 0.0 {
            return Err(EnvError::InvalidParam { name: "hazard_cost".into(), reason: "must be >= 0".into() });
        }
        self.hazard_cost = cost;
        Ok(self)
    }

    pub fn with_step_reward(mut self, reward: f64) -> Self {
        self.step_reward = reward;
        self
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn step_reward(&self) -> f64 {
        self.step_reward
    }

    pub fn position(&self) -> Cell {
        self.pos
    }

    pub fn maze_cost(&self, cell: Cell) -> f64 {
        if self.layout.hazards.contains(&cell) {
            self.hazard_cost
        } else {
            0.0
        }
    }
}

impl Environment for GridMaze {
    fn id(&self) -> &'static str {
        self.id
    }

    fn state_space(&self) -> Space {
        Space::Discrete(self.layout.n_cells())
    }

    fn action_space(&self) -> Space {
        Space::Discrete(4)
    }

    fn horizon(&self) -> HorizonSpec {
        self.clock.horizon
    }

    fn reset(&mut self, seed: u64) -> Value {
        self.rng = stream(seed);
        self.clock.reset();
        self.pos = self.layout.start;
        Value::Index(self.layout.index(self.pos))
    }

    fn step(&mut self, action: &Value) -> Result<StepOutcome, EnvError> {
        self.clock.check()?;
        check_action(&self.action_space(), action)?;
        let mv = Move::from_index(action.as_index().expect("checked")).expect("checked");
        let slip = self.params.get("slip").unwrap_or(0.0);
        self.pos = maze_transition(&self.layout, self.pos, mv, slip, &mut self.rng);
        let terminated = self.pos == self.layout.goal;
        let truncated = self.clock.tick(terminated);
        Ok(StepOutcome {
            next_state: Value::Index(self.layout.index(self.pos)),
            reward: self.step_reward,
            cost: self.maze_cost(self.pos),
            terminated,
            truncated,
            info: BTreeMap::new(),
        })
    }

    fn state(&self) -> Value {
        Value::Index(self.layout.index(self.pos))
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
