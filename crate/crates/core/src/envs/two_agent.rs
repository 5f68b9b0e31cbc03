use std::collections::BTreeMap;

use crate::envs::grid::{maze_transition, Cell, GridLayout, Move};
use crate::mdp::{check_action, EnvError, Environment, EpisodeClock, HorizonSpec, ParamSet, Space, StepOutcome, Value};
use crate::rng::{stream, StreamRng};

/// Two agents on one board with a shared reward of `-1` per step until both
/// stand on their goals. An agent that reached its goal stays there.
///
/// `info` carries `done_0` / `done_1` (1.0 once the agent is home).
#[derive(Debug, Clone)]
pub struct TwoAgentGrid {
    layout: GridLayout,
    starts: [Cell; 2],
    goals: [Cell; 2],
    params: ParamSet,
    clock: EpisodeClock,
    pos: [Cell; 2],
    rng: StreamRng,
}

impl TwoAgentGrid {
    pub fn new(layout: GridLayout, starts: [Cell; 2], goals: [Cell; 2], horizon: HorizonSpec) -> Result<Self, EnvError> {
        for i in 0..2 {
            layout.validate_endpoints(starts[i], goals[i])?;
        }
        Ok(Self {
            layout,
            starts,
            goals,
            params: ParamSet::new().with("slip", 0.0, 0.0, 1.0)?,
            clock: EpisodeClock::new(horizon),
            pos: starts,
            rng: stream(0),
        })
    }

    /// Uses the map's `S`/`G` for agent 0 and `s`/`g` for agent 1; without
    /// `s`/`g` agent 1 mirrors agent 0 horizontally.
    pub fn from_layout(layout: GridLayout, horizon: HorizonSpec) -> Result<Self, EnvError> {
        let mirror = |c: Cell| (layout.width - 1 - c.0, c.1);
        let (s1, g1) = layout.second.unwrap_or((mirror(layout.start), mirror(layout.goal)));
        let (s0, g0) = (layout.start, layout.goal);
        Self::new(layout, [s0, s1], [g0, g1], horizon)
    }

    pub fn with_slip(mut self, slip: f64) -> Result<Self, EnvError> {
        self.params = ParamSet::new().with("slip", slip, 0.0, 1.0)?;
        Ok(self)
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn goals(&self) -> [Cell; 2] {
        self.goals
    }

    pub fn positions(&self) -> [Cell; 2] {
        self.pos
    }

    fn home(&self, i: usize) -> bool {
        self.pos[i] == self.goals[i]
    }
}

impl Environment for TwoAgentGrid {
    fn id(&self) -> &'static str {
        "two_agent_grid"
    }

    fn state_space(&self) -> Space {
        Space::MultiDiscrete(vec![self.layout.n_cells(); 2])
    }

    fn action_space(&self) -> Space {
        Space::MultiDiscrete(vec![4; 2])
    }

    fn horizon(&self) -> HorizonSpec {
        self.clock.horizon
    }

    fn num_agents(&self) -> usize {
        2
    }

    fn reset(&mut self, seed: u64) -> Value {
        self.rng = stream(seed);
        self.clock.reset();
        self.pos = self.starts;
        self.state()
    }

    fn step(&mut self, action: &Value) -> Result<StepOutcome, EnvError> {
        self.clock.check()?;
        check_action(&self.action_space(), action)?;
        let Value::Indices(actions) = action else { unreachable!("checked") };
        let slip = self.params.get("slip").unwrap_or(0.0);
        for (i, &a) in actions.iter().enumerate() {
            if !self.home(i) {
                let mv = Move::from_index(a).expect("checked");
                self.pos[i] = maze_transition(&self.layout, self.pos[i], mv, slip, &mut self.rng);
            }
        }
        let terminated = self.home(0) && self.home(1);
        let truncated = self.clock.tick(terminated);
        let info = BTreeMap::from([
            ("done_0".to_string(), f64::from(u8::from(self.home(0)))),
            ("done_1".to_string(), f64::from(u8::from(self.home(1)))),
        ]);
        Ok(StepOutcome { next_state: self.state(), reward: -1.0, cost: 0.0, terminated, truncated, info })
    }

    fn state(&self) -> Value {
        Value::Indices(self.pos.iter().map(|c| self.layout.index(*c)).collect())
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
