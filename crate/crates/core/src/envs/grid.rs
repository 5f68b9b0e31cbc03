//! Grid boards shared by the single- and two-agent mazes, plus the plain-text
//! map format.
//!
//! Map characters: `#` wall, `S` start, `G` goal, `H` hazard, `.` open.
//! Two-agent boards additionally use `s` and `g` for the second agent.

use std::collections::BTreeSet;

use rand::Rng;

use crate::mdp::EnvError;
use crate::rng::StreamRng;

/// Grid cell as `(x, y)`; `y = 0` is the top row.
pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Up,
    Down,
    Left,
    Right,
}

impl Move {
    pub const ALL: [Move; 4] = [Move::Up, Move::Down, Move::Left, Move::Right];

    pub fn from_index(i: usize) -> Option<Move> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    pub width: usize,
    pub height: usize,
    pub walls: BTreeSet<Cell>,
    pub hazards: BTreeSet<Cell>,
    pub start: Cell,
    pub goal: Cell,
    /// Second agent's start and goal, when the map declares them.
    pub second: Option<(Cell, Cell)>,
}

impl GridLayout {
    /// Wall-free board with start in the top-left and goal in the bottom-right.
    pub fn open(width: usize, height: usize) -> Result<Self, EnvError> {
        if width == 0 || height == 0 {
            return Err(EnvError::Layout("board needs at least one cell".into()));
        }
        Ok(Self {
            width,
            height,
            walls: BTreeSet::new(),
            hazards: BTreeSet::new(),
            start: (0, 0),
            goal: (width - 1, height - 1),
            second: None,
        })
    }

    pub fn parse(text: &str) -> Result<Self, EnvError> {
        let rows: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if rows.is_empty() {
            return Err(EnvError::Layout("empty map".into()));
        }
        let width = rows[0].chars().count();
        let height = rows.len();
        let mut walls = BTreeSet::new();
        let mut hazards = BTreeSet::new();
        let (mut start, mut goal, mut start2, mut goal2) = (None, None, None, None);
        for (y, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(EnvError::Layout(format!("row {y} has {} cells, expected {width}", row.chars().count())));
            }
            for (x, ch) in row.chars().enumerate() {
                let slot = match ch {
                    '.' => None,
                    '#' => {
                        walls.insert((x, y));
                        None
                    }
                    'H' => {
                        hazards.insert((x, y));
                        None
                    }
                    'S' => Some(&mut start),
                    'G' => Some(&mut goal),
                    's' => Some(&mut start2),
                    'g' => Some(&mut goal2),
                    other => return Err(EnvError::Layout(format!("unknown map character `{other}` at ({x}, {y})"))),
                };
                if let Some(slot) = slot {
                    if slot.replace((x, y)).is_some() {
                        return Err(EnvError::Layout(format!("duplicate `{ch}` at ({x}, {y})")));
                    }
                }
            }
        }
        let start = start.ok_or_else(|| EnvError::Layout("map has no `S`".into()))?;
        let goal = goal.ok_or_else(|| EnvError::Layout("map has no `G`".into()))?;
        let second = match (start2, goal2) {
            (Some(s), Some(g)) => Some((s, g)),
            (None, None) => None,
            _ => return Err(EnvError::Layout("`s` and `g` must appear together".into())),
        };
        Ok(Self { width, height, walls, hazards, start, goal, second })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let c = (x, y);
                let ch = if c == self.start {
                    'S'
                } else if c == self.goal {
                    'G'
                } else if self.second.map(|s| s.0) == Some(c) {
                    's'
                } else if self.second.map(|s| s.1) == Some(c) {
                    'g'
                } else if self.walls.contains(&c) {
                    '#'
                } else if self.hazards.contains(&c) {
                    'H'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }

    pub fn n_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.1 * self.width + cell.0
    }

    pub fn cell(&self, index: usize) -> Cell {
        (index % self.width, index / self.width)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.0 < self.width && cell.1 < self.height
    }

    pub fn validate_endpoints(&self, start: Cell, goal: Cell) -> Result<(), EnvError> {
        for (name, c) in [("start", start), ("goal", goal)] {
            if !self.in_bounds(c) {
                return Err(EnvError::Layout(format!("{name} {c:?} is off the board")));
            }
            if self.walls.contains(&c) {
                return Err(EnvError::Layout(format!("{name} {c:?} is a wall")));
            }
        }
        Ok(())
    }

    /// Deterministic move; walls and edges leave the cell unchanged.
    pub fn apply_move(&self, cell: Cell, mv: Move) -> Cell {
        let (x, y) = cell;
        let next = match mv {
            Move::Up if y > 0 => (x, y - 1),
            Move::Down if y + 1 < self.height => (x, y + 1),
            Move::Left if x > 0 => (x - 1, y),
            Move::Right if x + 1 < self.width => (x + 1, y),
            _ => return cell,
        };
        if self.walls.contains(&next) {
            cell
        } else {
            next
        }
    }

    /// Next-cell distribution under slip: the intended move with probability
    /// `1 - slip`, a uniformly random move with probability `slip`.
    pub fn transition_probs(&self, cell: Cell, mv: Move, slip: f64) -> Vec<(Cell, f64)> {
        let mut out: Vec<(Cell, f64)> = Vec::with_capacity(5);
        let mut add = |c: Cell, p: f64| {
            if p == 0.0 {
                return;
            }
            match out.iter_mut().find(|(d, _)| *d == c) {
                Some(slot) => slot.1 += p,
                None => out.push((c, p)),
            }
        };
        add(self.apply_move(cell, mv), 1.0 - slip);
        for m in Move::ALL {
            add(self.apply_move(cell, m), slip / 4.0);
        }
        out
    }
}

/// Samples the slip-perturbed move from `cell`.
pub fn maze_transition(layout: &GridLayout, cell: Cell, mv: Move, slip: f64, rng: &mut StreamRng) -> Cell {
    let executed = if slip > 0.0 && rng.random::<f64>() < slip { Move::ALL[rng.random_range(0..4)] } else { mv };
    layout.apply_move(cell, executed)
}
