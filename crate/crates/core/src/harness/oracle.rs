//! Explicit discrete MDPs and brute-force solvers used as ground truth.

use thiserror::Error;

use crate::envs::grid::{GridLayout, Move};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("kernel row (state {state}, action {action}) sums to {sum}, expected 1")]
    Kernel { state: usize, action: usize, sum: f64 },
    #[error("kernel row (state {state}, action {action}) has an invalid entry")]
    Entry { state: usize, action: usize },
    #[error("value iteration did not converge in {0} sweeps")]
    NoConvergence(usize),
    #[error("replacement probability must lie in [0, 1], got {0}")]
    Probability(f64),
}

/// Finite MDP with sparse kernel rows and expected rewards per (state, action).
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `kernel[s][a]` lists `(next state, probability)`.
    pub kernel: Vec<Vec<Vec<(usize, f64)>>>,
    pub reward: Vec<Vec<f64>>,
    /// Absorbing zero-value states.
    pub terminal: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub values: Vec<f64>,
    pub policy: Vec<usize>,
    pub sweeps: usize,
}

const MAX_SWEEPS: usize = 1_000_000;

impl ExplicitMdp {
    pub fn check(&self) -> Result<(), OracleError> {
        for s in 0..self.n_states {
            if self.terminal[s] {
                continue;
            }
            for a in 0..self.n_actions {
                let row = &self.kernel[s][a];
                if row.iter().any(|(t, p)| *t >= self.n_states || !p.is_finite() || *p < 0.0) {
                    return Err(OracleError::Entry { state: s, action: a });
                }
                let sum: f64 = row.iter().map(|(_, p)| p).sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(OracleError::Kernel { state: s, action: a, sum });
                }
            }
        }
        Ok(())
    }

    fn q_value(&self, values: &[f64], s: usize, a: usize, gamma: f64) -> f64 {
        self.reward[s][a] + gamma * self.kernel[s][a].iter().map(|(t, p)| p * values[*t]).sum::<f64>()
    }

    /// Greedy action; near-ties (1e-9 relative) go to the lowest index.
    pub fn greedy(&self, values: &[f64], s: usize, gamma: f64) -> usize {
        let qs: Vec<f64> = (0..self.n_actions).map(|a| self.q_value(values, s, a, gamma)).collect();
        let best = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-9 * (1.0 + best.abs());
        qs.iter().position(|q| *q >= best - tol).unwrap_or(0)
    }
}

/// Synchronous value iteration to sup-norm change below `tol`.
pub fn value_iteration(mdp: &ExplicitMdp, gamma: f64, tol: f64) -> Result<ValueTable, OracleError> {
    mdp.check()?;
    let mut values = vec![0.0; mdp.n_states];
    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut delta: f64 = 0.0;
        let next: Vec<f64> = (0..mdp.n_states)
            .map(|s| {
                if mdp.terminal[s] {
                    return 0.0;
                }
                let v = (0..mdp.n_actions).map(|a| mdp.q_value(&values, s, a, gamma)).fold(f64::NEG_INFINITY, f64::max);
                delta = delta.max((v - values[s]).abs());
                v
            })
            .collect();
        values = next;
        if delta < tol {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            return Err(OracleError::NoConvergence(sweeps));
        }
    }
    let policy = (0..mdp.n_states).map(|s| if mdp.terminal[s] { 0 } else { mdp.greedy(&values, s, gamma) }).collect();
    Ok(ValueTable { values, policy, sweeps })
}

/// Kernel seen by an agent whose action is replaced by a uniform one with probability `p`.
pub fn perturbed_kernel(mdp: &ExplicitMdp, p: f64) -> Result<ExplicitMdp, OracleError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(OracleError::Probability(p));
    }
    let na = mdp.n_actions as f64;
    let mut out = mdp.clone();
    for s in 0..mdp.n_states {
        if mdp.terminal[s] {
            continue;
        }
        let mut mixed = vec![0.0; mdp.n_states];
        for a in 0..mdp.n_actions {
            for (t, q) in &mdp.kernel[s][a] {
                mixed[*t] += q / na;
            }
        }
        let mean_reward = mdp.reward[s].iter().sum::<f64>() / na;
        for a in 0..mdp.n_actions {
            let mut dense = vec![0.0; mdp.n_states];
            for (t, q) in &mdp.kernel[s][a] {
                dense[*t] += (1.0 - p) * q;
            }
            for (t, m) in mixed.iter().enumerate() {
                dense[t] += p * m;
            }
            let sum: f64 = dense.iter().sum();
            out.kernel[s][a] =
                dense.into_iter().enumerate().filter(|(_, q)| *q > 0.0).map(|(t, q)| (t, q / sum)).collect();
            out.reward[s][a] = (1.0 - p) * mdp.reward[s][a] + p * mean_reward;
        }
    }
    Ok(out)
}

/// Explicit form of a single-agent maze: one state per cell, the goal and
/// walls absorbing, `step_reward` on every move.
pub fn maze_mdp(layout: &GridLayout, slip: f64, step_reward: f64) -> ExplicitMdp {
    let n = layout.n_cells();
    let mut kernel = vec![vec![Vec::new(); 4]; n];
    let mut reward = vec![vec![0.0; 4]; n];
    let mut terminal = vec![false; n];
    for s in 0..n {
        let cell = layout.cell(s);
        if cell == layout.goal || layout.walls.contains(&cell) {
            terminal[s] = true;
            continue;
        }
        for mv in Move::ALL {
            let mut row: Vec<(usize, f64)> =
                layout.transition_probs(cell, mv, slip).into_iter().map(|(c, p)| (layout.index(c), p)).collect();
            row.sort_by_key(|(t, _)| *t);
            kernel[s][mv.index()] = row;
            reward[s][mv.index()] = step_reward;
        }
    }
    ExplicitMdp { n_states: n, n_actions: 4, kernel, reward, terminal }
}
