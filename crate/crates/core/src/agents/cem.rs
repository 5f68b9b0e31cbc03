use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::agents::Agent;
use crate::disruptors::{Observation, Phase};
use crate::envs::pendulum::MAX_TORQUE;
use crate::mdp::Value;
use crate::rng::StreamRng;

/// Linear feedback `u = clip(k1·θ + k2·θ̇, ±2)` tuned by the cross-entropy method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CemPolicy {
    pub mean: [f64; 2],
    pub std: [f64; 2],
    pub population: usize,
    pub elite_frac: f64,
    pub std_floor: f64,
    /// Gains used in the training phase (the candidate under evaluation).
    pub active: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CemStats {
    pub best_score: f64,
    pub mean_score: f64,
    pub elite_score: f64,
}

impl CemPolicy {
    pub fn new(mean: [f64; 2], std: [f64; 2], population: usize, elite_frac: f64) -> Self {
        assert!(population >= 1 && elite_frac > 0.0 && elite_frac <= 1.0);
        Self { mean, std, population, elite_frac, std_floor: 1e-3, active: mean }
    }

    pub fn torque(gains: [f64; 2], state: &[f64]) -> f64 {
        let u = gains[0] * state[0] + gains[1] * state[1];
        if u.is_nan() {
            return 0.0;
        }
        u.clamp(-MAX_TORQUE, MAX_TORQUE)
    }

    pub fn n_elite(&self) -> usize {
        ((self.elite_frac * self.population as f64).ceil() as usize).clamp(1, self.population)
    }

    pub fn sample_population(&self, rng: &mut StreamRng) -> Vec<[f64; 2]> {
        (0..self.population)
            .map(|_| {
                let z0: f64 = StandardNormal.sample(rng);
                let z1: f64 = StandardNormal.sample(rng);
                [self.mean[0] + self.std[0] * z0, self.mean[1] + self.std[1] * z1]
            })
            .collect()
    }

    /// Refits mean and std to the best-scoring candidates (higher is better).
    /// Without any ranking signal the mean is kept and the std halves.
    pub fn refit(&mut self, candidates: &[[f64; 2]], scores: &[f64]) {
        assert_eq!(candidates.len(), scores.len());
        if candidates.len() > 1 && scores.iter().all(|s| *s == scores[0]) {
            for d in 0..2 {
                self.std[d] = (self.std[d] * 0.5).max(self.std_floor);
            }
            self.active = self.mean;
            return;
        }
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|a, b| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b)));
        let n = self.n_elite().min(candidates.len());
        let elite: Vec<[f64; 2]> = order[..n].iter().map(|i| candidates[*i]).collect();
        for d in 0..2 {
            let m = elite.iter().map(|c| c[d]).sum::<f64>() / n as f64;
            let var = elite.iter().map(|c| (c[d] - m).powi(2)).sum::<f64>() / n as f64;
            self.mean[d] = m;
            self.std[d] = var.sqrt().max(self.std_floor);
        }
        self.active = self.mean;
    }
}

/// One CEM generation. `evaluate` returns the true return of a candidate
/// (averaged over its episodes); each call should use fresh episode seeds.
pub fn cem_iteration<E>(
    policy: &mut CemPolicy,
    rng: &mut StreamRng,
    mut evaluate: impl FnMut(&mut CemPolicy) -> Result<f64, E>,
) -> Result<CemStats, E> {
    let candidates = policy.sample_population(rng);
    let mut scores = Vec::with_capacity(candidates.len());
    for c in &candidates {
        policy.active = *c;
        scores.push(evaluate(policy)?);
    }
    let mut sorted = scores.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let n = policy.n_elite();
    let stats = CemStats {
        best_score: sorted[0],
        mean_score: scores.iter().sum::<f64>() / scores.len() as f64,
        elite_score: sorted[..n].iter().sum::<f64>() / n as f64,
    };
    policy.refit(&candidates, &scores);
    Ok(stats)
}

impl Agent for CemPolicy {
    fn name(&self) -> &'static str {
        "cem"
    }

    fn act(&mut self, obs: &Observation, phase: Phase, _rng: &mut StreamRng) -> Value {
        let gains = if phase == Phase::Train { self.active } else { self.mean };
        let state = obs.state.as_vector().expect("CEM observes a real vector");
        Value::Vector(vec![Self::torque(gains, state)])
    }
}
