use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::mdp::{Space, Value};
use crate::rng::StreamRng;

/// Random perturbation family, applied element-wise to vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    Gaussian {
        #[serde(default)]
        mean: f64,
        std: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    /// Replaces the value by a uniform element of the space with probability `p`.
    DiscreteReplace { p: f64 },
}

impl NoiseModel {
    pub fn gaussian(mean: f64, std: f64) -> Self {
        NoiseModel::Gaussian { mean, std }
    }

    pub fn uniform(low: f64, high: f64) -> Self {
        NoiseModel::Uniform { low, high }
    }

    pub fn discrete_replace(p: f64) -> Self {
        NoiseModel::DiscreteReplace { p }
    }

    pub fn family(&self) -> &'static str {
        match self {
            NoiseModel::Gaussian { .. } => "gaussian",
            NoiseModel::Uniform { .. } => "uniform",
            NoiseModel::DiscreteReplace { .. } => "discrete_replace",
        }
    }

    /// Checks parameter ranges; `key` prefixes the reported location.
    pub fn validate(&self, key: &str) -> Result<(), ConfigError> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::new(format!("{key}.{name}"), "must be finite"))
            }
        };
        match *self {
            NoiseModel::Gaussian { mean, std } => {
                finite("mean", mean)?;
                finite("std", std)?;
                if std < 0.0 {
                    return Err(ConfigError::new(format!("{key}.std"), format!("must be >= 0, got {std}")));
                }
            }
            NoiseModel::Uniform { low, high } => {
                finite("low", low)?;
                finite("high", high)?;
                if low > high {
                    return Err(ConfigError::new(format!("{key}.low"), format!("{low} exceeds high {high}")));
                }
            }
            NoiseModel::DiscreteReplace { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(ConfigError::new(format!("{key}.p"), format!("must lie in [0, 1], got {p}")));
                }
            }
        }
        Ok(())
    }

    /// Rejects family/space combinations that cannot be applied.
    pub fn check_space(&self, space: Option<&Space>, key: &str) -> Result<(), ConfigError> {
        let ok = match (self, space) {
            (NoiseModel::DiscreteReplace { .. }, None) => false,
            (NoiseModel::DiscreteReplace { .. }, Some(s)) => !s.is_continuous(),
            (_, None) => true,
            (_, Some(s)) => s.is_continuous(),
        };
        if ok {
            Ok(())
        } else {
            let target = space.map_or("a scalar signal".to_string(), |s| s.to_string());
            Err(ConfigError::new(key, format!("noise family `{}` cannot act on {target}", self.family())))
        }
    }

    /// Additive delta for the continuous families.
    pub fn sample_delta(&self, rng: &mut StreamRng) -> f64 {
        match *self {
            NoiseModel::Gaussian { mean, std } => Normal::new(mean, std).expect("validated std").sample(rng),
            NoiseModel::Uniform { low, high } => {
                if low < high {
                    rng.random_range(low..=high)
                } else {
                    low
                }
            }
            NoiseModel::DiscreteReplace { .. } => 0.0,
        }
    }

    /// Perturbs a reward or cost. Never clipped.
    pub fn perturb_scalar(&self, x: f64, rng: &mut StreamRng) -> f64 {
        x + self.sample_delta(rng)
    }

    /// Perturbs a state or action value. Continuous results are not clipped;
    /// components outside `mask` keep their original value.
    pub fn perturb(&self, value: &Value, space: &Space, mask: Option<&BTreeSet<usize>>, rng: &mut StreamRng) -> Value {
        let keep = |i: usize| mask.is_some_and(|m| !m.contains(&i));
        match (self, value, space) {
            (NoiseModel::DiscreteReplace { p }, Value::Index(i), Space::Discrete(n)) => {
                if rng.random::<f64>() < *p {
                    Value::Index(rng.random_range(0..*n))
                } else {
                    Value::Index(*i)
                }
            }
            (NoiseModel::DiscreteReplace { p }, Value::Indices(is), Space::MultiDiscrete(ns)) => Value::Indices(
                is.iter()
                    .zip(ns)
                    .enumerate()
                    .map(|(k, (i, n))| {
                        let replace = rng.random::<f64>() < *p;
                        let fresh = rng.random_range(0..*n);
                        if replace && !keep(k) {
                            fresh
                        } else {
                            *i
                        }
                    })
                    .collect(),
            ),
            (_, Value::Vector(v), _) => Value::Vector(
                v.iter()
                    .enumerate()
                    .map(|(k, x)| {
                        let d = self.sample_delta(rng);
                        if keep(k) {
                            *x
                        } else {
                            x + d
                        }
                    })
                    .collect(),
            ),
            // Rejected by `check_space` at pipeline construction.
            _ => value.clone(),
        }
    }
}

/// Free-function form of [`NoiseModel::perturb`].
pub fn apply_noise(value: &Value, model: &NoiseModel, space: &Space, rng: &mut StreamRng) -> Value {
    model.perturb(value, space, None, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn zero_sigma_is_identity() {
        let mut rng = stream(0);
        let space = Space::boxed(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let v = Value::Vector(vec![0.3, -0.7]);
        assert_eq!(apply_noise(&v, &NoiseModel::gaussian(0.0, 0.0), &space, &mut rng), v);
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = stream(1);
        let m = NoiseModel::gaussian(0.0, 0.1);
        let xs: Vec<f64> = (0..100_000).map(|_| m.sample_delta(&mut rng)).collect();
        let (mean, std) = moments(&xs);
        assert!(mean.abs() < 0.005 && (std - 0.1).abs() < 0.005, "{mean} {std}");
    }

    #[test]
    fn uniform_deltas_in_bounds() {
        let mut rng = stream(2);
        let m = NoiseModel::uniform(0.2, 0.8);
        assert!((0..10_000).map(|_| m.sample_delta(&mut rng)).all(|d| (0.2..=0.8).contains(&d)));
    }

    #[test]
    fn observation_noise_is_not_clipped() {
        let mut rng = stream(3);
        let space = Space::boxed(vec![0.0], vec![1.0]).unwrap();
        let out = apply_noise(&Value::Vector(vec![1.0]), &NoiseModel::uniform(0.5, 0.5), &space, &mut rng);
        assert_eq!(out, Value::Vector(vec![1.5]));
    }

    #[test]
    fn validation_names_key() {
        let e = NoiseModel::gaussian(0.0, -0.1).validate("disruptor[0].noise").unwrap_err();
        assert_eq!(e.key, "disruptor[0].noise.std");
        assert!(NoiseModel::uniform(1.0, 0.0).validate("n").is_err());
        assert!(NoiseModel::discrete_replace(1.5).validate("n").is_err());
        assert!(NoiseModel::discrete_replace(1.0).validate("n").is_ok());
    }

    #[test]
    fn family_space_mismatch() {
        let disc = Space::Discrete(4);
        let cont = Space::boxed(vec![-2.0], vec![2.0]).unwrap();
        assert!(NoiseModel::gaussian(0.0, 0.15).check_space(Some(&disc), "k").is_err());
        assert!(NoiseModel::discrete_replace(0.5).check_space(Some(&cont), "k").is_err());
        assert!(NoiseModel::discrete_replace(0.5).check_space(None, "k").is_err());
        assert!(NoiseModel::gaussian(0.0, 0.1).check_space(None, "k").is_ok());
        assert!(NoiseModel::discrete_replace(0.5).check_space(Some(&disc), "k").is_ok());
    }

    #[test]
    fn discrete_replace_full_is_uniform() {
        let mut rng = stream(4);
        let m = NoiseModel::discrete_replace(1.0);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[apply_noise(&Value::Index(2), &m, &Space::Discrete(4), &mut rng).as_index().unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn mask_protects_unlisted_agents() {
        let mut rng = stream(5);
        let m = NoiseModel::discrete_replace(1.0);
        let space = Space::MultiDiscrete(vec![25, 25]);
        let mask = BTreeSet::from([0]);
        for _ in 0..200 {
            let out = m.perturb(&Value::Indices(vec![3, 7]), &space, Some(&mask), &mut rng);
            let Value::Indices(is) = out else { panic!() };
            assert_eq!(is[1], 7);
        }
    }
}
