use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::graph::Action;

/// Loss distribution of one action, supported on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossDist {
    Bernoulli(f64),
    Beta(f64, f64),
    Constant(f64),
}

impl LossDist {
    pub fn mean(&self) -> f64 {
        match *self {
            LossDist::Bernoulli(mu) => mu,
            LossDist::Beta(a, b) => a / (a + b),
            LossDist::Constant(c) => c,
        }
    }

    fn validate(&self) -> Result<(), EnvError> {
        let ok = match *self {
            LossDist::Bernoulli(mu) => (0.0..=1.0).contains(&mu),
            LossDist::Beta(a, b) => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            LossDist::Constant(c) => (0.0..=1.0).contains(&c),
        };
        if ok {
            Ok(())
        } else {
            Err(EnvError::Input(format!("invalid loss distribution {self:?}")))
        }
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Bernoulli(f64),
    Beta(Beta<f64>),
    Constant(f64),
}

/// Independent per-action loss distributions.
#[derive(Debug, Clone)]
pub struct LossModel {
    dists: Vec<LossDist>,
    samplers: Vec<Sampler>,
}

impl LossModel {
    pub fn new(dists: Vec<LossDist>) -> Result<Self, EnvError> {
        if dists.is_empty() {
            return Err(EnvError::Input("loss model needs at least one action".into()));
        }
        let samplers = dists
            .iter()
            .map(|d| {
                d.validate()?;
                Ok(match *d {
                    LossDist::Bernoulli(mu) => Sampler::Bernoulli(mu),
                    LossDist::Beta(a, b) => Sampler::Beta(
                        Beta::new(a, b).map_err(|e| EnvError::Input(e.to_string()))?,
                    ),
                    LossDist::Constant(c) => Sampler::Constant(c),
                })
            })
            .collect::<Result<_, EnvError>>()?;
        Ok(LossModel { dists, samplers })
    }

    pub fn bernoulli(means: &[f64]) -> Result<Self, EnvError> {
        Self::new(means.iter().map(|&m| LossDist::Bernoulli(m)).collect())
    }

    pub fn constant(values: &[f64]) -> Result<Self, EnvError> {
        Self::new(values.iter().map(|&c| LossDist::Constant(c)).collect())
    }

    pub fn num_actions(&self) -> usize {
        self.dists.len()
    }

    pub fn dists(&self) -> &[LossDist] {
        &self.dists
    }

    pub fn means(&self) -> Vec<f64> {
        self.dists.iter().map(LossDist::mean).collect()
    }

    /// Lowest-index action of minimal mean.
    pub fn best_action(&self) -> Action {
        let means = self.means();
        let mut best = 0;
        for (v, &m) in means.iter().enumerate() {
            if m < means[best] {
                best = v;
            }
        }
        best
    }

    pub fn has_unique_optimum(&self) -> bool {
        let means = self.means();
        let star = means[self.best_action()];
        means.iter().filter(|&&m| m == star).count() == 1
    }

    /// `mean(v) - min mean`, so the best action has gap 0.
    pub fn gaps(&self) -> Vec<f64> {
        let means = self.means();
        let star = means[self.best_action()];
        means.iter().map(|m| m - star).collect()
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (slot, s) in out.iter_mut().zip(&self.samplers) {
            *slot = match s {
                Sampler::Bernoulli(mu) => {
                    if rng.random_bool(*mu) {
                        1.0
                    } else {
                        0.0
                    }
                }
                Sampler::Beta(b) => b.sample(rng),
                Sampler::Constant(c) => *c,
            };
        }
    }
}

/// Config-level description of the loss model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossSpec {
    /// One distribution per action, in action order.
    PerAction(Vec<LossDist>),
    /// Bernoulli means, in action order.
    Bernoulli(Vec<f64>),
    /// Bernoulli losses: `best_action` (1-based) has mean `best_mean`, every
    /// other action has mean `best_mean + gap`.
    OneBest {
        best_mean: f64,
        gap: f64,
        #[serde(default = "default_best_action")]
        best_action: usize,
    },
}

fn default_best_action() -> usize {
    1
}

impl LossSpec {
    pub fn build(&self, k: usize) -> Result<LossModel, EnvError> {
        match self {
            LossSpec::PerAction(d) => {
                if d.len() != k {
                    return Err(EnvError::DimensionMismatch {
                        what: "losses",
                        expected: k,
                        found: d.len(),
                    });
                }
                LossModel::new(d.clone())
            }
            LossSpec::Bernoulli(means) => {
                if means.len() != k {
                    return Err(EnvError::DimensionMismatch {
                        what: "losses",
                        expected: k,
                        found: means.len(),
                    });
                }
                LossModel::bernoulli(means)
            }
            LossSpec::OneBest {
                best_mean,
                gap,
                best_action,
            } => {
                if *best_action == 0 || *best_action > k {
                    return Err(EnvError::Input(format!(
                        "best_action {best_action} outside 1..={k}"
                    )));
                }
                let means: Vec<f64> = (0..k)
                    .map(|v| {
                        if v + 1 == *best_action {
                            *best_mean
                        } else {
                            best_mean + gap
                        }
                    })
                    .collect();
                LossModel::bernoulli(&means)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaps_and_best() {
        let m = LossModel::constant(&[0.25, 0.75]).unwrap();
        assert_eq!(m.best_action(), 0);
        assert_eq!(m.gaps(), vec![0.0, 0.5]);
        let m = LossModel::bernoulli(&[0.5, 0.1, 0.1]).unwrap();
        assert_eq!(m.best_action(), 1);
        assert!(!m.has_unique_optimum());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LossModel::bernoulli(&[1.2]).is_err());
        assert!(LossModel::new(vec![LossDist::Beta(0.0, 1.0)]).is_err());
        assert!(LossModel::new(vec![]).is_err());
    }

    #[test]
    fn beta_samples_stay_in_unit_interval() {
        let m = LossModel::new(vec![LossDist::Beta(2.0, 5.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut out = [0.0];
        let mut sum = 0.0;
        for _ in 0..20_000 {
            m.sample_into(&mut rng, &mut out);
            assert!((0.0..=1.0).contains(&out[0]));
            sum += out[0];
        }
        assert!((sum / 20_000.0 - 2.0 / 7.0).abs() < 0.01);
    }

    #[test]
    fn one_best_spec() {
        let spec: LossSpec =
            serde_json::from_str(r#"{"one_best":{"best_mean":0.3,"gap":0.2,"best_action":2}}"#)
                .unwrap();
        let m = spec.build(3).unwrap();
        assert_eq!(m.best_action(), 1);
        assert!((m.gaps()[0] - 0.2).abs() < 1e-12);
        let spec: LossSpec =
            serde_json::from_str(r#"{"per_action":[{"bernoulli":0.1},{"constant":0.5}]}"#).unwrap();
        assert!(matches!(
            spec.build(3),
            Err(EnvError::DimensionMismatch { .. })
        ));
    }
}
