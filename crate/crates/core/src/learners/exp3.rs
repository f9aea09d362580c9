use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Learner, LearnerError};
use crate::env::Observation;
use crate::graph::Action;
use crate::seed::rng_from_seed;

/// EXP3 on the played action's own loss only.
///
/// Weights are kept as cumulative importance-weighted loss estimates and
/// normalized in log space, so long horizons do not underflow.
#[derive(Debug, Clone)]
pub struct Exp3 {
    eta: f64,
    est: Vec<f64>,
    probs: Vec<f64>,
    last: Option<Action>,
    rng: ChaCha8Rng,
}

impl Exp3 {
    /// Learning rate `sqrt(ln K / (T K))`.
    pub fn new(k: usize, horizon: usize, seed: u64) -> Result<Self, LearnerError> {
        if horizon == 0 {
            return Err(LearnerError::ZeroHorizon);
        }
        let eta = ((k as f64).ln() / (horizon as f64 * k as f64)).sqrt();
        Self::with_eta(k, eta, seed)
    }

    pub fn with_eta(k: usize, eta: f64, seed: u64) -> Result<Self, LearnerError> {
        if k < 2 {
            return Err(LearnerError::TooFewActions { k, min: 2 });
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(LearnerError::InvalidParam(format!("eta must be positive, got {eta}")));
        }
        Ok(Exp3 {
            eta,
            est: vec![0.0; k],
            probs: vec![1.0 / k as f64; k],
            last: None,
            rng: rng_from_seed(seed),
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    fn refresh(&mut self) {
        let min = self.est.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for (p, &l) in self.probs.iter_mut().zip(&self.est) {
            *p = (-self.eta * (l - min)).exp();
            total += *p;
        }
        self.probs.iter_mut().for_each(|p| *p /= total);
    }
}

impl Learner for Exp3 {
    fn num_actions(&self) -> usize {
        self.est.len()
    }

    fn choose(&mut self) -> Action {
        let x: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut pick = self.probs.len() - 1;
        for (i, p) in self.probs.iter().enumerate() {
            acc += p;
            if x < acc {
                pick = i;
                break;
            }
        }
        self.last = Some(pick);
        pick
    }

    fn observe(&mut self, obs: &Observation) {
        let Some(a) = self.last.take() else { return };
        if let Some(loss) = obs.own_loss() {
            self.est[a] += loss / self.probs[a];
            self.refresh();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{make_stochastic_env, GraphSource, LossModel, StepSession};
    use crate::graph::FeedbackGraph;

    #[test]
    fn starts_uniform() {
        let e = Exp3::new(5, 100, 0).unwrap();
        assert!(e.probabilities().iter().all(|&p| p == 0.2));
        assert!((e.eta() - (5f64.ln() / 500.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn concentrates_on_zero_loss_action() {
        let t = 10_000;
        for seed in 0..20 {
            let losses = LossModel::constant(&[0.0, 1.0]).unwrap();
            let g = GraphSource::Fixed(FeedbackGraph::self_loops_only(2).unwrap());
            let mut env = make_stochastic_env(losses, g, t, seed).unwrap();
            let mut l = Exp3::new(2, t, seed).unwrap();
            for _ in 0..t {
                let a = l.choose();
                let obs = env.step(a).unwrap();
                l.observe(&obs);
            }
            assert!(l.probabilities()[0] >= 0.99, "seed {seed}: {:?}", l.probabilities());
        }
    }

    #[test]
    fn missing_self_loop_means_no_update() {
        let mut l = Exp3::new(2, 10, 0).unwrap();
        let a = l.choose();
        l.observe(&Observation {
            round: 1,
            played: a,
            feedback: vec![(1 - a, 1.0)],
        });
        assert_eq!(l.probabilities(), &[0.5, 0.5]);
    }
}
