use super::{argmin, Learner, LearnerError};
use crate::env::Observation;
use crate::graph::Action;

/// UCB1 for losses: plays every action once in index order, then the
/// minimizer of `mean - sqrt(2 ln t / n)`. Only the played action's own loss
/// is used.
#[derive(Debug, Clone)]
pub struct Ucb1 {
    sums: Vec<f64>,
    counts: Vec<u64>,
    t: u64,
}

impl Ucb1 {
    pub fn new(k: usize) -> Result<Self, LearnerError> {
        if k < 2 {
            return Err(LearnerError::TooFewActions { k, min: 2 });
        }
        Ok(Ucb1 {
            sums: vec![0.0; k],
            counts: vec![0; k],
            t: 0,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

impl Learner for Ucb1 {
    fn num_actions(&self) -> usize {
        self.sums.len()
    }

    fn choose(&mut self) -> Action {
        self.t += 1;
        if let Some(a) = self.counts.iter().position(|&n| n == 0) {
            return a;
        }
        let log_t = (self.t as f64).ln();
        argmin(self.sums.iter().zip(&self.counts).map(|(&s, &n)| {
            let n = n as f64;
            s / n - (2.0 * log_t / n).sqrt()
        }))
        .expect("k >= 2")
    }

    fn observe(&mut self, obs: &Observation) {
        if let Some(loss) = obs.own_loss() {
            self.sums[obs.played] += loss;
            self.counts[obs.played] += 1;
        }
    }
}
