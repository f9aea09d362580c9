//! Explore-then-commit for observable (possibly weakly observable) graphs.
//!
//! Uniform play until every action has `n0` observed samples, or until a
//! hard cap, then the empirical best for the rest of the horizon.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{argmin, Learner, LearnerError};
use crate::env::Observation;
use crate::graph::Action;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExploreExploitParams {
    pub k: usize,
    pub horizon: usize,
    pub eps: f64,
    /// Samples wanted per action.
    pub n0: u64,
    /// Longest exploration allowed, in rounds.
    pub cap: u64,
}

impl ExploreExploitParams {
    /// `eps = (K/T)^(1/3) (2 ln 2KT)^(1/3)`, `n0 = ceil(2 ln(2KT) / eps^2)`,
    /// `cap = ceil(8 K n0 ln(KT))`.
    pub fn for_horizon(k: usize, horizon: usize) -> Result<Self, LearnerError> {
        if k < 2 {
            return Err(LearnerError::TooFewActions { k, min: 2 });
        }
        if horizon == 0 {
            return Err(LearnerError::ZeroHorizon);
        }
        let kt = k as f64 * horizon as f64;
        let eps = (k as f64 / horizon as f64).cbrt() * (2.0 * (2.0 * kt).ln()).cbrt();
        Self::build(k, horizon, eps)
    }

    pub fn with_eps(self, eps: f64) -> Result<Self, LearnerError> {
        Self::build(self.k, self.horizon, eps)
    }

    fn build(k: usize, horizon: usize, eps: f64) -> Result<Self, LearnerError> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(LearnerError::InvalidParam(format!("eps must be positive, got {eps}")));
        }
        let kt = k as f64 * horizon as f64;
        let n0 = ((2.0 * (2.0 * kt).ln() / (eps * eps)).ceil() as u64).max(1);
        let cap = (8.0 * k as f64 * n0 as f64 * kt.ln().max(1.0)).ceil() as u64;
        Ok(ExploreExploitParams {
            k,
            horizon,
            eps,
            n0,
            cap,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExploreExploit {
    params: ExploreExploitParams,
    sums: Vec<f64>,
    counts: Vec<u64>,
    rounds: u64,
    committed: Option<Action>,
    rng: ChaCha8Rng,
}

impl ExploreExploit {
    pub fn new(params: ExploreExploitParams, seed: u64) -> Self {
        ExploreExploit {
            sums: vec![0.0; params.k],
            counts: vec![0; params.k],
            params,
            rounds: 0,
            committed: None,
            rng: rng_from_seed(seed),
        }
    }

    pub fn params(&self) -> ExploreExploitParams {
        self.params
    }

    /// Exploration length, once exploration is over.
    pub fn exploration_rounds(&self) -> Option<u64> {
        self.committed.map(|_| self.rounds)
    }

    pub fn committed(&self) -> Option<Action> {
        self.committed
    }

    fn maybe_commit(&mut self) {
        let n0 = self.params.n0;
        if self.rounds < self.params.cap && self.counts.iter().any(|&c| c < n0) {
            return;
        }
        let means = self.sums.iter().zip(&self.counts).map(|(&s, &c)| {
            if c == 0 {
                f64::INFINITY
            } else {
                s / c as f64
            }
        });
        self.committed = Some(argmin(means).expect("k >= 2"));
    }
}

impl Learner for ExploreExploit {
    fn num_actions(&self) -> usize {
        self.params.k
    }

    fn choose(&mut self) -> Action {
        match self.committed {
            Some(a) => a,
            None => self.rng.random_range(0..self.params.k),
        }
    }

    fn observe(&mut self, obs: &Observation) {
        if self.committed.is_some() {
            return;
        }
        self.rounds += 1;
        for &(w, loss) in &obs.feedback {
            self.sums[w] += loss;
            self.counts[w] += 1;
        }
        self.maybe_commit();
    }
}
