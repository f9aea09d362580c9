//! Uniform-play sampling of one loss per requested action.
//!
//! Each round plays an action drawn uniformly from the still-unobserved part
//! of the request and removes everything the play revealed. Under self-loops
//! every round removes at least the played action, so a request of size `n`
//! finishes within `n` rounds; on graphs with small independence number it
//! typically needs far fewer.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{EnvError, Observation, StepSession};
use crate::graph::Action;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerVariant {
    /// Plain loop; assumes every graph has all self-loops.
    Base,
    /// Stops the plain loop at one remaining action `v`, then plays
    /// uniformly over `{v, w}` (w = lowest-index other action) until `v` is
    /// seen. Only needs strongly observable graphs.
    StronglyObservable,
}

/// One loss per requested action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    /// Sorted by action.
    pub samples: Vec<(Action, f64)>,
    pub rounds_spent: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlphaSampleError {
    #[error("requested set is empty")]
    EmptyRequest,
    #[error("action {action} outside 0..{k}")]
    InvalidAction { action: Action, k: usize },
    #[error("environment stopped after {rounds_spent} rounds with {} samples collected: {source}", samples.len())]
    Partial {
        samples: Vec<(Action, f64)>,
        rounds_spent: usize,
        source: EnvError,
    },
}

const ABSENT: usize = usize::MAX;

/// Incremental form of the sampling loop, driven one round at a time.
#[derive(Debug, Clone)]
pub struct AlphaSampler {
    variant: SamplerVariant,
    k: usize,
    remaining: Vec<Action>,
    slot: Vec<usize>,
    samples: Vec<Option<f64>>,
    requested: Vec<Action>,
    rounds: usize,
}

impl AlphaSampler {
    pub fn new(k: usize, request: &[Action], variant: SamplerVariant) -> Result<Self, AlphaSampleError> {
        if request.is_empty() {
            return Err(AlphaSampleError::EmptyRequest);
        }
        let mut slot = vec![ABSENT; k];
        let mut remaining = Vec::with_capacity(request.len());
        for &a in request {
            if a >= k {
                return Err(AlphaSampleError::InvalidAction { action: a, k });
            }
            if slot[a] == ABSENT {
                slot[a] = remaining.len();
                remaining.push(a);
            }
        }
        let mut requested = remaining.clone();
        requested.sort_unstable();
        Ok(AlphaSampler {
            variant,
            k,
            remaining,
            slot,
            samples: vec![None; k],
            requested,
            rounds: 0,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.remaining.is_empty()
    }

    pub fn rounds_spent(&self) -> usize {
        self.rounds
    }

    pub fn unobserved(&self) -> &[Action] {
        &self.remaining
    }

    pub fn next_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        assert!(!self.is_complete(), "sampler already complete");
        match (self.variant, self.remaining.len()) {
            (SamplerVariant::StronglyObservable, 1) if self.k >= 2 => {
                let v = self.remaining[0];
                let partner = if v == 0 { 1 } else { 0 };
                if rng.random_bool(0.5) {
                    v
                } else {
                    partner
                }
            }
            _ => self.remaining[rng.random_range(0..self.remaining.len())],
        }
    }

    /// Records first-seen losses of still-unobserved actions. Returns true
    /// once every requested action has a sample.
    pub fn absorb(&mut self, obs: &Observation) -> bool {
        self.rounds += 1;
        for &(w, loss) in &obs.feedback {
            if w < self.k && self.slot[w] != ABSENT {
                self.samples[w] = Some(loss);
                self.remove(w);
            }
        }
        self.is_complete()
    }

    fn remove(&mut self, a: Action) {
        let i = self.slot[a];
        self.slot[a] = ABSENT;
        self.remaining.swap_remove(i);
        if let Some(&moved) = self.remaining.get(i) {
            self.slot[moved] = i;
        }
    }

    fn collected(&self) -> Vec<(Action, f64)> {
        self.requested
            .iter()
            .filter_map(|&a| self.samples[a].map(|l| (a, l)))
            .collect()
    }

    pub fn into_batch(self) -> SampleBatch {
        assert!(self.is_complete(), "sampler not complete");
        SampleBatch {
            samples: self.collected(),
            rounds_spent: self.rounds,
        }
    }
}

/// Runs the sampling loop against `session` until every action of
/// `request` has been observed once.
pub fn alpha_sample<S, R>(
    request: &[Action],
    session: &mut S,
    rng: &mut R,
    variant: SamplerVariant,
) -> Result<SampleBatch, AlphaSampleError>
where
    S: StepSession + ?Sized,
    R: Rng + ?Sized,
{
    let mut sampler = AlphaSampler::new(session.num_actions(), request, variant)?;
    while !sampler.is_complete() {
        let a = sampler.next_action(rng);
        match session.step(a) {
            Ok(obs) => {
                sampler.absorb(&obs);
            }
            Err(source) => {
                return Err(AlphaSampleError::Partial {
                    samples: sampler.collected(),
                    rounds_spent: sampler.rounds,
                    source,
                })
            }
        }
    }
    Ok(sampler.into_batch())
}
