//! Phased elimination on top of [`AlphaSampler`].
//!
//! Phase `r` runs `n_r = ceil(2 ln(2KT) / eps_r^2)` complete sampling calls
//! over the active set, averages the `n_r` samples of every active action
//! and keeps the actions within `2 eps_r` of the best empirical mean.
//! `eps_1 = 1/4` and `eps_r` halves each phase. Once one action survives it
//! is played until the horizon.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::alpha_sample::{AlphaSampler, SamplerVariant};
use super::{Learner, LearnerError};
use crate::env::Observation;
use crate::graph::Action;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub phase: usize,
    pub eps: f64,
    pub n: usize,
    log_term: f64,
}

impl PhaseSchedule {
    pub fn first(k: usize, horizon: usize) -> Self {
        let log_term = 2.0 * (2.0 * k as f64 * horizon as f64).ln();
        Self::at(1, 0.25, log_term)
    }

    fn at(phase: usize, eps: f64, log_term: f64) -> Self {
        let n = ((log_term / (eps * eps)).ceil() as usize).max(1);
        PhaseSchedule {
            phase,
            eps,
            n,
            log_term,
        }
    }

    pub fn next(&self) -> Self {
        Self::at(self.phase + 1, self.eps / 2.0, self.log_term)
    }
}

/// Crude cap on the number of phases that fit in the horizon:
/// `1/2 * log2(3T / (32 ln(2KT)) + 1)`.
pub fn max_phases_bound(k: usize, horizon: usize) -> f64 {
    let t = horizon as f64;
    0.5 * (3.0 * t / (32.0 * (2.0 * k as f64 * t).ln()) + 1.0).log2()
}

/// Keeps `v` with `means[v] <= min + 2 eps` (inclusive); `means` is indexed
/// by action. The argmin always survives.
pub fn eliminate(active: &[Action], means: &[f64], eps: f64) -> Result<Vec<Action>, LearnerError> {
    let best = active
        .iter()
        .map(|&v| means[v])
        .fold(f64::INFINITY, f64::min);
    if active.is_empty() {
        return Err(LearnerError::EmptyActiveSet);
    }
    let threshold = best + 2.0 * eps;
    Ok(active
        .iter()
        .copied()
        .filter(|&v| means[v] <= threshold)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: usize,
    pub eps: f64,
    pub n: usize,
    pub rounds_spent: usize,
    /// Active set after elimination, increasing action order.
    pub surviving: Vec<Action>,
}

#[derive(Debug, Clone)]
pub struct EliminationLearner {
    k: usize,
    variant: SamplerVariant,
    active: Vec<Action>,
    schedule: PhaseSchedule,
    sums: Vec<f64>,
    completed_calls: usize,
    sampler: Option<AlphaSampler>,
    committed: Option<Action>,
    rounds_in_phase: usize,
    log: Vec<PhaseRecord>,
    rng: ChaCha8Rng,
}

impl EliminationLearner {
    pub fn new(k: usize, horizon: usize, variant: SamplerVariant, seed: u64) -> Result<Self, LearnerError> {
        if k < 2 {
            return Err(LearnerError::TooFewActions { k, min: 2 });
        }
        if horizon == 0 {
            return Err(LearnerError::ZeroHorizon);
        }
        Ok(EliminationLearner {
            k,
            variant,
            active: (0..k).collect(),
            schedule: PhaseSchedule::first(k, horizon),
            sums: vec![0.0; k],
            completed_calls: 0,
            sampler: None,
            committed: None,
            rounds_in_phase: 0,
            log: Vec::new(),
            rng: rng_from_seed(seed),
        })
    }

    pub fn active(&self) -> &[Action] {
        &self.active
    }

    pub fn schedule(&self) -> PhaseSchedule {
        self.schedule
    }

    pub fn phases(&self) -> &[PhaseRecord] {
        &self.log
    }

    fn finish_call(&mut self, sampler: AlphaSampler) {
        for (a, loss) in sampler.into_batch().samples {
            self.sums[a] += loss;
        }
        self.completed_calls += 1;
        if self.completed_calls < self.schedule.n {
            return;
        }
        let n = self.schedule.n as f64;
        let means: Vec<f64> = self.sums.iter().map(|s| s / n).collect();
        let survivors = eliminate(&self.active, &means, self.schedule.eps)
            .expect("active set is never empty");
        self.log.push(PhaseRecord {
            phase: self.schedule.phase,
            eps: self.schedule.eps,
            n: self.schedule.n,
            rounds_spent: self.rounds_in_phase,
            surviving: survivors.clone(),
        });
        self.active = survivors;
        self.sums.iter_mut().for_each(|s| *s = 0.0);
        self.completed_calls = 0;
        self.rounds_in_phase = 0;
        self.schedule = self.schedule.next();
        if self.active.len() == 1 {
            self.committed = Some(self.active[0]);
        }
    }
}

impl Learner for EliminationLearner {
    fn num_actions(&self) -> usize {
        self.k
    }

    fn choose(&mut self) -> Action {
        if let Some(a) = self.committed {
            return a;
        }
        if self.sampler.is_none() {
            self.sampler = Some(
                AlphaSampler::new(self.k, &self.active, self.variant).expect("active set is valid"),
            );
        }
        let sampler = self.sampler.as_ref().expect("just created");
        sampler.next_action(&mut self.rng)
    }

    fn observe(&mut self, obs: &Observation) {
        if self.committed.is_some() {
            return;
        }
        self.rounds_in_phase += 1;
        let Some(sampler) = self.sampler.as_mut() else {
            return;
        };
        if sampler.absorb(obs) {
            let done = self.sampler.take().expect("present");
            self.finish_call(done);
        }
    }

    fn phase_log(&self) -> Option<&[PhaseRecord]> {
        Some(&self.log)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_halves_and_grows() {
        let s = PhaseSchedule::first(2, 100_000);
        assert_eq!(s.eps, 0.25);
        let expected = (2.0 * (400_000f64).ln() * 16.0).ceil() as usize;
        assert_eq!(s.n, expected);
        let s2 = s.next();
        assert_eq!(s2.eps, 0.125);
        assert!(s2.n > s.n);
        assert_eq!(s2.phase, 2);
    }

    #[test]
    fn eliminate_examples() {
        assert_eq!(eliminate(&[0, 1, 2], &[0.3, 0.3, 0.3], 0.1).unwrap(), vec![0, 1, 2]);
        assert_eq!(eliminate(&[0, 1], &[0.2, 0.9], 0.25).unwrap(), vec![0]);
        assert_eq!(eliminate(&[0, 1], &[0.2, 0.7], 0.25).unwrap(), vec![0, 1]);
        assert_eq!(
            eliminate(&[0, 1, 2], &[0.30, 0.35, 0.60], 0.0625).unwrap(),
            vec![0, 1]
        );
        assert!(matches!(eliminate(&[], &[], 0.1), Err(LearnerError::EmptyActiveSet)));
    }

    #[test]
    fn eliminate_only_looks_at_active_actions() {
        // Action 0 is inactive; its low mean must not set the threshold.
        assert_eq!(eliminate(&[1, 2], &[0.0, 0.5, 0.6], 0.01).unwrap(), vec![1]);
    }

    #[test]
    fn phase_bound_is_positive() {
        let b = max_phases_bound(2, 10_000);
        assert!(b > 3.0 && b < 3.5, "{b}");
    }
}
