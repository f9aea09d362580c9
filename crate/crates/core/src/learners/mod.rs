//! Decision policies. Every learner sees the environment only through the
//! [`Observation`] returned after each of its own choices.

mod alpha_sample;
mod elimination;
mod exp3;
mod explore_exploit;
mod ucb;

pub use alpha_sample::{alpha_sample, AlphaSampleError, AlphaSampler, SampleBatch, SamplerVariant};
pub use elimination::{eliminate, max_phases_bound, EliminationLearner, PhaseRecord, PhaseSchedule};
pub use exp3::Exp3;
pub use explore_exploit::{ExploreExploit, ExploreExploitParams};
pub use ucb::Ucb1;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::Observation;
use crate::graph::Action;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("learner needs at least {min} actions, got {k}")]
    TooFewActions { k: usize, min: usize },
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("active set is empty")]
    EmptyActiveSet,
    #[error("invalid learner parameter: {0}")]
    InvalidParam(String),
}

pub trait Learner {
    fn num_actions(&self) -> usize;

    /// Action for the next round.
    fn choose(&mut self) -> Action;

    /// Feedback for the action returned by the preceding `choose`.
    fn observe(&mut self, obs: &Observation);

    /// Completed phases, for phased learners.
    fn phase_log(&self) -> Option<&[PhaseRecord]> {
        None
    }
}

/// Index of the smallest value, lowest index on ties.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Learner section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LearnerConfig {
    Elimination {},
    EliminationStrong {},
    ExploreExploit {
        /// Overrides the default exploration accuracy.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps: Option<f64>,
    },
    Exp3 {
        /// Overrides the default learning rate `sqrt(ln K / (T K))`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
    },
    Ucb {},
}

impl LearnerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerConfig::Elimination {} => "elimination",
            LearnerConfig::EliminationStrong {} => "elimination_strong",
            LearnerConfig::ExploreExploit { .. } => "explore_exploit",
            LearnerConfig::Exp3 { .. } => "exp3",
            LearnerConfig::Ucb {} => "ucb",
        }
    }

    pub fn build(&self, k: usize, horizon: usize, seed: u64) -> Result<Box<dyn Learner + Send>, LearnerError> {
        Ok(match self {
            LearnerConfig::Elimination {} => {
                Box::new(EliminationLearner::new(k, horizon, SamplerVariant::Base, seed)?)
            }
            LearnerConfig::EliminationStrong {} => Box::new(EliminationLearner::new(
                k,
                horizon,
                SamplerVariant::StronglyObservable,
                seed,
            )?),
            LearnerConfig::ExploreExploit { eps } => {
                let mut params = ExploreExploitParams::for_horizon(k, horizon)?;
                if let Some(eps) = eps {
                    params = params.with_eps(*eps)?;
                }
                Box::new(ExploreExploit::new(params, seed))
            }
            LearnerConfig::Exp3 { eta } => Box::new(match eta {
                Some(eta) => Exp3::with_eta(k, *eta, seed)?,
                None => Exp3::new(k, horizon, seed)?,
            }),
            LearnerConfig::Ucb {} => Box::new(Ucb1::new(k)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_breaks_ties_low() {
        assert_eq!(argmin([0.3, 0.1, 0.1]), Some(1));
        assert_eq!(argmin(std::iter::empty()), None);
    }

    #[test]
    fn config_parses() {
        let c: LearnerConfig = serde_json::from_str(r#"{"type":"elimination_strong"}"#).unwrap();
        assert_eq!(c, LearnerConfig::EliminationStrong {});
        let c: LearnerConfig = serde_json::from_str(r#"{"type":"exp3","eta":0.1}"#).unwrap();
        assert_eq!(c, LearnerConfig::Exp3 { eta: Some(0.1) });
        let c: LearnerConfig = serde_json::from_str(r#"{"type":"exp3"}"#).unwrap();
        assert_eq!(c, LearnerConfig::Exp3 { eta: None });
        assert!(serde_json::from_str::<LearnerConfig>(r#"{"type":"ucb","x":1}"#).is_err());
        assert!(serde_json::from_str::<LearnerConfig>(r#"{"type":"thompson"}"#).is_err());
        for c in [
            LearnerConfig::Elimination {},
            LearnerConfig::ExploreExploit { eps: None },
            LearnerConfig::Ucb {},
        ] {
            let s = serde_json::to_string(&c).unwrap();
            assert_eq!(serde_json::from_str::<LearnerConfig>(&s).unwrap(), c);
        }
    }

    #[test]
    fn build_rejects_bad_inputs() {
        assert!(LearnerConfig::Elimination {}.build(1, 10, 0).is_err());
        assert!(LearnerConfig::Elimination {}.build(2, 0, 0).is_err());
        assert!(LearnerConfig::Exp3 { eta: Some(-1.0) }.build(2, 10, 0).is_err());
        assert!(LearnerConfig::Ucb {}.build(3, 10, 0).is_ok());
    }
}
